#pragma once

#include <set>
#include <string>

namespace skillforge::sim {

// Counter names the kitchen environment exposes to skill libraries. This is
// the vocabulary skill documents are validated against.
const std::set<std::string>& standard_counter_vocabulary();

}  // namespace skillforge::sim
