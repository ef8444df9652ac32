#include "skillforge/sim/schema.hpp"

namespace skillforge::sim {

const std::set<std::string>& standard_counter_vocabulary() {
  static const std::set<std::string> names = {
      "bread_count",
      "raw_beef_count",
      "raw_lettuce_count",
      "beef_cooked_count",
      "lettuce_chopped_count",
      "beef_burger_count",
      "lettuce_burger_count",
      "beef_lettuce_burger_count",
  };
  return names;
}

}  // namespace skillforge::sim
