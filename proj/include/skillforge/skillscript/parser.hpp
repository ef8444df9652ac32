#pragma once

#include <string>
#include <variant>
#include <vector>

#include "skillforge/skillscript/ast.hpp"

namespace skillforge::skillscript {

struct ParseError {
  SourcePos pos;
  std::string message;
  std::vector<std::string> expected;

  std::string to_string() const;
};

using ParseResult = std::variant<SkillDocument, ParseError>;

ParseResult parse(const std::string& text);

// Canonical text form: constructs sorted by kind then name, fixed layout.
// parse(serialize(doc)) is structurally equal to doc.
std::string serialize(const SkillDocument& doc);

// Equality up to source positions and declaration order.
bool structurally_equal(const SkillDocument& a, const SkillDocument& b);

}  // namespace skillforge::skillscript
