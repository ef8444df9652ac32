#pragma once

#include <set>
#include <string>
#include <vector>

#include "skillforge/skillscript/ast.hpp"

namespace skillforge::skillscript {

enum class Severity { Warning, Error };

struct ValidationItem {
  Severity severity = Severity::Warning;
  std::string code;
  SourcePos location;
  std::string message;
  std::string context;
};

struct ValidationReport {
  enum class Status { Ok, Warnings, Errors };
  Status status = Status::Ok;
  std::vector<ValidationItem> items;

  bool ok() const { return status == Status::Ok; }
  bool has_errors() const { return status == Status::Errors; }
  std::vector<ValidationItem> with_code(const std::string& code) const;
};

// The three task names every fully optimized library is expected to cover.
const std::vector<std::string>& standard_task_names();

ValidationReport validate(const SkillDocument& doc,
                          const std::set<std::string>& counter_vocabulary);

std::string report_to_text(const ValidationReport& report);
std::string report_to_json(const ValidationReport& report);

}  // namespace skillforge::skillscript
