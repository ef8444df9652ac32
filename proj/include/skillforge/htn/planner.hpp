#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "skillforge/skillscript/ast.hpp"

namespace skillforge::htn {

using skillscript::SkillDocument;
using skillscript::Value;

// Counter-only projection of the world; spatial detail is the mid-level
// controller's problem.
struct AbstractState {
  std::map<std::string, std::int64_t> counters;
  std::int64_t snapshot_tick = 0;

  std::int64_t get(const std::string& name, std::int64_t fallback = 0) const {
    auto it = counters.find(name);
    return it == counters.end() ? fallback : it->second;
  }

  bool operator==(const AbstractState& other) const {
    return counters == other.counters;
  }
};

struct Task {
  std::string name;
  std::vector<Value> args;
};

struct OperatorInstance {
  std::string op;
  std::vector<Value> args;

  bool operator==(const OperatorInstance& other) const {
    return op == other.op && args == other.args;
  }
};

struct Plan {
  std::vector<OperatorInstance> ops;
  AbstractState predicted_state;
};

enum class FailureReason {
  GuardFailed,
  NoMethod,
  EffectUnderflow,
  DepthCapExceeded,
  EvalError,
};

struct PlanFailure {
  std::string construct;
  std::vector<Value> args;
  AbstractState state_at_failure;
  FailureReason reason = FailureReason::GuardFailed;
  std::string message;
};

const char* to_string(FailureReason reason);
std::string value_to_string(const Value& v);

using ApplyResult = std::variant<AbstractState, PlanFailure>;
using DecomposeResult = std::variant<std::vector<OperatorInstance>, PlanFailure>;
using PlanResult = std::variant<Plan, PlanFailure>;

// Applies one grounded operator to a copy of the state. The input state is
// never modified.
ApplyResult apply_operator(const SkillDocument& doc, const AbstractState& state,
                           const OperatorInstance& instance);

// Expands a task through its registered method into a flat subtask list.
DecomposeResult decompose(const SkillDocument& doc, const AbstractState& state,
                          const Task& task);

// Depth-first left-to-right expansion of a task list into a flat operator
// sequence plus the predicted final state. depth_cap only matters for
// documents that evaded validation; well-formed libraries are depth 1.
PlanResult plan(const SkillDocument& doc, const AbstractState& state,
                const std::vector<Task>& tasks, int depth_cap = 8);

}  // namespace skillforge::htn
