#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace skillforge::skillscript {

struct SourcePos {
  int line = 0;
  int col = 0;
};

// Runtime value of an expression: counters are integers, parameters are
// usually item-name strings, guards are booleans.
using Value = std::variant<std::int64_t, std::string, bool>;

enum class BinOp { Add, Sub, Gt, Ge, Eq, Lt, And, Or };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  struct IntLit {
    std::int64_t value;
  };
  struct StrLit {
    std::string value;
  };
  struct BoolLit {
    bool value;
  };
  struct ParamRef {
    std::string name;
  };
  // counter(name, default): reads a counter from the abstract state,
  // falling back to the literal default when the counter is absent.
  struct CounterRead {
    std::string counter;
    std::int64_t fallback = 0;
  };
  struct QueryCall {
    std::string query;
    std::vector<ExprPtr> args;
  };
  struct Not {
    ExprPtr operand;
  };
  struct Binary {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };

  std::variant<IntLit, StrLit, BoolLit, ParamRef, CounterRead, QueryCall, Not,
               Binary>
      node;
  SourcePos pos;
};

struct Effect {
  enum class Kind { Assign, Add, Sub };
  Kind kind = Kind::Add;
  std::string counter;
  ExprPtr value;            // Assign only
  std::int64_t amount = 0;  // Add / Sub only
  SourcePos pos;
};

struct SubtaskCall {
  std::string op;
  std::vector<ExprPtr> args;
  SourcePos pos;
};

// One `tasks` line inside a method branch; the guard (when present) decides
// whether the calls are appended to the decomposition.
struct TasksLine {
  ExprPtr guard;  // null = unconditional
  std::vector<SubtaskCall> calls;
  SourcePos pos;
};

struct QueryBranch {
  ExprPtr guard;  // null = otherwise
  ExprPtr result;
  SourcePos pos;
};

struct OperatorBranch {
  ExprPtr guard;  // null = otherwise
  std::vector<Effect> effects;
  bool fail = false;
  SourcePos pos;
};

struct MethodBranch {
  ExprPtr guard;  // null = otherwise
  std::vector<TasksLine> lines;
  bool fail = false;
  SourcePos pos;
};

struct QueryDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<QueryBranch> branches;
  SourcePos pos;
};

struct OperatorDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<OperatorBranch> branches;
  SourcePos pos;
};

struct MethodDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<MethodBranch> branches;
  SourcePos pos;
};

struct Registrations {
  std::vector<std::string> operators;
  // task name -> method name, in declaration order
  std::vector<std::pair<std::string, std::string>> tasks;
};

struct SkillDocument {
  std::vector<QueryDef> queries;
  std::vector<OperatorDef> operators;
  std::vector<MethodDef> methods;
  Registrations registrations;
  std::string source_text;
  int iteration = 0;  // provenance, set by the optimizer loop

  const QueryDef* find_query(const std::string& name) const;
  const OperatorDef* find_operator(const std::string& name) const;
  const MethodDef* find_method(const std::string& name) const;
  // Method bound to a task name via registrations, or nullptr.
  const MethodDef* method_for_task(const std::string& task) const;
  bool operator_registered(const std::string& name) const;
};

}  // namespace skillforge::skillscript
