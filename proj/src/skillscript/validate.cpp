#include "skillforge/skillscript/validate.hpp"

#include <functional>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace skillforge::skillscript {

namespace {

// Constant-folds an expression to a boolean when possible (no state, no
// parameters). Used for the guard-always-false lint only.
std::optional<Value> fold(const Expr& e) {
  if (auto* n = std::get_if<Expr::IntLit>(&e.node)) return Value{n->value};
  if (auto* s = std::get_if<Expr::StrLit>(&e.node)) return Value{s->value};
  if (auto* b = std::get_if<Expr::BoolLit>(&e.node)) return Value{b->value};
  if (auto* u = std::get_if<Expr::Not>(&e.node)) {
    auto inner = fold(*u->operand);
    if (inner && std::holds_alternative<bool>(*inner))
      return Value{!std::get<bool>(*inner)};
    return std::nullopt;
  }
  if (auto* bin = std::get_if<Expr::Binary>(&e.node)) {
    auto l = fold(*bin->lhs);
    auto r = fold(*bin->rhs);
    if (!l || !r) return std::nullopt;
    auto as_int = [](const Value& v) -> std::optional<std::int64_t> {
      if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
      return std::nullopt;
    };
    switch (bin->op) {
      case BinOp::And:
        if (std::holds_alternative<bool>(*l) && std::holds_alternative<bool>(*r))
          return Value{std::get<bool>(*l) && std::get<bool>(*r)};
        return std::nullopt;
      case BinOp::Or:
        if (std::holds_alternative<bool>(*l) && std::holds_alternative<bool>(*r))
          return Value{std::get<bool>(*l) || std::get<bool>(*r)};
        return std::nullopt;
      case BinOp::Eq:
        return Value{*l == *r};
      default: {
        auto li = as_int(*l), ri = as_int(*r);
        if (!li || !ri) return std::nullopt;
        switch (bin->op) {
          case BinOp::Add: return Value{*li + *ri};
          case BinOp::Sub: return Value{*li - *ri};
          case BinOp::Gt: return Value{*li > *ri};
          case BinOp::Ge: return Value{*li >= *ri};
          case BinOp::Lt: return Value{*li < *ri};
          default: return std::nullopt;
        }
      }
    }
  }
  return std::nullopt;
}

struct Checker {
  const SkillDocument& doc;
  const std::set<std::string>& vocabulary;
  std::vector<ValidationItem> items;
  std::set<std::string> reported_counters;

  void add(Severity sev, std::string code, SourcePos pos, std::string message,
           std::string context) {
    items.push_back({sev, std::move(code), pos, std::move(message), std::move(context)});
  }

  void check_counter(const std::string& name, SourcePos pos,
                     const std::string& context) {
    if (vocabulary.count(name)) return;
    if (!reported_counters.insert(name).second) return;  // once per name
    add(Severity::Warning, "unknown-counter", pos,
        "counter '" + name + "' is not in the environment vocabulary", context);
  }

  void walk_expr(const Expr& e, const std::string& context) {
    if (auto* c = std::get_if<Expr::CounterRead>(&e.node)) {
      check_counter(c->counter, e.pos, context);
    } else if (auto* q = std::get_if<Expr::QueryCall>(&e.node)) {
      if (!doc.find_query(q->query))
        add(Severity::Error, "unknown-query", e.pos,
            "call to undefined query '" + q->query + "'", context);
      for (const auto& arg : q->args) walk_expr(*arg, context);
    } else if (auto* u = std::get_if<Expr::Not>(&e.node)) {
      walk_expr(*u->operand, context);
    } else if (auto* bin = std::get_if<Expr::Binary>(&e.node)) {
      walk_expr(*bin->lhs, context);
      walk_expr(*bin->rhs, context);
    }
  }

  void check_guard(const ExprPtr& guard, const std::string& context) {
    if (!guard) return;
    walk_expr(*guard, context);
    auto folded = fold(*guard);
    if (folded && std::holds_alternative<bool>(*folded) && !std::get<bool>(*folded))
      add(Severity::Warning, "guard-always-false", guard->pos,
          "guard is constantly false", context);
  }

  void run() {
    for (const auto& q : doc.queries) {
      std::string ctx = "query " + q.name;
      for (const auto& b : q.branches) {
        check_guard(b.guard, ctx);
        walk_expr(*b.result, ctx);
      }
    }
    for (const auto& op : doc.operators) {
      std::string ctx = "operator " + op.name;
      if (op.name.rfind("op_", 0) != 0)
        add(Severity::Warning, "operator-prefix", op.pos,
            "operator name should carry the op_ prefix", ctx);
      for (const auto& b : op.branches) {
        check_guard(b.guard, ctx);
        for (const auto& eff : b.effects) {
          check_counter(eff.counter, eff.pos, ctx);
          if (eff.value) walk_expr(*eff.value, ctx);
        }
      }
    }
    for (const auto& m : doc.methods) {
      std::string ctx = "method " + m.name;
      for (const auto& b : m.branches) {
        check_guard(b.guard, ctx);
        for (const auto& line : b.lines) {
          if (line.guard) walk_expr(*line.guard, ctx);
          for (const auto& call : line.calls) {
            for (const auto& arg : call.args) walk_expr(*arg, ctx);
            if (doc.find_method(call.op)) {
              add(Severity::Error, "non-operator-subtask", call.pos,
                  "subtask '" + call.op + "' names a method; method bodies may only call operators",
                  ctx);
              add(Severity::Error, "recursive-method", call.pos,
                  "methods must be flat: no method may decompose into another method",
                  ctx);
              continue;
            }
            if (!doc.find_operator(call.op)) {
              add(Severity::Error, "non-operator-subtask", call.pos,
                  "subtask '" + call.op + "' is not a defined operator", ctx);
            } else if (!doc.operator_registered(call.op)) {
              add(Severity::Error, "unregistered-operator", call.pos,
                  "operator '" + call.op + "' is used but not registered", ctx);
            }
          }
        }
        // Every non-fail branch must close with an unconditional serve.
        if (!b.lines.empty()) {
          const TasksLine& last = b.lines.back();
          const SubtaskCall& tail = last.calls.back();
          if (last.guard || tail.op.rfind("op_serve", 0) != 0)
            add(Severity::Error, "no-serve-tail", tail.pos,
                "method branch must end with an unconditional op_serve subtask", ctx);
          bool seen_serve = false;
          for (const auto& line : b.lines) {
            for (const auto& call : line.calls) {
              if (call.op.rfind("op_serve", 0) == 0) seen_serve = true;
              else if (call.op.rfind("op_assemble", 0) == 0 && seen_serve)
                add(Severity::Warning, "assemble-after-serve", call.pos,
                    "assembly scheduled after a serve in the same branch", ctx);
            }
          }
        }
      }
    }
    for (const auto& name : doc.registrations.operators) {
      if (!doc.find_operator(name))
        add(Severity::Error, "unregistered-operator", {0, 0},
            "registration names undefined operator '" + name + "'", "register operators");
    }
    for (const auto& [task, method] : doc.registrations.tasks) {
      if (!doc.find_method(method))
        add(Severity::Error, "unknown-method", {0, 0},
            "task '" + task + "' is bound to undefined method '" + method + "'",
            "register task");
    }
    for (const auto& task : standard_task_names()) {
      bool bound = false;
      for (const auto& [t, m] : doc.registrations.tasks)
        if (t == task) bound = true;
      if (!bound)
        add(Severity::Warning, "missing-task-registration", {0, 0},
            "no method registered for task '" + task + "' (incomplete coverage)",
            "register task");
    }
  }
};

}  // namespace

const std::vector<std::string>& standard_task_names() {
  static const std::vector<std::string> names = {
      "make_BeefBurger", "make_LettuceBurger", "make_BeefLettuceBurger"};
  return names;
}

std::vector<ValidationItem> ValidationReport::with_code(const std::string& code) const {
  std::vector<ValidationItem> out;
  for (const auto& item : items)
    if (item.code == code) out.push_back(item);
  return out;
}

ValidationReport validate(const SkillDocument& doc,
                          const std::set<std::string>& counter_vocabulary) {
  Checker checker{doc, counter_vocabulary};
  checker.run();
  ValidationReport report;
  report.items = std::move(checker.items);
  for (const auto& item : report.items) {
    if (item.severity == Severity::Error) {
      report.status = ValidationReport::Status::Errors;
      break;
    }
    report.status = ValidationReport::Status::Warnings;
  }
  return report;
}

std::string report_to_text(const ValidationReport& report) {
  std::ostringstream out;
  switch (report.status) {
    case ValidationReport::Status::Ok: out << "ok\n"; break;
    case ValidationReport::Status::Warnings: out << "warnings\n"; break;
    case ValidationReport::Status::Errors: out << "errors\n"; break;
  }
  for (const auto& item : report.items) {
    out << (item.severity == Severity::Error ? "error" : "warning") << " "
        << item.code << " at " << item.location.line << ":" << item.location.col
        << " [" << item.context << "] " << item.message << "\n";
  }
  return out.str();
}

std::string report_to_json(const ValidationReport& report) {
  nlohmann::ordered_json j;
  switch (report.status) {
    case ValidationReport::Status::Ok: j["status"] = "ok"; break;
    case ValidationReport::Status::Warnings: j["status"] = "warnings"; break;
    case ValidationReport::Status::Errors: j["status"] = "errors"; break;
  }
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& item : report.items) {
    j["items"].push_back({
        {"severity", item.severity == Severity::Error ? "error" : "warning"},
        {"code", item.code},
        {"line", item.location.line},
        {"col", item.location.col},
        {"message", item.message},
        {"context", item.context},
    });
  }
  return j.dump(2);
}

}  // namespace skillforge::skillscript
