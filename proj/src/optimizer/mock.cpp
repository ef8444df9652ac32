#include <algorithm>
#include <set>

#include "skillforge/optimizer/optimizer.hpp"
#include "skillforge/sim/schema.hpp"

namespace skillforge::optimizer {

using skillscript::Expr;
using skillscript::ExprPtr;
using skillscript::MethodDef;
using skillscript::OperatorDef;
using skillscript::QueryDef;
using skillscript::SkillDocument;

namespace {

void collect_counters(const Expr& e, std::set<std::string>& out) {
  if (auto* c = std::get_if<Expr::CounterRead>(&e.node)) {
    out.insert(c->counter);
  } else if (auto* q = std::get_if<Expr::QueryCall>(&e.node)) {
    for (const auto& arg : q->args) collect_counters(*arg, out);
  } else if (auto* n = std::get_if<Expr::Not>(&e.node)) {
    collect_counters(*n->operand, out);
  } else if (auto* b = std::get_if<Expr::Binary>(&e.node)) {
    collect_counters(*b->lhs, out);
    collect_counters(*b->rhs, out);
  }
}

std::set<std::string> counters_of(const QueryDef& q) {
  std::set<std::string> out;
  for (const auto& b : q.branches) {
    if (b.guard) collect_counters(*b.guard, out);
    collect_counters(*b.result, out);
  }
  return out;
}

std::set<std::string> counters_of(const OperatorDef& op) {
  std::set<std::string> out;
  for (const auto& b : op.branches) {
    if (b.guard) collect_counters(*b.guard, out);
    for (const auto& eff : b.effects) {
      out.insert(eff.counter);
      if (eff.value) collect_counters(*eff.value, out);
    }
  }
  return out;
}

std::set<std::string> counters_of(const MethodDef& m) {
  std::set<std::string> out;
  for (const auto& b : m.branches) {
    if (b.guard) collect_counters(*b.guard, out);
    for (const auto& line : b.lines) {
      if (line.guard) collect_counters(*line.guard, out);
      for (const auto& call : line.calls)
        for (const auto& arg : call.args) collect_counters(*arg, out);
    }
  }
  return out;
}

template <typename T>
bool any_unknown(const T& construct, const std::set<std::string>& vocab) {
  for (const auto& name : counters_of(construct))
    if (!vocab.count(name)) return true;
  return false;
}

// A query that never consults the abstract state (the origin stub) conveys
// no information and is replaced wholesale.
bool is_stub_query(const QueryDef& q) { return counters_of(q).empty(); }

template <typename T>
void replace_or_add(std::vector<T>& defs, const T& replacement) {
  for (auto& def : defs) {
    if (def.name == replacement.name) {
      def = replacement;
      return;
    }
  }
  defs.push_back(replacement);
}

void ensure_operator_registered(SkillDocument& doc, const std::string& name) {
  auto& ops = doc.registrations.operators;
  if (std::find(ops.begin(), ops.end(), name) == ops.end()) ops.push_back(name);
}

// Installs the canned method bound to `task` (plus any operators it calls).
bool install_canned_method(SkillDocument& doc, const SkillDocument& canned,
                           const std::string& task) {
  const MethodDef* method = canned.method_for_task(task);
  if (!method) return false;
  replace_or_add(doc.methods, *method);
  for (const auto& branch : method->branches)
    for (const auto& line : branch.lines)
      for (const auto& call : line.calls)
        if (!doc.find_operator(call.op) && canned.find_operator(call.op)) {
          replace_or_add(doc.operators, *canned.find_operator(call.op));
          ensure_operator_registered(doc, call.op);
        }
  bool bound = false;
  for (auto& [t, m] : doc.registrations.tasks) {
    if (t == task) {
      m = method->name;
      bound = true;
    }
  }
  if (!bound) doc.registrations.tasks.emplace_back(task, method->name);
  return true;
}

void install_canned_operators(SkillDocument& doc, const SkillDocument& canned) {
  for (const auto& op : canned.operators) {
    replace_or_add(doc.operators, op);
    ensure_operator_registered(doc, op.name);
  }
}

ExprPtr make_expr(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

// Matches `param == "literal"` (either operand order) and returns the literal.
const std::string* eq_string_literal(const ExprPtr& guard) {
  if (!guard) return nullptr;
  auto* bin = std::get_if<Expr::Binary>(&guard->node);
  if (!bin || bin->op != skillscript::BinOp::Eq) return nullptr;
  if (auto* s = std::get_if<Expr::StrLit>(&bin->rhs->node)) return &s->value;
  if (auto* s = std::get_if<Expr::StrLit>(&bin->lhs->node)) return &s->value;
  return nullptr;
}

// Reads `counter(name, d) > N` thresholds out of a query-branch result.
const Expr::Binary* threshold_compare(const ExprPtr& result) {
  if (!result) return nullptr;
  auto* bin = std::get_if<Expr::Binary>(&result->node);
  if (!bin) return nullptr;
  if (bin->op != skillscript::BinOp::Gt && bin->op != skillscript::BinOp::Ge)
    return nullptr;
  if (!std::holds_alternative<Expr::CounterRead>(bin->lhs->node)) return nullptr;
  if (!std::holds_alternative<Expr::IntLit>(bin->rhs->node)) return nullptr;
  return bin;
}

std::optional<std::int64_t> query_threshold(const SkillDocument& doc,
                                            const std::string& ingredient) {
  const QueryDef* q = doc.find_query("is_available");
  if (!q) return std::nullopt;
  for (const auto& branch : q->branches) {
    const std::string* lit = eq_string_literal(branch.guard);
    if (!lit || *lit != ingredient) continue;
    if (const auto* cmp = threshold_compare(branch.result))
      return std::get<Expr::IntLit>(cmp->rhs->node).value;
  }
  return std::nullopt;
}

bool bump_query_threshold(SkillDocument& doc, const std::string& ingredient) {
  for (auto& q : doc.queries) {
    if (q.name != "is_available") continue;
    for (auto& branch : q.branches) {
      const std::string* lit = eq_string_literal(branch.guard);
      if (!lit || *lit != ingredient) continue;
      const auto* cmp = threshold_compare(branch.result);
      if (!cmp) continue;
      Expr lhs = *cmp->lhs;
      Expr rhs = *cmp->rhs;
      std::get<Expr::IntLit>(rhs.node).value += 1;
      Expr updated;
      updated.node = Expr::Binary{cmp->op, make_expr(std::move(lhs)),
                                  make_expr(std::move(rhs))};
      branch.result = make_expr(std::move(updated));
      return true;
    }
  }
  return false;
}

}  // namespace

std::string mock_oracle(const telemetry::DiagnosticReport& report,
                        const OptimizerState& state,
                        const SkillDocument& canned) {
  auto parsed = skillscript::parse(state.current);
  if (std::holds_alternative<skillscript::ParseError>(parsed))
    return skillscript::serialize(canned);
  auto doc = std::get<SkillDocument>(std::move(parsed));
  const auto& vocab = sim::standard_counter_vocabulary();
  bool changed = false;

  // Erroneous counter vocabulary: swap in the canned construct of the same
  // name, or delete the construct when no counterpart exists.
  std::set<std::string> deleted_ops;
  for (auto it = doc.operators.begin(); it != doc.operators.end();) {
    if (!any_unknown(*it, vocab)) {
      ++it;
      continue;
    }
    if (const OperatorDef* replacement = canned.find_operator(it->name)) {
      *it = *replacement;
      ++it;
    } else {
      deleted_ops.insert(it->name);
      it = doc.operators.erase(it);
    }
    changed = true;
  }
  if (!deleted_ops.empty()) {
    auto& regs = doc.registrations.operators;
    regs.erase(std::remove_if(regs.begin(), regs.end(),
                              [&](const std::string& n) {
                                return deleted_ops.count(n) > 0;
                              }),
               regs.end());
  }
  for (auto& q : doc.queries) {
    if (!any_unknown(q, vocab)) continue;
    if (const QueryDef* replacement = canned.find_query(q.name)) {
      q = *replacement;
      changed = true;
    }
  }
  // Methods that reference unknown counters or deleted operators get their
  // canned counterpart, looked up through the task they are bound to.
  for (const auto& [task, method_name] : doc.registrations.tasks) {
    const MethodDef* method = doc.find_method(method_name);
    if (!method) continue;
    bool broken = any_unknown(*method, vocab);
    for (const auto& branch : method->branches)
      for (const auto& line : branch.lines)
        for (const auto& call : line.calls)
          if (deleted_ops.count(call.op)) broken = true;
    if (broken && install_canned_method(doc, canned, task)) changed = true;
  }

  // Diagnostic-driven repairs.
  bool operator_trouble = false;
  bool assemble_divergence = false;
  std::set<std::string> failing_tasks;
  for (const auto& fc : report.runtime_failures) {
    const auto& f = fc.failure;
    if (f.reason == "no-method") {
      if (f.construct.rfind("make_", 0) == 0) {
        failing_tasks.insert(f.construct);
      } else {
        for (const auto& [task, method_name] : doc.registrations.tasks)
          if (method_name == f.construct) failing_tasks.insert(task);
      }
    } else if (doc.find_operator(f.construct) ||
               f.construct.rfind("op_", 0) == 0) {
      operator_trouble = true;
      if (f.reason == "divergence" &&
          f.construct.find("assemble") != std::string::npos)
        assemble_divergence = true;
    }
  }

  if (operator_trouble) {
    install_canned_operators(doc, canned);
    changed = true;
    for (auto& q : doc.queries)
      if (is_stub_query(q) && canned.find_query(q.name)) {
        q = *canned.find_query(q.name);
      }
  }
  for (const auto& task : failing_tasks)
    if (install_canned_method(doc, canned, task)) changed = true;

  // Ingredient contention at assembly: demand a buffer before declaring the
  // ingredient available, mirroring the bread > 1 correction.
  if (assemble_divergence) {
    auto current = query_threshold(doc, "Bread");
    auto target = query_threshold(canned, "Bread");
    if (current && target && *current < *target && bump_query_threshold(doc, "Bread"))
      changed = true;
  }

  if (!changed) return state.current;
  return skillscript::serialize(doc);
}

}  // namespace skillforge::optimizer
