#include "skillforge/htn/planner.hpp"

#include <optional>
#include <sstream>

namespace skillforge::htn {

using namespace skillscript;

const char* to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::GuardFailed: return "guard-failed";
    case FailureReason::NoMethod: return "no-method";
    case FailureReason::EffectUnderflow: return "effect-underflow";
    case FailureReason::DepthCapExceeded: return "depth-cap-exceeded";
    case FailureReason::EvalError: return "eval-error";
  }
  return "unknown";
}

std::string value_to_string(const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  return std::get<bool>(v) ? "true" : "false";
}

namespace {

constexpr int kQueryDepthCap = 8;

struct EvalFail {
  std::string message;
};

struct Env {
  const SkillDocument& doc;
  const AbstractState& state;
  std::map<std::string, Value> params;
  int query_depth = 0;
};

using EvalResult = std::variant<Value, EvalFail>;

EvalResult eval(const Env& env, const Expr& e);

std::optional<EvalFail> bind_params(const std::vector<std::string>& names,
                                    const std::vector<Value>& args,
                                    const std::string& construct,
                                    std::map<std::string, Value>& out) {
  if (names.size() != args.size())
    return EvalFail{construct + " expects " + std::to_string(names.size()) +
                    " arguments, got " + std::to_string(args.size())};
  for (size_t i = 0; i < names.size(); ++i) out[names[i]] = args[i];
  return std::nullopt;
}

EvalResult eval_query(const Env& env, const QueryDef& query,
                      std::vector<Value> args) {
  if (env.query_depth >= kQueryDepthCap)
    return EvalFail{"query call depth cap exceeded at '" + query.name + "'"};
  Env inner{env.doc, env.state, {}, env.query_depth + 1};
  if (auto fail = bind_params(query.params, args, "query " + query.name, inner.params))
    return *fail;
  for (const auto& branch : query.branches) {
    bool take = true;
    if (branch.guard) {
      auto g = eval(inner, *branch.guard);
      if (auto* f = std::get_if<EvalFail>(&g)) return *f;
      auto* b = std::get_if<bool>(&std::get<Value>(g));
      if (!b) return EvalFail{"query guard in '" + query.name + "' is not boolean"};
      take = *b;
    }
    if (take) return eval(inner, *branch.result);
  }
  return Value{false};  // no branch fired
}

EvalResult eval(const Env& env, const Expr& e) {
  if (auto* n = std::get_if<Expr::IntLit>(&e.node)) return Value{n->value};
  if (auto* s = std::get_if<Expr::StrLit>(&e.node)) return Value{s->value};
  if (auto* b = std::get_if<Expr::BoolLit>(&e.node)) return Value{b->value};
  if (auto* p = std::get_if<Expr::ParamRef>(&e.node)) {
    auto it = env.params.find(p->name);
    if (it == env.params.end())
      return EvalFail{"unbound parameter '" + p->name + "'"};
    return it->second;
  }
  if (auto* c = std::get_if<Expr::CounterRead>(&e.node))
    return Value{env.state.get(c->counter, c->fallback)};
  if (auto* q = std::get_if<Expr::QueryCall>(&e.node)) {
    const QueryDef* def = env.doc.find_query(q->query);
    if (!def) return EvalFail{"call to undefined query '" + q->query + "'"};
    std::vector<Value> args;
    for (const auto& arg : q->args) {
      auto r = eval(env, *arg);
      if (auto* f = std::get_if<EvalFail>(&r)) return *f;
      args.push_back(std::get<Value>(r));
    }
    return eval_query(env, *def, std::move(args));
  }
  if (auto* u = std::get_if<Expr::Not>(&e.node)) {
    auto r = eval(env, *u->operand);
    if (auto* f = std::get_if<EvalFail>(&r)) return *f;
    auto* b = std::get_if<bool>(&std::get<Value>(r));
    if (!b) return EvalFail{"'not' applied to a non-boolean"};
    return Value{!*b};
  }
  auto* bin = std::get_if<Expr::Binary>(&e.node);
  auto l = eval(env, *bin->lhs);
  if (auto* f = std::get_if<EvalFail>(&l)) return *f;
  auto lv = std::get<Value>(l);
  // Short-circuit booleans.
  if (bin->op == BinOp::And || bin->op == BinOp::Or) {
    auto* lb = std::get_if<bool>(&lv);
    if (!lb) return EvalFail{"boolean operator on a non-boolean"};
    if (bin->op == BinOp::And && !*lb) return Value{false};
    if (bin->op == BinOp::Or && *lb) return Value{true};
    auto r = eval(env, *bin->rhs);
    if (auto* f = std::get_if<EvalFail>(&r)) return *f;
    auto* rb = std::get_if<bool>(&std::get<Value>(r));
    if (!rb) return EvalFail{"boolean operator on a non-boolean"};
    return Value{*rb};
  }
  auto r = eval(env, *bin->rhs);
  if (auto* f = std::get_if<EvalFail>(&r)) return *f;
  auto rv = std::get<Value>(r);
  if (bin->op == BinOp::Eq) return Value{lv == rv};
  auto* li = std::get_if<std::int64_t>(&lv);
  auto* ri = std::get_if<std::int64_t>(&rv);
  if (!li || !ri) return EvalFail{"arithmetic comparison on non-integers"};
  switch (bin->op) {
    case BinOp::Add: return Value{*li + *ri};
    case BinOp::Sub: return Value{*li - *ri};
    case BinOp::Gt: return Value{*li > *ri};
    case BinOp::Ge: return Value{*li >= *ri};
    case BinOp::Lt: return Value{*li < *ri};
    default: return EvalFail{"unsupported operator"};
  }
}

PlanFailure make_failure(std::string construct, std::vector<Value> args,
                         const AbstractState& state, FailureReason reason,
                         std::string message) {
  return PlanFailure{std::move(construct), std::move(args), state, reason,
                     std::move(message)};
}

struct MethodExpansion {
  std::vector<SubtaskCall> calls;
  std::map<std::string, Value> params;
};

// Evaluates a method body against the state, returning the chosen branch's
// subtask calls (unexpanded) or a failure.
std::variant<MethodExpansion, PlanFailure> expand_method(
    const SkillDocument& doc, const AbstractState& state, const MethodDef& method,
    const std::vector<Value>& args) {
  Env env{doc, state, {}, 0};
  if (auto fail = bind_params(method.params, args, "method " + method.name, env.params))
    return make_failure(method.name, args, state, FailureReason::EvalError, fail->message);
  for (const auto& branch : method.branches) {
    bool take = true;
    if (branch.guard) {
      auto g = eval(env, *branch.guard);
      if (auto* f = std::get_if<EvalFail>(&g))
        return make_failure(method.name, args, state, FailureReason::EvalError, f->message);
      auto* b = std::get_if<bool>(&std::get<Value>(g));
      if (!b)
        return make_failure(method.name, args, state, FailureReason::EvalError,
                            "method guard is not boolean");
      take = *b;
    }
    if (!take) continue;
    if (branch.fail)
      return make_failure(method.name, args, state, FailureReason::NoMethod,
                          "method '" + method.name + "' declined (fail branch)");
    MethodExpansion out;
    out.params = env.params;
    for (const auto& line : branch.lines) {
      bool include = true;
      if (line.guard) {
        auto g = eval(env, *line.guard);
        if (auto* f = std::get_if<EvalFail>(&g))
          return make_failure(method.name, args, state, FailureReason::EvalError, f->message);
        auto* b = std::get_if<bool>(&std::get<Value>(g));
        if (!b)
          return make_failure(method.name, args, state, FailureReason::EvalError,
                              "tasks guard is not boolean");
        include = *b;
      }
      if (include)
        for (const auto& call : line.calls) out.calls.push_back(call);
    }
    return out;
  }
  return make_failure(method.name, args, state, FailureReason::NoMethod,
                      "no branch of method '" + method.name + "' applies");
}

std::variant<std::vector<OperatorInstance>, PlanFailure> ground_calls(
    const SkillDocument& doc, const AbstractState& state,
    const MethodExpansion& expansion, const std::string& method_name) {
  std::vector<OperatorInstance> out;
  Env env{doc, state, expansion.params, 0};
  for (const auto& call : expansion.calls) {
    OperatorInstance inst;
    inst.op = call.op;
    for (const auto& arg : call.args) {
      auto r = eval(env, *arg);
      if (auto* f = std::get_if<EvalFail>(&r))
        return make_failure(method_name, {}, state, FailureReason::EvalError, f->message);
      inst.args.push_back(std::get<Value>(r));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

ApplyResult apply_operator(const SkillDocument& doc, const AbstractState& state,
                           const OperatorInstance& instance) {
  const OperatorDef* def = doc.find_operator(instance.op);
  if (!def)
    return make_failure(instance.op, instance.args, state, FailureReason::NoMethod,
                        "operator '" + instance.op + "' is not defined");
  Env env{doc, state, {}, 0};
  if (auto fail = bind_params(def->params, instance.args,
                              "operator " + def->name, env.params))
    return make_failure(instance.op, instance.args, state, FailureReason::EvalError,
                        fail->message);
  for (const auto& branch : def->branches) {
    bool take = true;
    if (branch.guard) {
      auto g = eval(env, *branch.guard);
      if (auto* f = std::get_if<EvalFail>(&g))
        return make_failure(instance.op, instance.args, state,
                            FailureReason::EvalError, f->message);
      auto* b = std::get_if<bool>(&std::get<Value>(g));
      if (!b)
        return make_failure(instance.op, instance.args, state,
                            FailureReason::EvalError, "operator guard is not boolean");
      take = *b;
    }
    if (!take) continue;
    if (branch.fail)
      return make_failure(instance.op, instance.args, state,
                          FailureReason::GuardFailed,
                          "operator '" + instance.op + "' declined (fail branch)");
    AbstractState next = state;
    for (const auto& eff : branch.effects) {
      std::int64_t current = next.get(eff.counter, 0);
      std::int64_t updated = current;
      switch (eff.kind) {
        case Effect::Kind::Add: updated = current + eff.amount; break;
        case Effect::Kind::Sub: updated = current - eff.amount; break;
        case Effect::Kind::Assign: {
          Env eff_env{doc, next, env.params, 0};
          auto r = eval(eff_env, *eff.value);
          if (auto* f = std::get_if<EvalFail>(&r))
            return make_failure(instance.op, instance.args, state,
                                FailureReason::EvalError, f->message);
          auto* v = std::get_if<std::int64_t>(&std::get<Value>(r));
          if (!v)
            return make_failure(instance.op, instance.args, state,
                                FailureReason::EvalError,
                                "effect value is not an integer");
          updated = *v;
          break;
        }
      }
      if (updated < 0)
        return make_failure(instance.op, instance.args, state,
                            FailureReason::EffectUnderflow,
                            "effect would drive counter '" + eff.counter +
                                "' below zero");
      next.counters[eff.counter] = updated;
    }
    return next;
  }
  return make_failure(instance.op, instance.args, state, FailureReason::GuardFailed,
                      "no guard of operator '" + instance.op + "' holds");
}

DecomposeResult decompose(const SkillDocument& doc, const AbstractState& state,
                          const Task& task) {
  const MethodDef* method = doc.method_for_task(task.name);
  if (!method)
    return make_failure(task.name, task.args, state, FailureReason::NoMethod,
                        "no method registered for task '" + task.name + "'");
  auto expanded = expand_method(doc, state, *method, task.args);
  if (auto* f = std::get_if<PlanFailure>(&expanded)) return *f;
  auto grounded = ground_calls(doc, state, std::get<MethodExpansion>(expanded),
                               method->name);
  if (auto* f = std::get_if<PlanFailure>(&grounded)) return *f;
  return std::get<std::vector<OperatorInstance>>(grounded);
}

namespace {

// Expands one subtask (operator instance or, for documents that evaded
// validation, a nested method call) into plan ops, advancing the state.
std::optional<PlanFailure> expand_into(const SkillDocument& doc,
                                       AbstractState& state,
                                       const OperatorInstance& subtask,
                                       std::vector<OperatorInstance>& out,
                                       int depth, int depth_cap) {
  if (depth > depth_cap)
    return make_failure(subtask.op, subtask.args, state,
                        FailureReason::DepthCapExceeded,
                        "decomposition depth cap exceeded");
  if (doc.find_operator(subtask.op)) {
    auto applied = apply_operator(doc, state, subtask);
    if (auto* f = std::get_if<PlanFailure>(&applied)) return *f;
    state = std::get<AbstractState>(applied);
    out.push_back(subtask);
    return std::nullopt;
  }
  const MethodDef* method = doc.find_method(subtask.op);
  if (!method)
    return make_failure(subtask.op, subtask.args, state, FailureReason::NoMethod,
                        "subtask '" + subtask.op + "' is neither operator nor method");
  auto expanded = expand_method(doc, state, *method, subtask.args);
  if (auto* f = std::get_if<PlanFailure>(&expanded)) return *f;
  auto grounded = ground_calls(doc, state, std::get<MethodExpansion>(expanded),
                               method->name);
  if (auto* f = std::get_if<PlanFailure>(&grounded)) return *f;
  for (const auto& sub : std::get<std::vector<OperatorInstance>>(grounded)) {
    if (auto fail = expand_into(doc, state, sub, out, depth + 1, depth_cap))
      return fail;
  }
  return std::nullopt;
}

}  // namespace

PlanResult plan(const SkillDocument& doc, const AbstractState& state,
                const std::vector<Task>& tasks, int depth_cap) {
  Plan result;
  AbstractState simulated = state;
  for (const auto& task : tasks) {
    auto subtasks = decompose(doc, simulated, task);
    if (auto* f = std::get_if<PlanFailure>(&subtasks)) return *f;
    for (const auto& sub : std::get<std::vector<OperatorInstance>>(subtasks)) {
      if (auto fail = expand_into(doc, simulated, sub, result.ops, 1, depth_cap))
        return *fail;
    }
  }
  result.predicted_state = simulated;
  return result;
}

}  // namespace skillforge::htn
