#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "skillforge/htn/planner.hpp"
#include "test_support.hpp"

using namespace skillforge::htn;
using testsupport::load_fixture;

namespace {

AbstractState state_of(std::initializer_list<std::pair<const char*, std::int64_t>> kv) {
  AbstractState s;
  for (const auto& [k, v] : kv) s.counters[k] = v;
  return s;
}

OperatorInstance op(const char* name, std::vector<Value> args) {
  return OperatorInstance{name, std::move(args)};
}

}  // namespace

TEST_CASE("op_serve consumes one finished burger") {
  auto doc = load_fixture("best.skill");
  auto result = apply_operator(doc, state_of({{"beef_burger_count", 1}}),
                               op("op_serve", {Value{"a0"}, Value{"BeefBurger"}}));
  auto* next = std::get_if<AbstractState>(&result);
  REQUIRE(next != nullptr);
  CHECK(next->get("beef_burger_count") == 0);
  CHECK(next->counters.size() == 1);
}

TEST_CASE("op_serve on an empty inventory fails its guard") {
  auto doc = load_fixture("best.skill");
  auto result = apply_operator(doc, AbstractState{},
                               op("op_serve", {Value{"a0"}, Value{"BeefBurger"}}));
  auto* failure = std::get_if<PlanFailure>(&result);
  REQUIRE(failure != nullptr);
  CHECK(failure->reason == FailureReason::GuardFailed);
  CHECK(failure->construct == "op_serve");
}

TEST_CASE("op_assemble consumes all three ingredients for the combo burger") {
  auto doc = load_fixture("best.skill");
  auto before = state_of({{"beef_cooked_count", 1},
                          {"lettuce_chopped_count", 1},
                          {"bread_count", 1}});
  auto result = apply_operator(
      doc, before, op("op_assemble", {Value{"a0"}, Value{"BeefLettuceBurger"}}));
  auto* next = std::get_if<AbstractState>(&result);
  REQUIRE(next != nullptr);
  CHECK(next->get("beef_cooked_count") == 0);
  CHECK(next->get("lettuce_chopped_count") == 0);
  CHECK(next->get("bread_count") == 0);
  CHECK(next->get("beef_lettuce_burger_count") == 1);
  CHECK(before.get("bread_count") == 1);  // input untouched
}

TEST_CASE("decompose shortcuts to serve when a burger is ready") {
  auto doc = load_fixture("best.skill");
  auto result = decompose(doc, state_of({{"beef_burger_count", 1}}),
                          Task{"make_BeefBurger", {Value{"a0"}}});
  auto* subtasks = std::get_if<std::vector<OperatorInstance>>(&result);
  REQUIRE(subtasks != nullptr);
  REQUIRE(subtasks->size() == 1);
  CHECK((*subtasks)[0].op == "op_serve");
}

TEST_CASE("origin method decomposes to assemble+serve under its stub query") {
  auto doc = load_fixture("origin.skill");
  auto result = decompose(doc, AbstractState{}, Task{"make_BeefBurger", {Value{"a0"}}});
  auto* subtasks = std::get_if<std::vector<OperatorInstance>>(&result);
  REQUIRE(subtasks != nullptr);
  REQUIRE(subtasks->size() == 2);
  CHECK((*subtasks)[0].op == "op_assemble");
  CHECK((*subtasks)[1].op == "op_serve");
}

TEST_CASE("combo burger from an empty kitchen preps all three ingredients") {
  auto doc = load_fixture("best.skill");
  auto result = decompose(doc, AbstractState{},
                          Task{"make_BeefLettuceBurger", {Value{"a0"}}});
  auto* subtasks = std::get_if<std::vector<OperatorInstance>>(&result);
  REQUIRE(subtasks != nullptr);
  REQUIRE(subtasks->size() == 5);
  CHECK((*subtasks)[0] == op("op_prepare_food", {Value{"a0"}, Value{"Beef"}}));
  CHECK((*subtasks)[1] == op("op_prepare_food", {Value{"a0"}, Value{"Lettuce"}}));
  CHECK((*subtasks)[2] == op("op_prepare_food", {Value{"a0"}, Value{"Bread"}}));
  CHECK((*subtasks)[3].op == "op_assemble");
  CHECK((*subtasks)[4].op == "op_serve");
}

TEST_CASE("empty task list plans to an empty plan") {
  auto doc = load_fixture("best.skill");
  auto start = state_of({{"bread_count", 3}});
  auto result = plan(doc, start, {});
  auto* p = std::get_if<Plan>(&result);
  REQUIRE(p != nullptr);
  CHECK(p->ops.empty());
  CHECK(p->predicted_state == start);
}

TEST_CASE("beef burger from an empty kitchen is a 4-op plan ending at zero bread") {
  auto doc = load_fixture("best.skill");
  auto result = plan(doc, AbstractState{}, {Task{"make_BeefBurger", {Value{"a0"}}}});
  auto* p = std::get_if<Plan>(&result);
  REQUIRE(p != nullptr);
  REQUIRE(p->ops.size() == 4);
  CHECK(p->ops[0] == op("op_prepare_food", {Value{"a0"}, Value{"Beef"}}));
  CHECK(p->ops[1] == op("op_prepare_food", {Value{"a0"}, Value{"Bread"}}));
  CHECK(p->ops[2].op == "op_assemble");
  CHECK(p->ops[3].op == "op_serve");
  CHECK(p->predicted_state.get("bread_count") == 0);
  CHECK(p->predicted_state.get("beef_burger_count") == 0);
}

TEST_CASE("failure fixture cannot make a beef burger") {
  auto doc = load_fixture("failure_qwen.skill");
  // From the all-zero state the availability query is false everywhere, so
  // the method itself declines.
  auto zero = plan(doc, AbstractState{}, {Task{"make_BeefBurger", {Value{"a0"}}}});
  auto* f0 = std::get_if<PlanFailure>(&zero);
  REQUIRE(f0 != nullptr);
  CHECK(f0->reason == FailureReason::NoMethod);
  // With cooked beef on hand the method fires, but op_prepare_food demands
  // beef_fresh_count which the environment never supplies.
  auto cooked = plan(doc, state_of({{"beef_cooked_count", 1}, {"bread_count", 1}}),
                     {Task{"make_BeefBurger", {Value{"a0"}}}});
  auto* f1 = std::get_if<PlanFailure>(&cooked);
  REQUIRE(f1 != nullptr);
  CHECK(f1->construct == "op_prepare_food");
  CHECK(f1->reason == FailureReason::GuardFailed);
}

TEST_CASE("unknown task is a no-method failure") {
  auto doc = load_fixture("origin.skill");
  auto result = plan(doc, AbstractState{}, {Task{"make_LettuceBurger", {Value{"a0"}}}});
  auto* failure = std::get_if<PlanFailure>(&result);
  REQUIRE(failure != nullptr);
  CHECK(failure->reason == FailureReason::NoMethod);
}

TEST_CASE("depth cap catches self-expanding documents that evade validation") {
  std::string text =
      "operator op_serve(a)\n"
      "  otherwise\n"
      "end\n"
      "method m_loop(a)\n"
      "  otherwise\n"
      "    tasks m_loop(a), op_serve(a)\n"
      "end\n"
      "register operators op_serve\n"
      "register task make_BeefBurger m_loop\n";
  auto parsed = skillforge::skillscript::parse(text);
  REQUIRE(std::holds_alternative<skillforge::skillscript::SkillDocument>(parsed));
  auto& doc = std::get<skillforge::skillscript::SkillDocument>(parsed);
  auto result = plan(doc, AbstractState{}, {Task{"make_BeefBurger", {Value{"a0"}}}});
  auto* failure = std::get_if<PlanFailure>(&result);
  REQUIRE(failure != nullptr);
  CHECK(failure->reason == FailureReason::DepthCapExceeded);
}

TEST_CASE("plans replay from their input state onto the predicted state") {
  // Replay oracle over randomized states; the acceptance suite runs the
  // large-scale version.
  std::mt19937_64 rng(7);
  const char* counters[] = {"bread_count",        "beef_cooked_count",
                            "lettuce_chopped_count", "beef_burger_count",
                            "lettuce_burger_count",  "beef_lettuce_burger_count"};
  const char* tasks[] = {"make_BeefBurger", "make_LettuceBurger",
                         "make_BeefLettuceBurger"};
  for (const char* fixture : {"origin.skill", "best.skill", "failure_qwen.skill"}) {
    auto doc = load_fixture(fixture);
    for (int trial = 0; trial < 500; ++trial) {
      AbstractState state;
      for (const char* c : counters)
        state.counters[c] = std::uniform_int_distribution<int>(0, 3)(rng);
      Task task{tasks[rng() % 3], {Value{"a0"}}};
      AbstractState before = state;
      auto result = plan(doc, state, {task});
      CHECK(state == before);  // purity
      if (auto* p = std::get_if<Plan>(&result)) {
        AbstractState replay = state;
        for (const auto& inst : p->ops) {
          auto applied = apply_operator(doc, replay, inst);
          REQUIRE(std::holds_alternative<AbstractState>(applied));
          replay = std::get<AbstractState>(applied);
          for (const auto& [name, value] : replay.counters) CHECK(value >= 0);
        }
        CHECK(replay == p->predicted_state);
      }
    }
  }
}
