// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and prints the first violated
// expectation as its explanation.

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "skillforge/harness/harness.hpp"
#include "skillforge/htn/planner.hpp"
#include "skillforge/runtime/agent.hpp"
#include "skillforge/sim/schema.hpp"
#include "skillforge/skillscript/validate.hpp"
#include "test_support.hpp"

using namespace skillforge;

namespace {

struct Criterion {
  int id;
  std::string title;
  bool pass = true;
  std::string detail;
};

void expect(Criterion& c, bool cond, const std::string& what) {
  if (!cond && c.pass) {
    c.pass = false;
    c.detail = what;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double round1(double v) { return harness::round_half_up_1dp(v); }
double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

// Published per-episode returns of the skill-agent loop (30 episodes) and the
// flat-prompting comparison column, used as the metric-arithmetic oracle.
const std::vector<int> kLoopScores = {
    -60, -50, -60, -40, 160, 140, 160, -50, 160, 160,
    140, 160, 90,  90,  160, 180, -40, 180, 180, -50,
    180, 120, 180, 180, -50, 180, 180, 180, -50, 180};
const std::vector<int> kFlatScores = {65, 160, -50, -50, -60,
                                      -5, -50, 135, -60, -50};

std::string fixture_text(const char* name) {
  return testsupport::read_file(testsupport::fixture_path(name));
}

// ---- criterion bodies ----

void metric_arithmetic(Criterion& c) {
  auto t0 = std::chrono::steady_clock::now();
  auto blocks = harness::block_means(kLoopScores);
  expect(c, blocks.size() == 3, "expected three 10-episode blocks");
  if (blocks.size() == 3) {
    expect(c, round1(blocks[0]) == 52.0, "block 0-9 mean != 52.0");
    expect(c, round1(blocks[1]) == 109.0, "block 10-19 mean != 109.0");
    expect(c, round1(blocks[2]) == 128.0, "block 20-29 mean != 128.0");
  }
  auto overall = harness::efficiency_metrics(kLoopScores, 663499, 4808);
  expect(c, round1(overall.mean_score) == 96.3, "overall mean != 96.3");
  expect(c, round3(overall.score_per_1k_tokens) == 0.145,
         "loop score/1k tokens != 0.145");
  auto flat = harness::efficiency_metrics(kFlatScores, 300898, 710);
  expect(c, round1(flat.mean_score) == 3.5, "flat 0-9 mean != 3.5");
  expect(c, round3(flat.score_per_1k_tokens) == 0.012,
         "flat score/1k tokens != 0.012");
  expect(c, seconds_since(t0) < 1.0, "metric oracle exceeded 1 s");
}

struct GapResult {
  double best_mean = 0;
  double origin_mean = 0;
  std::vector<harness::EpisodeResult> best_episodes;
};

GapResult run_gap(Criterion& c) {
  GapResult gap;
  auto t0 = std::chrono::steady_clock::now();
  auto best = fixture_text("best.skill");
  auto origin = fixture_text("origin.skill");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto config = sim::default_config();
    config.seed = seed;
    gap.best_episodes.push_back(harness::run_episode(config, best, 0));
    gap.best_mean += gap.best_episodes.back().score / 10.0;
    gap.origin_mean += harness::run_episode(config, origin, 0).score / 10.0;
  }
  expect(c, gap.best_mean >= 100.0, "mature-library mean below 100");
  expect(c, gap.origin_mean <= 0.0, "origin-library mean above 0");
  expect(c, gap.best_mean - gap.origin_mean >= 100.0, "behavior gap below 100");
  expect(c, seconds_since(t0) < 30.0, "gap suite exceeded 30 s");
  return gap;
}

void online_budget(Criterion& c, const GapResult& gap) {
  expect(c, runtime::AgentContext::online_tokens == 0,
         "agent runtime exposes a nonzero token ledger");
  for (const auto& episode : gap.best_episodes) {
    expect(c, episode.online_tokens == 0, "episode reported online tokens");
    expect(c, episode.log.footer.online_tokens == 0,
           "log footer reported online tokens");
    expect(c, episode.wall_time_s < 2.6, "episode online wall time >= 2.6 s");
  }
}

telemetry::EpisodeLog idle_log(int inactive_ticks, int total_ticks) {
  telemetry::EpisodeLog log;
  for (int t = 0; t < total_ticks; ++t) {
    telemetry::TickRecord record;
    record.tick = t;
    telemetry::AgentTickInfo info;
    info.action = "noop";
    info.category = runtime::ActionCategory::Idle;
    info.inactive = t < inactive_ticks;
    record.agents.push_back(info);
    telemetry::AgentTickInfo active = info;
    active.inactive = false;
    record.agents.push_back(active);
    log.record(std::move(record));
  }
  return log;
}

void diagnostic_thresholds(Criterion& c, const GapResult& gap) {
  auto below = detect_stagnation(idle_log(99, 120));
  expect(c, below.empty(), "99 inactive ticks flagged as stagnation");
  auto at = detect_stagnation(idle_log(100, 120));
  expect(c, at.size() == 1, "100 inactive ticks not flagged");
  if (!at.empty()) {
    expect(c, at[0].length == 100, "stagnation length wrong");
    expect(c, at[0].agent == 0, "stagnation attributed to wrong agent");
  }

  auto log = idle_log(0, 50);
  telemetry::FailureRecord middle{25, 0, "op_x", "divergence", "m"};
  auto window = failure_context(log, middle);
  expect(c, window.window.size() == 5, "interior context window != 5 ticks");
  expect(c, !window.clipped_front && !window.clipped_back,
         "interior window reported clipping");
  telemetry::FailureRecord early{0, 0, "op_x", "divergence", "m"};
  auto front = failure_context(log, early);
  expect(c, front.clipped_front && front.window.size() == 3,
         "front-clipped window wrong");
  telemetry::FailureRecord late{49, 0, "op_x", "divergence", "m"};
  auto back = failure_context(log, late);
  expect(c, back.clipped_back && back.window.size() == 3,
         "back-clipped window wrong");

  for (const auto& episode : gap.best_episodes) {
    auto dist = telemetry::action_distribution(episode.log);
    expect(c, dist.total() == 2 * 500,
           "action distribution does not partition 2 x 500 agent-ticks");
  }
}

void loop_convergence(Criterion& c) {
  auto t0 = std::chrono::steady_clock::now();
  harness::LoopSpec spec;
  spec.config = sim::default_config();
  spec.origin_library = fixture_text("origin.skill");
  spec.episodes = 10;
  spec.master_seed = 1;
  optimizer::MockOracle oracle(fixture_text("best.skill"));
  auto result = harness::run_loop(spec, &oracle);

  auto parsed_current = skillscript::parse(result.state.current);
  auto parsed_best = skillscript::parse(fixture_text("best.skill"));
  bool equal = false;
  if (std::holds_alternative<skillscript::SkillDocument>(parsed_current) &&
      std::holds_alternative<skillscript::SkillDocument>(parsed_best)) {
    equal = structurally_equal(
        std::get<skillscript::SkillDocument>(parsed_current),
        std::get<skillscript::SkillDocument>(parsed_best));
  }
  expect(c, equal, "library did not converge to the mature fixture");

  int running_max = std::numeric_limits<int>::min();
  int best_at_end = result.state.best.score;
  for (const auto& r : result.iterations)
    running_max = std::max(running_max, r.score);
  expect(c, result.state.best.valid, "no best record archived");
  expect(c, best_at_end == running_max,
         "archive best does not track the realized maximum");
  expect(c, result.iterations.size() == 10, "loop did not run 10 episodes");
  expect(c, seconds_since(t0) < 60.0, "loop exceeded 60 s");
}

void planner_soundness(Criterion& c) {
  const char* names[] = {"best.skill", "failure_qwen.skill", "origin.skill"};
  std::vector<skillscript::SkillDocument> docs;
  for (const char* name : names) docs.push_back(testsupport::load_fixture(name));

  const auto& vocab = sim::standard_counter_vocabulary();
  const auto& tasks = skillscript::standard_task_names();
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> value(0, 5);
  std::uniform_int_distribution<std::size_t> pick_doc(0, docs.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_task(0, tasks.size() - 1);

  int planned = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto& doc = docs[pick_doc(rng)];
    htn::AbstractState state;
    for (const auto& name : vocab) state.counters[name] = value(rng);
    htn::AbstractState before = state;

    auto result = htn::plan(
        doc, state, {htn::Task{tasks[pick_task(rng)], {htn::Value{std::string("a0")}}}});
    expect(c, state == before, "plan() mutated its input state");
    auto* plan = std::get_if<htn::Plan>(&result);
    if (!plan) continue;
    ++planned;
    htn::AbstractState replay = state;
    bool ok = true;
    for (const auto& op : plan->ops) {
      auto applied = htn::apply_operator(doc, replay, op);
      if (auto* next = std::get_if<htn::AbstractState>(&applied)) {
        replay = *next;
      } else {
        ok = false;
        break;
      }
    }
    expect(c, ok, "plan replay hit an operator failure");
    expect(c, replay == plan->predicted_state,
           "replayed state differs from predicted state");
    if (!c.pass) return;
  }
  expect(c, planned > 1000, "too few successful plans to be meaningful");
}

void validator_findings(Criterion& c) {
  auto qwen = testsupport::load_fixture("failure_qwen.skill");
  auto report = skillscript::validate(qwen, sim::standard_counter_vocabulary());
  std::set<std::string> flagged;
  for (const auto& item : report.with_code("unknown-counter")) {
    auto open = item.message.find('\'');
    auto close = item.message.find('\'', open + 1);
    flagged.insert(item.message.substr(open + 1, close - open - 1));
  }
  for (const char* name :
       {"beef_fresh_count", "beef_in_progress_count", "lettuce_unchopped_count"})
    expect(c, flagged.count(name) == 1,
           std::string("missing unknown-counter finding for ") + name);

  auto best = testsupport::load_fixture("best.skill");
  auto clean = skillscript::validate(best, sim::standard_counter_vocabulary());
  expect(c, clean.ok(), "mature fixture does not validate clean");
}

void determinism(Criterion& c) {
  auto config = sim::default_config();
  config.seed = 13;
  auto library = fixture_text("best.skill");
  auto a = harness::run_episode(config, library, 2);
  auto b = harness::run_episode(config, library, 2);
  a.log.footer.wall_time_s = 0;  // the only field allowed to differ
  b.log.footer.wall_time_s = 0;
  expect(c, a.log.hash() == b.log.hash(),
         "identical inputs produced different logs");

  auto round = telemetry::EpisodeLog::from_jsonl(a.log.to_jsonl());
  auto* back = std::get_if<telemetry::EpisodeLog>(&round);
  expect(c, back != nullptr, "log did not survive JSONL parsing");
  if (back) expect(c, back->hash() == a.log.hash(), "JSONL round trip lossy");

  auto report_a = telemetry::report_to_json(telemetry::build_report(a.log));
  auto report_b = telemetry::report_to_json(telemetry::build_report(b.log));
  expect(c, report_a == report_b, "report JSON is not deterministic");
}

struct FaultySource : optimizer::PatchSource {
  std::vector<std::string> texts;
  std::size_t calls = 0;
  optimizer::CompletionResult propose(const std::string&,
                                      const telemetry::DiagnosticReport&,
                                      const optimizer::OptimizerState&) override {
    optimizer::Completion completion;
    completion.text = texts[std::min(calls, texts.size() - 1)];
    completion.usage = {10, 10};
    ++calls;
    return completion;
  }
};

void optimizer_contracts(Criterion& c) {
  auto state = optimizer::make_state(fixture_text("best.skill"));
  auto before = state.current;

  FaultySource garbage;
  garbage.texts = {"not a library", "still } not", "nope("};
  telemetry::DiagnosticReport report;
  auto step = optimizer::optimize_step(state, report, garbage);
  expect(c, step.outcome == optimizer::Outcome::KeptPrevious,
         "garbage endpoint did not resolve to kept_previous");
  expect(c, step.attempts == 3, "retry bound of 3 not honored");
  expect(c, garbage.calls == 3, "endpoint called other than 3 times");
  expect(c, state.current == before, "garbage output mutated the library");

  // Fault-injection sweep: a parse error, a validation error, and a library
  // whose guards cannot evaluate. None may ever be installed.
  std::string unregistered =
      "skillscript\n"
      "operator op_serve(a)\n  otherwise\nend\n"
      "operator op_x(a)\n  otherwise\nend\n"
      "method m(a)\n  otherwise\n    tasks op_x(a), op_serve(a)\nend\n"
      "register operators op_serve\n"
      "register task make_BeefBurger m\n";
  std::string uneval = fixture_text("best.skill");
  auto pos = uneval.find("counter(bread_count, 0) >= 1");
  expect(c, pos != std::string::npos, "fault fixture anchor missing");
  if (pos != std::string::npos)
    uneval.replace(pos, 28, "counter(bread_count, 0) > \"x\"");
  for (const std::string& text : {std::string("skillscript\nquery q(\n"),
                                  unregistered, uneval}) {
    FaultySource faulty;
    faulty.texts = {text, text, text};
    auto s = optimizer::optimize_step(state, report, faulty);
    expect(c, s.outcome == optimizer::Outcome::KeptPrevious,
           "an invalid library was installed");
    expect(c, state.current == before, "library changed under fault injection");
    auto parsed = skillscript::parse(state.current);
    expect(c, std::holds_alternative<skillscript::SkillDocument>(parsed),
           "installed library no longer parses");
  }

  std::vector<double> cost = {22117, 22117, 22117};
  expect(c, harness::break_even_episode(cost, 30090) == 1,
         "break-even vs the 30,090 tok/ep baseline is not episode 1");
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "published metric arithmetic reproduces exactly"},
      {2, "fixture libraries are separated by >= 100 points"},
      {3, "zero online tokens and sub-2.6 s episodes"},
      {4, "diagnostic thresholds and windows"},
      {5, "mock-optimizer loop converges within 10 iterations"},
      {6, "planner soundness over 10,000 randomized trials"},
      {7, "validator findings match the impaired-library fixture"},
      {8, "determinism and lossless persistence"},
      {9, "optimizer retry bound, validation gate, break-even"},
  };

  metric_arithmetic(criteria[0]);
  auto gap = run_gap(criteria[1]);
  online_budget(criteria[2], gap);
  diagnostic_thresholds(criteria[3], gap);
  loop_convergence(criteria[4]);
  planner_soundness(criteria[5]);
  validator_findings(criteria[6]);
  determinism(criteria[7]);
  optimizer_contracts(criteria[8]);

  bool all = true;
  for (const auto& c : criteria) {
    std::cout << (c.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": "
              << c.title;
    if (!c.pass) std::cout << " — " << c.detail;
    std::cout << "\n";
    all = all && c.pass;
  }
  return all ? 0 : 1;
}
