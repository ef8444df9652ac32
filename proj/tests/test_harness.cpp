#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "skillforge/harness/harness.hpp"
#include "test_support.hpp"

using namespace skillforge;
using namespace skillforge::harness;

namespace {

std::string fixture_text(const char* name) {
  return testsupport::read_file(testsupport::fixture_path(name));
}

}  // namespace

TEST_CASE("an episode of the mature library earns deliveries") {
  auto config = sim::default_config();
  config.seed = 7;
  auto result = run_episode(config, fixture_text("best.skill"), 0);
  CHECK(result.score > 0);
  CHECK(result.log.ticks.size() == 500);
  CHECK(result.log.footer.score == result.score);
  CHECK(result.online_tokens == 0);
  CHECK(result.log.footer.online_tokens == 0);
  CHECK(result.log.header.seed == 7);
  CHECK(result.log.header.config_hash == sim::config_hash(config));
}

TEST_CASE("the impaired origin library cannot score") {
  auto config = sim::default_config();
  config.seed = 1;
  auto result = run_episode(config, fixture_text("origin.skill"), 0);
  CHECK(result.score <= 0);
  CHECK(!result.log.failures.empty());
}

TEST_CASE("identical seeds replay to identical logs") {
  auto config = sim::default_config();
  config.seed = 42;
  auto a = run_episode(config, fixture_text("best.skill"), 3);
  auto b = run_episode(config, fixture_text("best.skill"), 3);
  // Wall time legitimately differs between runs; compare everything else.
  a.log.footer.wall_time_s = 0;
  b.log.footer.wall_time_s = 0;
  CHECK(a.score == b.score);
  CHECK(a.log.hash() == b.log.hash());
}

TEST_CASE("display rounding is half away from zero at one decimal") {
  CHECK(round_half_up_1dp(96.25) == doctest::Approx(96.3));
  CHECK(round_half_up_1dp(0.05) == doctest::Approx(0.1));
  CHECK(round_half_up_1dp(0.04) == doctest::Approx(0.0));
  CHECK(round_half_up_1dp(-10.25) == doctest::Approx(-10.3));
  CHECK(round_half_up_1dp(128.0) == doctest::Approx(128.0));
}

TEST_CASE("block means split the score stream into tens") {
  std::vector<int> scores;
  for (int i = 0; i < 10; ++i) scores.push_back(40 + i);  // mean 44.5
  for (int i = 0; i < 10; ++i) scores.push_back(100);
  for (int i = 0; i < 5; ++i) scores.push_back(10);  // short tail block
  auto means = block_means(scores);
  REQUIRE(means.size() == 3);
  CHECK(means[0] == doctest::Approx(44.5));
  CHECK(means[1] == doctest::Approx(100.0));
  CHECK(means[2] == doctest::Approx(10.0));
}

TEST_CASE("published efficiency figures reproduce from the raw totals") {
  // 30 episodes averaging 96.3 over 663,499 total tokens.
  std::vector<int> scores(30, 0);
  // Construct a stream whose mean is exactly 96.3: 21 episodes of 96 and 9 of 97.
  for (int i = 0; i < 30; ++i) scores[i] = i < 21 ? 96 : 97;
  auto eff = efficiency_metrics(scores, 663499, 30 * 60.0);
  CHECK(eff.mean_score == doctest::Approx(96.3));
  CHECK(round_half_up_1dp(eff.score_per_1k_tokens * 1000) / 1000 ==
        doctest::Approx(0.145).epsilon(0.01));
  CHECK(eff.score_per_1k_tokens == doctest::Approx(96.3 / 663.499));

  // The flat-prompting comparison point: 3.5 mean over 300,898 tokens.
  std::vector<int> flat = {35, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  double flat_mean = 3.5;
  auto flat_eff = efficiency_metrics(flat, 300898, 10 * 71.0);
  CHECK(flat_eff.mean_score == doctest::Approx(flat_mean));
  CHECK(flat_eff.score_per_1k_tokens == doctest::Approx(3.5 / 300.898));
  CHECK(flat_eff.score_per_second == doctest::Approx(3.5 / 71.0));
}

TEST_CASE("break-even amortization against per-episode baselines") {
  // One-off optimization spend against DPT's recurring per-episode cost.
  std::vector<double> front_loaded = {22117, 0, 0, 0};
  CHECK(break_even_episode(front_loaded, 30090) == 1);

  std::vector<double> slow = {100, 0, 0};
  CHECK(break_even_episode(slow, 40) == 3);

  std::vector<double> never = {1000, 1000};
  CHECK(break_even_episode(never, 1) == 0);

  CHECK(break_even_episode({}, 100) == 0);
}

TEST_CASE("the CSV report round-trips losslessly") {
  std::vector<IterationRecord> records;
  for (int k = 0; k < 3; ++k) {
    IterationRecord r;
    r.iteration = k;
    r.seed = 100 + k;
    r.score = k * 40 - 10;
    r.online_time_s = 1.25 + k;
    r.online_tokens = 0;
    r.offline_tokens = 5000 * (k + 1);
    r.offline_time_s = 0.5;
    r.library_hash = 0xdeadbeef + k;
    r.outcome = k == 0 ? "updated" : "unchanged";
    r.attempts = 1;
    records.push_back(r);
  }
  auto parsed = records_from_csv(report_csv(records));
  auto* back = std::get_if<std::vector<IterationRecord>>(&parsed);
  REQUIRE(back != nullptr);
  REQUIRE(back->size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK((*back)[k].iteration == records[k].iteration);
    CHECK((*back)[k].seed == records[k].seed);
    CHECK((*back)[k].score == records[k].score);
    CHECK((*back)[k].online_time_s == doctest::Approx(records[k].online_time_s));
    CHECK((*back)[k].offline_tokens == records[k].offline_tokens);
    CHECK((*back)[k].library_hash == records[k].library_hash);
    CHECK((*back)[k].outcome == records[k].outcome);
  }
}

TEST_CASE("malformed CSV is rejected with a line number") {
  auto parsed = records_from_csv("iteration,seed\n1,2,3\n");
  auto* error = std::get_if<std::string>(&parsed);
  REQUIRE(error != nullptr);
  CHECK(error->find("line 2") != std::string::npos);
}

TEST_CASE("the closed loop repairs the origin library and starts scoring") {
  LoopSpec spec;
  spec.config = sim::default_config();
  spec.origin_library = fixture_text("origin.skill");
  spec.episodes = 4;
  spec.master_seed = 1;  // episode 0 spawns a BeefBurger order early
  optimizer::MockOracle oracle(fixture_text("best.skill"));
  auto result = run_loop(spec, &oracle);
  REQUIRE(result.iterations.size() == 4);
  CHECK(result.iterations[0].score <= 0);
  CHECK(result.iterations[0].outcome == "updated");
  CHECK(result.iterations.back().score > 0);
  CHECK(result.state.k == 4);
  CHECK(result.state.best.valid);
  bool best_tracks_realized =
      result.state.best.score >= result.iterations[0].score;
  CHECK(best_tracks_realized);
  // Offline spend is visible per iteration; online tokens stay at zero.
  for (const auto& r : result.iterations) {
    CHECK(r.online_tokens == 0);
    CHECK(r.offline_tokens > 0);
  }
}

TEST_CASE("a frozen library runs without an optimizer") {
  LoopSpec spec;
  spec.config = sim::default_config();
  spec.origin_library = fixture_text("best.skill");
  spec.episodes = 2;
  spec.master_seed = 9;
  auto result = run_loop(spec, nullptr);
  REQUIRE(result.iterations.size() == 2);
  for (const auto& r : result.iterations) {
    CHECK(r.outcome == "none");
    CHECK(r.offline_tokens == 0);
    CHECK(r.score > 0);
  }
  CHECK(result.state.current == result.state.origin);
}

TEST_CASE("loop artifacts land in the run directory") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "skillforge_harness_test";
  fs::remove_all(dir);

  LoopSpec spec;
  spec.config = sim::default_config();
  spec.origin_library = fixture_text("best.skill");
  spec.episodes = 2;
  spec.master_seed = 5;
  spec.run_dir = dir.string();
  optimizer::MockOracle oracle(fixture_text("best.skill"));
  auto result = run_loop(spec, &oracle);

  CHECK(fs::exists(dir / "spec.json"));
  CHECK(fs::exists(dir / "skills" / "iter_0.skill"));
  CHECK(fs::exists(dir / "skills" / "iter_1.skill"));
  CHECK(fs::exists(dir / "ep_0.jsonl"));
  CHECK(fs::exists(dir / "ep_1.jsonl"));
  CHECK(fs::exists(dir / "opt_0.json"));
  CHECK(fs::exists(dir / "report.csv"));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.txt"));

  // The persisted log replays through the parser.
  std::ifstream in(dir / "ep_0.jsonl");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  auto log = telemetry::EpisodeLog::from_jsonl(text);
  CHECK(std::holds_alternative<telemetry::EpisodeLog>(log));

  // CSV regeneration matches the in-memory records.
  std::ifstream csv_in(dir / "report.csv");
  std::string csv((std::istreambuf_iterator<char>(csv_in)),
                  std::istreambuf_iterator<char>());
  auto parsed = records_from_csv(csv);
  auto* back = std::get_if<std::vector<IterationRecord>>(&parsed);
  REQUIRE(back != nullptr);
  CHECK(back->size() == result.iterations.size());
  fs::remove_all(dir);
}

TEST_CASE("the text report names its headline numbers") {
  LoopSpec spec;
  spec.config = sim::default_config();
  spec.origin_library = fixture_text("best.skill");
  spec.episodes = 2;
  spec.master_seed = 11;
  auto result = run_loop(spec, nullptr);
  auto text = report_text(result);
  CHECK(text.find("Mean score:") != std::string::npos);
  CHECK(text.find("Block means") != std::string::npos);
  CHECK(text.find("Score per 1k tokens") != std::string::npos);
  CHECK(text.find("Break-even vs DPT") != std::string::npos);
  CHECK(text.find("Break-even vs ReAct") != std::string::npos);
  auto json_text = report_json(result);
  CHECK(json_text.find("score_per_second") != std::string::npos);
}
