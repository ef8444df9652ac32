#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "skillforge/optimizer/optimizer.hpp"
#include "skillforge/sim/config.hpp"
#include "skillforge/telemetry/episode.hpp"

namespace skillforge::harness {

struct EpisodeResult {
  int iteration = 0;
  std::uint64_t seed = 0;
  int score = 0;
  double wall_time_s = 0.0;
  std::int64_t online_tokens = 0;  // structurally zero during execution
  std::uint64_t library_hash = 0;
  telemetry::EpisodeLog log;
};

// Runs one full episode of `library_text` on a fresh world built from
// `config`. Throws std::runtime_error when the config or library is unusable.
EpisodeResult run_episode(const sim::SimConfig& config,
                          const std::string& library_text, int iteration);

struct LoopSpec {
  sim::SimConfig config;  // per-episode seed is master_seed + k
  std::string origin_library;
  int episodes = 10;
  std::uint64_t master_seed = 0;
  std::string run_dir;  // artifacts are persisted here when non-empty
};

struct IterationRecord {
  int iteration = 0;
  std::uint64_t seed = 0;
  int score = 0;
  double online_time_s = 0.0;
  std::int64_t online_tokens = 0;
  std::int64_t offline_tokens = 0;  // optimizer spend attributed to this episode
  double offline_time_s = 0.0;
  std::uint64_t library_hash = 0;
  std::string outcome = "none";  // updated|unchanged|rolled_back|kept_previous|none
  int attempts = 0;
};

struct LoopResult {
  std::vector<IterationRecord> iterations;
  optimizer::OptimizerState state;  // final library, best record, cost ledger
};

// The closed loop: execute, diagnose, update, repeat. A null `source` freezes
// the library (pure execution baseline). Optimizer failures never abort the
// loop; the library simply carries over.
LoopResult run_loop(const LoopSpec& spec, optimizer::PatchSource* source);

// ---- metrics ----

// Round half away from zero to one decimal, the convention used for all
// displayed score tables.
double round_half_up_1dp(double v);

// Means over consecutive blocks (default 10 episodes); the tail block may be
// shorter.
std::vector<double> block_means(const std::vector<int>& scores, int block = 10);

struct BaselineCost {
  std::string name;
  std::int64_t tokens_per_episode = 0;
  double seconds_per_episode = 0.0;
};
// Published per-episode cost of the prompting baselines the loop is compared
// against (ReAct, Reflexion, DPT).
const std::vector<BaselineCost>& baseline_costs();

struct EfficiencyMetrics {
  double mean_score = 0.0;
  double score_per_second = 0.0;     // mean score / mean episode seconds
  double score_per_1k_tokens = 0.0;  // mean score / (total tokens / 1000)
};
EfficiencyMetrics efficiency_metrics(const std::vector<int>& scores,
                                     std::int64_t total_tokens,
                                     double total_seconds);

// Smallest 1-based N with cumulative own cost <= N * baseline per-episode
// cost; 0 when the horizon never amortizes.
int break_even_episode(const std::vector<double>& own_cost_per_episode,
                       double baseline_cost_per_episode);

// ---- report emission ----

std::string report_csv(const std::vector<IterationRecord>& records);
std::string report_json(const LoopResult& result);
std::string report_text(const LoopResult& result);

// Parses the CSV emitted above, so reports can be regenerated offline.
std::variant<std::vector<IterationRecord>, std::string> records_from_csv(
    const std::string& text);

}  // namespace skillforge::harness
