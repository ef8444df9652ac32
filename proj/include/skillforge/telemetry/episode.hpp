#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "skillforge/runtime/agent.hpp"
#include "skillforge/sim/world.hpp"

namespace skillforge::telemetry {

struct LogHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int iteration = 0;  // library iteration k this episode executed
  std::uint64_t library_hash = 0;
};

struct AgentTickInfo {
  std::string action;
  runtime::ActionCategory category = runtime::ActionCategory::Idle;
  bool inactive = true;
  bool busy = false;
  std::string construct;  // operator being executed, if any
};

struct TickRecord {
  int tick = 0;
  std::vector<AgentTickInfo> agents;
  std::vector<sim::SimEvent> events;
  // Abstract-state snapshot after the step; cheap enough to keep every tick.
  std::map<std::string, std::int64_t> counters;
};

struct FailureRecord {
  int tick = 0;
  int agent = -1;
  std::string construct;
  std::string reason;
  std::string message;
};

struct LogFooter {
  int score = 0;
  double wall_time_s = 0.0;
  std::int64_t online_tokens = 0;
};

class EpisodeLog {
 public:
  LogHeader header;
  std::vector<TickRecord> ticks;
  std::vector<FailureRecord> failures;
  LogFooter footer;

  // Both reject items that would break tick ordering.
  bool record(TickRecord record);
  bool record(FailureRecord record);
  int last_tick() const { return last_tick_; }

  std::string to_jsonl() const;
  static std::variant<EpisodeLog, std::string> from_jsonl(const std::string& text);
  std::uint64_t hash() const;

 private:
  int last_tick_ = -1;
};

struct StagnationInterval {
  int agent = -1;
  int start = 0;
  int length = 0;
  std::vector<TickRecord> head;  // first min(5, length) ticks of the interval
};

struct FailureContext {
  FailureRecord failure;
  bool clipped_front = false;
  bool clipped_back = false;
  std::vector<TickRecord> window;  // ticks t-2..t+2, clipped at boundaries
};

struct ActionDistribution {
  // Indexed by runtime::ActionCategory; count = agent-ticks spent in the
  // category, runs = maximal consecutive stretches per agent.
  std::array<std::int64_t, runtime::kActionCategories> count{};
  std::array<std::int64_t, runtime::kActionCategories> runs{};
  std::int64_t total() const;
};

struct DiagnosticReport {
  std::vector<FailureContext> runtime_failures;
  std::vector<StagnationInterval> stagnation;
  ActionDistribution distribution;
  int score = 0;
};

constexpr int kStagnationThreshold = 100;

std::vector<StagnationInterval> detect_stagnation(
    const EpisodeLog& log, int threshold = kStagnationThreshold);
FailureContext failure_context(const EpisodeLog& log,
                               const FailureRecord& failure);
ActionDistribution action_distribution(const EpisodeLog& log);
DiagnosticReport build_report(const EpisodeLog& log);

// Prompt-ready rendering (stable order) and a JSON twin.
std::string report_to_text(const DiagnosticReport& report);
std::string report_to_json(const DiagnosticReport& report);

}  // namespace skillforge::telemetry
