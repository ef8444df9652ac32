#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <variant>
#include <vector>

#include "skillforge/skillscript/parser.hpp"
#include "skillforge/telemetry/episode.hpp"

namespace skillforge::optimizer {

struct EndpointConfig {
  std::string base_url;  // e.g. http://localhost:8080/v1
  std::string api_key_env = "SKILLFORGE_API_KEY";
  std::string model = "default";
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 4096;
  int timeout_s = 60;
};

struct CompletionUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct Completion {
  std::string text;
  CompletionUsage usage;
  double latency_s = 0.0;
};

struct EndpointError {
  std::string message;
};

using CompletionResult = std::variant<Completion, EndpointError>;

struct CostEntry {
  int iteration = 0;
  int attempt = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double wall_time_s = 0.0;
  bool accepted = false;
};

struct CostLedger {
  std::vector<CostEntry> entries;
  std::int64_t total_tokens() const;
  double total_time_s() const;
};

struct HistoryEntry {
  int iteration = 0;
  int score = 0;
  std::string summary;
  std::uint64_t library_hash = 0;
};

struct BestRecord {
  bool valid = false;
  std::string library_text;
  int score = 0;
  int iteration = 0;
};

constexpr int kHistoryWindow = 5;
constexpr int kRetryBudget = 3;

struct OptimizerState {
  int k = 0;
  std::string current;  // canonical serialization of the active library
  std::string origin;
  BestRecord best;
  std::deque<HistoryEntry> history;  // most recent kHistoryWindow, oldest first
  CostLedger ledger;
  int last_score = 0;
};

// Canonicalizes the origin text; throws std::invalid_argument on parse error.
OptimizerState make_state(const std::string& origin_library);

// Records the realized score of the episode that ran `library_text` at
// `iteration`. Best is judged on realized scores only, never speculatively.
void observe_score(OptimizerState& state, int iteration, int score,
                   const std::string& library_text, const std::string& summary);

enum class Outcome { Updated, Unchanged, RolledBack, KeptPrevious };
const char* to_string(Outcome outcome);

// Candidate producer: an HTTP chat-completion endpoint or the deterministic
// mock oracle. The mock reads the report directly; the endpoint reads only
// the rendered prompt.
class PatchSource {
 public:
  virtual ~PatchSource() = default;
  virtual CompletionResult propose(const std::string& prompt,
                                   const telemetry::DiagnosticReport& report,
                                   const OptimizerState& state) = 0;
};

class HttpBackend : public PatchSource {
 public:
  explicit HttpBackend(EndpointConfig config);
  CompletionResult propose(const std::string& prompt,
                           const telemetry::DiagnosticReport& report,
                           const OptimizerState& state) override;

 private:
  EndpointConfig config_;
};

std::string strip_code_fences(const std::string& text);

std::string build_prompt(const OptimizerState& state,
                         const telemetry::DiagnosticReport& report);

struct StepResult {
  Outcome outcome = Outcome::KeptPrevious;
  int attempts = 0;
  std::vector<std::string> attempt_log;
  std::string prompt;
};

// One Update stage: prompt, up to kRetryBudget attempts with validation
// feedback, install-or-keep. Never throws; endpoint failures degrade to
// KeptPrevious. Advances state.k by exactly 1.
StepResult optimize_step(OptimizerState& state,
                         const telemetry::DiagnosticReport& report,
                         PatchSource& source);

// Deterministic stand-in for the endpoint: pattern-matches the diagnostic
// report against a canned reference library and emits a patched document.
std::string mock_oracle(const telemetry::DiagnosticReport& report,
                        const OptimizerState& state,
                        const skillscript::SkillDocument& canned);

class MockOracle : public PatchSource {
 public:
  explicit MockOracle(const std::string& canned_library_text);
  CompletionResult propose(const std::string& prompt,
                           const telemetry::DiagnosticReport& report,
                           const OptimizerState& state) override;

 private:
  skillscript::SkillDocument canned_;
};

}  // namespace skillforge::optimizer
