#include "skillforge/optimizer/optimizer.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

#include "skillforge/htn/planner.hpp"
#include "skillforge/sim/config.hpp"
#include "skillforge/sim/schema.hpp"
#include "skillforge/skillscript/validate.hpp"

namespace skillforge::optimizer {

std::int64_t CostLedger::total_tokens() const {
  std::int64_t total = 0;
  for (const auto& e : entries) total += e.prompt_tokens + e.completion_tokens;
  return total;
}

double CostLedger::total_time_s() const {
  double total = 0;
  for (const auto& e : entries) total += e.wall_time_s;
  return total;
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Updated: return "updated";
    case Outcome::Unchanged: return "unchanged";
    case Outcome::RolledBack: return "rolled_back";
    case Outcome::KeptPrevious: return "kept_previous";
  }
  return "?";
}

namespace {

std::string canonicalize(const std::string& text) {
  auto parsed = skillscript::parse(text);
  if (auto* err = std::get_if<skillscript::ParseError>(&parsed))
    throw std::invalid_argument("library does not parse: " + err->to_string());
  return skillscript::serialize(std::get<skillscript::SkillDocument>(parsed));
}

}  // namespace

OptimizerState make_state(const std::string& origin_library) {
  OptimizerState state;
  state.origin = canonicalize(origin_library);
  state.current = state.origin;
  return state;
}

void observe_score(OptimizerState& state, int iteration, int score,
                   const std::string& library_text, const std::string& summary) {
  state.last_score = score;
  if (!state.best.valid || score > state.best.score) {
    state.best.valid = true;
    state.best.library_text = library_text;
    state.best.score = score;
    state.best.iteration = iteration;
  }
  HistoryEntry entry;
  entry.iteration = iteration;
  entry.score = score;
  entry.summary = summary;
  entry.library_hash = sim::fnv1a(library_text);
  state.history.push_back(entry);
  while (int(state.history.size()) > kHistoryWindow) state.history.pop_front();
}

std::string strip_code_fences(const std::string& text) {
  // Accepts ``` or ```lang on its own line at the start, and ``` at the end.
  std::string s = text;
  auto first_non_ws = s.find_first_not_of(" \t\r\n");
  if (first_non_ws == std::string::npos) return s;
  if (s.compare(first_non_ws, 3, "```") != 0) return s;
  auto line_end = s.find('\n', first_non_ws);
  if (line_end == std::string::npos) return s;
  auto closing = s.rfind("```");
  if (closing == std::string::npos || closing <= line_end) return s;
  return s.substr(line_end + 1, closing - line_end - 1);
}

std::string build_prompt(const OptimizerState& state,
                         const telemetry::DiagnosticReport& report) {
  std::ostringstream out;
  out << "You maintain the shared skill library of a two-agent kitchen team.\n"
      << "The library is written in the skill DSL: queries, operators with\n"
      << "guards and counter effects, flat methods that decompose make_* tasks\n"
      << "into registered op_* subtasks. Do not use recursion; methods may\n"
      << "only call registered operators.\n\n";

  out << "## Experiment Result (Iteration " << state.k << ")\n"
      << "Score: " << report.score << "\n\n";

  out << "## Log Analysis\n" << telemetry::report_to_text(report) << "\n";

  out << "## Current Rule File\n" << state.current << "\n";
  out << "## Origin Rule File\n" << state.origin << "\n";

  out << "## Best Rules So Far\n";
  if (state.best.valid) {
    out << "(iteration " << state.best.iteration << ", score "
        << state.best.score << ")\n"
        << state.best.library_text << "\n";
  } else {
    out << "(none yet)\n\n";
  }

  out << "## Recent History (most recent " << kHistoryWindow << ")\n";
  if (state.history.empty()) out << "(empty)\n";
  for (const auto& h : state.history)
    out << "- iteration " << h.iteration << ": score " << h.score
        << ", library " << std::hex << h.library_hash << std::dec << " — "
        << h.summary << "\n";
  out << "\n";

  out << "## Output Contract\n"
      << "Output ONLY a valid skill-DSL document, nothing else.\n"
      << "If no change is needed, output current rules totally the same.\n";
  return out.str();
}

namespace {

// Validator-class faults only: a library may legitimately be unable to act
// from the empty kitchen (the impaired origin library is), so guard and
// method failures pass the smoke test.
std::string smoke_test(const skillscript::SkillDocument& doc) {
  htn::AbstractState zero;
  for (const auto& task : skillscript::standard_task_names()) {
    auto result = htn::plan(doc, zero,
                            {htn::Task{task, {htn::Value{std::string("a0")}}}});
    if (auto* failure = std::get_if<htn::PlanFailure>(&result)) {
      if (failure->reason == htn::FailureReason::EvalError ||
          failure->reason == htn::FailureReason::DepthCapExceeded)
        return std::string("dry-run of ") + task + " failed: " +
               htn::to_string(failure->reason) + ": " + failure->message;
    }
  }
  return "";
}

}  // namespace

StepResult optimize_step(OptimizerState& state,
                         const telemetry::DiagnosticReport& report,
                         PatchSource& source) {
  StepResult result;
  result.prompt = build_prompt(state, report);
  std::string prompt = result.prompt;

  for (int attempt = 1; attempt <= kRetryBudget; ++attempt) {
    result.attempts = attempt;
    auto begin = std::chrono::steady_clock::now();
    auto proposed = source.propose(prompt, report, state);
    auto end = std::chrono::steady_clock::now();
    double wall = std::chrono::duration<double>(end - begin).count();

    CostEntry cost;
    cost.iteration = state.k;
    cost.attempt = attempt;
    cost.wall_time_s = wall;

    std::string feedback;
    if (auto* error = std::get_if<EndpointError>(&proposed)) {
      feedback = "endpoint error: " + error->message;
      state.ledger.entries.push_back(cost);
      result.attempt_log.push_back(feedback);
      continue;
    }
    auto& completion = std::get<Completion>(proposed);
    cost.prompt_tokens = completion.usage.prompt_tokens;
    cost.completion_tokens = completion.usage.completion_tokens;
    cost.wall_time_s = std::max(wall, completion.latency_s);

    std::string text = strip_code_fences(completion.text);
    auto parsed = skillscript::parse(text);
    if (auto* err = std::get_if<skillscript::ParseError>(&parsed)) {
      feedback = "parse error: " + err->to_string();
    } else {
      auto& doc = std::get<skillscript::SkillDocument>(parsed);
      auto validation =
          skillscript::validate(doc, sim::standard_counter_vocabulary());
      if (validation.has_errors()) {
        feedback = "validation errors:\n" + skillscript::report_to_text(validation);
      } else {
        feedback = smoke_test(doc);
      }
      if (feedback.empty()) {
        std::string canonical = skillscript::serialize(doc);
        cost.accepted = true;
        state.ledger.entries.push_back(cost);
        if (canonical == state.current) {
          result.outcome = Outcome::Unchanged;
          result.attempt_log.push_back("accepted: unchanged");
        } else if (state.best.valid &&
                   canonical == canonicalize(state.best.library_text)) {
          result.outcome = Outcome::RolledBack;
          result.attempt_log.push_back("accepted: rolled back to best");
        } else {
          result.outcome = Outcome::Updated;
          result.attempt_log.push_back("accepted: updated");
        }
        state.current = canonical;
        state.k += 1;
        return result;
      }
    }
    state.ledger.entries.push_back(cost);
    result.attempt_log.push_back(feedback);
    prompt = result.prompt + "\n## Validator Feedback (attempt " +
             std::to_string(attempt) + ")\nYour previous output was rejected:\n" +
             feedback + "\nOutput a corrected skill-DSL document.\n";
  }

  result.outcome = Outcome::KeptPrevious;
  state.k += 1;
  return result;
}

MockOracle::MockOracle(const std::string& canned_library_text) {
  auto parsed = skillscript::parse(canned_library_text);
  if (auto* err = std::get_if<skillscript::ParseError>(&parsed))
    throw std::invalid_argument("canned library does not parse: " +
                                err->to_string());
  canned_ = std::get<skillscript::SkillDocument>(parsed);
}

CompletionResult MockOracle::propose(const std::string& prompt,
                                     const telemetry::DiagnosticReport& report,
                                     const OptimizerState& state) {
  Completion completion;
  completion.text = mock_oracle(report, state, canned_);
  // Plausible accounting so the ledger paths are exercised offline.
  completion.usage.prompt_tokens = std::int64_t(prompt.size() / 4);
  completion.usage.completion_tokens = std::int64_t(completion.text.size() / 4);
  return completion;
}

}  // namespace skillforge::optimizer
