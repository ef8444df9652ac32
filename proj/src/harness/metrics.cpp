#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "skillforge/harness/harness.hpp"

namespace skillforge::harness {

using json = nlohmann::ordered_json;

double round_half_up_1dp(double v) {
  return std::round(v * 10.0) / 10.0;
}

std::vector<double> block_means(const std::vector<int>& scores, int block) {
  std::vector<double> means;
  if (block <= 0) return means;
  for (std::size_t start = 0; start < scores.size(); start += block) {
    std::size_t end = std::min(scores.size(), start + std::size_t(block));
    double sum = std::accumulate(scores.begin() + start, scores.begin() + end, 0.0);
    means.push_back(sum / double(end - start));
  }
  return means;
}

const std::vector<BaselineCost>& baseline_costs() {
  static const std::vector<BaselineCost> costs = {
      {"ReAct", 79126, 182.3},
      {"Reflexion", 35635, 67.7},
      {"DPT", 30090, 71.0},
  };
  return costs;
}

EfficiencyMetrics efficiency_metrics(const std::vector<int>& scores,
                                     std::int64_t total_tokens,
                                     double total_seconds) {
  EfficiencyMetrics m;
  if (scores.empty()) return m;
  m.mean_score =
      std::accumulate(scores.begin(), scores.end(), 0.0) / double(scores.size());
  double mean_seconds = total_seconds / double(scores.size());
  if (mean_seconds > 0) m.score_per_second = m.mean_score / mean_seconds;
  if (total_tokens > 0)
    m.score_per_1k_tokens = m.mean_score / (double(total_tokens) / 1000.0);
  return m;
}

int break_even_episode(const std::vector<double>& own_cost_per_episode,
                       double baseline_cost_per_episode) {
  double own = 0.0;
  for (std::size_t n = 0; n < own_cost_per_episode.size(); ++n) {
    own += own_cost_per_episode[n];
    if (own <= baseline_cost_per_episode * double(n + 1)) return int(n + 1);
  }
  return 0;
}

std::string report_csv(const std::vector<IterationRecord>& records) {
  std::ostringstream out;
  out << "iteration,seed,score,online_time_s,online_tokens,offline_tokens,"
         "offline_time_s,library_hash,outcome,attempts\n";
  for (const auto& r : records) {
    out << r.iteration << ',' << r.seed << ',' << r.score << ','
        << std::setprecision(9) << r.online_time_s << ',' << r.online_tokens
        << ',' << r.offline_tokens << ',' << r.offline_time_s << ','
        << r.library_hash << ',' << r.outcome << ',' << r.attempts << '\n';
  }
  return out.str();
}

std::variant<std::vector<IterationRecord>, std::string> records_from_csv(
    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return std::string("empty CSV");
  std::vector<IterationRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 10)
      return "line " + std::to_string(line_no) + ": expected 10 fields, got " +
             std::to_string(fields.size());
    try {
      IterationRecord r;
      r.iteration = std::stoi(fields[0]);
      r.seed = std::stoull(fields[1]);
      r.score = std::stoi(fields[2]);
      r.online_time_s = std::stod(fields[3]);
      r.online_tokens = std::stoll(fields[4]);
      r.offline_tokens = std::stoll(fields[5]);
      r.offline_time_s = std::stod(fields[6]);
      r.library_hash = std::stoull(fields[7]);
      r.outcome = fields[8];
      r.attempts = std::stoi(fields[9]);
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      return "line " + std::to_string(line_no) + ": " + e.what();
    }
  }
  return records;
}

namespace {

std::vector<int> scores_of(const std::vector<IterationRecord>& records) {
  std::vector<int> scores;
  for (const auto& r : records) scores.push_back(r.score);
  return scores;
}

struct Totals {
  std::int64_t tokens = 0;  // online + offline
  double seconds = 0.0;
};

Totals totals_of(const std::vector<IterationRecord>& records) {
  Totals t;
  for (const auto& r : records) {
    t.tokens += r.online_tokens + r.offline_tokens;
    t.seconds += r.online_time_s + r.offline_time_s;
  }
  return t;
}

}  // namespace

std::string report_json(const LoopResult& result) {
  json j;
  j["iterations"] = json::array();
  for (const auto& r : result.iterations) {
    j["iterations"].push_back({{"iteration", r.iteration},
                               {"seed", r.seed},
                               {"score", r.score},
                               {"online_time_s", r.online_time_s},
                               {"online_tokens", r.online_tokens},
                               {"offline_tokens", r.offline_tokens},
                               {"offline_time_s", r.offline_time_s},
                               {"library_hash", r.library_hash},
                               {"outcome", r.outcome},
                               {"attempts", r.attempts}});
  }
  auto scores = scores_of(result.iterations);
  auto totals = totals_of(result.iterations);
  auto eff = efficiency_metrics(scores, totals.tokens, totals.seconds);
  j["mean_score"] = eff.mean_score;
  j["block_means"] = json::array();
  for (double m : block_means(scores)) j["block_means"].push_back(round_half_up_1dp(m));
  j["total_tokens"] = totals.tokens;
  j["total_time_s"] = totals.seconds;
  j["score_per_second"] = eff.score_per_second;
  j["score_per_1k_tokens"] = eff.score_per_1k_tokens;
  j["break_even"] = json::object();
  std::vector<double> own_tokens;
  for (const auto& r : result.iterations)
    own_tokens.push_back(double(r.online_tokens + r.offline_tokens));
  for (const auto& b : baseline_costs())
    j["break_even"][b.name] =
        break_even_episode(own_tokens, double(b.tokens_per_episode));
  if (result.state.best.valid) {
    j["best"] = {{"iteration", result.state.best.iteration},
                 {"score", result.state.best.score}};
  }
  return j.dump(2) + "\n";
}

std::string report_text(const LoopResult& result) {
  std::ostringstream out;
  out << std::fixed;
  out << "iter  seed        score  tokens(off)  time_s(on+off)  outcome\n";
  for (const auto& r : result.iterations) {
    out << std::setw(4) << r.iteration << "  " << std::setw(10) << r.seed
        << "  " << std::setw(5) << r.score << "  " << std::setw(11)
        << r.offline_tokens << "  " << std::setw(14) << std::setprecision(3)
        << (r.online_time_s + r.offline_time_s) << "  " << r.outcome << "\n";
  }
  auto scores = scores_of(result.iterations);
  auto totals = totals_of(result.iterations);
  auto eff = efficiency_metrics(scores, totals.tokens, totals.seconds);
  out << "\nMean score: " << std::setprecision(1)
      << round_half_up_1dp(eff.mean_score) << "\n";
  out << "Block means (10 episodes):";
  for (double m : block_means(scores))
    out << " " << std::setprecision(1) << round_half_up_1dp(m);
  out << "\n";
  out << "Total tokens: " << totals.tokens << " (online "
      << std::accumulate(result.iterations.begin(), result.iterations.end(),
                         std::int64_t(0),
                         [](std::int64_t acc, const IterationRecord& r) {
                           return acc + r.online_tokens;
                         })
      << ")\n";
  out << "Total time: " << std::setprecision(3) << totals.seconds << " s\n";
  out << "Score per second: " << std::setprecision(3) << eff.score_per_second
      << "\n";
  out << "Score per 1k tokens: " << std::setprecision(3)
      << eff.score_per_1k_tokens << "\n";
  std::vector<double> own_tokens;
  for (const auto& r : result.iterations)
    own_tokens.push_back(double(r.online_tokens + r.offline_tokens));
  for (const auto& b : baseline_costs()) {
    int n = break_even_episode(own_tokens, double(b.tokens_per_episode));
    out << "Break-even vs " << b.name << " (" << b.tokens_per_episode
        << " tok/ep): "
        << (n == 0 ? std::string("not within horizon")
                   : "episode " + std::to_string(n))
        << "\n";
  }
  if (result.state.best.valid)
    out << "Best: score " << result.state.best.score << " at iteration "
        << result.state.best.iteration << "\n";
  return out.str();
}

}  // namespace skillforge::harness
