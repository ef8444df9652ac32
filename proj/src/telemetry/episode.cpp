#include "skillforge/telemetry/episode.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "skillforge/sim/config.hpp"

namespace skillforge::telemetry {

using json = nlohmann::ordered_json;
using runtime::ActionCategory;

bool EpisodeLog::record(TickRecord record) {
  if (record.tick < last_tick_) return false;
  last_tick_ = record.tick;
  ticks.push_back(std::move(record));
  return true;
}

bool EpisodeLog::record(FailureRecord record) {
  if (record.tick < last_tick_) return false;
  last_tick_ = record.tick;
  failures.push_back(std::move(record));
  return true;
}

namespace {

json event_to_json(const sim::SimEvent& ev) {
  json j;
  j["kind"] = sim::to_string(ev.kind);
  j["tick"] = ev.tick;
  j["agent"] = ev.agent;
  j["reward"] = ev.reward;
  j["counter"] = ev.counter;
  j["delta"] = ev.delta;
  j["order_id"] = ev.order_id;
  j["reason"] = ev.reason;
  j["detail"] = ev.detail;
  return j;
}

std::variant<sim::SimEvent, std::string> event_from_json(const json& j) {
  sim::SimEvent ev;
  std::string kind = j.at("kind");
  bool known = false;
  for (int i = 0; i <= int(sim::SimEvent::Kind::OrderSpawned); ++i) {
    if (kind == sim::to_string(sim::SimEvent::Kind(i))) {
      ev.kind = sim::SimEvent::Kind(i);
      known = true;
    }
  }
  if (!known) return "unknown event kind " + kind;
  ev.tick = j.at("tick");
  ev.agent = j.at("agent");
  ev.reward = j.at("reward");
  ev.counter = j.at("counter");
  ev.delta = j.at("delta");
  ev.order_id = j.at("order_id");
  ev.reason = j.at("reason");
  ev.detail = j.at("detail");
  return ev;
}

json tick_to_json(const TickRecord& record) {
  json j;
  j["type"] = "tick";
  j["tick"] = record.tick;
  json agents = json::array();
  for (const auto& a : record.agents) {
    json aj;
    aj["action"] = a.action;
    aj["category"] = runtime::to_string(a.category);
    aj["inactive"] = a.inactive;
    aj["busy"] = a.busy;
    aj["construct"] = a.construct;
    agents.push_back(aj);
  }
  j["agents"] = agents;
  json events = json::array();
  for (const auto& ev : record.events) events.push_back(event_to_json(ev));
  j["events"] = events;
  j["counters"] = record.counters;
  return j;
}

json failure_to_json(const FailureRecord& record) {
  json j;
  j["type"] = "failure";
  j["tick"] = record.tick;
  j["agent"] = record.agent;
  j["construct"] = record.construct;
  j["reason"] = record.reason;
  j["message"] = record.message;
  return j;
}

}  // namespace

std::string EpisodeLog::to_jsonl() const {
  std::ostringstream out;
  json h;
  h["type"] = "header";
  h["config_hash"] = header.config_hash;
  h["seed"] = header.seed;
  h["iteration"] = header.iteration;
  h["library_hash"] = header.library_hash;
  out << h.dump() << "\n";

  // Interleave tick and failure records in tick order, failures first within
  // a tick (they were decided before the step applied).
  std::size_t ti = 0, fi = 0;
  while (ti < ticks.size() || fi < failures.size()) {
    bool take_failure =
        fi < failures.size() &&
        (ti >= ticks.size() || failures[fi].tick <= ticks[ti].tick);
    if (take_failure)
      out << failure_to_json(failures[fi++]).dump() << "\n";
    else
      out << tick_to_json(ticks[ti++]).dump() << "\n";
  }

  json f;
  f["type"] = "footer";
  f["score"] = footer.score;
  f["wall_time_s"] = footer.wall_time_s;
  f["online_tokens"] = footer.online_tokens;
  out << f.dump() << "\n";
  return out.str();
}

std::variant<EpisodeLog, std::string> EpisodeLog::from_jsonl(
    const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_header = false, saw_footer = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      return "line " + std::to_string(line_no) + ": malformed JSON";
    std::string type = j.value("type", "");
    if (type == "header") {
      log.header.config_hash = j.at("config_hash");
      log.header.seed = j.at("seed");
      log.header.iteration = j.at("iteration");
      log.header.library_hash = j.at("library_hash");
      saw_header = true;
    } else if (type == "tick") {
      TickRecord record;
      record.tick = j.at("tick");
      for (const auto& aj : j.at("agents")) {
        AgentTickInfo info;
        info.action = aj.at("action");
        auto cat = runtime::category_from_string(aj.at("category"));
        if (!cat) return "line " + std::to_string(line_no) + ": bad category";
        info.category = *cat;
        info.inactive = aj.at("inactive");
        info.busy = aj.at("busy");
        info.construct = aj.at("construct");
        record.agents.push_back(info);
      }
      for (const auto& ej : j.at("events")) {
        auto ev = event_from_json(ej);
        if (auto* err = std::get_if<std::string>(&ev))
          return "line " + std::to_string(line_no) + ": " + *err;
        record.events.push_back(std::get<sim::SimEvent>(ev));
      }
      record.counters =
          j.at("counters").get<std::map<std::string, std::int64_t>>();
      if (!log.record(std::move(record)))
        return "line " + std::to_string(line_no) + ": out-of-order tick";
    } else if (type == "failure") {
      FailureRecord record;
      record.tick = j.at("tick");
      record.agent = j.at("agent");
      record.construct = j.at("construct");
      record.reason = j.at("reason");
      record.message = j.at("message");
      if (!log.record(std::move(record)))
        return "line " + std::to_string(line_no) + ": out-of-order tick";
    } else if (type == "footer") {
      log.footer.score = j.at("score");
      log.footer.wall_time_s = j.at("wall_time_s");
      log.footer.online_tokens = j.at("online_tokens");
      saw_footer = true;
    } else {
      return "line " + std::to_string(line_no) + ": unknown record type";
    }
  }
  if (!saw_header) return "missing header record";
  if (!saw_footer) return "missing footer record";
  return log;
}

std::uint64_t EpisodeLog::hash() const { return sim::fnv1a(to_jsonl()); }

std::vector<StagnationInterval> detect_stagnation(const EpisodeLog& log,
                                                  int threshold) {
  std::vector<StagnationInterval> intervals;
  if (log.ticks.empty()) return intervals;
  std::size_t n_agents = log.ticks.front().agents.size();
  for (std::size_t agent = 0; agent < n_agents; ++agent) {
    std::size_t run_start = 0;
    std::size_t run_len = 0;
    auto flush = [&](std::size_t end) {
      if (int(run_len) >= threshold) {
        StagnationInterval interval;
        interval.agent = int(agent);
        interval.start = log.ticks[run_start].tick;
        interval.length = int(run_len);
        for (std::size_t i = run_start;
             i < end && interval.head.size() < 5; ++i)
          interval.head.push_back(log.ticks[i]);
        intervals.push_back(std::move(interval));
      }
      run_len = 0;
    };
    for (std::size_t i = 0; i < log.ticks.size(); ++i) {
      bool inactive = agent < log.ticks[i].agents.size() &&
                      log.ticks[i].agents[agent].inactive;
      if (inactive) {
        if (run_len == 0) run_start = i;
        ++run_len;
      } else {
        flush(i);
      }
    }
    flush(log.ticks.size());
  }
  std::stable_sort(intervals.begin(), intervals.end(),
                   [](const StagnationInterval& a, const StagnationInterval& b) {
                     return a.start < b.start;
                   });
  return intervals;
}

FailureContext failure_context(const EpisodeLog& log,
                               const FailureRecord& failure) {
  FailureContext context;
  context.failure = failure;
  int lo = failure.tick - 2;
  int hi = failure.tick + 2;
  for (const auto& record : log.ticks)
    if (record.tick >= lo && record.tick <= hi)
      context.window.push_back(record);
  if (!log.ticks.empty()) {
    context.clipped_front = lo < log.ticks.front().tick;
    context.clipped_back = hi > log.ticks.back().tick;
  }
  return context;
}

std::int64_t ActionDistribution::total() const {
  std::int64_t sum = 0;
  for (auto c : count) sum += c;
  return sum;
}

ActionDistribution action_distribution(const EpisodeLog& log) {
  ActionDistribution dist;
  if (log.ticks.empty()) return dist;
  std::size_t n_agents = log.ticks.front().agents.size();
  for (std::size_t agent = 0; agent < n_agents; ++agent) {
    int previous = -1;
    for (const auto& record : log.ticks) {
      if (agent >= record.agents.size()) continue;
      int cat = int(record.agents[agent].category);
      dist.count[cat] += 1;
      if (cat != previous) dist.runs[cat] += 1;
      previous = cat;
    }
  }
  return dist;
}

DiagnosticReport build_report(const EpisodeLog& log) {
  DiagnosticReport report;
  for (const auto& failure : log.failures)
    report.runtime_failures.push_back(failure_context(log, failure));
  report.stagnation = detect_stagnation(log);
  report.distribution = action_distribution(log);
  report.score = log.footer.score;
  return report;
}

namespace {

void render_tick(std::ostringstream& out, const TickRecord& record) {
  out << "    tick " << record.tick << ":";
  for (std::size_t i = 0; i < record.agents.size(); ++i) {
    const auto& a = record.agents[i];
    out << " a" << i << "=" << a.action;
    if (!a.construct.empty()) out << "(" << a.construct << ")";
  }
  out << " |";
  for (const auto& [name, value] : record.counters)
    if (value != 0) out << " " << name << "=" << value;
  out << "\n";
}

}  // namespace

std::string report_to_text(const DiagnosticReport& report) {
  std::ostringstream out;
  out << "Score: " << report.score << "\n\n";

  out << "Runtime failures (" << report.runtime_failures.size() << "):\n";
  for (const auto& fc : report.runtime_failures) {
    out << "- tick " << fc.failure.tick << " agent " << fc.failure.agent
        << " " << fc.failure.construct << " [" << fc.failure.reason << "] "
        << fc.failure.message << "\n";
    out << "  context (t-2..t+2"
        << (fc.clipped_front ? ", clipped at start" : "")
        << (fc.clipped_back ? ", clipped at end" : "") << "):\n";
    for (const auto& record : fc.window) render_tick(out, record);
  }
  if (report.runtime_failures.empty()) out << "- none\n";
  out << "\n";

  out << "Stagnation intervals (" << report.stagnation.size() << "):\n";
  for (const auto& interval : report.stagnation) {
    out << "- agent " << interval.agent << " idle from tick "
        << interval.start << " for " << interval.length << " ticks\n";
    out << "  first ticks of the interval:\n";
    for (const auto& record : interval.head) render_tick(out, record);
  }
  if (report.stagnation.empty()) out << "- none\n";
  out << "\n";

  out << "Action distribution (agent-ticks):\n";
  for (int i = 0; i < runtime::kActionCategories; ++i)
    out << "- " << runtime::to_string(ActionCategory(i)) << ": "
        << report.distribution.count[i] << " (" << report.distribution.runs[i]
        << " stretches)\n";
  return out.str();
}

std::string report_to_json(const DiagnosticReport& report) {
  json j;
  j["score"] = report.score;
  json failures = json::array();
  for (const auto& fc : report.runtime_failures) {
    json fj = failure_to_json(fc.failure);
    fj.erase("type");
    fj["clipped_front"] = fc.clipped_front;
    fj["clipped_back"] = fc.clipped_back;
    json window = json::array();
    for (const auto& record : fc.window) {
      json tj = tick_to_json(record);
      tj.erase("type");
      window.push_back(tj);
    }
    fj["window"] = window;
    failures.push_back(fj);
  }
  j["runtime_failures"] = failures;
  json stagnation = json::array();
  for (const auto& interval : report.stagnation) {
    json sj;
    sj["agent"] = interval.agent;
    sj["start"] = interval.start;
    sj["length"] = interval.length;
    json head = json::array();
    for (const auto& record : interval.head) {
      json tj = tick_to_json(record);
      tj.erase("type");
      head.push_back(tj);
    }
    sj["head"] = head;
    stagnation.push_back(sj);
  }
  j["stagnation"] = stagnation;
  json dist;
  for (int i = 0; i < runtime::kActionCategories; ++i) {
    json cj;
    cj["count"] = report.distribution.count[i];
    cj["runs"] = report.distribution.runs[i];
    dist[runtime::to_string(ActionCategory(i))] = cj;
  }
  j["action_distribution"] = dist;
  return j.dump(2);
}

}  // namespace skillforge::telemetry
