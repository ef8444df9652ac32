#include "skillforge/harness/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "json.hpp"
#include "skillforge/runtime/agent.hpp"
#include "skillforge/sim/world.hpp"

namespace skillforge::harness {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

EpisodeResult run_episode(const sim::SimConfig& config,
                          const std::string& library_text, int iteration) {
  auto parsed = skillscript::parse(library_text);
  if (auto* err = std::get_if<skillscript::ParseError>(&parsed))
    throw std::runtime_error("library does not parse: " + err->to_string());
  auto doc = std::make_shared<const skillscript::SkillDocument>(
      std::get<skillscript::SkillDocument>(std::move(parsed)));

  auto created = sim::World::create(config);
  if (auto* err = std::get_if<std::string>(&created))
    throw std::runtime_error(*err);
  sim::World world = std::get<sim::World>(std::move(created));

  EpisodeResult result;
  result.iteration = iteration;
  result.seed = config.seed;
  result.library_hash = sim::fnv1a(skillscript::serialize(*doc));

  result.log.header.config_hash = sim::config_hash(config);
  result.log.header.seed = config.seed;
  result.log.header.iteration = iteration;
  result.log.header.library_hash = result.library_hash;

  std::vector<runtime::AgentContext> agents;
  for (int i = 0; i < config.n_agents; ++i) agents.emplace_back(i, doc);
  runtime::ClaimTable claims;

  auto begin = std::chrono::steady_clock::now();
  for (int t = 0; t < config.episode_length; ++t) {
    telemetry::TickRecord record;
    record.tick = t;
    std::vector<sim::PrimitiveAction> joint;
    for (auto& agent : agents) {
      bool busy = world.agent_busy(agent.id());
      auto decision = agent.tick(world, claims);
      for (const auto& f : decision.failures)
        result.log.record(telemetry::FailureRecord{f.tick, f.agent, f.construct,
                                                   f.reason, f.message});
      telemetry::AgentTickInfo info;
      info.action = sim::to_string(decision.action);
      info.category = decision.category;
      info.inactive = decision.inactive;
      info.busy = busy;
      info.construct = decision.construct;
      record.agents.push_back(std::move(info));
      joint.push_back(decision.action);
    }
    auto step = world.step(joint);
    record.events = std::move(step.events);
    record.counters = world.counters();
    result.log.record(std::move(record));
  }
  auto end = std::chrono::steady_clock::now();

  result.score = world.cumulative_reward();
  result.wall_time_s = std::chrono::duration<double>(end - begin).count();
  result.log.footer.score = result.score;
  result.log.footer.wall_time_s = result.wall_time_s;
  result.log.footer.online_tokens = runtime::AgentContext::online_tokens;
  return result;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void persist_spec(const LoopSpec& spec, const fs::path& dir) {
  json j;
  j["episodes"] = spec.episodes;
  j["master_seed"] = spec.master_seed;
  j["config_hash"] = sim::config_hash(spec.config);
  j["config"] = sim::config_to_text(spec.config);
  write_text(dir / "spec.json", j.dump(2) + "\n");
}

void persist_opt(const optimizer::StepResult& step,
                 std::int64_t offline_tokens, double offline_time_s,
                 const fs::path& path) {
  json j;
  j["outcome"] = optimizer::to_string(step.outcome);
  j["attempts"] = step.attempts;
  j["attempt_log"] = step.attempt_log;
  j["offline_tokens"] = offline_tokens;
  j["offline_time_s"] = offline_time_s;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

LoopResult run_loop(const LoopSpec& spec, optimizer::PatchSource* source) {
  LoopResult result;
  result.state = optimizer::make_state(spec.origin_library);

  fs::path dir;
  if (!spec.run_dir.empty()) {
    dir = spec.run_dir;
    fs::create_directories(dir / "skills");
    persist_spec(spec, dir);
  }

  for (int k = 0; k < spec.episodes; ++k) {
    sim::SimConfig config = spec.config;
    config.seed = spec.master_seed + std::uint64_t(k);

    std::string library = result.state.current;
    auto episode = run_episode(config, library, k);
    auto report = telemetry::build_report(episode.log);
    observe_score(result.state, k, episode.score, library,
                  "score " + std::to_string(episode.score));

    IterationRecord record;
    record.iteration = k;
    record.seed = config.seed;
    record.score = episode.score;
    record.online_time_s = episode.wall_time_s;
    record.online_tokens = episode.online_tokens;
    record.library_hash = episode.library_hash;

    if (!dir.empty()) {
      write_text(dir / "skills" / ("iter_" + std::to_string(k) + ".skill"),
                 library);
      write_text(dir / ("ep_" + std::to_string(k) + ".jsonl"),
                 episode.log.to_jsonl());
    }

    if (source) {
      std::size_t ledger_before = result.state.ledger.entries.size();
      auto step = optimize_step(result.state, report, *source);
      record.outcome = optimizer::to_string(step.outcome);
      record.attempts = step.attempts;
      for (std::size_t i = ledger_before; i < result.state.ledger.entries.size();
           ++i) {
        const auto& entry = result.state.ledger.entries[i];
        record.offline_tokens += entry.prompt_tokens + entry.completion_tokens;
        record.offline_time_s += entry.wall_time_s;
      }
      if (!dir.empty())
        persist_opt(step, record.offline_tokens, record.offline_time_s,
                    dir / ("opt_" + std::to_string(k) + ".json"));
    } else {
      // Keep iteration numbering aligned with the library index even when the
      // library is frozen.
      result.state.k += 1;
    }

    result.iterations.push_back(record);
  }

  if (!dir.empty()) {
    write_text(dir / "report.csv", report_csv(result.iterations));
    write_text(dir / "report.json", report_json(result));
    write_text(dir / "report.txt", report_text(result));
  }
  return result;
}

}  // namespace skillforge::harness
