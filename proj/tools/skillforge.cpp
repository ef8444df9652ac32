#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "skillforge/harness/harness.hpp"
#include "skillforge/htn/planner.hpp"
#include "skillforge/runtime/agent.hpp"
#include "skillforge/sim/schema.hpp"
#include "skillforge/skillscript/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;  // input rejected (parse/validation/arguments)
constexpr int kExitRuntime = 3;  // execution failed

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

skillforge::sim::SimConfig config_from(const std::string& path) {
  if (path.empty()) return skillforge::sim::default_config();
  auto loaded = skillforge::sim::load_config_file(path);
  if (auto* err = std::get_if<skillforge::sim::ConfigError>(&loaded))
    throw std::invalid_argument(err->message);
  return std::get<skillforge::sim::SimConfig>(loaded);
}

int cmd_check(const std::string& library_path, bool as_json) {
  using namespace skillforge;
  auto text = slurp(library_path);
  auto parsed = skillscript::parse(text);
  if (auto* err = std::get_if<skillscript::ParseError>(&parsed)) {
    std::cerr << "parse error: " << err->to_string() << "\n";
    return kExitInvalid;
  }
  auto& doc = std::get<skillscript::SkillDocument>(parsed);
  auto report = skillscript::validate(doc, sim::standard_counter_vocabulary());
  std::cout << (as_json ? skillscript::report_to_json(report)
                        : skillscript::report_to_text(report));
  return report.has_errors() ? kExitInvalid : kExitOk;
}

int cmd_plan(const std::string& library_path, const std::string& task,
             const std::string& state_spec) {
  using namespace skillforge;
  auto parsed = skillscript::parse(slurp(library_path));
  if (auto* err = std::get_if<skillscript::ParseError>(&parsed)) {
    std::cerr << "parse error: " << err->to_string() << "\n";
    return kExitInvalid;
  }
  auto& doc = std::get<skillscript::SkillDocument>(parsed);

  htn::AbstractState state;
  std::istringstream pairs(state_spec);
  std::string pair;
  while (std::getline(pairs, pair, ',')) {
    if (pair.empty()) continue;
    auto eq = pair.find('=');
    if (eq == std::string::npos) {
      std::cerr << "bad state entry '" << pair << "', expected counter=value\n";
      return kExitInvalid;
    }
    try {
      state.counters[pair.substr(0, eq)] = std::stoll(pair.substr(eq + 1));
    } catch (const std::exception&) {
      std::cerr << "bad state entry '" << pair << "', expected counter=value\n";
      return kExitInvalid;
    }
  }

  auto result =
      htn::plan(doc, state, {htn::Task{task, {htn::Value{std::string("a0")}}}});
  if (auto* failure = std::get_if<htn::PlanFailure>(&result)) {
    std::cout << "plan failed at " << failure->construct << ": "
              << htn::to_string(failure->reason) << " " << failure->message
              << "\n";
    return kExitRuntime;
  }
  auto& plan = std::get<htn::Plan>(result);
  for (const auto& op : plan.ops) {
    std::cout << op.op << "(";
    for (std::size_t i = 0; i < op.args.size(); ++i) {
      if (i) std::cout << ", ";
      std::cout << htn::value_to_string(op.args[i]);
    }
    std::cout << ")\n";
  }
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& library_path,
            std::uint64_t seed, int iteration, const std::string& log_path,
            const std::string& report_format) {
  using namespace skillforge;
  auto config = config_from(config_path);
  config.seed = seed;
  auto episode = harness::run_episode(config, slurp(library_path), iteration);
  if (!log_path.empty()) {
    std::ofstream out(log_path);
    out << episode.log.to_jsonl();
  }
  auto report = telemetry::build_report(episode.log);
  if (report_format == "json")
    std::cout << telemetry::report_to_json(report) << "\n";
  else
    std::cout << telemetry::report_to_text(report);
  std::cout << "score " << episode.score << "\n";
  return kExitOk;
}

int cmd_loop(const std::string& config_path, const std::string& library_path,
             int episodes, std::uint64_t master_seed,
             const std::string& optimizer_kind, const std::string& canned_path,
             const std::string& endpoint_url, const std::string& model,
             const std::string& out_dir) {
  using namespace skillforge;
  harness::LoopSpec spec;
  spec.config = config_from(config_path);
  spec.origin_library = slurp(library_path);
  spec.episodes = episodes;
  spec.master_seed = master_seed;
  spec.run_dir = out_dir;

  std::unique_ptr<optimizer::PatchSource> source;
  if (optimizer_kind == "mock") {
    source = std::make_unique<optimizer::MockOracle>(slurp(canned_path));
  } else if (optimizer_kind == "endpoint") {
    optimizer::EndpointConfig endpoint;
    endpoint.base_url = endpoint_url;
    endpoint.model = model;
    source = std::make_unique<optimizer::HttpBackend>(endpoint);
  } else if (optimizer_kind != "none") {
    std::cerr << "unknown optimizer '" << optimizer_kind
              << "' (expected mock|endpoint|none)\n";
    return kExitInvalid;
  }

  auto result = harness::run_loop(spec, source.get());
  std::cout << harness::report_text(result);
  return kExitOk;
}

int cmd_replay(const std::string& log_path, const std::string& report_format) {
  using namespace skillforge;
  auto loaded = telemetry::EpisodeLog::from_jsonl(slurp(log_path));
  if (auto* err = std::get_if<std::string>(&loaded)) {
    std::cerr << "bad log: " << *err << "\n";
    return kExitInvalid;
  }
  auto report =
      telemetry::build_report(std::get<telemetry::EpisodeLog>(loaded));
  if (report_format == "json")
    std::cout << telemetry::report_to_json(report) << "\n";
  else
    std::cout << telemetry::report_to_text(report);
  return kExitOk;
}

int cmd_report(const std::string& csv_path) {
  using namespace skillforge;
  auto parsed = harness::records_from_csv(slurp(csv_path));
  if (auto* err = std::get_if<std::string>(&parsed)) {
    std::cerr << "bad CSV: " << *err << "\n";
    return kExitInvalid;
  }
  harness::LoopResult result;
  result.iterations = std::get<std::vector<harness::IterationRecord>>(parsed);
  std::cout << harness::report_text(result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skillforge: skill-driven kitchen agents with an offline "
               "library co-optimizer"};
  app.require_subcommand(1);

  std::string config_path, library_path, log_path, csv_path, state_spec, task;
  std::string report_format = "text", optimizer_kind = "mock";
  std::string canned_path, endpoint_url = "http://localhost:8080/v1", model;
  std::string out_dir;
  std::uint64_t seed = 0, master_seed = 0;
  int episodes = 10, iteration = 0;
  bool as_json = false;

  auto* run = app.add_subcommand("run", "execute one episode");
  run->add_option("--config", config_path, "simulator config file");
  run->add_option("--library", library_path, "skill library")->required();
  run->add_option("--seed", seed, "episode seed");
  run->add_option("--iteration", iteration, "library iteration tag");
  run->add_option("--log", log_path, "write the episode log here (JSONL)");
  run->add_option("--report", report_format, "text|json");

  auto* loop = app.add_subcommand("loop", "run the execute-optimize loop");
  loop->add_option("--config", config_path, "simulator config file");
  loop->add_option("--library", library_path, "origin skill library")->required();
  loop->add_option("--episodes", episodes, "number of episodes");
  loop->add_option("--master-seed", master_seed, "seed of episode 0");
  loop->add_option("--optimizer", optimizer_kind, "mock|endpoint|none");
  loop->add_option("--canned", canned_path,
                   "reference library for the mock optimizer");
  loop->add_option("--endpoint", endpoint_url, "chat-completions base URL");
  loop->add_option("--model", model, "model name sent to the endpoint");
  loop->add_option("--out", out_dir, "artifact directory");

  auto* replay = app.add_subcommand("replay", "diagnose a stored episode log");
  replay->add_option("log", log_path, "episode log (JSONL)")->required();
  replay->add_option("--report", report_format, "text|json");

  auto* report = app.add_subcommand("report", "summarize loop results");
  report->add_option("--from-csv", csv_path, "report.csv from a loop run")
      ->required();

  auto* check = app.add_subcommand("check", "validate a skill library");
  check->add_option("library", library_path, "skill library")->required();
  check->add_flag("--json", as_json, "machine-readable output");

  auto* plan = app.add_subcommand("plan", "decompose a task on paper");
  plan->add_option("--library", library_path, "skill library")->required();
  plan->add_option("--task", task, "task name, e.g. make_BeefBurger")
      ->required();
  plan->add_option("--state", state_spec, "counters as name=value,...");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, library_path, seed, iteration, log_path,
                     report_format);
    if (loop->parsed()) {
      if (optimizer_kind == "mock" && canned_path.empty()) {
        std::cerr << "--optimizer mock requires --canned\n";
        return kExitInvalid;
      }
      return cmd_loop(config_path, library_path, episodes, master_seed,
                      optimizer_kind, canned_path, endpoint_url, model, out_dir);
    }
    if (replay->parsed()) return cmd_replay(log_path, report_format);
    if (report->parsed()) return cmd_report(csv_path);
    if (check->parsed()) return cmd_check(library_path, as_json);
    if (plan->parsed()) return cmd_plan(library_path, task, state_spec);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
