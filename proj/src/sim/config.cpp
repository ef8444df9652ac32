#include "skillforge/sim/config.hpp"

#include <fstream>
#include <sstream>

namespace skillforge::sim {

SimConfig default_config() {
  SimConfig config;
  config.layout = {
      "#B#S#F###",
      "#.......#",
      "W.......#",
      "#..0.1..#",
      "A.......#",
      "#.......#",
      "##C##L###",
  };
  return config;
}

namespace {

bool parse_number(const std::string& value, double& out) {
  std::istringstream in(value);
  in >> out;
  return bool(in) && in.eof();
}

}  // namespace

std::variant<SimConfig, ConfigError> parse_config(const std::string& text) {
  SimConfig config;
  config.layout.clear();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    auto first = trimmed.find_first_not_of(" \t");
    if (first == std::string::npos || trimmed[first] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      return ConfigError{"line " + std::to_string(line_no) + ": expected key = value"};
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = strip(trimmed.substr(0, eq));
    std::string value = strip(trimmed.substr(eq + 1));
    if (key == "layout") {
      config.layout.push_back(value);
      continue;
    }
    double num = 0;
    if (!parse_number(value, num))
      return ConfigError{"line " + std::to_string(line_no) + ": '" + key +
                         "' is not numeric"};
    if (key == "episode_length") config.episode_length = int(num);
    else if (key == "max_concurrent_orders") config.max_concurrent_orders = int(num);
    else if (key == "reward_deliver") config.reward_deliver = int(num);
    else if (key == "reward_subtask") config.reward_subtask = int(num);
    else if (key == "reward_failure") config.reward_failure = int(num);
    else if (key == "n_agents") config.n_agents = int(num);
    else if (key == "gamma") config.gamma = num;
    else if (key == "cook_ticks") config.cook_ticks = int(num);
    else if (key == "chop_ticks") config.chop_ticks = int(num);
    else if (key == "order_spawn_prob") config.order_spawn_prob = num;
    else if (key == "deadline_min") config.deadline_min = int(num);
    else if (key == "deadline_max") config.deadline_max = int(num);
    else if (key == "station_patience") config.station_patience = int(num);
    else if (key == "seed") config.seed = std::uint64_t(num);
    else return ConfigError{"line " + std::to_string(line_no) + ": unknown key '" + key + "'"};
  }
  if (config.layout.empty()) config.layout = default_config().layout;
  if (config.episode_length <= 0) return ConfigError{"episode_length must be > 0"};
  if (config.max_concurrent_orders < 1)
    return ConfigError{"max_concurrent_orders must be >= 1"};
  if (config.gamma < 0.0 || config.gamma > 1.0)
    return ConfigError{"gamma must be in [0, 1]"};
  if (config.deadline_min > config.deadline_max)
    return ConfigError{"deadline_min must not exceed deadline_max"};
  return config;
}

std::variant<SimConfig, ConfigError> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return ConfigError{"cannot open config file " + path};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_text(const SimConfig& config) {
  std::ostringstream out;
  out << "episode_length = " << config.episode_length << "\n"
      << "max_concurrent_orders = " << config.max_concurrent_orders << "\n"
      << "reward_deliver = " << config.reward_deliver << "\n"
      << "reward_subtask = " << config.reward_subtask << "\n"
      << "reward_failure = " << config.reward_failure << "\n"
      << "n_agents = " << config.n_agents << "\n"
      << "gamma = " << config.gamma << "\n"
      << "cook_ticks = " << config.cook_ticks << "\n"
      << "chop_ticks = " << config.chop_ticks << "\n"
      << "order_spawn_prob = " << config.order_spawn_prob << "\n"
      << "deadline_min = " << config.deadline_min << "\n"
      << "deadline_max = " << config.deadline_max << "\n"
      << "station_patience = " << config.station_patience << "\n"
      << "seed = " << config.seed << "\n";
  for (const auto& row : config.layout) out << "layout = " << row << "\n";
  return out.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t config_hash(const SimConfig& config) {
  return fnv1a(config_to_text(config));
}

}  // namespace skillforge::sim
