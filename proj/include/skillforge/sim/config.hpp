#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace skillforge::sim {

struct SimConfig {
  int episode_length = 500;
  int max_concurrent_orders = 4;
  int reward_deliver = 20;
  int reward_subtask = 5;
  int reward_failure = -10;
  int n_agents = 2;
  double gamma = 1.0;  // stored for the Dec-MDP tuple; returns are reported raw
  int cook_ticks = 20;
  int chop_ticks = 10;
  double order_spawn_prob = 0.03;
  int deadline_min = 150;
  int deadline_max = 300;
  int station_patience = 60;  // ticks an agent waits on an occupied station
  std::uint64_t seed = 0;
  std::vector<std::string> layout;  // rows of cells, see docs/config.md
};

struct ConfigError {
  std::string message;
};

// Built-in kitchen with one station of each kind; identical to
// configs/standard.cfg.
SimConfig default_config();

std::variant<SimConfig, ConfigError> parse_config(const std::string& text);
std::variant<SimConfig, ConfigError> load_config_file(const std::string& path);
std::string config_to_text(const SimConfig& config);

// Stable hash of the canonical config text, recorded in episode log headers.
std::uint64_t config_hash(const SimConfig& config);

std::uint64_t fnv1a(const std::string& text);

}  // namespace skillforge::sim
