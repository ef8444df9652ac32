#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "skillforge/sim/config.hpp"

namespace skillforge::sim {

enum class StationKind {
  BreadSource,
  BeefSource,
  LettuceSource,
  Stove,
  CuttingBoard,
  AssemblyCounter,
  ServingWindow,
};
constexpr int kStationKinds = 7;
const char* to_string(StationKind kind);

enum class Dish { BeefBurger, LettuceBurger, BeefLettuceBurger };
const char* to_string(Dish dish);
std::optional<Dish> dish_from_string(const std::string& name);
// Task name of the DSL goal for a dish (make_BeefBurger etc.).
std::string task_name(Dish dish);

enum class ItemKind {
  None,
  Bread,
  RawBeef,
  RawLettuce,
  CookedBeef,
  ChoppedLettuce,
  BeefBurgerItem,
  LettuceBurgerItem,
  BeefLettuceBurgerItem,
};
const char* to_string(ItemKind item);
ItemKind burger_item(Dish dish);

enum class Direction { North, East, South, West };
const char* to_string(Direction dir);

struct Vec2 {
  int x = 0;
  int y = 0;
  bool operator==(const Vec2&) const = default;
};

struct PrimitiveAction {
  enum class Kind { Move, Interact, NoOp };
  Kind kind = Kind::NoOp;
  Direction dir = Direction::North;          // Move
  StationKind station = StationKind::Stove;  // Interact
  // Assembly-counter interactions are ambiguous without intent: the same
  // keypress either assembles a dish from counter ingredients or takes a
  // finished burger. Other stations ignore these fields.
  std::optional<Dish> dish;
  bool assemble = false;

  static PrimitiveAction noop() { return {}; }
  static PrimitiveAction move(Direction d) {
    return {Kind::Move, d, StationKind::Stove, std::nullopt, false};
  }
  static PrimitiveAction interact(StationKind s) {
    return {Kind::Interact, Direction::North, s, std::nullopt, false};
  }
  static PrimitiveAction interact_assemble(Dish d) {
    return {Kind::Interact, Direction::North, StationKind::AssemblyCounter, d, true};
  }
  static PrimitiveAction interact_take(Dish d) {
    return {Kind::Interact, Direction::North, StationKind::AssemblyCounter, d, false};
  }
  bool operator==(const PrimitiveAction&) const = default;
};
std::string to_string(const PrimitiveAction& action);

struct Order {
  enum class Status { Pending, Delivered, Failed };
  int id = 0;
  Dish dish = Dish::BeefBurger;
  int issued_at = 0;
  int deadline = 0;
  Status status = Status::Pending;
};

struct Station {
  StationKind kind = StationKind::Stove;
  Vec2 pos;
  // Stove / cutting board processing slot.
  ItemKind content = ItemKind::None;
  int ready_at = -1;
  int placed_by = -1;
  // Assembly counter storage (ingredients and finished burgers).
  std::map<ItemKind, int> items;
};

struct AgentBody {
  Vec2 pos;
  Direction facing = Direction::South;
  ItemKind held = ItemKind::None;
  int busy_until = 0;
};

struct SimEvent {
  enum class Kind {
    SubtaskCompleted,
    OrderDelivered,
    OrderFailed,
    CounterChanged,
    AgentIdle,
    OrderSpawned,
  };
  Kind kind = Kind::AgentIdle;
  int tick = 0;
  int agent = -1;  // -1 for environment-driven events
  int reward = 0;
  std::string counter;  // CounterChanged
  int delta = 0;        // CounterChanged
  int order_id = -1;
  std::string reason;  // OrderFailed: timeout | wrong_dish; AgentIdle detail
  std::string detail;
};
const char* to_string(SimEvent::Kind kind);

struct StepResult {
  std::vector<SimEvent> events;
  int reward_delta = 0;
};

class World {
 public:
  static std::variant<World, std::string> create(const SimConfig& config);

  StepResult step(const std::vector<PrimitiveAction>& joint_action);
  std::vector<PrimitiveAction> legal_actions(int agent_id) const;

  int tick() const { return tick_; }
  int episode_length() const { return config_.episode_length; }
  const SimConfig& config() const { return config_; }
  const std::vector<AgentBody>& agents() const { return agents_; }
  const std::vector<Order>& orders() const { return orders_; }
  const std::vector<Station>& stations() const { return stations_; }
  const Station& station(StationKind kind) const;
  int cumulative_reward() const { return cumulative_reward_; }
  const std::map<std::string, std::int64_t>& counters() const { return counters_; }

  int pending_order_count() const;
  bool is_floor(Vec2 p) const;
  bool in_bounds(Vec2 p) const;
  bool agent_busy(int agent_id) const { return agents_[agent_id].busy_until > tick_; }

  // Brute-force recount of every counter from physical items; the oracle the
  // incrementally maintained counter block is checked against.
  std::map<std::string, std::int64_t> recount_counters() const;

  // Full state dump, including the RNG stream; equal dumps mean equal worlds.
  std::string serialize() const;

 private:
  World() = default;
  void emit_counter(std::vector<SimEvent>& events, const std::string& name, int delta);
  void change_item_count(std::vector<SimEvent>& events, ItemKind item, int delta);
  void interact(int agent_id, const PrimitiveAction& action,
                std::vector<SimEvent>& events);
  void idle(std::vector<SimEvent>& events, int agent_id, const std::string& why);

  SimConfig config_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::string> cells_;  // '#', '.', or station marker
  std::vector<Station> stations_;   // one per StationKind
  std::vector<AgentBody> agents_;
  std::vector<Order> orders_;
  std::map<std::string, std::int64_t> counters_;
  int tick_ = 0;
  int cumulative_reward_ = 0;
  int next_order_id_ = 0;
  std::mt19937_64 rng_;
};

// Counter name tracking the given item kind, or empty when untracked.
std::string counter_for_item(ItemKind item);

}  // namespace skillforge::sim
