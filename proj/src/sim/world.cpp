#include "skillforge/sim/world.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "skillforge/sim/schema.hpp"

namespace skillforge::sim {

const char* to_string(StationKind kind) {
  switch (kind) {
    case StationKind::BreadSource: return "BreadSource";
    case StationKind::BeefSource: return "BeefSource";
    case StationKind::LettuceSource: return "LettuceSource";
    case StationKind::Stove: return "Stove";
    case StationKind::CuttingBoard: return "CuttingBoard";
    case StationKind::AssemblyCounter: return "AssemblyCounter";
    case StationKind::ServingWindow: return "ServingWindow";
  }
  return "?";
}

const char* to_string(Dish dish) {
  switch (dish) {
    case Dish::BeefBurger: return "BeefBurger";
    case Dish::LettuceBurger: return "LettuceBurger";
    case Dish::BeefLettuceBurger: return "BeefLettuceBurger";
  }
  return "?";
}

std::optional<Dish> dish_from_string(const std::string& name) {
  if (name == "BeefBurger") return Dish::BeefBurger;
  if (name == "LettuceBurger") return Dish::LettuceBurger;
  if (name == "BeefLettuceBurger") return Dish::BeefLettuceBurger;
  return std::nullopt;
}

std::string task_name(Dish dish) {
  return std::string("make_") + to_string(dish);
}

const char* to_string(ItemKind item) {
  switch (item) {
    case ItemKind::None: return "None";
    case ItemKind::Bread: return "Bread";
    case ItemKind::RawBeef: return "RawBeef";
    case ItemKind::RawLettuce: return "RawLettuce";
    case ItemKind::CookedBeef: return "CookedBeef";
    case ItemKind::ChoppedLettuce: return "ChoppedLettuce";
    case ItemKind::BeefBurgerItem: return "BeefBurger";
    case ItemKind::LettuceBurgerItem: return "LettuceBurger";
    case ItemKind::BeefLettuceBurgerItem: return "BeefLettuceBurger";
  }
  return "?";
}

ItemKind burger_item(Dish dish) {
  switch (dish) {
    case Dish::BeefBurger: return ItemKind::BeefBurgerItem;
    case Dish::LettuceBurger: return ItemKind::LettuceBurgerItem;
    case Dish::BeefLettuceBurger: return ItemKind::BeefLettuceBurgerItem;
  }
  return ItemKind::None;
}

const char* to_string(Direction dir) {
  switch (dir) {
    case Direction::North: return "N";
    case Direction::East: return "E";
    case Direction::South: return "S";
    case Direction::West: return "W";
  }
  return "?";
}

std::string to_string(const PrimitiveAction& action) {
  switch (action.kind) {
    case PrimitiveAction::Kind::NoOp:
      return "noop";
    case PrimitiveAction::Kind::Move:
      return std::string("move:") + to_string(action.dir);
    case PrimitiveAction::Kind::Interact: {
      std::string text = std::string("interact:") + to_string(action.station);
      if (action.dish) {
        text += action.assemble ? ":assemble:" : ":take:";
        text += to_string(*action.dish);
      }
      return text;
    }
  }
  return "?";
}

const char* to_string(SimEvent::Kind kind) {
  switch (kind) {
    case SimEvent::Kind::SubtaskCompleted: return "subtask_completed";
    case SimEvent::Kind::OrderDelivered: return "order_delivered";
    case SimEvent::Kind::OrderFailed: return "order_failed";
    case SimEvent::Kind::CounterChanged: return "counter_changed";
    case SimEvent::Kind::AgentIdle: return "agent_idle";
    case SimEvent::Kind::OrderSpawned: return "order_spawned";
  }
  return "?";
}

std::string counter_for_item(ItemKind item) {
  switch (item) {
    case ItemKind::Bread: return "bread_count";
    case ItemKind::RawBeef: return "raw_beef_count";
    case ItemKind::RawLettuce: return "raw_lettuce_count";
    case ItemKind::CookedBeef: return "beef_cooked_count";
    case ItemKind::ChoppedLettuce: return "lettuce_chopped_count";
    case ItemKind::BeefBurgerItem: return "beef_burger_count";
    case ItemKind::LettuceBurgerItem: return "lettuce_burger_count";
    case ItemKind::BeefLettuceBurgerItem: return "beef_lettuce_burger_count";
    case ItemKind::None: return "";
  }
  return "";
}

namespace {

Vec2 offset(Direction dir) {
  switch (dir) {
    case Direction::North: return {0, -1};
    case Direction::East: return {1, 0};
    case Direction::South: return {0, 1};
    case Direction::West: return {-1, 0};
  }
  return {0, 0};
}

std::optional<StationKind> station_for_marker(char c) {
  switch (c) {
    case 'B': return StationKind::BreadSource;
    case 'F': return StationKind::BeefSource;
    case 'L': return StationKind::LettuceSource;
    case 'S': return StationKind::Stove;
    case 'C': return StationKind::CuttingBoard;
    case 'A': return StationKind::AssemblyCounter;
    case 'W': return StationKind::ServingWindow;
  }
  return std::nullopt;
}

ItemKind source_item(StationKind kind) {
  switch (kind) {
    case StationKind::BreadSource: return ItemKind::Bread;
    case StationKind::BeefSource: return ItemKind::RawBeef;
    case StationKind::LettuceSource: return ItemKind::RawLettuce;
    default: return ItemKind::None;
  }
}

// Ingredients consumed from the assembly counter per dish.
std::vector<ItemKind> recipe(Dish dish) {
  switch (dish) {
    case Dish::BeefBurger:
      return {ItemKind::Bread, ItemKind::CookedBeef};
    case Dish::LettuceBurger:
      return {ItemKind::Bread, ItemKind::ChoppedLettuce};
    case Dish::BeefLettuceBurger:
      return {ItemKind::Bread, ItemKind::CookedBeef, ItemKind::ChoppedLettuce};
  }
  return {};
}

}  // namespace

std::variant<World, std::string> World::create(const SimConfig& config) {
  World world;
  world.config_ = config;
  world.height_ = int(config.layout.size());
  if (world.height_ == 0) return std::string("layout is empty");
  world.width_ = int(config.layout[0].size());
  for (const auto& row : config.layout)
    if (int(row.size()) != world.width_)
      return std::string("layout rows have unequal width");
  world.cells_.assign(world.height_, std::string(world.width_, '#'));

  std::vector<std::optional<Vec2>> station_pos(kStationKinds);
  std::vector<Vec2> spawns(config.n_agents);
  std::vector<bool> spawn_seen(config.n_agents, false);

  for (int y = 0; y < world.height_; ++y) {
    for (int x = 0; x < world.width_; ++x) {
      char c = config.layout[y][x];
      if (c == '#') {
        world.cells_[y][x] = '#';
      } else if (c == '.') {
        world.cells_[y][x] = '.';
      } else if (c >= '0' && c <= '9') {
        int id = c - '0';
        if (id >= config.n_agents)
          return std::string("spawn marker '") + c + "' exceeds n_agents";
        if (spawn_seen[id]) return std::string("duplicate spawn marker '") + c + "'";
        spawn_seen[id] = true;
        spawns[id] = {x, y};
        world.cells_[y][x] = '.';
      } else if (auto kind = station_for_marker(c)) {
        int idx = int(*kind);
        if (station_pos[idx])
          return std::string("duplicate station ") + to_string(*kind);
        station_pos[idx] = Vec2{x, y};
        world.cells_[y][x] = c;
      } else {
        return std::string("unknown layout cell '") + c + "'";
      }
    }
  }
  for (int i = 0; i < kStationKinds; ++i)
    if (!station_pos[i])
      return std::string("missing station ") + to_string(StationKind(i));
  for (int i = 0; i < config.n_agents; ++i)
    if (!spawn_seen[i])
      return std::string("missing spawn marker for agent ") + std::to_string(i);

  // Floor connectivity from agent 0's spawn; every station needs an adjacent
  // reachable floor cell, otherwise the kitchen cannot be played.
  std::vector<std::vector<bool>> reach(world.height_,
                                       std::vector<bool>(world.width_, false));
  std::deque<Vec2> frontier{spawns[0]};
  reach[spawns[0].y][spawns[0].x] = true;
  while (!frontier.empty()) {
    Vec2 p = frontier.front();
    frontier.pop_front();
    for (Direction d : {Direction::North, Direction::East, Direction::South,
                        Direction::West}) {
      Vec2 q{p.x + offset(d).x, p.y + offset(d).y};
      if (!world.in_bounds(q) || reach[q.y][q.x]) continue;
      if (world.cells_[q.y][q.x] != '.') continue;
      reach[q.y][q.x] = true;
      frontier.push_back(q);
    }
  }
  for (int i = 0; i < config.n_agents; ++i)
    if (!reach[spawns[i].y][spawns[i].x])
      return std::string("agent ") + std::to_string(i) +
             " spawn unreachable from agent 0";
  for (int i = 0; i < kStationKinds; ++i) {
    Vec2 p = *station_pos[i];
    bool ok = false;
    for (Direction d : {Direction::North, Direction::East, Direction::South,
                        Direction::West}) {
      Vec2 q{p.x + offset(d).x, p.y + offset(d).y};
      if (world.in_bounds(q) && reach[q.y][q.x]) ok = true;
    }
    if (!ok)
      return std::string("invalid-layout: station ") + to_string(StationKind(i)) +
             " is unreachable";
  }

  world.stations_.resize(kStationKinds);
  for (int i = 0; i < kStationKinds; ++i) {
    world.stations_[i].kind = StationKind(i);
    world.stations_[i].pos = *station_pos[i];
  }
  world.agents_.resize(config.n_agents);
  for (int i = 0; i < config.n_agents; ++i) world.agents_[i].pos = spawns[i];
  for (const auto& name : standard_counter_vocabulary()) world.counters_[name] = 0;
  world.rng_.seed(config.seed);
  return world;
}

const Station& World::station(StationKind kind) const {
  return stations_[int(kind)];
}

int World::pending_order_count() const {
  return int(std::count_if(orders_.begin(), orders_.end(), [](const Order& o) {
    return o.status == Order::Status::Pending;
  }));
}

bool World::in_bounds(Vec2 p) const {
  return p.x >= 0 && p.x < width_ && p.y >= 0 && p.y < height_;
}

bool World::is_floor(Vec2 p) const {
  return in_bounds(p) && cells_[p.y][p.x] == '.';
}

void World::emit_counter(std::vector<SimEvent>& events, const std::string& name,
                         int delta) {
  counters_[name] += delta;
  SimEvent ev;
  ev.kind = SimEvent::Kind::CounterChanged;
  ev.tick = tick_;
  ev.counter = name;
  ev.delta = delta;
  events.push_back(ev);
}

void World::change_item_count(std::vector<SimEvent>& events, ItemKind item,
                              int delta) {
  std::string name = counter_for_item(item);
  if (!name.empty()) emit_counter(events, name, delta);
}

void World::idle(std::vector<SimEvent>& events, int agent_id,
                 const std::string& why) {
  SimEvent ev;
  ev.kind = SimEvent::Kind::AgentIdle;
  ev.tick = tick_;
  ev.agent = agent_id;
  ev.reason = why;
  events.push_back(ev);
}

void World::interact(int agent_id, const PrimitiveAction& action,
                     std::vector<SimEvent>& events) {
  AgentBody& agent = agents_[agent_id];
  Station& st = stations_[int(action.station)];
  int dist = std::abs(st.pos.x - agent.pos.x) + std::abs(st.pos.y - agent.pos.y);
  if (dist != 1) {
    idle(events, agent_id, "station-not-adjacent");
    return;
  }

  switch (st.kind) {
    case StationKind::BreadSource:
    case StationKind::BeefSource:
    case StationKind::LettuceSource: {
      if (agent.held != ItemKind::None) {
        idle(events, agent_id, "hands-full");
        return;
      }
      agent.held = source_item(st.kind);
      change_item_count(events, agent.held, +1);
      return;
    }
    case StationKind::Stove:
    case StationKind::CuttingBoard: {
      bool stove = st.kind == StationKind::Stove;
      ItemKind raw = stove ? ItemKind::RawBeef : ItemKind::RawLettuce;
      ItemKind done = stove ? ItemKind::CookedBeef : ItemKind::ChoppedLettuce;
      if (agent.held == raw && st.content == ItemKind::None) {
        st.content = raw;
        st.ready_at = tick_ + (stove ? config_.cook_ticks : config_.chop_ticks);
        st.placed_by = agent_id;
        agent.held = ItemKind::None;
        agent.busy_until = st.ready_at;
        return;
      }
      if (agent.held == ItemKind::None && st.content == done) {
        agent.held = done;
        st.content = ItemKind::None;
        st.ready_at = -1;
        st.placed_by = -1;
        return;
      }
      idle(events, agent_id,
           st.content == ItemKind::None ? "nothing-to-do" : "station-busy");
      return;
    }
    case StationKind::AssemblyCounter: {
      if (action.dish && action.assemble) {
        auto needs = recipe(*action.dish);
        for (ItemKind need : needs) {
          if (st.items[need] < 1) {
            idle(events, agent_id, "missing-ingredient");
            return;
          }
        }
        for (ItemKind need : needs) {
          st.items[need] -= 1;
          change_item_count(events, need, -1);
        }
        ItemKind burger = burger_item(*action.dish);
        st.items[burger] += 1;
        change_item_count(events, burger, +1);
        return;
      }
      if (action.dish && !action.assemble) {
        ItemKind burger = burger_item(*action.dish);
        if (agent.held != ItemKind::None) {
          idle(events, agent_id, "hands-full");
          return;
        }
        if (st.items[burger] < 1) {
          idle(events, agent_id, "no-such-dish");
          return;
        }
        st.items[burger] -= 1;
        agent.held = burger;  // counter unchanged: the item only moved hands
        return;
      }
      // Plain interact: deposit whatever is held.
      if (agent.held == ItemKind::None) {
        idle(events, agent_id, "empty-handed");
        return;
      }
      st.items[agent.held] += 1;
      agent.held = ItemKind::None;
      return;
    }
    case StationKind::ServingWindow: {
      std::optional<Dish> dish;
      switch (agent.held) {
        case ItemKind::BeefBurgerItem: dish = Dish::BeefBurger; break;
        case ItemKind::LettuceBurgerItem: dish = Dish::LettuceBurger; break;
        case ItemKind::BeefLettuceBurgerItem: dish = Dish::BeefLettuceBurger; break;
        default: break;
      }
      if (!dish) {
        idle(events, agent_id, "not-a-dish");
        return;
      }
      Order* match = nullptr;
      for (Order& order : orders_) {
        if (order.status != Order::Status::Pending || order.dish != *dish) continue;
        if (!match || order.deadline < match->deadline) match = &order;
      }
      SimEvent ev;
      ev.tick = tick_;
      ev.agent = agent_id;
      if (match) {
        match->status = Order::Status::Delivered;
        ev.kind = SimEvent::Kind::OrderDelivered;
        ev.order_id = match->id;
        ev.reward = config_.reward_deliver;
      } else {
        ev.kind = SimEvent::Kind::OrderFailed;
        ev.order_id = -1;
        ev.reason = "wrong_dish";
        ev.reward = config_.reward_failure;
      }
      ev.detail = to_string(*dish);
      events.push_back(ev);
      change_item_count(events, agent.held, -1);
      agent.held = ItemKind::None;
      return;
    }
  }
}

StepResult World::step(const std::vector<PrimitiveAction>& joint_action) {
  if (tick_ >= config_.episode_length)
    throw std::logic_error("step past episode end");
  if (int(joint_action.size()) != config_.n_agents)
    throw std::logic_error("joint action size mismatch");

  StepResult result;

  // 1. Agent actions, in agent-id order.
  for (int i = 0; i < config_.n_agents; ++i) {
    const PrimitiveAction& action = joint_action[i];
    AgentBody& agent = agents_[i];
    if (agent_busy(i)) {
      if (action.kind != PrimitiveAction::Kind::NoOp)
        idle(result.events, i, "busy");
      continue;
    }
    switch (action.kind) {
      case PrimitiveAction::Kind::NoOp:
        break;
      case PrimitiveAction::Kind::Move: {
        Vec2 next{agent.pos.x + offset(action.dir).x,
                  agent.pos.y + offset(action.dir).y};
        agent.facing = action.dir;
        if (is_floor(next))
          agent.pos = next;
        else
          idle(result.events, i, "blocked");
        break;
      }
      case PrimitiveAction::Kind::Interact:
        interact(i, action, result.events);
        break;
    }
  }

  // 2. Station completions (cooking / chopping finishing by the next tick).
  for (Station& st : stations_) {
    if (st.kind != StationKind::Stove && st.kind != StationKind::CuttingBoard)
      continue;
    bool stove = st.kind == StationKind::Stove;
    ItemKind raw = stove ? ItemKind::RawBeef : ItemKind::RawLettuce;
    ItemKind done = stove ? ItemKind::CookedBeef : ItemKind::ChoppedLettuce;
    if (st.content == raw && st.ready_at <= tick_ + 1) {
      st.content = done;
      change_item_count(result.events, raw, -1);
      change_item_count(result.events, done, +1);
      SimEvent ev;
      ev.kind = SimEvent::Kind::SubtaskCompleted;
      ev.tick = tick_;
      ev.agent = st.placed_by;
      ev.reward = config_.reward_subtask;
      ev.detail = stove ? "beef_cooked" : "lettuce_chopped";
      result.events.push_back(ev);
    }
  }

  // 3. Order expiry.
  for (Order& order : orders_) {
    if (order.status == Order::Status::Pending && order.deadline <= tick_ + 1) {
      order.status = Order::Status::Failed;
      SimEvent ev;
      ev.kind = SimEvent::Kind::OrderFailed;
      ev.tick = tick_;
      ev.order_id = order.id;
      ev.reason = "timeout";
      ev.reward = config_.reward_failure;
      result.events.push_back(ev);
    }
  }

  // 4. Order spawning.
  if (pending_order_count() < config_.max_concurrent_orders) {
    double roll = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (roll < config_.order_spawn_prob) {
      Order order;
      order.id = next_order_id_++;
      order.dish = Dish(int(std::uniform_int_distribution<int>(0, 2)(rng_)));
      order.issued_at = tick_ + 1;
      order.deadline = order.issued_at +
                       std::uniform_int_distribution<int>(
                           config_.deadline_min, config_.deadline_max)(rng_);
      orders_.push_back(order);
      SimEvent ev;
      ev.kind = SimEvent::Kind::OrderSpawned;
      ev.tick = tick_;
      ev.order_id = order.id;
      ev.detail = to_string(order.dish);
      result.events.push_back(ev);
    }
  }

  for (const SimEvent& ev : result.events) result.reward_delta += ev.reward;
  cumulative_reward_ += result.reward_delta;
  ++tick_;
  return result;
}

std::vector<PrimitiveAction> World::legal_actions(int agent_id) const {
  std::vector<PrimitiveAction> actions;
  actions.push_back(PrimitiveAction::noop());
  if (agent_busy(agent_id)) return actions;
  const AgentBody& agent = agents_[agent_id];
  for (Direction d : {Direction::North, Direction::East, Direction::South,
                      Direction::West}) {
    Vec2 next{agent.pos.x + offset(d).x, agent.pos.y + offset(d).y};
    if (is_floor(next)) actions.push_back(PrimitiveAction::move(d));
  }
  for (const Station& st : stations_) {
    int dist =
        std::abs(st.pos.x - agent.pos.x) + std::abs(st.pos.y - agent.pos.y);
    if (dist == 1) actions.push_back(PrimitiveAction::interact(st.kind));
  }
  return actions;
}

std::map<std::string, std::int64_t> World::recount_counters() const {
  std::map<std::string, std::int64_t> tally;
  for (const auto& name : standard_counter_vocabulary()) tally[name] = 0;
  auto add = [&](ItemKind item, int n) {
    std::string name = counter_for_item(item);
    if (!name.empty()) tally[name] += n;
  };
  for (const AgentBody& agent : agents_) add(agent.held, 1);
  for (const Station& st : stations_) {
    add(st.content, 1);
    for (const auto& [item, count] : st.items) add(item, count);
  }
  return tally;
}

std::string World::serialize() const {
  std::ostringstream out;
  out << "tick " << tick_ << "\nreward " << cumulative_reward_
      << "\nnext_order " << next_order_id_ << "\n";
  for (const auto& row : cells_) out << "grid " << row << "\n";
  for (size_t i = 0; i < agents_.size(); ++i) {
    const AgentBody& a = agents_[i];
    out << "agent " << i << " " << a.pos.x << "," << a.pos.y << " "
        << to_string(a.facing) << " " << to_string(a.held) << " busy="
        << a.busy_until << "\n";
  }
  for (const Station& st : stations_) {
    out << "station " << to_string(st.kind) << " " << st.pos.x << ","
        << st.pos.y << " content=" << to_string(st.content)
        << " ready=" << st.ready_at << " by=" << st.placed_by;
    for (const auto& [item, count] : st.items)
      if (count > 0) out << " " << to_string(item) << "x" << count;
    out << "\n";
  }
  for (const Order& order : orders_) {
    out << "order " << order.id << " " << to_string(order.dish) << " issued="
        << order.issued_at << " deadline=" << order.deadline << " status="
        << int(order.status) << "\n";
  }
  for (const auto& [name, value] : counters_)
    out << "counter " << name << "=" << value << "\n";
  out << "rng " << rng_ << "\n";
  return out.str();
}

}  // namespace skillforge::sim
