#include "skillforge/runtime/agent.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "skillforge/sim/config.hpp"

namespace skillforge::runtime {

using htn::AbstractState;
using htn::OperatorInstance;
using sim::Direction;
using sim::ItemKind;
using sim::PrimitiveAction;
using sim::StationKind;
using sim::Vec2;

const char* to_string(ActionCategory category) {
  switch (category) {
    case ActionCategory::Preparation: return "preparation";
    case ActionCategory::Cooking: return "cooking";
    case ActionCategory::Chopping: return "chopping";
    case ActionCategory::Assembly: return "assembly";
    case ActionCategory::Serving: return "serving";
    case ActionCategory::Movement: return "movement";
    case ActionCategory::Idle: return "idle";
  }
  return "?";
}

std::optional<ActionCategory> category_from_string(const std::string& name) {
  for (int i = 0; i < kActionCategories; ++i)
    if (name == to_string(ActionCategory(i))) return ActionCategory(i);
  return std::nullopt;
}

AbstractState extract_abstract_state(const sim::World& world) {
  AbstractState state;
  state.counters = world.counters();
  state.snapshot_tick = world.tick();
  return state;
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

constexpr Direction kDirs[] = {Direction::North, Direction::East,
                               Direction::South, Direction::West};

}  // namespace

std::optional<std::vector<Direction>> find_path(
    int width, int height, const std::function<bool(Vec2)>& is_floor,
    Vec2 from, Vec2 goal) {
  auto adjacent = [&](Vec2 p) {
    return std::abs(p.x - goal.x) + std::abs(p.y - goal.y) == 1;
  };
  if (adjacent(from)) return std::vector<Direction>{};
  std::vector<int> parent(std::size_t(width) * height, -1);
  std::vector<Direction> via(std::size_t(width) * height, Direction::North);
  auto index = [&](Vec2 p) { return std::size_t(p.y) * width + p.x; };
  std::deque<Vec2> frontier{from};
  parent[index(from)] = int(index(from));
  while (!frontier.empty()) {
    Vec2 p = frontier.front();
    frontier.pop_front();
    for (Direction d : kDirs) {
      Vec2 q{p.x + offset(d).x, p.y + offset(d).y};
      if (q.x < 0 || q.x >= width || q.y < 0 || q.y >= height) continue;
      if (!is_floor(q) || parent[index(q)] != -1) continue;
      parent[index(q)] = int(index(p));
      via[index(q)] = d;
      if (adjacent(q)) {
        std::vector<Direction> path;
        for (Vec2 c = q; !(c == from);) {
          path.push_back(via[index(c)]);
          int pi = parent[index(c)];
          c = Vec2{pi % width, pi / width};
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      frontier.push_back(q);
    }
  }
  return std::nullopt;
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<std::string> string_arg(const OperatorInstance& op,
                                      const std::string& wanted) {
  for (const auto& arg : op.args)
    if (auto* s = std::get_if<std::string>(&arg))
      if (*s == wanted) return *s;
  return std::nullopt;
}

std::optional<sim::Dish> dish_arg(const OperatorInstance& op) {
  for (const auto& arg : op.args)
    if (auto* s = std::get_if<std::string>(&arg))
      if (auto dish = sim::dish_from_string(*s)) return dish;
  return std::nullopt;
}

}  // namespace

// Station itineraries realizing abstract operators. Semantic kind is
// inferred from the operator name so that libraries using variant names
// (op_cook_beef, op_chop_lettuce) remain groundable.
namespace detail {

struct Micro {
  enum class Kind { GoTo, WaitStationFree, WaitBusy, Interact };
  enum class Expect { None, Held, HandsEmpty, CounterGain };
  Kind kind = Kind::GoTo;
  StationKind station = StationKind::Stove;
  PrimitiveAction act;
  Expect expect = Expect::None;
  ItemKind item = ItemKind::None;
  std::string counter;
  ActionCategory category = ActionCategory::Movement;
};

Micro go_to(StationKind st) {
  Micro m;
  m.kind = Micro::Kind::GoTo;
  m.station = st;
  m.category = ActionCategory::Movement;
  return m;
}

Micro interact(StationKind st, PrimitiveAction act, Micro::Expect expect,
               ItemKind item, ActionCategory cat) {
  Micro m;
  m.kind = Micro::Kind::Interact;
  m.station = st;
  m.act = act;
  m.expect = expect;
  m.item = item;
  m.category = cat;
  return m;
}

std::variant<std::deque<Micro>, GroundingFailure> itinerary_for(
    const OperatorInstance& op) {
  std::deque<Micro> steps;
  std::string name = lower(op.op);
  auto has = [&](const char* s) { return name.find(s) != std::string::npos; };

  if (has("serve")) {
    auto dish = dish_arg(op);
    if (!dish)
      return GroundingFailure{"ungroundable", op.op + ": no dish argument"};
    steps.push_back(go_to(StationKind::AssemblyCounter));
    steps.push_back(interact(StationKind::AssemblyCounter,
                             PrimitiveAction::interact_take(*dish),
                             Micro::Expect::Held, sim::burger_item(*dish),
                             ActionCategory::Serving));
    steps.push_back(go_to(StationKind::ServingWindow));
    steps.push_back(interact(StationKind::ServingWindow,
                             PrimitiveAction::interact(StationKind::ServingWindow),
                             Micro::Expect::HandsEmpty, ItemKind::None,
                             ActionCategory::Serving));
    return steps;
  }
  if (has("assemble")) {
    auto dish = dish_arg(op);
    if (!dish)
      return GroundingFailure{"ungroundable", op.op + ": no dish argument"};
    steps.push_back(go_to(StationKind::AssemblyCounter));
    Micro m = interact(StationKind::AssemblyCounter,
                       PrimitiveAction::interact_assemble(*dish),
                       Micro::Expect::CounterGain, ItemKind::None,
                       ActionCategory::Assembly);
    m.counter = sim::counter_for_item(sim::burger_item(*dish));
    steps.push_back(m);
    return steps;
  }
  if (has("prepare") || has("cook") || has("chop") || has("get")) {
    std::string food;
    if (string_arg(op, "Beef") || has("beef")) food = "Beef";
    if (string_arg(op, "Lettuce") || has("lettuce")) food = "Lettuce";
    if (string_arg(op, "Bread") || has("bread")) food = "Bread";
    if (food.empty())
      return GroundingFailure{"ungroundable", op.op + ": no known food argument"};
    if (food == "Bread") {
      steps.push_back(go_to(StationKind::BreadSource));
      steps.push_back(interact(StationKind::BreadSource,
                               PrimitiveAction::interact(StationKind::BreadSource),
                               Micro::Expect::Held, ItemKind::Bread,
                               ActionCategory::Preparation));
    } else {
      bool beef = food == "Beef";
      StationKind source =
          beef ? StationKind::BeefSource : StationKind::LettuceSource;
      StationKind proc = beef ? StationKind::Stove : StationKind::CuttingBoard;
      ItemKind raw = beef ? ItemKind::RawBeef : ItemKind::RawLettuce;
      ItemKind done = beef ? ItemKind::CookedBeef : ItemKind::ChoppedLettuce;
      ActionCategory cat =
          beef ? ActionCategory::Cooking : ActionCategory::Chopping;
      steps.push_back(go_to(source));
      steps.push_back(interact(source, PrimitiveAction::interact(source),
                               Micro::Expect::Held, raw,
                               ActionCategory::Preparation));
      steps.push_back(go_to(proc));
      Micro wait;
      wait.kind = Micro::Kind::WaitStationFree;
      wait.station = proc;
      wait.category = cat;
      steps.push_back(wait);
      steps.push_back(interact(proc, PrimitiveAction::interact(proc),
                               Micro::Expect::HandsEmpty, ItemKind::None, cat));
      Micro busy;
      busy.kind = Micro::Kind::WaitBusy;
      busy.station = proc;
      busy.category = cat;
      steps.push_back(busy);
      steps.push_back(interact(proc, PrimitiveAction::interact(proc),
                               Micro::Expect::Held, done, cat));
    }
    steps.push_back(go_to(StationKind::AssemblyCounter));
    steps.push_back(
        interact(StationKind::AssemblyCounter,
                 PrimitiveAction::interact(StationKind::AssemblyCounter),
                 Micro::Expect::HandsEmpty, ItemKind::None,
                 ActionCategory::Preparation));
    return steps;
  }
  return GroundingFailure{"ungroundable", op.op + ": unknown operator semantics"};
}

std::optional<std::vector<Direction>> path_to(const sim::World& world,
                                              Vec2 from, StationKind st) {
  return find_path(
      int(world.config().layout[0].size()), int(world.config().layout.size()),
      [&](Vec2 p) { return world.is_floor(p); }, from, world.station(st).pos);
}

}  // namespace detail

std::variant<GroundingStep, GroundingFailure> ground(
    const OperatorInstance& op, const sim::World& world, int agent_id) {
  auto built = detail::itinerary_for(op);
  if (auto* failure = std::get_if<GroundingFailure>(&built)) return *failure;
  const auto& steps = std::get<std::deque<detail::Micro>>(built);
  GroundingStep result;
  result.op = op;
  bool first = true;
  for (const auto& step : steps) {
    if (first && step.kind == detail::Micro::Kind::GoTo) {
      result.first_station = step.station;
      auto path = detail::path_to(world, world.agents()[agent_id].pos,
                                  step.station);
      if (!path)
        return GroundingFailure{"unreachable",
                                op.op + ": no path to " +
                                    sim::to_string(step.station)};
      result.path = *path;
      first = false;
    }
    if (step.kind == detail::Micro::Kind::Interact)
      result.interacts.push_back(step.act);
  }
  return result;
}

AgentContext::AgentContext(int id,
                           std::shared_ptr<const skillscript::SkillDocument> doc)
    : id_(id), doc_(std::move(doc)) {}

std::optional<int> AgentContext::goal_order_id() const {
  if (!goal_) return std::nullopt;
  return goal_->order_id;
}

void AgentContext::fail(TickDecision& out, const sim::World& world,
                        const std::string& construct, const std::string& reason,
                        const std::string& message) {
  RuntimeFailure f;
  f.tick = world.tick();
  f.agent = id_;
  f.construct = construct;
  f.reason = reason;
  f.message = message;
  out.failures.push_back(f);
}

std::uint64_t AgentContext::wake_key(const sim::World& world) const {
  std::ostringstream key;
  for (const auto& [name, value] : world.counters())
    key << name << "=" << value << ";";
  const auto& assembly = world.station(StationKind::AssemblyCounter);
  for (const auto& [item, count] : assembly.items)
    if (count > 0) key << sim::to_string(item) << "x" << count << ";";
  for (const auto& order : world.orders())
    if (order.status == sim::Order::Status::Pending) key << "o" << order.id << ";";
  return sim::fnv1a(key.str());
}

void AgentContext::enter_backoff(const sim::World& world) {
  backoff_key_ = wake_key(world);
}

void AgentContext::drop_goal(ClaimTable& claims) {
  if (goal_) {
    auto it = claims.find(goal_->order_id);
    if (it != claims.end() && it->second == id_) claims.erase(it);
  }
  goal_.reset();
  plan_ops_.clear();
  cursor_ = 0;
  plan_active_ = false;
  program_.clear();
  current_op_.clear();
  backoff_key_.reset();
}

bool AgentContext::load_program_for(const htn::OperatorInstance& op,
                                    const sim::World& world,
                                    TickDecision& out) {
  auto built = detail::itinerary_for(op);
  if (auto* failure = std::get_if<GroundingFailure>(&built)) {
    fail(out, world, op.op, failure->reason, failure->message);
    plan_active_ = false;
    program_.clear();
    enter_backoff(world);
    return false;
  }
  program_.clear();
  for (const auto& m : std::get<std::deque<detail::Micro>>(built)) {
    MicroStep step;
    step.kind = MicroStep::Kind(int(m.kind));
    step.station = m.station;
    step.act = m.act;
    step.expect = MicroStep::Expect(int(m.expect));
    step.item = m.item;
    step.counter = m.counter;
    step.category = m.category;
    program_.push_back(step);
  }
  patience_left_ = world.config().station_patience;
  return true;
}

static const char* reason_of(htn::FailureReason reason) {
  switch (reason) {
    case htn::FailureReason::GuardFailed: return "guard-failed";
    case htn::FailureReason::NoMethod: return "no-method";
    case htn::FailureReason::EffectUnderflow: return "effect-underflow";
    case htn::FailureReason::DepthCapExceeded: return "depth-cap-exceeded";
    case htn::FailureReason::EvalError: return "eval-error";
  }
  return "?";
}

TickDecision AgentContext::tick(const sim::World& world, ClaimTable& claims) {
  auto begin = std::chrono::steady_clock::now();
  TickDecision out = decide(world, claims);
  auto end = std::chrono::steady_clock::now();
  out.latency_ms =
      std::chrono::duration<double, std::milli>(end - begin).count();
  latency_ms_.push_back(out.latency_ms);
  return out;
}

TickDecision AgentContext::decide(const sim::World& world, ClaimTable& claims) {
  TickDecision out;
  out.action = PrimitiveAction::noop();
  out.category = ActionCategory::Idle;
  out.inactive = true;
  out.construct = current_op_;

  // Divergence check: did last tick's interaction do what the plan said?
  if (pending_) {
    PendingCheck check = *pending_;
    pending_.reset();
    const auto& body = world.agents()[id_];
    bool ok = true;
    std::string detail;
    switch (check.expect) {
      case MicroStep::Expect::None:
        break;
      case MicroStep::Expect::Held:
        ok = body.held == check.item;
        detail = std::string("expected to hold ") + sim::to_string(check.item) +
                 ", holding " + sim::to_string(body.held);
        break;
      case MicroStep::Expect::HandsEmpty:
        ok = body.held == ItemKind::None;
        detail = std::string("expected empty hands, holding ") +
                 sim::to_string(body.held);
        break;
      case MicroStep::Expect::CounterGain:
        ok = world.counters().at(check.counter) > check.before;
        detail = check.counter + " did not increase (ingredients may have been "
                 "taken by the partner)";
        break;
    }
    if (!ok) {
      fail(out, world, check.construct, "divergence", detail);
      program_.clear();
      plan_active_ = false;
      current_op_.clear();
      out.construct.clear();
      enter_backoff(world);
      return out;
    }
  }

  // A busy agent (mid-cook / mid-chop) can only wait; that wait is activity,
  // not stagnation.
  if (world.agent_busy(id_)) {
    out.inactive = false;
    out.category =
        program_.empty() ? ActionCategory::Idle : program_.front().category;
    return out;
  }

  // Goal maintenance: claimed order gone (delivered / timed out)?
  if (goal_) {
    bool still_pending = false;
    for (const auto& order : world.orders())
      if (order.id == goal_->order_id &&
          order.status == sim::Order::Status::Pending)
        still_pending = true;
    if (!still_pending) {
      if (program_.empty())
        drop_goal(claims);
      else
        goal_->stale = true;  // finish the current operator, then release
    }
  }

  // Backoff after a failure: wait for the world to change rather than
  // re-failing every tick.
  if (backoff_key_) {
    if (goal_ && wake_key(world) == *backoff_key_) return out;
    backoff_key_.reset();
  }

  if (!goal_) {
    const sim::Order* pick = nullptr;
    for (const auto& order : world.orders()) {
      if (order.status != sim::Order::Status::Pending) continue;
      auto it = claims.find(order.id);
      if (it != claims.end() && it->second != id_) continue;
      if (!pick || order.deadline < pick->deadline ||
          (order.deadline == pick->deadline && order.id < pick->id))
        pick = &order;
    }
    if (!pick) return out;
    goal_ = Goal{pick->id, sim::task_name(pick->dish), false};
    claims[pick->id] = id_;
    plan_ops_.clear();
    cursor_ = 0;
    plan_active_ = false;
    program_.clear();
  }

  if (!plan_active_ && program_.empty()) {
    auto state = extract_abstract_state(world);
    htn::Task task{goal_->task,
                   {htn::Value{std::string("a") + std::to_string(id_)}}};
    auto result = htn::plan(*doc_, state, {task});
    if (auto* pf = std::get_if<htn::PlanFailure>(&result)) {
      fail(out, world, pf->construct.empty() ? goal_->task : pf->construct,
           reason_of(pf->reason), pf->message);
      enter_backoff(world);
      return out;
    }
    plan_ops_ = std::get<htn::Plan>(result).ops;
    cursor_ = 0;
    plan_active_ = true;
    // Leftover held item from an aborted plan: park it on the assembly
    // counter first so the next pickup doesn't bounce off full hands.
    if (world.agents()[id_].held != ItemKind::None) {
      MicroStep go;
      go.kind = MicroStep::Kind::GoTo;
      go.station = StationKind::AssemblyCounter;
      go.category = ActionCategory::Movement;
      MicroStep put;
      put.kind = MicroStep::Kind::Interact;
      put.station = StationKind::AssemblyCounter;
      put.act = PrimitiveAction::interact(StationKind::AssemblyCounter);
      put.expect = MicroStep::Expect::HandsEmpty;
      put.category = ActionCategory::Preparation;
      program_.push_back(go);
      program_.push_back(put);
      current_op_ = "cleanup";
      out.construct = current_op_;
    }
  }

  for (;;) {
    if (program_.empty()) {
      if (!plan_active_) return out;
      if (cursor_ >= plan_ops_.size()) {
        plan_active_ = false;
        current_op_.clear();
        out.construct.clear();
        if (goal_ && goal_->stale) drop_goal(claims);
        return out;
      }
      const auto& op = plan_ops_[cursor_++];
      if (!load_program_for(op, world, out)) return out;
      current_op_ = op.op;
      out.construct = current_op_;
    }
    MicroStep& step = program_.front();
    const auto& body = world.agents()[id_];
    switch (step.kind) {
      case MicroStep::Kind::GoTo: {
        const auto& st = world.station(step.station);
        if (std::abs(st.pos.x - body.pos.x) + std::abs(st.pos.y - body.pos.y) ==
            1) {
          program_.pop_front();
          continue;
        }
        auto path = detail::path_to(world, body.pos, step.station);
        if (!path || path->empty()) {
          fail(out, world, current_op_, "unreachable",
               std::string("no path to ") + sim::to_string(step.station));
          program_.clear();
          plan_active_ = false;
          enter_backoff(world);
          return out;
        }
        out.action = PrimitiveAction::move((*path)[0]);
        out.category = ActionCategory::Movement;
        out.inactive = false;
        return out;
      }
      case MicroStep::Kind::WaitStationFree: {
        const auto& st = world.station(step.station);
        if (st.content == ItemKind::None) {
          program_.pop_front();
          continue;
        }
        if (--patience_left_ <= 0) {
          fail(out, world, current_op_, "station-busy-timeout",
               std::string(sim::to_string(step.station)) +
                   " occupied beyond the patience window");
          program_.clear();
          plan_active_ = false;
          enter_backoff(world);
          return out;
        }
        out.category = step.category;
        out.inactive = false;  // a legitimate station wait, not stagnation
        return out;
      }
      case MicroStep::Kind::WaitBusy: {
        program_.pop_front();  // not busy anymore (checked above)
        continue;
      }
      case MicroStep::Kind::Interact: {
        out.action = step.act;
        out.category = step.category;
        out.inactive = false;
        PendingCheck check;
        check.expect = step.expect;
        check.item = step.item;
        check.counter = step.counter;
        check.construct = current_op_;
        if (step.expect == MicroStep::Expect::CounterGain)
          check.before = world.counters().at(step.counter);
        pending_ = check;
        program_.pop_front();
        return out;
      }
    }
  }
}

}  // namespace skillforge::runtime
