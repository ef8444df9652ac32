#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skillforge/htn/planner.hpp"
#include "skillforge/sim/world.hpp"

namespace skillforge::runtime {

enum class ActionCategory {
  Preparation,
  Cooking,
  Chopping,
  Assembly,
  Serving,
  Movement,
  Idle,
};
constexpr int kActionCategories = 7;
const char* to_string(ActionCategory category);
std::optional<ActionCategory> category_from_string(const std::string& name);

// A plan- or grounding-level fault surfaced to telemetry. Reasons:
// no-method | guard-failed | effect-underflow | eval-error |
// depth-cap-exceeded | divergence | unreachable | station-busy-timeout |
// ungroundable.
struct RuntimeFailure {
  int tick = 0;
  int agent = -1;
  std::string construct;
  std::string reason;
  std::string message;
};

// Counter-only projection of the world; positions and held items stay behind.
htn::AbstractState extract_abstract_state(const sim::World& world);

// Breadth-first search over floor cells to any cell orthogonally adjacent to
// `goal`. Neighbor expansion order N,E,S,W makes ties deterministic. Exposed
// with a predicate so path logic is testable on synthetic grids.
std::optional<std::vector<sim::Direction>> find_path(
    int width, int height, const std::function<bool(sim::Vec2)>& is_floor,
    sim::Vec2 from, sim::Vec2 goal);

struct GroundingStep {
  htn::OperatorInstance op;
  sim::StationKind first_station = sim::StationKind::Stove;
  std::vector<sim::Direction> path;  // to the first station; empty if adjacent
  std::vector<sim::PrimitiveAction> interacts;  // in execution order
};

struct GroundingFailure {
  std::string reason;  // unreachable | ungroundable | station-busy-timeout
  std::string message;
};

// Resolves an abstract operator into its station itinerary for the agent's
// current position. The tick executor re-paths every step; this entry point
// exists for inspection and tests.
std::variant<GroundingStep, GroundingFailure> ground(
    const htn::OperatorInstance& op, const sim::World& world, int agent_id);

// order id -> claiming agent id; shared by all contexts of an episode.
using ClaimTable = std::map<int, int>;

struct TickDecision {
  sim::PrimitiveAction action;
  ActionCategory category = ActionCategory::Idle;
  // True when the agent did nothing for stagnation purposes: NoOp with no
  // active primitive and no legitimate station wait.
  bool inactive = true;
  std::string construct;  // operator currently being executed, if any
  std::vector<RuntimeFailure> failures;
  double latency_ms = 0.0;
};

class AgentContext {
 public:
  AgentContext(int id, std::shared_ptr<const skillscript::SkillDocument> doc);

  // Called exactly once per simulator step, agents in id order, before the
  // joint step is applied.
  TickDecision tick(const sim::World& world, ClaimTable& claims);

  int id() const { return id_; }
  std::optional<int> goal_order_id() const;
  const std::vector<double>& latency_samples_ms() const { return latency_ms_; }
  // No endpoint client is reachable from this module; the online token
  // ledger is zero by construction.
  static constexpr std::int64_t online_tokens = 0;

 private:
  struct MicroStep {
    enum class Kind { GoTo, WaitStationFree, WaitBusy, Interact };
    enum class Expect { None, Held, HandsEmpty, CounterGain };
    Kind kind = Kind::GoTo;
    sim::StationKind station = sim::StationKind::Stove;
    sim::PrimitiveAction act;
    Expect expect = Expect::None;
    sim::ItemKind item = sim::ItemKind::None;  // Held expectation
    std::string counter;                       // CounterGain expectation
    ActionCategory category = ActionCategory::Movement;
  };
  struct PendingCheck {
    MicroStep::Expect expect = MicroStep::Expect::None;
    sim::ItemKind item = sim::ItemKind::None;
    std::string counter;
    std::int64_t before = 0;
    std::string construct;
  };
  struct Goal {
    int order_id = -1;
    std::string task;
    bool stale = false;
  };

  TickDecision decide(const sim::World& world, ClaimTable& claims);
  void fail(TickDecision& out, const sim::World& world, const std::string& construct,
            const std::string& reason, const std::string& message);
  void enter_backoff(const sim::World& world);
  void drop_goal(ClaimTable& claims);
  bool load_program_for(const htn::OperatorInstance& op, const sim::World& world,
                        TickDecision& out);
  std::uint64_t wake_key(const sim::World& world) const;

  int id_;
  std::shared_ptr<const skillscript::SkillDocument> doc_;
  std::optional<Goal> goal_;
  std::vector<htn::OperatorInstance> plan_ops_;
  std::size_t cursor_ = 0;
  bool plan_active_ = false;
  std::deque<MicroStep> program_;
  std::string current_op_;
  std::optional<PendingCheck> pending_;
  int patience_left_ = 0;
  std::optional<std::uint64_t> backoff_key_;
  std::vector<double> latency_ms_;
};

}  // namespace skillforge::runtime
