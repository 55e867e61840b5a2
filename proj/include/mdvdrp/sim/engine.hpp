#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "mdvdrp/features/observation.hpp"
#include "mdvdrp/scenarios/order_scheme.hpp"
#include "mdvdrp/sim/types.hpp"

namespace mdvdrp {

enum class EventKind : std::uint8_t {
  OrderArrival,
  OrderExpiry,
  ServeComplete,
  RepositionComplete,
  DriverArrival,
  DriverDeparture,
};

struct SimEvent {
  SimTime at = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::OrderArrival;
  std::int64_t subject = 0;  // order spec index, order id, driver id or spawn index depending on kind
};

struct OrderCounts {
  std::int64_t created = 0;
  std::int64_t open = 0;
  std::int64_t assigned = 0;
  std::int64_t completed = 0;
  std::int64_t expired = 0;

  bool conserved() const { return created == open + assigned + completed + expired; }
};

using ObservationPtr = std::shared_ptr<const Observation>;

struct StepResult {
  double reward = 0.0;
  ObservationPtr next;  // null once the episode has ended
  double elapsed = 0.0;
};

/// Continuous-time ride-hailing simulator. Events are processed in (time, insertion) order and
/// the engine pauses whenever a driver becomes available, so exactly one driver is selected at
/// every decision point.
class Engine {
 public:
  /// Starts an episode and runs to the first decision point. Returns null if the episode ends
  /// before any driver needs a decision. Throws SimError for invalid input or a driver scheme
  /// that can never activate a driver before the horizon.
  ObservationPtr reset(const SimConfig& config, const OrderScheme& orders, const DriverScheme& drivers,
                       std::uint64_t seed);
  ObservationPtr reset(const Scenario& scenario, std::uint64_t seed) {
    return reset(scenario.config, scenario.orders, scenario.drivers, seed);
  }

  /// Applies an action for the selected driver and advances to the next decision point.
  /// Illegal actions throw SimError and leave the engine untouched.
  StepResult step(const Action& action);
  /// Same as step(current_observation().action_at(index)).
  StepResult step_index(std::size_t index);

  /// Legal actions of the selected driver. Throws if `driver` is not the selected driver.
  const ActionSet& legal_actions(DriverId driver) const;

  /// Expires open orders whose deadline is at or before `now`; returns how many expired.
  std::size_t expire_orders(SimTime now);

  bool done() const { return done_; }
  SimTime now() const { return now_; }
  const SimConfig& config() const { return config_; }
  const std::vector<Order>& orders() const { return orders_; }
  const std::vector<Driver>& drivers() const { return drivers_; }
  const OrderCounts& counts() const { return counts_; }
  double total_reward() const { return total_reward_; }
  std::int64_t decisions() const { return decisions_; }
  std::optional<DriverId> selected_driver() const { return selected_; }
  const ObservationPtr& current_observation() const { return current_; }

  /// Called after every processed event; used by invariant checks.
  void set_event_observer(std::function<void(const Engine&, const SimEvent&)> observer) {
    observer_ = std::move(observer);
  }

  /// Drivers currently in the system (not yet departed), in id order.
  std::vector<const Driver*> active_drivers() const;

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  void push(SimTime at, EventKind kind, std::int64_t subject);
  ActionSet compute_legal(const Driver& driver) const;
  // Runs events until a driver needs a decision or the episode ends.
  void advance();
  // Returns true if `driver` became the selected driver.
  bool offer_decision(DriverId driver);
  void retire(Driver& driver);
  ObservationPtr make_observation() const;

  SimConfig config_;
  Rng noise_rng_;
  std::vector<OrderSpec> pending_orders_;
  std::vector<DriverSpawn> pending_drivers_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  std::uint64_t next_seq_ = 0;

  std::vector<Order> orders_;
  std::vector<OrderId> open_;  // ascending ids
  std::vector<Driver> drivers_;
  std::vector<DriverId> active_;  // ascending ids of drivers not yet departed
  std::deque<DriverId> waiting_;  // simple mode: idle drivers with nothing to take

  SimTime now_ = 0.0;
  bool done_ = true;
  std::optional<DriverId> selected_;
  ActionSet legal_;
  ObservationPtr current_;
  std::function<void(const Engine&, const SimEvent&)> observer_;
  OrderCounts counts_;
  double total_reward_ = 0.0;
  std::int64_t decisions_ = 0;
};

}  // namespace mdvdrp
