#include "mdvdrp/sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mdvdrp/features/encode.hpp"

namespace mdvdrp {

namespace {

Rng stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return Rng(seq);
}

}  // namespace

ObservationPtr Engine::reset(const SimConfig& config, const OrderScheme& orders, const DriverScheme& drivers,
                             std::uint64_t seed) {
  config.validate();
  orders.validate();
  drivers.validate();
  if (!drivers.can_activate_before(config.episode_horizon)) {
    throw SimError("driver scheme never activates a driver before the horizon");
  }

  config_ = config;
  Rng scheme_rng = stream(seed, 1);
  noise_rng_ = stream(seed, 2);

  pending_drivers_ = drivers.generate(config_.episode_horizon, scheme_rng);
  pending_orders_ = orders.generate(config_.episode_horizon, scheme_rng);

  queue_ = {};
  next_seq_ = 0;
  orders_.clear();
  open_.clear();
  drivers_.clear();
  active_.clear();
  waiting_.clear();
  now_ = 0.0;
  done_ = false;
  selected_.reset();
  current_.reset();
  counts_ = {};
  total_reward_ = 0.0;
  decisions_ = 0;

  for (std::size_t i = 0; i < pending_drivers_.size(); ++i) {
    push(pending_drivers_[i].at, EventKind::DriverArrival, static_cast<std::int64_t>(i));
  }
  for (std::size_t i = 0; i < pending_orders_.size(); ++i) {
    push(pending_orders_[i].created_at, EventKind::OrderArrival, static_cast<std::int64_t>(i));
  }
  advance();
  return current_;
}

void Engine::push(SimTime at, EventKind kind, std::int64_t subject) {
  queue_.push(SimEvent{at, next_seq_++, kind, subject});
}

std::size_t Engine::expire_orders(SimTime now) {
  std::size_t expired = 0;
  auto keep = std::remove_if(open_.begin(), open_.end(), [&](OrderId id) {
    Order& o = orders_[static_cast<std::size_t>(id)];
    if (o.expires_at > now) return false;
    o.state = OrderState::Expired;
    ++expired;
    return true;
  });
  open_.erase(keep, open_.end());
  counts_.open -= static_cast<std::int64_t>(expired);
  counts_.expired += static_cast<std::int64_t>(expired);
  return expired;
}

ActionSet Engine::compute_legal(const Driver& driver) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < open_.size(); ++i) {
    const Order& o = orders_[static_cast<std::size_t>(open_[i])];
    if (config_.simple_mode || distance(driver.position, o.origin) <= config_.broadcast_radius) rows.push_back(i);
  }
  if (!rows.empty() || config_.simple_mode) return ActionSet::assign(std::move(rows));
  return ActionSet::reposition();
}

bool Engine::offer_decision(DriverId id) {
  expire_orders(now_);
  ActionSet legal = compute_legal(drivers_[static_cast<std::size_t>(id)]);
  if (legal.empty()) {
    waiting_.push_back(id);
    return false;
  }
  selected_ = id;
  legal_ = std::move(legal);
  ++decisions_;
  current_ = make_observation();
  return true;
}

void Engine::retire(Driver& driver) {
  driver.retiring = true;
  active_.erase(std::remove(active_.begin(), active_.end(), driver.id), active_.end());
  waiting_.erase(std::remove(waiting_.begin(), waiting_.end(), driver.id), waiting_.end());
}

std::vector<const Driver*> Engine::active_drivers() const {
  std::vector<const Driver*> out;
  out.reserve(active_.size());
  for (DriverId id : active_) out.push_back(&drivers_[static_cast<std::size_t>(id)]);
  return out;
}

ObservationPtr Engine::make_observation() const {
  std::vector<const Order*> open;
  open.reserve(open_.size());
  for (OrderId id : open_) open.push_back(&orders_[static_cast<std::size_t>(id)]);
  const auto drivers = active_drivers();
  const auto it = std::lower_bound(active_.begin(), active_.end(), *selected_);
  const auto row = static_cast<std::size_t>(it - active_.begin());
  return std::make_shared<const Observation>(features::build_observation(config_, now_, open, drivers, row, legal_));
}

const ActionSet& Engine::legal_actions(DriverId driver) const {
  if (!selected_ || *selected_ != driver) throw SimError("driver " + std::to_string(driver) + " is not selected");
  return legal_;
}

void Engine::advance() {
  selected_.reset();
  current_.reset();
  while (true) {
    if (queue_.empty() || queue_.top().at > config_.episode_horizon) {
      now_ = std::max(now_, config_.episode_horizon);
      done_ = true;
      return;
    }
    const SimEvent ev = queue_.top();
    queue_.pop();
    now_ = ev.at;
    bool decision = false;

    switch (ev.kind) {
      case EventKind::OrderArrival: {
        const OrderSpec& spec = pending_orders_[static_cast<std::size_t>(ev.subject)];
        Order o;
        o.id = static_cast<OrderId>(orders_.size());
        o.origin = spec.origin;
        o.destination = spec.destination;
        o.price = spec.price;
        o.created_at = now_;
        o.expires_at = now_ + config_.order_validity_window;
        o.tag = spec.tag;
        orders_.push_back(o);
        open_.push_back(o.id);
        ++counts_.created;
        ++counts_.open;
        push(o.expires_at, EventKind::OrderExpiry, o.id);
        if (config_.simple_mode && !waiting_.empty()) {
          const DriverId d = waiting_.front();
          waiting_.pop_front();
          decision = offer_decision(d);
        }
        break;
      }
      case EventKind::OrderExpiry:
        expire_orders(now_);
        break;
      case EventKind::DriverArrival: {
        const DriverSpawn& spawn = pending_drivers_[static_cast<std::size_t>(ev.subject)];
        Driver d;
        d.id = static_cast<DriverId>(drivers_.size());
        d.position = config_.region.clamp(spawn.position);
        d.activated_at = now_;
        d.deactivates_at = now_ + spawn.lifetime;
        drivers_.push_back(d);
        active_.push_back(d.id);
        if (std::isfinite(d.deactivates_at)) push(d.deactivates_at, EventKind::DriverDeparture, d.id);
        decision = offer_decision(d.id);
        break;
      }
      case EventKind::ServeComplete: {
        Driver& d = drivers_[static_cast<std::size_t>(ev.subject)];
        const auto& serving = std::get<Serving>(d.status);
        orders_[static_cast<std::size_t>(serving.order_id)].state = OrderState::Completed;
        --counts_.assigned;
        ++counts_.completed;
        d.position = serving.destination;
        d.status = Idle{};
        if (d.retiring) {
          retire(d);
        } else {
          decision = offer_decision(d.id);
        }
        break;
      }
      case EventKind::RepositionComplete: {
        Driver& d = drivers_[static_cast<std::size_t>(ev.subject)];
        d.position = features::observed_position(d, now_, config_);
        d.status = Idle{};
        if (d.retiring) {
          retire(d);
        } else {
          decision = offer_decision(d.id);
        }
        break;
      }
      case EventKind::DriverDeparture: {
        Driver& d = drivers_[static_cast<std::size_t>(ev.subject)];
        if (d.idle()) {
          retire(d);
        } else {
          d.retiring = true;
        }
        break;
      }
    }
    if (observer_) observer_(*this, ev);
    if (decision) return;
  }
}

StepResult Engine::step(const Action& action) {
  if (done_ || !selected_) throw SimError("step called without a pending decision");
  Driver& driver = drivers_[static_cast<std::size_t>(*selected_)];
  const SimTime t0 = now_;
  double reward = 0.0;

  if (const auto* assign = std::get_if<Assign>(&action)) {
    if (!legal_.is_assign()) throw SimError("illegal " + describe(action) + ": no order within broadcast radius");
    const auto it = std::find(open_.begin(), open_.end(), assign->order_id);
    if (it == open_.end()) throw SimError("illegal " + describe(action) + ": order is not open");
    Order& order = orders_[static_cast<std::size_t>(assign->order_id)];
    const double pickup = distance(driver.position, order.origin);
    if (!config_.simple_mode && pickup > config_.broadcast_radius) {
      throw SimError("illegal " + describe(action) + ": order is outside the broadcast radius");
    }
    open_.erase(it);
    order.state = OrderState::Assigned;
    order.assigned_at = now_;
    --counts_.open;
    ++counts_.assigned;
    const SimTime completes = now_ + pickup / config_.driver_speed +
                              distance(order.origin, order.destination) / config_.driver_speed;
    driver.status = Serving{order.id, order.destination, completes};
    push(completes, EventKind::ServeComplete, driver.id);
    reward = order.price;
  } else {
    const Heading heading = std::get<Reposition>(action).heading;
    if (legal_.is_assign()) {
      throw SimError("illegal " + describe(action) +
                     (config_.simple_mode ? ": repositioning is disabled in simple mode"
                                          : ": orders are within the broadcast radius"));
    }
    double duration = config_.reposition_duration;
    if (config_.reposition_noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, config_.reposition_noise_sigma);
      double eps = noise(noise_rng_);
      while (eps <= -0.5 * config_.reposition_duration) eps = noise(noise_rng_);
      duration += eps;
    }
    driver.status = Repositioning{heading_vector(heading), driver.position, now_, now_ + duration};
    push(now_ + duration, EventKind::RepositionComplete, driver.id);
  }

  total_reward_ += reward;
  advance();
  return StepResult{reward, current_, now_ - t0};
}

StepResult Engine::step_index(std::size_t index) {
  if (!current_) throw SimError("step called without a pending decision");
  return step(current_->action_at(index));
}

}  // namespace mdvdrp
