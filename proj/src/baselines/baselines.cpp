#include "mdvdrp/baselines/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdvdrp::baselines {

std::string BaselineSpec::name() const {
  std::string s = objective == Objective::MRM ? "mrm" : "mpdm";
  switch (reposition) {
    case Repositioning::Simple: return s + "-simple";
    case Repositioning::Random: return s + "-random";
    case Repositioning::Demand: return s + "-demand";
  }
  return s;
}

BaselineSpec BaselineSpec::parse(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("unknown baseline '" + s + "'");
  const auto obj = s.substr(0, dash);
  const auto rep = s.substr(dash + 1);
  BaselineSpec spec;
  if (obj == "mrm") {
    spec.objective = Objective::MRM;
  } else if (obj == "mpdm") {
    spec.objective = Objective::MPDM;
  } else {
    throw std::invalid_argument("unknown baseline '" + s + "'");
  }
  if (rep == "simple") {
    spec.reposition = Repositioning::Simple;
  } else if (rep == "random") {
    spec.reposition = Repositioning::Random;
  } else if (rep == "demand") {
    spec.reposition = Repositioning::Demand;
  } else {
    throw std::invalid_argument("unknown baseline '" + s + "'");
  }
  return spec;
}

BaselinePolicy::BaselinePolicy(BaselineSpec spec, const SimConfig& config)
    : spec_(spec), displacement_(config.driver_speed * config.reposition_duration / config.length_scale()) {
  if ((spec.reposition == Repositioning::Simple) != config.simple_mode) {
    throw std::invalid_argument("baseline " + spec.name() + " requires simple_mode = " +
                                (spec.reposition == Repositioning::Simple ? "true" : "false"));
  }
}

std::size_t BaselinePolicy::act(const Observation& obs, std::mt19937_64& rng) const {
  if (obs.actions.empty()) throw std::invalid_argument("baseline: empty action set");
  if (obs.actions.is_assign()) return choose_order(obs);
  if (spec_.reposition == Repositioning::Simple) throw std::logic_error("baseline: reposition decision in simple mode");
  return choose_heading(obs, rng);
}

std::size_t BaselinePolicy::choose_order(const Observation& obs) const {
  const auto& me = obs.drivers.row(static_cast<Eigen::Index>(obs.selected));
  std::size_t best = 0;
  double best_price = 0.0, best_dist = 0.0;
  OrderId best_id = 0;
  for (std::size_t i = 0; i < obs.actions.order_rows.size(); ++i) {
    const auto r = obs.actions.order_rows[i];
    const auto& o = obs.orders.row(static_cast<Eigen::Index>(r));
    const double price = o(kOrderPrice);
    const double dist = std::hypot(o(kOrderOriginX) - me(kDriverX), o(kOrderOriginY) - me(kDriverY));
    const OrderId id = obs.order_ids.at(r);
    bool better = false;
    if (i == 0) {
      better = true;
    } else if (spec_.objective == Objective::MRM) {
      better = price > best_price || (price == best_price && (dist < best_dist || (dist == best_dist && id < best_id)));
    } else {
      better = dist < best_dist || (dist == best_dist && (price > best_price || (price == best_price && id < best_id)));
    }
    if (better) {
      best = i;
      best_price = price;
      best_dist = dist;
      best_id = id;
    }
  }
  return best;
}

std::size_t BaselinePolicy::choose_heading(const Observation& obs, std::mt19937_64& rng) const {
  if (spec_.reposition == Repositioning::Demand && obs.orders.rows() > 0) {
    const auto& me = obs.drivers.row(static_cast<Eigen::Index>(obs.selected));
    double best = std::numeric_limits<double>::infinity();
    double dx = 0.0, dy = 0.0;
    for (Eigen::Index r = 0; r < obs.orders.rows(); ++r) {
      const double ox = obs.orders(r, kOrderOriginX) - me(kDriverX);
      const double oy = obs.orders(r, kOrderOriginY) - me(kDriverY);
      const double d = std::hypot(ox, oy);
      if (d < best) {
        best = d;
        dx = ox;
        dy = oy;
      }
    }
    return static_cast<std::size_t>(snap_heading(dx, dy, displacement_));
  }
  return random_action(obs, rng);
}

Heading snap_heading(double dx, double dy, double reach) {
  if (std::hypot(dx, dy) <= reach) return Heading::Stay;
  std::size_t best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h + 1 < kHeadingCount; ++h) {
    const Point u = heading_vector(static_cast<Heading>(h));
    const double d = u.x * dx + u.y * dy;
    if (d > best_dot) {
      best_dot = d;
      best = h;
    }
  }
  return static_cast<Heading>(best);
}

std::size_t random_action(const Observation& obs, std::mt19937_64& rng) {
  if (obs.actions.empty()) throw std::invalid_argument("random_action: empty action set");
  std::uniform_int_distribution<std::size_t> pick(0, obs.actions.size() - 1);
  return pick(rng);
}

}  // namespace mdvdrp::baselines
