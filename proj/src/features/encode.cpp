#include "mdvdrp/features/encode.hpp"

#include <algorithm>

namespace mdvdrp {

Action Observation::action_at(std::size_t index) const {
  if (index >= actions.size()) throw SimError("action index out of range");
  if (actions.is_assign()) return Assign{order_ids.at(actions.order_rows[index])};
  return Reposition{static_cast<Heading>(index)};
}

namespace features {

Row encode_order(const Order& order, SimTime t, const SimConfig& config) {
  const double ls = config.length_scale();
  const Point o = order.origin - Point{config.region.x0, config.region.y0};
  const Point d = order.destination - Point{config.region.x0, config.region.y0};
  const double waiting = std::clamp((t - order.created_at) / config.time_scale(), 0.0, 1.0);
  Row row;
  row << o.x / ls, o.y / ls, d.x / ls, d.y / ls, order.price, waiting;
  return row;
}

Point observed_position(const Driver& driver, SimTime t, const SimConfig& config) {
  if (const auto* s = std::get_if<Serving>(&driver.status)) return s->destination;
  if (const auto* r = std::get_if<Repositioning>(&driver.status)) {
    const double elapsed = std::clamp(t - r->started_at, 0.0, r->completes_at - r->started_at);
    return config.region.clamp(r->start + (config.driver_speed * elapsed) * r->direction);
  }
  return driver.position;
}

Row encode_driver(const Driver& driver, SimTime t, const SimConfig& config) {
  const double ls = config.length_scale();
  const double ts = config.time_scale();
  const Point p = observed_position(driver, t, config) - Point{config.region.x0, config.region.y0};
  Point dir{};
  double serve_left = 0.0;
  double repo_left = 0.0;
  if (const auto* s = std::get_if<Serving>(&driver.status)) {
    serve_left = std::max(0.0, s->completes_at - t) / ts;
  } else if (const auto* r = std::get_if<Repositioning>(&driver.status)) {
    dir = r->direction;
    repo_left = std::max(0.0, r->completes_at - t) / ts;
  }
  Row row;
  row << p.x / ls, p.y / ls, dir.x, dir.y, serve_left, repo_left;
  return row;
}

Observation build_observation(const SimConfig& config, SimTime t, std::span<const Order* const> open_orders,
                              std::span<const Driver* const> drivers, std::size_t selected_row,
                              ActionSet actions) {
  Observation obs;
  obs.time = t;
  obs.time_feature = t / config.horizon_scale();
  obs.selected = selected_row;
  obs.orders.resize(static_cast<Eigen::Index>(open_orders.size()), kFeatureDim);
  obs.order_ids.reserve(open_orders.size());
  for (std::size_t i = 0; i < open_orders.size(); ++i) {
    obs.orders.row(static_cast<Eigen::Index>(i)) = encode_order(*open_orders[i], t, config);
    obs.order_ids.push_back(open_orders[i]->id);
  }
  obs.drivers.resize(static_cast<Eigen::Index>(drivers.size()), kFeatureDim);
  obs.driver_ids.reserve(drivers.size());
  for (std::size_t j = 0; j < drivers.size(); ++j) {
    obs.drivers.row(static_cast<Eigen::Index>(j)) = encode_driver(*drivers[j], t, config);
    obs.driver_ids.push_back(drivers[j]->id);
  }
  obs.actions = std::move(actions);
  return obs;
}

}  // namespace features
}  // namespace mdvdrp
