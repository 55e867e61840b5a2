#include "mdvdrp/scenarios/domains.hpp"

#include <cmath>

#include "mdvdrp/scenarios/historical_io.hpp"

namespace mdvdrp::scenarios {

Demand parse_demand(const std::string& s) {
  if (s == "high") return Demand::High;
  if (s == "low") return Demand::Low;
  throw SimError("unknown demand variant '" + s + "' (expected high or low)");
}

Scenario regional(Demand demand, const RegionalOptions& options) {
  Scenario s;
  s.name = demand == Demand::High ? "regional-high" : "regional-low";
  s.config.episode_horizon = options.horizon;

  PoissonRegions p;
  p.rate = demand == Demand::High ? options.high_rate : options.low_rate;
  const auto flow = [](std::string name, Rect from, Rect to, double price) {
    return OrderFlow{std::move(name), 0.25, from, {{1.0, to}}, FixedPrice{price}};
  };
  p.flows = {
      flow("center->upper-left", kRegionalCenter, kRegionalUpperLeft, 2.0),
      flow("center->bottom-right", kRegionalCenter, kRegionalBottomRight, 2.0),
      flow("upper-left->center", kRegionalUpperLeft, kRegionalCenter, 2.0),
      flow("bottom-right->center", kRegionalBottomRight, kRegionalCenter, 4.0),
  };
  s.orders = p;
  s.drivers = FixedFleet{options.drivers, s.config.region, 0.0};
  return s;
}

Scenario hot_cold(Demand demand, const HotColdOptions& options) {
  Scenario s;
  s.name = demand == Demand::High ? "hot-cold-high" : "hot-cold-low";
  s.config.episode_horizon = options.horizon;

  const Rect top_edge{0.0, 1.0, 1.0, 1.0};
  const Rect hot{0.0, 1.0 - options.hot_height, 1.0, 1.0};
  const Rect bottom_edge{0.0, 0.0, 1.0, 0.0};
  PoissonRegions p;
  p.rate = demand == Demand::High ? options.high_rate : options.low_rate;
  p.flows = {OrderFlow{"top->hot|cold", 1.0, top_edge, {{0.5, hot}, {0.5, bottom_edge}}, DistancePrice{1.0}}};
  s.orders = p;
  s.drivers = FixedFleet{options.drivers, s.config.region, 0.0};
  return s;
}

int distribute_first_patch_count(double split, int k) {
  return static_cast<int>(std::floor(split * k + 0.5));
}

Scenario distribute(double split, int k, const DistributeOptions& options) {
  if (k < 1) throw SimError("distribute: k must be >= 1");
  if (!(split >= 0.0 && split <= 1.0)) throw SimError("distribute: split must lie in [0, 1]");
  Scenario s;
  s.name = "distribute-" + std::to_string(static_cast<int>(std::lround(split * 100))) + "-" +
           std::to_string(static_cast<int>(std::lround((1.0 - split) * 100)));
  const double repo = s.config.reposition_duration;
  const SimTime phase2 = options.repositions_before_orders * repo;
  s.config.order_validity_window = repo + options.matching_slack * repo;
  s.config.episode_horizon = phase2 + s.config.order_validity_window;

  const int first = distribute_first_patch_count(split, k);
  Burst b;
  b.at = phase2;
  // Drop-offs sit in the opposite patch, far enough that nobody finishes before the end.
  b.patches = {{options.first_patch, options.second_patch, first, 1.0},
               {options.second_patch, options.first_patch, k - first, 1.0}};
  s.orders = b;
  s.drivers = FixedFleet{k, options.spawn, 0.0};
  return s;
}

SimConfig historical_config(const HistoricalOptions& options) {
  SimConfig c;
  c.region = options.region;
  c.driver_speed = options.speed_kmh / 60.0;
  c.broadcast_radius = options.broadcast_km;
  c.reposition_duration = options.reposition_minutes;
  c.reposition_noise_sigma = options.reposition_noise_minutes;
  c.order_validity_window = options.validity_minutes;
  c.episode_horizon = options.horizon_minutes;
  return c;
}

Scenario historical_orders(std::vector<std::vector<OrderSpec>> days, const HistoricalOptions& options) {
  Scenario s;
  s.name = "historical-orders";
  s.config = historical_config(options);
  s.orders = Replay{std::move(days), std::nullopt};
  s.drivers = FixedFleet{options.drivers, options.region, 0.0};
  return s;
}

Scenario historical_orders(const std::string& path, const HistoricalOptions& options) {
  const auto records = historical::read_orders_file(path, options.days, options.region);
  return historical_orders(historical::to_day_schemes(records, options.days), options);
}

Scenario historical_statistics(std::shared_ptr<const PoissonGridTable> table, const HistoricalOptions& options) {
  table->validate();
  Scenario s;
  s.name = "historical-statistics";
  HistoricalOptions o = options;
  o.region = table->region;
  s.config = historical_config(o);
  s.orders = PoissonGrid{table, options.order_scale, 60.0, DistancePrice{1.0}};
  s.drivers = PoissonGridDrivers{table, options.driver_scale, 60.0, options.driver_lifetime_minutes};
  return s;
}

Scenario historical_statistics(const std::string& path, const HistoricalOptions& options) {
  return historical_statistics(std::make_shared<const PoissonGridTable>(historical::read_grid_file(path)), options);
}

}  // namespace mdvdrp::scenarios
