#include "mdvdrp/harness/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

namespace mdvdrp::harness {
namespace {

struct Hotspot {
  Point center;
  double weight = 1.0;
};

Point sample_endpoint(const SyntheticOptions& o, const std::vector<Hotspot>& spots,
                      std::discrete_distribution<int>& pick, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (spots.empty() || u(rng) < o.background) return o.region.sample(rng);
  const auto& h = spots[static_cast<std::size_t>(pick(rng))];
  std::normal_distribution<double> n(0.0, o.hotspot_sigma_km);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Point p{h.center.x + n(rng), h.center.y + n(rng)};
    if (o.region.contains(p)) return p;
  }
  return o.region.clamp(h.center);
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticOptions& o) {
  if (o.days < 1) throw std::invalid_argument("gen-data: days must be >= 1");
  if (!(o.daily_orders >= 0.0)) throw std::invalid_argument("gen-data: daily_orders must be >= 0");
  if (o.hotspots < 0) throw std::invalid_argument("gen-data: hotspots must be >= 0");
  if (!(o.background >= 0.0 && o.background <= 1.0)) throw std::invalid_argument("gen-data: background must lie in [0, 1]");
  if (!(o.drivers_per_order >= 0.0)) throw std::invalid_argument("gen-data: drivers_per_order must be >= 0");

  std::mt19937_64 rng(o.seed);
  const Rect inner{o.region.x0 + 0.1 * o.region.width(), o.region.y0 + 0.1 * o.region.height(),
                   o.region.x1 - 0.1 * o.region.width(), o.region.y1 - 0.1 * o.region.height()};
  std::vector<Hotspot> spots;
  std::vector<double> weights;
  std::uniform_real_distribution<double> wdist(0.5, 1.5);
  for (int i = 0; i < o.hotspots; ++i) {
    spots.push_back({inner.sample(rng), wdist(rng)});
    weights.push_back(spots.back().weight);
  }
  std::discrete_distribution<int> pick_spot(weights.begin(), weights.end());
  std::discrete_distribution<int> pick_hour(o.hour_profile.begin(), o.hour_profile.end());
  std::poisson_distribution<long> daily(o.daily_orders);
  std::uniform_real_distribution<double> within_hour(0.0, 3600.0);

  SyntheticData data;
  data.grid = PoissonGridTable::zeros(o.region);
  for (int day = 0; day < o.days; ++day) {
    const long n = o.daily_orders > 0.0 ? daily(rng) : 0;
    const auto first = data.orders.size();
    for (long i = 0; i < n; ++i) {
      historical::OrderRecord r;
      r.day = day;
      const int hour = pick_hour(rng);
      r.time_seconds = hour * 3600.0 + within_hour(rng);
      r.origin = sample_endpoint(o, spots, pick_spot, rng);
      r.destination = sample_endpoint(o, spots, pick_spot, rng);
      data.orders.push_back(r);
    }
    std::sort(data.orders.begin() + static_cast<std::ptrdiff_t>(first), data.orders.end(),
              [](const auto& a, const auto& b) { return a.time_seconds < b.time_seconds; });
  }

  const double per_day = 1.0 / static_cast<double>(o.days);
  for (const auto& r : data.orders) {
    const int hour = std::min(23, static_cast<int>(r.time_seconds / 3600.0));
    const int ot = data.grid.tile_of(r.origin);
    const int dt = data.grid.tile_of(r.destination);
    data.grid.kappa[PoissonGridTable::kappa_index(ot, dt, hour)] += per_day;
    data.grid.driver_rates[PoissonGridTable::driver_index(ot, hour)] += per_day * o.drivers_per_order;
  }
  return data;
}

void write_synthetic(const SyntheticData& data, const std::string& orders_path, const std::string& grid_path) {
  std::ofstream orders(orders_path);
  if (!orders) throw std::runtime_error("cannot open '" + orders_path + "' for writing");
  historical::write_orders(orders, data.orders);
  if (!orders) throw std::runtime_error("failed writing '" + orders_path + "'");
  std::ofstream grid(grid_path);
  if (!grid) throw std::runtime_error("cannot open '" + grid_path + "' for writing");
  historical::write_grid(grid, data.grid);
  if (!grid) throw std::runtime_error("failed writing '" + grid_path + "'");
}

}  // namespace mdvdrp::harness
