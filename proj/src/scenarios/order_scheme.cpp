#include "mdvdrp/scenarios/order_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mdvdrp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw SimError(what);
}

Point sample_destination(const std::vector<DestinationChoice>& choices, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double pick = u(rng);
  for (const auto& c : choices) {
    if (pick < c.probability) return c.area.sample(rng);
    pick -= c.probability;
  }
  return choices.back().area.sample(rng);
}

// Cumulative weights over the nonzero entries of one hour slice.
struct HourSampler {
  std::vector<std::size_t> index;
  std::vector<double> cumulative;

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }

  std::size_t draw(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, total());
    const double x = u(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    if (it == cumulative.end()) --it;
    return index[static_cast<std::size_t>(it - cumulative.begin())];
  }
};

std::vector<HourSampler> order_samplers(const PoissonGridTable& t) {
  std::vector<HourSampler> out(PoissonGridTable::kHours);
  for (int o = 0; o < PoissonGridTable::kTiles; ++o) {
    for (int d = 0; d < PoissonGridTable::kTiles; ++d) {
      for (int h = 0; h < PoissonGridTable::kHours; ++h) {
        const double k = t.kappa[PoissonGridTable::kappa_index(o, d, h)];
        if (k <= 0.0) continue;
        auto& s = out[static_cast<std::size_t>(h)];
        s.index.push_back(static_cast<std::size_t>(o) * PoissonGridTable::kTiles + static_cast<std::size_t>(d));
        s.cumulative.push_back(s.total() + k);
      }
    }
  }
  return out;
}

std::vector<HourSampler> driver_samplers(const PoissonGridTable& t) {
  std::vector<HourSampler> out(PoissonGridTable::kHours);
  for (int tile = 0; tile < PoissonGridTable::kTiles; ++tile) {
    for (int h = 0; h < PoissonGridTable::kHours; ++h) {
      const double r = t.driver_rates[PoissonGridTable::driver_index(tile, h)];
      if (r <= 0.0) continue;
      auto& s = out[static_cast<std::size_t>(h)];
      s.index.push_back(static_cast<std::size_t>(tile));
      s.cumulative.push_back(s.total() + r);
    }
  }
  return out;
}

// Samplers of the most recently used table, rebuilt when the table changes.
struct SamplerCache {
  std::weak_ptr<const PoissonGridTable> table;
  std::vector<HourSampler> samplers;
};

template <class Build>
const std::vector<HourSampler>& cached_samplers(SamplerCache& cache, const std::shared_ptr<const PoissonGridTable>& table,
                                                Build&& build) {
  if (cache.table.expired() || cache.table.lock() != table) {
    cache.samplers = build(*table);
    cache.table = table;
  }
  return cache.samplers;
}

// Walks hour by hour; `emit(time, hour)` is called for each arrival.
template <class Emit>
void hourly_process(const std::vector<HourSampler>& samplers, double scale, double hour_length, SimTime horizon,
                    Rng& rng, Emit&& emit) {
  const auto hours = static_cast<long>(std::ceil(horizon / hour_length));
  for (long k = 0; k < hours; ++k) {
    const int hour = static_cast<int>(k % PoissonGridTable::kHours);
    const double rate = samplers[static_cast<std::size_t>(hour)].total() * scale / hour_length;
    const SimTime t0 = static_cast<double>(k) * hour_length;
    const SimTime t1 = std::min(horizon, t0 + hour_length);
    for (SimTime t : poisson_arrivals(rate, t0, t1, rng)) emit(t, hour);
  }
}

}  // namespace

double price_of(const PriceRule& rule, Point origin, Point destination) {
  return std::visit(overloaded{[](const FixedPrice& f) { return f.value; },
                               [&](const DistancePrice& d) { return d.per_unit * distance(origin, destination); }},
                    rule);
}

std::vector<SimTime> poisson_arrivals(double rate, SimTime t0, SimTime t1, Rng& rng) {
  std::vector<SimTime> out;
  if (!(rate > 0.0) || !(t1 > t0)) return out;
  std::exponential_distribution<double> gap(rate);
  for (SimTime t = t0 + gap(rng); t < t1; t += gap(rng)) out.push_back(t);
  return out;
}

Rect PoissonGridTable::tile_rect(int tile) const {
  const int tx = tile % kTilesX;
  const int ty = tile / kTilesX;
  const double w = region.width() / kTilesX;
  const double h = region.height() / kTilesY;
  return {region.x0 + tx * w, region.y0 + ty * h, region.x0 + (tx + 1) * w, region.y0 + (ty + 1) * h};
}

int PoissonGridTable::tile_of(Point p) const {
  const double fx = (p.x - region.x0) / region.width();
  const double fy = (p.y - region.y0) / region.height();
  const int tx = std::clamp(static_cast<int>(fx * kTilesX), 0, kTilesX - 1);
  const int ty = std::clamp(static_cast<int>(fy * kTilesY), 0, kTilesY - 1);
  return ty * kTilesX + tx;
}

PoissonGridTable PoissonGridTable::zeros(Rect region) {
  PoissonGridTable t;
  t.region = region;
  t.kappa.assign(static_cast<std::size_t>(kTiles) * kTiles * kHours, 0.0);
  t.driver_rates.assign(static_cast<std::size_t>(kTiles) * kHours, 0.0);
  return t;
}

void PoissonGridTable::validate() const {
  require(kappa.size() == static_cast<std::size_t>(kTiles) * kTiles * kHours,
          "poisson grid: order table must be 400x400x24");
  require(driver_rates.size() == static_cast<std::size_t>(kTiles) * kHours,
          "poisson grid: driver table must be 400x24");
  require(region.width() > 0.0 && region.height() > 0.0, "poisson grid: empty region");
  require(std::all_of(kappa.begin(), kappa.end(), [](double k) { return std::isfinite(k) && k >= 0.0; }),
          "poisson grid: rates must be finite and >= 0");
  require(std::all_of(driver_rates.begin(), driver_rates.end(),
                      [](double k) { return std::isfinite(k) && k >= 0.0; }),
          "poisson grid: driver rates must be finite and >= 0");
}

void OrderScheme::validate() const {
  std::visit(overloaded{
                 [](const PoissonRegions& p) {
                   require(std::isfinite(p.rate) && p.rate >= 0.0, "order scheme: rate must be >= 0");
                   require(!p.flows.empty() || p.rate == 0.0, "order scheme: no flows");
                   for (const auto& f : p.flows) {
                     require(f.weight >= 0.0, "order scheme: flow weight must be >= 0");
                     require(!f.destinations.empty(), "order scheme: flow without destinations");
                     double total = 0.0;
                     for (const auto& d : f.destinations) {
                       require(d.probability >= 0.0, "order scheme: negative destination probability");
                       total += d.probability;
                     }
                     require(std::abs(total - 1.0) < 1e-9, "order scheme: destination probabilities must sum to 1");
                   }
                 },
                 [](const Replay& r) {
                   require(!r.days.empty(), "order scheme: replay without days");
                   require(!r.fixed_day || *r.fixed_day < r.days.size(), "order scheme: replay day out of range");
                 },
                 [](const PoissonGrid& g) {
                   require(g.table != nullptr, "order scheme: missing poisson grid");
                   g.table->validate();
                   require(g.order_scale >= 0.0 && g.hour_length > 0.0, "order scheme: bad grid scaling");
                 },
                 [](const Burst& b) {
                   for (const auto& p : b.patches) require(p.count >= 0, "order scheme: negative patch count");
                 },
             },
             kind_);
}

std::vector<OrderSpec> OrderScheme::generate(SimTime horizon, Rng& rng) const {
  std::vector<OrderSpec> out;
  std::visit(overloaded{
                 [&](const PoissonRegions& p) {
                   double total_weight = 0.0;
                   for (const auto& f : p.flows) total_weight += f.weight;
                   if (total_weight <= 0.0) return;
                   std::uniform_real_distribution<double> u(0.0, total_weight);
                   for (SimTime t : poisson_arrivals(p.rate, 0.0, horizon, rng)) {
                     double pick = u(rng);
                     std::size_t fi = 0;
                     while (fi + 1 < p.flows.size() && pick >= p.flows[fi].weight) pick -= p.flows[fi++].weight;
                     const auto& flow = p.flows[fi];
                     OrderSpec spec;
                     spec.created_at = t;
                     spec.origin = flow.origin.sample(rng);
                     spec.destination = sample_destination(flow.destinations, rng);
                     spec.price = price_of(flow.price, spec.origin, spec.destination);
                     spec.tag = static_cast<int>(fi);
                     out.push_back(spec);
                   }
                 },
                 [&](const Replay& r) {
                   std::size_t day = 0;
                   if (r.fixed_day) {
                     day = *r.fixed_day;
                   } else {
                     std::uniform_int_distribution<std::size_t> pick(0, r.days.size() - 1);
                     day = pick(rng);
                   }
                   for (const auto& spec : r.days[day]) {
                     if (spec.created_at <= horizon) out.push_back(spec);
                   }
                   std::stable_sort(out.begin(), out.end(),
                                    [](const OrderSpec& a, const OrderSpec& b) { return a.created_at < b.created_at; });
                 },
                 [&](const PoissonGrid& g) {
                   const auto& table = *g.table;
                   thread_local SamplerCache cache;
                   const auto& samplers = cached_samplers(cache, g.table, order_samplers);
                   hourly_process(samplers, g.order_scale, g.hour_length, horizon, rng, [&](SimTime t, int hour) {
                     const std::size_t pair = samplers[static_cast<std::size_t>(hour)].draw(rng);
                     const int o = static_cast<int>(pair / PoissonGridTable::kTiles);
                     const int d = static_cast<int>(pair % PoissonGridTable::kTiles);
                     OrderSpec spec;
                     spec.created_at = t;
                     spec.origin = table.tile_rect(o).sample(rng);
                     spec.destination = table.tile_rect(d).sample(rng);
                     spec.price = price_of(g.price, spec.origin, spec.destination);
                     spec.tag = static_cast<int>(pair);
                     out.push_back(spec);
                   });
                 },
                 [&](const Burst& b) {
                   for (std::size_t pi = 0; pi < b.patches.size(); ++pi) {
                     const auto& patch = b.patches[pi];
                     for (int i = 0; i < patch.count; ++i) {
                       OrderSpec spec;
                       spec.created_at = b.at;
                       spec.origin = patch.origin.sample(rng);
                       spec.destination = patch.destination.sample(rng);
                       spec.price = patch.price;
                       spec.tag = static_cast<int>(pi);
                       out.push_back(spec);
                     }
                   }
                 },
             },
             kind_);
  return out;
}

void DriverScheme::validate() const {
  std::visit(overloaded{
                 [](const FixedFleet& f) { require(f.count >= 0, "driver scheme: negative fleet size"); },
                 [](const PoissonGridDrivers& g) {
                   require(g.table != nullptr, "driver scheme: missing poisson grid");
                   g.table->validate();
                   require(g.driver_scale >= 0.0 && g.hour_length > 0.0 && g.lifetime > 0.0,
                           "driver scheme: bad grid scaling");
                 },
             },
             kind_);
}

bool DriverScheme::can_activate_before(SimTime horizon) const {
  return std::visit(overloaded{
                        [&](const FixedFleet& f) { return f.count > 0 && f.at <= horizon; },
                        [&](const PoissonGridDrivers& g) {
                          if (g.driver_scale <= 0.0) return false;
                          const auto hours = std::min<long>(static_cast<long>(std::ceil(horizon / g.hour_length)),
                                                            PoissonGridTable::kHours);
                          for (int tile = 0; tile < PoissonGridTable::kTiles; ++tile) {
                            for (long h = 0; h < hours; ++h) {
                              if (g.table->driver_rates[PoissonGridTable::driver_index(tile, static_cast<int>(h))] > 0.0)
                                return true;
                            }
                          }
                          return false;
                        },
                    },
                    kind_);
}

std::vector<DriverSpawn> DriverScheme::generate(SimTime horizon, Rng& rng) const {
  std::vector<DriverSpawn> out;
  std::visit(overloaded{
                 [&](const FixedFleet& f) {
                   for (int i = 0; i < f.count; ++i) out.push_back({f.at, f.spawn.sample(rng), kNever});
                 },
                 [&](const PoissonGridDrivers& g) {
                   const auto& table = *g.table;
                   thread_local SamplerCache cache;
                   const auto& samplers = cached_samplers(cache, g.table, driver_samplers);
                   hourly_process(samplers, g.driver_scale, g.hour_length, horizon, rng, [&](SimTime t, int hour) {
                     const auto tile = static_cast<int>(samplers[static_cast<std::size_t>(hour)].draw(rng));
                     out.push_back({t, table.tile_rect(tile).sample(rng), g.lifetime});
                   });
                 },
             },
             kind_);
  return out;
}

}  // namespace mdvdrp
