#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdvdrp/scenarios/historical_io.hpp"

namespace mdvdrp::harness {

struct SyntheticOptions {
  std::uint64_t seed = 0;
  int days = 30;
  double daily_orders = 2000.0;  // Poisson mean per day
  Rect region{0.0, 0.0, 10.0, 10.0};
  int hotspots = 6;
  double hotspot_sigma_km = 0.8;
  double background = 0.2;  // share of endpoints drawn uniformly over the region
  /// Relative order intensity per hour of day.
  std::array<double, 24> hour_profile{0.3, 0.2, 0.15, 0.1, 0.1, 0.2, 0.5, 1.0, 1.4, 1.2, 1.0, 1.0,
                                      1.1, 1.0, 0.9, 0.9, 1.0, 1.3, 1.5, 1.3, 1.0, 0.8, 0.6, 0.4};
  /// Driver activations per order when building the driver rates of the grid.
  double drivers_per_order = 0.5;
};

struct SyntheticData {
  std::vector<historical::OrderRecord> orders;  // sorted by (day, time)
  PoissonGridTable grid;  // kappa = empirical orders per day and hour; driver rates follow origins
};

SyntheticData generate_synthetic(const SyntheticOptions& options);

/// Writes the order CSV and the matching grid file. Throws std::runtime_error on I/O failure.
void write_synthetic(const SyntheticData& data, const std::string& orders_path, const std::string& grid_path);

}  // namespace mdvdrp::harness
