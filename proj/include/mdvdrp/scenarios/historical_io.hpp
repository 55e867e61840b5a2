#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mdvdrp/scenarios/order_scheme.hpp"

namespace mdvdrp::historical {

/// Header line of the historical-order CSV.
inline constexpr const char* kOrderHeader = "day,time_seconds,origin_x_km,origin_y_km,dest_x_km,dest_y_km";

struct OrderRecord {
  int day = 0;
  double time_seconds = 0.0;
  Point origin;  // km
  Point destination;
};

/// Parses the historical-order CSV. Every malformed row is reported with its line number in
/// the thrown SimError. Rows must satisfy 0 <= day < days and lie inside `region`.
std::vector<OrderRecord> read_orders(std::istream& in, int days, const Rect& region);
std::vector<OrderRecord> read_orders_file(const std::string& path, int days, const Rect& region);

void write_orders(std::ostream& out, const std::vector<OrderRecord>& records);

/// Groups records by day; times become minutes and prices equal the trip length in km.
std::vector<std::vector<OrderSpec>> to_day_schemes(const std::vector<OrderRecord>& records, int days);

// Poisson-grid text format:
//
//   mdvdrp-poisson-grid 1
//   region <x0> <y0> <x1> <y1>
//   dims <tiles_x> <tiles_y> <hours>
//   kappa <origin_tile> <dest_tile> <hour> <orders_per_hour>
//   driver <tile> <hour> <activations_per_hour>
//
// Only nonzero entries are listed. Lines starting with '#' are comments.
PoissonGridTable read_grid(std::istream& in);
PoissonGridTable read_grid_file(const std::string& path);
void write_grid(std::ostream& out, const PoissonGridTable& table);

}  // namespace mdvdrp::historical
