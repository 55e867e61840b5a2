#pragma once

#include <span>

#include <Eigen/Core>

#include "mdvdrp/features/observation.hpp"
#include "mdvdrp/sim/types.hpp"

namespace mdvdrp::features {

using Row = Eigen::Matrix<double, 1, kFeatureDim>;

/// [origin_x, origin_y, dest_x, dest_y, price, waiting]. Coordinates are measured from the
/// region's lower-left corner in units of the length scale; waiting is clamped to [0, 1]
/// after dividing by the time scale.
Row encode_order(const Order& order, SimTime t, const SimConfig& config);

/// [x, y, dir_x, dir_y, serve_left, repo_left]. A serving driver reports the destination of
/// its order; a repositioning driver reports its interpolated position.
Row encode_driver(const Driver& driver, SimTime t, const SimConfig& config);

/// Position a driver is observed at, in environment units.
Point observed_position(const Driver& driver, SimTime t, const SimConfig& config);

Observation build_observation(const SimConfig& config, SimTime t, std::span<const Order* const> open_orders,
                              std::span<const Driver* const> drivers, std::size_t selected_row,
                              ActionSet actions);

}  // namespace mdvdrp::features
