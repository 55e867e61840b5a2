#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "mdvdrp/sim/types.hpp"

namespace mdvdrp {

inline constexpr Eigen::Index kFeatureDim = 6;

/// One entity per row. Row-major so that the transpose is a column-major 6 x n block.
using FeatureRows = Eigen::Matrix<double, Eigen::Dynamic, kFeatureDim, Eigen::RowMajor>;

/// Column layout of order rows.
enum OrderFeature : Eigen::Index { kOrderOriginX, kOrderOriginY, kOrderDestX, kOrderDestY, kOrderPrice, kOrderWaiting };
/// Column layout of driver rows.
enum DriverFeature : Eigen::Index { kDriverX, kDriverY, kDriverDirX, kDriverDirY, kDriverServeLeft, kDriverRepoLeft };

struct ActionSet {
  enum class Kind { Assign, Reposition };

  Kind kind = Kind::Reposition;
  std::vector<std::size_t> order_rows;  // Assign only: rows of Observation::orders, ascending

  static ActionSet reposition() { return {Kind::Reposition, {}}; }
  static ActionSet assign(std::vector<std::size_t> rows) { return {Kind::Assign, std::move(rows)}; }

  bool is_assign() const { return kind == Kind::Assign; }
  std::size_t size() const { return is_assign() ? order_rows.size() : kHeadingCount; }
  bool empty() const { return size() == 0; }
};

/// State at a decision point as seen by a policy.
struct Observation {
  SimTime time = 0.0;
  double time_feature = 0.0;  // time normalized by the feature horizon
  std::size_t selected = 0;   // row of `drivers` that is being dispatched
  FeatureRows drivers;
  FeatureRows orders;  // every open order, in-radius or not
  ActionSet actions;
  std::vector<DriverId> driver_ids;
  std::vector<OrderId> order_ids;

  std::size_t num_actions() const { return actions.size(); }
  DriverId selected_driver() const { return driver_ids.at(selected); }

  /// Engine action for an index into the action set.
  Action action_at(std::size_t index) const;
};

}  // namespace mdvdrp
