#pragma once

#include <string>
#include <vector>

#include "mdvdrp/scenarios/order_scheme.hpp"

namespace mdvdrp::scenarios {

enum class Demand { High, Low };

Demand parse_demand(const std::string& s);

// Regional flow tags, in the order the flows are declared.
inline constexpr int kCenterToUpperLeft = 0;
inline constexpr int kCenterToBottomRight = 1;
inline constexpr int kUpperLeftToCenter = 2;
inline constexpr int kBottomRightToCenter = 3;

struct RegionalOptions {
  double high_rate = 2.0;
  double low_rate = 0.5;
  int drivers = 10;
  double horizon = 200.0;
};

inline constexpr Rect kRegionalCenter{0.4, 0.4, 0.6, 0.6};
inline constexpr Rect kRegionalUpperLeft{0.0, 0.8, 0.2, 1.0};
inline constexpr Rect kRegionalBottomRight{0.8, 0.0, 1.0, 0.2};

/// Three regions, four equally likely flows; bottom-right to center pays 4, the rest pay 2.
Scenario regional(Demand demand, const RegionalOptions& options = {});

struct HotColdOptions {
  double high_rate = 2.0;
  double low_rate = 0.5;
  int drivers = 10;
  double horizon = 200.0;
  double hot_height = 0.2;
};

/// Pickups along the top edge; a fair coin sends the drop-off to the hot band under the top
/// edge or to the bottom edge. Price is the trip length.
Scenario hot_cold(Demand demand, const HotColdOptions& options = {});

struct DistributeOptions {
  double repositions_before_orders = 3.0;  // phase 1 length in reposition durations
  double matching_slack = 0.5;             // phase 2 slack in reposition durations
  Rect spawn{0.45, 0.45, 0.55, 0.55};
  Rect first_patch{0.05, 0.85, 0.15, 0.95};
  Rect second_patch{0.85, 0.05, 0.95, 0.15};
};

/// Number of orders in the first patch: split * k rounded half-up.
int distribute_first_patch_count(double split, int k);

/// Phase 1: k drivers and no orders. Phase 2: k unit-price orders split between two far
/// patches, valid for one reposition plus slack; the episode ends when they expire.
Scenario distribute(double split, int k, const DistributeOptions& options = {});

struct HistoricalOptions {
  Rect region{0.0, 0.0, 10.0, 10.0};  // km
  int days = 30;
  int drivers = 100;
  double speed_kmh = 40.0;
  double broadcast_km = 2.0;
  double reposition_minutes = 2.0;
  double reposition_noise_minutes = 0.02;
  double validity_minutes = 10.0;
  double horizon_minutes = 24.0 * 60.0;
  double order_scale = 0.5;
  double driver_scale = 0.07 * 0.5;
  double driver_lifetime_minutes = 6.0 * 60.0;
};

/// SimConfig shared by the two historical domains: km and minutes.
SimConfig historical_config(const HistoricalOptions& options);

Scenario historical_orders(std::vector<std::vector<OrderSpec>> days, const HistoricalOptions& options = {});
Scenario historical_orders(const std::string& path, const HistoricalOptions& options = {});

Scenario historical_statistics(std::shared_ptr<const PoissonGridTable> table, const HistoricalOptions& options = {});
Scenario historical_statistics(const std::string& path, const HistoricalOptions& options = {});

}  // namespace mdvdrp::scenarios
