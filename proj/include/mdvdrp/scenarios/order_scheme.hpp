#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "mdvdrp/geometry.hpp"
#include "mdvdrp/sim/types.hpp"

namespace mdvdrp {

using Rng = std::mt19937_64;

/// An order before the engine admits it.
struct OrderSpec {
  SimTime created_at = 0.0;
  Point origin;
  Point destination;
  double price = 0.0;
  int tag = -1;
};

struct DriverSpawn {
  SimTime at = 0.0;
  Point position;
  SimTime lifetime = kNever;
};

struct FixedPrice {
  double value = 0.0;
};
struct DistancePrice {
  double per_unit = 1.0;
};
using PriceRule = std::variant<FixedPrice, DistancePrice>;

double price_of(const PriceRule& rule, Point origin, Point destination);

struct DestinationChoice {
  double probability = 1.0;
  Rect area;
};

/// One origin/destination stream; flows of a PoissonRegions scheme split the total rate by weight.
struct OrderFlow {
  std::string name;
  double weight = 1.0;
  Rect origin;
  std::vector<DestinationChoice> destinations;
  PriceRule price = FixedPrice{1.0};
};

struct PoissonRegions {
  double rate = 1.0;  // orders per time unit over all flows
  std::vector<OrderFlow> flows;
};

/// All orders appear at once; each patch contributes `count` orders.
struct Burst {
  struct Patch {
    Rect origin;
    Rect destination;
    int count = 0;
    double price = 1.0;
  };
  SimTime at = 0.0;
  std::vector<Patch> patches;
};

/// Recorded orders, one list per day; reset picks a day uniformly unless `fixed_day` is set.
struct Replay {
  std::vector<std::vector<OrderSpec>> days;
  std::optional<std::size_t> fixed_day;
};

/// Hour-of-day Poisson rates over a square tiling. Tiles are numbered row-major from the
/// lower-left corner: tile = ty * tiles_x + tx.
struct PoissonGridTable {
  static constexpr int kTilesX = 20;
  static constexpr int kTilesY = 20;
  static constexpr int kTiles = kTilesX * kTilesY;
  static constexpr int kHours = 24;

  Rect region{0.0, 0.0, 10.0, 10.0};
  std::vector<double> kappa;         // [origin tile][destination tile][hour], orders per hour
  std::vector<double> driver_rates;  // [tile][hour], activations per hour

  static std::size_t kappa_index(int origin, int destination, int hour) {
    return (static_cast<std::size_t>(origin) * kTiles + static_cast<std::size_t>(destination)) * kHours +
           static_cast<std::size_t>(hour);
  }
  static std::size_t driver_index(int tile, int hour) {
    return static_cast<std::size_t>(tile) * kHours + static_cast<std::size_t>(hour);
  }

  Rect tile_rect(int tile) const;
  int tile_of(Point p) const;

  /// Allocates zeroed tables of the fixed dimensions.
  static PoissonGridTable zeros(Rect region);
  void validate() const;
};

struct PoissonGrid {
  std::shared_ptr<const PoissonGridTable> table;
  double order_scale = 0.5;
  double hour_length = 60.0;  // time units per hour
  PriceRule price = DistancePrice{1.0};
};

class OrderScheme {
 public:
  using Kind = std::variant<PoissonRegions, Replay, PoissonGrid, Burst>;

  OrderScheme() = default;
  OrderScheme(Kind kind) : kind_(std::move(kind)) {}  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::is_constructible_v<Kind, T&&> && (!std::is_same_v<std::decay_t<T>, Kind>) &&
             (!std::is_same_v<std::decay_t<T>, OrderScheme>)
  OrderScheme(T&& alt) : kind_(std::forward<T>(alt)) {}  // NOLINT(google-explicit-constructor)

  const Kind& kind() const { return kind_; }
  Kind& kind() { return kind_; }

  void validate() const;

  /// Samples every order of one episode, sorted by creation time.
  std::vector<OrderSpec> generate(SimTime horizon, Rng& rng) const;

 private:
  Kind kind_ = PoissonRegions{};
};

struct FixedFleet {
  int count = 10;
  Rect spawn{0.0, 0.0, 1.0, 1.0};
  SimTime at = 0.0;
};

struct PoissonGridDrivers {
  std::shared_ptr<const PoissonGridTable> table;
  double driver_scale = 0.07 * 0.5;
  double hour_length = 60.0;
  SimTime lifetime = 6.0 * 60.0;
};

class DriverScheme {
 public:
  using Kind = std::variant<FixedFleet, PoissonGridDrivers>;

  DriverScheme() = default;
  DriverScheme(Kind kind) : kind_(std::move(kind)) {}  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::is_constructible_v<Kind, T&&> && (!std::is_same_v<std::decay_t<T>, Kind>) &&
             (!std::is_same_v<std::decay_t<T>, DriverScheme>)
  DriverScheme(T&& alt) : kind_(std::forward<T>(alt)) {}  // NOLINT(google-explicit-constructor)

  const Kind& kind() const { return kind_; }

  void validate() const;

  /// True when the scheme can activate at least one driver before the horizon.
  bool can_activate_before(SimTime horizon) const;

  std::vector<DriverSpawn> generate(SimTime horizon, Rng& rng) const;

 private:
  Kind kind_ = FixedFleet{};
};

struct Scenario {
  std::string name;
  SimConfig config;
  OrderScheme orders;
  DriverScheme drivers;
};

/// Arrival times of a homogeneous Poisson process on [t0, t1), built from exponential gaps.
std::vector<SimTime> poisson_arrivals(double rate, SimTime t0, SimTime t1, Rng& rng);

}  // namespace mdvdrp
