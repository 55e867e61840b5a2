#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

#include "mdvdrp/geometry.hpp"

namespace mdvdrp {

using OrderId = std::int64_t;
using DriverId = std::int64_t;
using SimTime = double;

inline constexpr SimTime kNever = std::numeric_limits<double>::infinity();

/// Raised for precondition violations: bad configs, illegal actions, malformed inputs.
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OrderState { Open, Assigned, Completed, Expired };

struct Order {
  OrderId id = 0;
  Point origin;
  Point destination;
  double price = 0.0;
  SimTime created_at = 0.0;
  SimTime expires_at = 0.0;
  OrderState state = OrderState::Open;
  SimTime assigned_at = kNever;
  int tag = -1;  // scheme-defined label (flow or patch index), -1 when unused
};

/// Reposition headings. The first eight are the compass directions; Stay keeps the driver put.
enum class Heading : std::uint8_t { N, NE, E, SE, S, SW, W, NW, Stay };
inline constexpr std::size_t kHeadingCount = 9;

/// Unit vector for a heading; zero for Stay.
Point heading_vector(Heading h);
const char* heading_name(Heading h);

struct Idle {};
struct Serving {
  OrderId order_id = 0;
  Point destination;
  SimTime completes_at = 0.0;
};
struct Repositioning {
  Point direction;
  Point start;
  SimTime started_at = 0.0;
  SimTime completes_at = 0.0;
};
using DriverStatus = std::variant<Idle, Serving, Repositioning>;

struct Driver {
  DriverId id = 0;
  Point position;  // for Repositioning this is the start point; see observed_position()
  DriverStatus status = Idle{};
  SimTime activated_at = 0.0;
  SimTime deactivates_at = kNever;
  bool retiring = false;

  bool idle() const { return std::holds_alternative<Idle>(status); }
};

struct Assign {
  OrderId order_id = 0;
  friend bool operator==(const Assign&, const Assign&) = default;
};
struct Reposition {
  Heading heading = Heading::Stay;
  friend bool operator==(const Reposition&, const Reposition&) = default;
};
using Action = std::variant<Assign, Reposition>;

std::string describe(const Action& a);

struct SimConfig {
  Rect region{0.0, 0.0, 1.0, 1.0};
  double driver_speed = 0.1;
  double broadcast_radius = 0.3;
  double reposition_duration = 1.0;
  double reposition_noise_sigma = 0.01;
  double order_validity_window = 5.0;
  double episode_horizon = 200.0;
  bool simple_mode = false;
  std::uint64_t rng_seed = 0;

  // Feature normalization; zero means "derive from the fields above".
  double feature_length_scale = 0.0;
  double feature_time_scale = 0.0;
  double feature_horizon = 0.0;

  double length_scale() const;
  double time_scale() const;
  double horizon_scale() const;

  /// Throws SimError when a field violates its constraint.
  void validate() const;
};

}  // namespace mdvdrp
