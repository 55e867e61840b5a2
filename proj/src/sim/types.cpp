#include "mdvdrp/sim/types.hpp"

#include <cmath>
#include <sstream>

namespace mdvdrp {

Point heading_vector(Heading h) {
  constexpr double d = 0.70710678118654752440;
  switch (h) {
    case Heading::N: return {0.0, 1.0};
    case Heading::NE: return {d, d};
    case Heading::E: return {1.0, 0.0};
    case Heading::SE: return {d, -d};
    case Heading::S: return {0.0, -1.0};
    case Heading::SW: return {-d, -d};
    case Heading::W: return {-1.0, 0.0};
    case Heading::NW: return {-d, d};
    case Heading::Stay: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

const char* heading_name(Heading h) {
  static constexpr std::array<const char*, kHeadingCount> names{"N", "NE", "E", "SE", "S",
                                                                "SW", "W", "NW", "Stay"};
  return names[static_cast<std::size_t>(h)];
}

std::string describe(const Action& a) {
  std::ostringstream os;
  if (const auto* as = std::get_if<Assign>(&a)) {
    os << "Assign(order " << as->order_id << ")";
  } else {
    os << "Reposition(" << heading_name(std::get<Reposition>(a).heading) << ")";
  }
  return os.str();
}

double SimConfig::length_scale() const {
  return feature_length_scale > 0.0 ? feature_length_scale : region.longer_side();
}
double SimConfig::time_scale() const {
  return feature_time_scale > 0.0 ? feature_time_scale : order_validity_window;
}
double SimConfig::horizon_scale() const {
  return feature_horizon > 0.0 ? feature_horizon : episode_horizon;
}

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw SimError(std::string("invalid SimConfig: ") + what);
  };
  require(region.width() >= 0.0 && region.height() >= 0.0 && region.longer_side() > 0.0,
          "region must have positive extent");
  require(std::isfinite(driver_speed) && driver_speed > 0.0, "driver_speed must be > 0");
  require(std::isfinite(broadcast_radius) && broadcast_radius > 0.0, "broadcast_radius must be > 0");
  require(std::isfinite(reposition_duration) && reposition_duration > 0.0,
          "reposition_duration must be > 0");
  require(std::isfinite(reposition_noise_sigma) && reposition_noise_sigma >= 0.0,
          "reposition_noise_sigma must be >= 0");
  require(order_validity_window > 0.0, "order_validity_window must be > 0");
  require(episode_horizon > 0.0, "episode_horizon must be > 0");
  require(feature_length_scale >= 0.0 && feature_time_scale >= 0.0 && feature_horizon >= 0.0,
          "feature scales must be >= 0");
}

}  // namespace mdvdrp
