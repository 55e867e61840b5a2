#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "mdvdrp/features/observation.hpp"
#include "mdvdrp/sim/types.hpp"

namespace mdvdrp::baselines {

enum class Objective { MRM, MPDM };
enum class Repositioning { Simple, Random, Demand };

struct BaselineSpec {
  Objective objective = Objective::MPDM;
  Repositioning reposition = Repositioning::Simple;

  std::string name() const;
  /// Parses mrm-simple, mpdm-demand, ... Throws std::invalid_argument otherwise.
  static BaselineSpec parse(const std::string& s);
};

/// Myopic dispatcher. MRM takes the highest-price legal order (ties: nearest, then lowest id);
/// MPDM takes the nearest (ties: highest price, then lowest id). Reposition decisions move at
/// random or toward the nearest open order.
class BaselinePolicy {
 public:
  /// `config` must match the engine the observations come from; Simple requires simple mode.
  BaselinePolicy(BaselineSpec spec, const SimConfig& config);

  /// Index into obs.actions.
  std::size_t act(const Observation& obs, std::mt19937_64& rng) const;

  const BaselineSpec& spec() const { return spec_; }

 private:
  std::size_t choose_order(const Observation& obs) const;
  std::size_t choose_heading(const Observation& obs, std::mt19937_64& rng) const;

  BaselineSpec spec_;
  double displacement_;  // one reposition move in feature units
};

/// Heading whose unit vector has the largest dot product with `delta`; Stay when |delta| is
/// within `reach`. Ties go to the earlier heading.
Heading snap_heading(double dx, double dy, double reach);

/// Uniformly random legal action.
std::size_t random_action(const Observation& obs, std::mt19937_64& rng);

}  // namespace mdvdrp::baselines
