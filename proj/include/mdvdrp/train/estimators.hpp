#pragma once

#include <span>
#include <vector>

namespace mdvdrp::train {

/// gamma^dt.
double discount(double gamma, double dt);

/// max(start - decay * episode, floor).
double epsilon_at(int episode, double start = 0.99, double decay = 0.01, double floor = 0.1);

/// One step of an n-step window: reward received at `time`.
struct RewardStep {
  double time = 0.0;
  double reward = 0.0;
};

/// sum_k gamma^(t_k - t_0) r_k + gamma^(t_boot - t_0) * bootstrap, the last term omitted when
/// `terminal`.
double nstep_target(std::span<const RewardStep> window, double t_boot, double bootstrap, bool terminal, double gamma);

/// One step of a trajectory for advantage estimation. `dt` is the gap to the next step.
struct GaeStep {
  double reward = 0.0;
  double value = 0.0;
  double dt = 0.0;
  bool done = false;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + value
};

/// delta_k = r_k + gamma^dt_k V_{k+1} - V_k and A_k = delta_k + lambda gamma^dt_k A_{k+1}, with
/// V = 0 after a terminal step and `bootstrap_value` after the last step of a truncated
/// trajectory.
GaeResult gae(std::span<const GaeStep> steps, double bootstrap_value, double gamma, double lambda);

/// Shifts and scales to zero mean and unit variance; only centres when the spread is 0.
void normalize(std::vector<double>& xs);

}  // namespace mdvdrp::train
