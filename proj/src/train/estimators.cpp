#include "mdvdrp/train/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdvdrp::train {

double discount(double gamma, double dt) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("discount: gamma must lie in (0, 1]");
  if (dt < 0.0) throw std::invalid_argument("discount: negative time gap");
  return std::pow(gamma, dt);
}

double epsilon_at(int episode, double start, double decay, double floor) {
  if (episode < 0) throw std::invalid_argument("epsilon_at: negative episode");
  return std::max(start - decay * episode, floor);
}

double nstep_target(std::span<const RewardStep> window, double t_boot, double bootstrap, bool terminal, double gamma) {
  if (window.empty()) throw std::invalid_argument("nstep_target: empty window");
  const double t0 = window.front().time;
  double y = 0.0;
  for (const auto& s : window) y += discount(gamma, s.time - t0) * s.reward;
  if (!terminal) y += discount(gamma, t_boot - t0) * bootstrap;
  return y;
}

GaeResult gae(std::span<const GaeStep> steps, double bootstrap_value, double gamma, double lambda) {
  GaeResult r;
  const std::size_t n = steps.size();
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const auto& s = steps[i];
    const double next_value = s.done ? 0.0 : (i + 1 < n ? steps[i + 1].value : bootstrap_value);
    const double g = discount(gamma, s.dt);
    const double delta = s.reward + g * next_value - s.value;
    const double carry = (s.done || i + 1 == n) ? 0.0 : lambda * g * next_adv;
    r.advantages[i] = delta + carry;
    r.returns[i] = r.advantages[i] + s.value;
    next_adv = r.advantages[i];
  }
  return r;
}

void normalize(std::vector<double>& xs) {
  if (xs.size() < 2) return;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  const double sd = std::sqrt(var);
  for (double& x : xs) x = sd > 1e-12 ? (x - mean) / sd : x - mean;
}

}  // namespace mdvdrp::train
