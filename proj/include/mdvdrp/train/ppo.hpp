#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mdvdrp/nn/adam.hpp"
#include "mdvdrp/policy/policy_net.hpp"
#include "mdvdrp/sim/engine.hpp"
#include "mdvdrp/train/transitions.hpp"

namespace mdvdrp::train {

using nn::Vector;

struct PpoConfig {
  Perspective perspective = Perspective::DriverCentric;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;  // infinity disables clipping
  std::size_t updates_per_epoch = 20;
  std::size_t steps_per_epoch = 4000;  // decisions per environment
  double lr_policy = 1e-4;
  double lr_value = 5e-4;
  double value_coef = 0.5;
  double entropy_start = 0.01;
  double entropy_end = 0.01;
  int entropy_anneal_epochs = 0;
  std::size_t parallel_envs = 1;
  std::size_t chunk = 256;  // samples per forward/backward chunk of a full-batch update
  bool normalize_advantages = true;

  double entropy_coef(int epoch) const;
  void validate() const;
};

/// One collected decision with everything the update needs.
struct RolloutSample {
  ObservationPtr obs;
  std::size_t action = 0;
  double log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

struct PpoLosses {
  double policy = 0.0;   // negative clipped surrogate
  double value = 0.0;    // mean squared return error
  double entropy = 0.0;  // mean policy entropy
  double total = 0.0;
};

struct EpochStats {
  std::vector<double> episode_returns;  // episodes completed during collection
  std::size_t samples = 0;
  PpoLosses first;  // losses before the first update
  PpoLosses last;   // losses before the last update
  bool aborted = false;
  std::string diagnostic;
};

/// Objective pieces for a fixed set of samples, with the gradient of
/// policy + value_coef * value - entropy_coef * entropy accumulated into `grads` if non-null.
template <class S>
PpoLosses ppo_objective(const policy::PolicyNet<S>& net, const std::vector<const RolloutSample*>& samples,
                        double clip, double value_coef, double entropy_coef, S* grads, std::size_t chunk = 256);

/// Clipped-surrogate policy optimisation with a critic head and generalised advantages.
template <class S>
class PpoTrainer {
 public:
  PpoTrainer(const policy::PolicyArch& arch, const PpoConfig& config, std::uint64_t seed);

  /// Collects steps_per_epoch decisions from each environment (continuing episodes across
  /// epochs) and performs updates_per_epoch full-batch updates.
  EpochStats train_epoch(const Scenario& scenario);

  /// Collection only; exposed for tests.
  std::vector<RolloutSample> collect(const Scenario& scenario, std::vector<double>& finished_returns);
  /// Update phase on an explicit rollout.
  EpochStats update(const std::vector<RolloutSample>& rollout);

  int epochs() const { return epochs_; }
  const PpoConfig& config() const { return config_; }
  policy::PolicyNet<S>& net() { return net_; }
  const policy::PolicyNet<S>& net() const { return net_; }

 private:
  struct EnvSlot {
    Engine engine;
    ObservationPtr obs;
    std::uint64_t episodes = 0;
  };
  std::uint64_t episode_seed(std::size_t env, std::uint64_t episode) const;

  PpoConfig config_;
  policy::PolicyNet<S> net_;
  nn::AdamState<S> adam_;
  Vector<S> lr_scale_;
  std::mt19937_64 rng_;
  std::uint64_t seed_;
  std::vector<EnvSlot> envs_;
  int epochs_ = 0;
};

extern template class PpoTrainer<float>;
extern template class PpoTrainer<double>;

}  // namespace mdvdrp::train
