#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mdvdrp/nn/adam.hpp"
#include "mdvdrp/policy/policy_net.hpp"
#include "mdvdrp/sim/engine.hpp"
#include "mdvdrp/train/transitions.hpp"

namespace mdvdrp::train {

using nn::Vector;

struct DqnConfig {
  Perspective perspective = Perspective::DriverCentric;
  double gamma = 0.99;
  std::size_t batch = 32;
  double lr = 1e-4;
  std::size_t replay_capacity = 20000;
  std::size_t target_copy_every = 100;
  std::size_t n_step = 0;  // 0 picks 1 for driver-centric and 20 for system-centric
  double epsilon_start = 0.99;
  double epsilon_decay = 0.01;
  double epsilon_floor = 0.1;
  std::size_t learning_starts = 32;  // transitions in replay before the first update
  std::size_t update_every = 1;      // decisions per learner step

  std::size_t effective_n_step() const;
  void validate() const;
};

struct EpisodeStats {
  double total_reward = 0.0;
  std::int64_t decisions = 0;
  OrderCounts counts;
  double epsilon = 0.0;
  double mean_loss = 0.0;
  std::size_t updates = 0;
};

/// Q-learning over the dispatch network with uniform replay, a periodically copied target
/// network and continuous-time n-step targets.
template <class S>
class DqnTrainer {
 public:
  DqnTrainer(const policy::PolicyArch& arch, const DqnConfig& config, std::uint64_t seed);

  /// Runs one exploratory episode, learning online, with epsilon = epsilon_at(episodes()).
  EpisodeStats train_episode(Engine& env, const Scenario& scenario, std::uint64_t episode_seed);

  /// One learner step on a uniformly sampled replay batch; returns the loss.
  double update();
  /// One learner step on an explicit batch; returns the mean squared TD error before the step.
  double update_on(std::span<const Transition* const> batch);
  /// Targets r + gamma^dt max_a' Q(s', a'; target) (no bootstrap when done).
  std::vector<double> targets(std::span<const Transition* const> batch) const;

  double epsilon() const;
  int episodes() const { return episodes_; }
  std::size_t learner_steps() const { return learner_steps_; }
  const DqnConfig& config() const { return config_; }
  policy::PolicyNet<S>& online() { return online_; }
  const policy::PolicyNet<S>& online() const { return online_; }
  const policy::PolicyNet<S>& target() const { return target_; }
  ReplayBuffer& replay() { return replay_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  DqnConfig config_;
  policy::PolicyNet<S> online_;
  policy::PolicyNet<S> target_;
  nn::AdamState<S> adam_;
  ReplayBuffer replay_;
  std::mt19937_64 rng_;
  int episodes_ = 0;
  std::size_t learner_steps_ = 0;
};

extern template class DqnTrainer<float>;
extern template class DqnTrainer<double>;

}  // namespace mdvdrp::train
