#include "mdvdrp/train/dqn.hpp"

#include <stdexcept>

#include "mdvdrp/policy/selection.hpp"
#include "mdvdrp/train/estimators.hpp"

namespace mdvdrp::train {

std::size_t DqnConfig::effective_n_step() const {
  if (n_step > 0) return n_step;
  return perspective == Perspective::DriverCentric ? 1 : 20;
}

void DqnConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("dqn: gamma must lie in (0, 1]");
  if (batch == 0 || replay_capacity == 0 || target_copy_every == 0 || update_every == 0) {
    throw std::invalid_argument("dqn: batch, replay capacity, target period and update period must be positive");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("dqn: learning rate must be positive");
  if (epsilon_floor < 0.0 || epsilon_floor > 1.0 || epsilon_start < 0.0 || epsilon_start > 1.0) {
    throw std::invalid_argument("dqn: epsilon values must lie in [0, 1]");
  }
}

template <class S>
DqnTrainer<S>::DqnTrainer(const policy::PolicyArch& arch, const DqnConfig& config, std::uint64_t seed)
    : config_(config),
      online_([&] {
        auto a = arch;
        a.critic = false;
        return a;
      }(), seed),
      target_(online_),
      adam_(online_.num_params()),
      replay_(config.replay_capacity),
      rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  config_.validate();
}

template <class S>
double DqnTrainer<S>::epsilon() const {
  return epsilon_at(episodes_, config_.epsilon_start, config_.epsilon_decay, config_.epsilon_floor);
}

template <class S>
std::vector<double> DqnTrainer<S>::targets(std::span<const Transition* const> batch) const {
  std::vector<const Observation*> next;
  for (const auto* t : batch) {
    if (!t->done) next.push_back(t->next_obs.get());
  }
  std::vector<double> y(batch.size());
  policy::PolicyOutput<S> q;
  if (!next.empty()) q = target_.forward(next);
  std::size_t k = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = *batch[i];
    y[i] = t.reward;
    if (!t.done) {
      const auto& scores = q.scores[k++];
      if (scores.size() > 0) y[i] += discount(config_.gamma, t.dt) * static_cast<double>(scores.maxCoeff());
    }
  }
  return y;
}

template <class S>
double DqnTrainer<S>::update_on(std::span<const Transition* const> batch) {
  if (batch.empty()) throw std::invalid_argument("dqn: empty batch");
  const auto y = targets(batch);
  std::vector<const Observation*> obs;
  obs.reserve(batch.size());
  for (const auto* t : batch) obs.push_back(t->obs.get());
  policy::PolicyCache<S> cache;
  const auto out = online_.forward(obs, &cache);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<Vector<S>> dscores(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto a = static_cast<nn::Index>(batch[i]->action);
    if (a >= out.scores[i].size()) throw std::invalid_argument("dqn: stored action outside the action set");
    const double err = static_cast<double>(out.scores[i][a]) - y[i];
    loss += err * err * inv_b;
    dscores[i] = Vector<S>::Zero(out.scores[i].size());
    dscores[i][a] = static_cast<S>(2.0 * err * inv_b);
  }
  Vector<S> grads = Vector<S>::Zero(online_.num_params());
  online_.backward(cache, dscores, nullptr, grads.data());
  nn::AdamConfig ac;
  ac.lr = config_.lr;
  nn::adam_step(online_.params().values(), grads, adam_, ac);
  ++learner_steps_;
  if (learner_steps_ % config_.target_copy_every == 0) target_.params().values() = online_.params().values();
  return loss;
}

template <class S>
double DqnTrainer<S>::update() {
  const auto batch = replay_.sample(config_.batch, rng_);
  return update_on(batch);
}

template <class S>
EpisodeStats DqnTrainer<S>::train_episode(Engine& env, const Scenario& scenario, std::uint64_t episode_seed) {
  EpisodeStats stats;
  stats.epsilon = epsilon();
  TransitionAssembler assembler(config_.perspective, config_.effective_n_step(), config_.gamma);
  double loss_sum = 0.0;
  auto obs = env.reset(scenario, episode_seed);
  while (obs) {
    const auto q = online_.forward(*obs);
    const std::size_t a = policy::select_epsilon(q.scores[0], stats.epsilon, rng_);
    DecisionRecord d;
    d.time = obs->time;
    d.driver = obs->selected_driver();
    d.obs = obs;
    d.action = a;
    const auto r = env.step_index(a);
    d.reward = r.reward;
    assembler.record(d);
    for (auto& t : assembler.take()) replay_.push(std::move(t));
    ++stats.decisions;
    if (replay_.size() >= config_.learning_starts && stats.decisions % static_cast<std::int64_t>(config_.update_every) == 0) {
      loss_sum += update();
      ++stats.updates;
    }
    obs = r.next;
  }
  assembler.finish();
  for (auto& t : assembler.take()) replay_.push(std::move(t));
  stats.total_reward = env.total_reward();
  stats.counts = env.counts();
  stats.mean_loss = stats.updates > 0 ? loss_sum / static_cast<double>(stats.updates) : 0.0;
  ++episodes_;
  return stats;
}

template class DqnTrainer<float>;
template class DqnTrainer<double>;

}  // namespace mdvdrp::train
