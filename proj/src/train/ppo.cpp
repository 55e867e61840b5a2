#include "mdvdrp/train/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mdvdrp/nn/mlp.hpp"
#include "mdvdrp/policy/selection.hpp"
#include "mdvdrp/train/estimators.hpp"

namespace mdvdrp::train {

double PpoConfig::entropy_coef(int epoch) const {
  if (entropy_anneal_epochs <= 0 || epoch >= entropy_anneal_epochs) return entropy_end;
  const double f = static_cast<double>(epoch) / static_cast<double>(entropy_anneal_epochs);
  return entropy_start + f * (entropy_end - entropy_start);
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo: gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("ppo: lambda must lie in [0, 1]");
  if (!(clip > 0.0)) throw std::invalid_argument("ppo: clip must be positive");
  if (updates_per_epoch == 0 || steps_per_epoch == 0 || parallel_envs == 0 || chunk == 0) {
    throw std::invalid_argument("ppo: updates, steps, environments and chunk size must be positive");
  }
  if (!(lr_policy > 0.0 && lr_value > 0.0)) throw std::invalid_argument("ppo: learning rates must be positive");
}

template <class S>
PpoLosses ppo_objective(const policy::PolicyNet<S>& net, const std::vector<const RolloutSample*>& samples,
                        double clip, double value_coef, double entropy_coef, S* grads, std::size_t chunk) {
  PpoLosses l;
  if (samples.empty()) return l;
  if (!net.arch().critic) throw std::invalid_argument("ppo: the network needs a critic head");
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (std::size_t begin = 0; begin < samples.size(); begin += chunk) {
    const std::size_t end = std::min(samples.size(), begin + chunk);
    std::vector<const Observation*> obs;
    for (std::size_t i = begin; i < end; ++i) obs.push_back(samples[i]->obs.get());
    policy::PolicyCache<S> cache;
    const auto out = net.forward(obs, grads ? &cache : nullptr);
    std::vector<Vector<S>> dscores(obs.size());
    Vector<S> dvalues(static_cast<nn::Index>(obs.size()));
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const auto& s = *samples[begin + k];
      const nn::Vector<double> z = out.scores[k].template cast<double>();
      const auto a = static_cast<nn::Index>(s.action);
      if (a >= z.size()) throw std::invalid_argument("ppo: stored action outside the action set");
      const nn::Vector<double> logp = nn::log_softmax(z);
      const nn::Vector<double> p = logp.array().exp().matrix();
      const double entropy = -(p.array() * logp.array()).sum();
      const double ratio = std::exp(logp[a] - s.log_prob);
      if (!std::isfinite(ratio)) {
        std::ostringstream msg;
        msg << "non-finite probability ratio at sample " << begin + k << " (log_prob " << logp[a] << ", behaviour "
            << s.log_prob << ")";
        throw std::domain_error(msg.str());
      }
      const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
      const double surr = std::min(ratio * s.advantage, clipped * s.advantage);
      const double v = static_cast<double>(out.values[static_cast<nn::Index>(k)]);
      l.policy -= surr * inv_n;
      l.value += (v - s.ret) * (v - s.ret) * inv_n;
      l.entropy += entropy * inv_n;
      if (grads) {
        const bool active = ratio * s.advantage <= clipped * s.advantage;
        const double dlogp_a = active ? -ratio * s.advantage * inv_n : 0.0;
        nn::Vector<double> dz = -dlogp_a * p;
        dz[a] += dlogp_a;
        dz.array() += entropy_coef * inv_n * p.array() * (logp.array() + entropy);
        dscores[k] = dz.cast<S>();
        dvalues[static_cast<nn::Index>(k)] = static_cast<S>(2.0 * value_coef * (v - s.ret) * inv_n);
      }
    }
    if (grads) net.backward(cache, dscores, &dvalues, grads);
  }
  l.total = l.policy + value_coef * l.value - entropy_coef * l.entropy;
  return l;
}

template <class S>
PpoTrainer<S>::PpoTrainer(const policy::PolicyArch& arch, const PpoConfig& config, std::uint64_t seed)
    : config_(config),
      net_([&] {
        auto a = arch;
        a.critic = true;
        return a;
      }(), seed),
      adam_(net_.num_params()),
      lr_scale_(net_.lr_scale(config.lr_policy, config.lr_value)),
      rng_(seed ^ 0x9e3779b97f4a7c15ULL),
      seed_(seed) {
  config_.validate();
  envs_.resize(config_.parallel_envs);
}

template <class S>
std::uint64_t PpoTrainer<S>::episode_seed(std::size_t env, std::uint64_t episode) const {
  return seed_ * 1000003ULL + env * 7919ULL + episode * 104729ULL + 1;
}

template <class S>
std::vector<RolloutSample> PpoTrainer<S>::collect(const Scenario& scenario, std::vector<double>& finished_returns) {
  std::vector<RolloutSample> rollout;
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    auto& slot = envs_[e];
    // Records of the current episode segment and where each segment starts.
    std::vector<std::vector<DecisionRecord>> segments(1);
    std::vector<bool> finished;
    for (std::size_t step = 0; step < config_.steps_per_epoch; ++step) {
      while (!slot.obs) {
        slot.obs = slot.engine.reset(scenario, episode_seed(e, slot.episodes++));
      }
      const auto out = net_.forward(*slot.obs);
      const auto pick = policy::sample_categorical(out.scores[0], rng_);
      DecisionRecord d;
      d.time = slot.obs->time;
      d.driver = slot.obs->selected_driver();
      d.obs = slot.obs;
      d.action = pick.index;
      d.log_prob = pick.log_prob;
      d.value = static_cast<double>(out.values[0]);
      const auto r = slot.engine.step_index(pick.index);
      d.reward = r.reward;
      segments.back().push_back(std::move(d));
      slot.obs = r.next;
      if (!slot.obs) {
        finished_returns.push_back(slot.engine.total_reward());
        finished.push_back(true);
        segments.emplace_back();
      }
    }
    finished.push_back(false);
    double tail_value = 0.0;
    SimTime tail_time = 0.0;
    if (slot.obs) {
      tail_value = static_cast<double>(net_.forward(*slot.obs).values[0]);
      tail_time = slot.obs->time;
    }

    for (std::size_t s = 0; s < segments.size(); ++s) {
      const auto& log = segments[s];
      if (log.empty()) continue;
      const bool done = finished[s];
      // Rollout position of every record of the segment.
      std::map<const DecisionRecord*, std::size_t> index;
      const std::size_t base = rollout.size();
      for (std::size_t i = 0; i < log.size(); ++i) {
        index[&log[i]] = base + i;
        rollout.push_back({log[i].obs, log[i].action, log[i].log_prob, 0.0, 0.0});
      }
      std::vector<std::vector<const DecisionRecord*>> streams;
      if (config_.perspective == Perspective::DriverCentric) {
        std::map<DriverId, std::vector<const DecisionRecord*>> by_driver;
        for (const auto& d : log) by_driver[d.driver].push_back(&d);
        for (auto& [id, v] : by_driver) streams.push_back(std::move(v));
      } else {
        streams.emplace_back();
        for (const auto& d : log) streams.back().push_back(&d);
      }
      for (const auto& stream : streams) {
        std::vector<GaeStep> steps(stream.size());
        for (std::size_t i = 0; i < stream.size(); ++i) {
          steps[i].reward = stream[i]->reward;
          steps[i].value = stream[i]->value;
          if (i + 1 < stream.size()) {
            steps[i].dt = stream[i + 1]->time - stream[i]->time;
          } else if (done) {
            steps[i].done = true;
          } else {
            steps[i].dt = std::max(0.0, tail_time - stream[i]->time);
          }
        }
        const auto g = gae(steps, done ? 0.0 : tail_value, config_.gamma, config_.lambda);
        for (std::size_t i = 0; i < stream.size(); ++i) {
          auto& sample = rollout[index[stream[i]]];
          sample.advantage = g.advantages[i];
          sample.ret = g.returns[i];
        }
      }
    }
  }
  return rollout;
}

template <class S>
EpochStats PpoTrainer<S>::update(const std::vector<RolloutSample>& rollout) {
  EpochStats stats;
  stats.samples = rollout.size();
  if (rollout.empty()) return stats;
  std::vector<RolloutSample> normalized;
  const std::vector<RolloutSample>* data = &rollout;
  if (config_.normalize_advantages) {
    normalized = rollout;
    std::vector<double> adv;
    adv.reserve(rollout.size());
    for (const auto& s : rollout) adv.push_back(s.advantage);
    normalize(adv);
    for (std::size_t i = 0; i < adv.size(); ++i) normalized[i].advantage = adv[i];
    data = &normalized;
  }
  std::vector<const RolloutSample*> ptrs;
  ptrs.reserve(data->size());
  for (const auto& s : *data) ptrs.push_back(&s);

  const double ent = config_.entropy_coef(epochs_);
  nn::AdamConfig ac;
  ac.lr = 1.0;
  for (std::size_t u = 0; u < config_.updates_per_epoch; ++u) {
    Vector<S> grads = Vector<S>::Zero(net_.num_params());
    PpoLosses l;
    try {
      l = ppo_objective(net_, ptrs, config_.clip, config_.value_coef, ent, grads.data(), config_.chunk);
    } catch (const std::domain_error& e) {
      stats.aborted = true;
      stats.diagnostic = "update " + std::to_string(u) + ": " + e.what();
      break;
    }
    if (!grads.allFinite()) {
      stats.aborted = true;
      stats.diagnostic = "update " + std::to_string(u) + ": non-finite gradient";
      break;
    }
    if (u == 0) stats.first = l;
    stats.last = l;
    nn::adam_step(net_.params().values(), grads, adam_, ac, &lr_scale_);
  }
  return stats;
}

template <class S>
EpochStats PpoTrainer<S>::train_epoch(const Scenario& scenario) {
  std::vector<double> returns;
  const auto rollout = collect(scenario, returns);
  auto stats = update(rollout);
  stats.episode_returns = std::move(returns);
  ++epochs_;
  return stats;
}

template PpoLosses ppo_objective<float>(const policy::PolicyNet<float>&, const std::vector<const RolloutSample*>&,
                                        double, double, double, float*, std::size_t);
template PpoLosses ppo_objective<double>(const policy::PolicyNet<double>&, const std::vector<const RolloutSample*>&,
                                         double, double, double, double*, std::size_t);
template class PpoTrainer<float>;
template class PpoTrainer<double>;

}  // namespace mdvdrp::train
