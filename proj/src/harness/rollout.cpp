#include "mdvdrp/harness/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mdvdrp/policy/selection.hpp"

namespace mdvdrp::harness {

template <class S>
ActFn greedy_policy(const policy::PolicyNet<S>& net) {
  return [&net](const Observation& obs, std::mt19937_64&) { return policy::select_greedy(net.forward(obs).scores[0]); };
}

template ActFn greedy_policy<float>(const policy::PolicyNet<float>&);
template ActFn greedy_policy<double>(const policy::PolicyNet<double>&);

ActFn baseline_policy(const baselines::BaselineSpec& spec, const SimConfig& config) {
  return [p = baselines::BaselinePolicy(spec, config)](const Observation& obs, std::mt19937_64& rng) {
    return p.act(obs, rng);
  };
}

ActFn random_policy() {
  return [](const Observation& obs, std::mt19937_64& rng) { return baselines::random_action(obs, rng); };
}

FlowField::FlowField(Rect region, int bins)
    : region_(region),
      bins_(bins),
      sum_x_(static_cast<std::size_t>(bins * bins), 0.0),
      sum_y_(static_cast<std::size_t>(bins * bins), 0.0),
      count_(static_cast<std::size_t>(bins * bins), 0) {
  if (bins < 1) throw std::invalid_argument("FlowField: bins must be >= 1");
}

void FlowField::add(Point at, Point direction) {
  const auto bin = [&](double v, double lo, double hi) {
    const int b = static_cast<int>((v - lo) / (hi - lo) * bins_);
    return std::clamp(b, 0, bins_ - 1);
  };
  const auto i = static_cast<std::size_t>(bin(at.y, region_.y0, region_.y1) * bins_ + bin(at.x, region_.x0, region_.x1));
  sum_x_[i] += direction.x;
  sum_y_[i] += direction.y;
  ++count_[i];
}

void FlowField::write_csv(std::ostream& out) const {
  out << "bin_x,bin_y,center_x,center_y,mean_dx,mean_dy,count\n";
  const double w = region_.width() / bins_;
  const double h = region_.height() / bins_;
  for (int by = 0; by < bins_; ++by) {
    for (int bx = 0; bx < bins_; ++bx) {
      const auto i = static_cast<std::size_t>(by * bins_ + bx);
      const double n = static_cast<double>(count_[i]);
      out << bx << ',' << by << ',' << region_.x0 + (bx + 0.5) * w << ',' << region_.y0 + (by + 0.5) * h << ','
          << (n > 0 ? sum_x_[i] / n : 0.0) << ',' << (n > 0 ? sum_y_[i] / n : 0.0) << ',' << count_[i] << '\n';
    }
  }
}

double EpisodeOutcome::served_pct() const {
  if (counts.created == 0) return 100.0;
  return 100.0 * static_cast<double>(counts.assigned + counts.completed) / static_cast<double>(counts.created);
}

EpisodeOutcome run_episode(Engine& env, const Scenario& scenario, std::uint64_t seed, const ActFn& act,
                           std::mt19937_64& rng, FlowField* flow) {
  EpisodeOutcome out;
  auto obs = env.reset(scenario, seed);
  while (obs) {
    const std::size_t a = act(*obs, rng);
    if (!obs->actions.is_assign()) {
      ++out.repositions;
      if (flow) {
        const auto& d = env.drivers()[static_cast<std::size_t>(obs->selected_driver())];
        flow->add(d.position, heading_vector(static_cast<Heading>(a)));
      }
    }
    obs = env.step_index(a).next;
  }
  out.total_reward = env.total_reward();
  out.decisions = env.decisions();
  out.counts = env.counts();
  for (const auto& o : env.orders()) {
    if (o.state == OrderState::Assigned || o.state == OrderState::Completed) ++out.served_by_tag[o.tag];
  }
  return out;
}

std::vector<double> EvalResult::returns() const {
  std::vector<double> r;
  r.reserve(episodes.size());
  for (const auto& e : episodes) r.push_back(e.total_reward);
  return r;
}

EvalResult evaluate(const Scenario& scenario, const ActFn& act, int episodes, std::uint64_t base_seed, FlowField* flow) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  EvalResult res;
  Engine env;
  std::vector<double> served;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
    res.episodes.push_back(run_episode(env, scenario, seed, act, rng, flow));
    served.push_back(res.episodes.back().served_pct());
  }
  const auto r = res.returns();
  res.mean_return = mean(r);
  res.std_error = std_error(r);
  res.mean_served_pct = mean(served);
  return res;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double std_error(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  return stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace mdvdrp::harness
