#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdvdrp/features/observation.hpp"
#include "mdvdrp/policy/policy_net.hpp"
#include "mdvdrp/scenarios/order_scheme.hpp"
#include "mdvdrp/sim/engine.hpp"
#include "mdvdrp/train/transitions.hpp"

namespace mdvdrp::testing {

/// Unit square, noiseless repositioning and no feature scaling surprises.
inline SimConfig quiet_config(double horizon = 50.0) {
  SimConfig c;
  c.reposition_noise_sigma = 0.0;
  c.episode_horizon = horizon;
  return c;
}

inline Rect at(Point p) { return {p.x, p.y, p.x, p.y}; }

/// Orders appearing at fixed times and places.
struct ScriptedOrder {
  SimTime time = 0.0;
  Point origin;
  Point destination;
  double price = 1.0;
};

inline OrderScheme scripted_orders(const std::vector<ScriptedOrder>& orders) {
  Replay r;
  r.days.emplace_back();
  for (const auto& o : orders) r.days[0].push_back({o.time, o.origin, o.destination, o.price, -1});
  std::stable_sort(r.days[0].begin(), r.days[0].end(),
                   [](const OrderSpec& a, const OrderSpec& b) { return a.created_at < b.created_at; });
  r.fixed_day = 0;
  return r;
}

inline DriverScheme fleet_at(Point p, int count = 1, SimTime when = 0.0) {
  return FixedFleet{count, at(p), when};
}

/// Two drivers at the centre. Both reposition (Stay) at t = 0, then at t = 1 driver 0 takes
/// the price-2 order and driver 1 the price-3 order. Decisions alternate 0, 1, 0, 1.
inline Scenario two_driver_script() {
  return {"two-driver", quiet_config(1.5),
          scripted_orders({{0.5, {0.55, 0.5}, {0.55, 0.9}, 2.0}, {0.5, {0.45, 0.5}, {0.45, 0.9}, 3.0}}),
          fleet_at({0.5, 0.5}, 2)};
}

inline std::vector<train::DecisionRecord> two_driver_log() {
  Engine env;
  std::vector<train::DecisionRecord> log;
  auto obs = env.reset(two_driver_script(), 0);
  while (obs) {
    std::size_t a = static_cast<std::size_t>(Heading::Stay);
    if (obs->actions.is_assign()) {
      a = 0;
      for (std::size_t k = 0; k < obs->actions.order_rows.size(); ++k) {
        if (obs->order_ids[obs->actions.order_rows[k]] == 0) a = k;
      }
    }
    train::DecisionRecord d;
    d.time = obs->time;
    d.driver = obs->selected_driver();
    d.obs = obs;
    d.action = a;
    const auto r = env.step_index(a);
    d.reward = r.reward;
    log.push_back(d);
    obs = r.next;
  }
  return log;
}

/// Decision log of a uniformly random policy.
inline std::vector<train::DecisionRecord> random_log(const Scenario& s, std::uint64_t seed) {
  Engine env;
  std::mt19937_64 rng(seed + 17);
  std::vector<train::DecisionRecord> log;
  auto obs = env.reset(s, seed);
  while (obs) {
    train::DecisionRecord d;
    d.time = obs->time;
    d.driver = obs->selected_driver();
    d.obs = obs;
    d.action = std::uniform_int_distribution<std::size_t>(0, obs->num_actions() - 1)(rng);
    const auto r = env.step_index(d.action);
    d.reward = r.reward;
    log.push_back(d);
    obs = r.next;
  }
  return log;
}

/// Sum in ascending order, so equal multisets give bit-equal sums.
inline double canonical_sum(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double s = 0.0;
  for (const double x : xs) s += x;
  return s;
}

/// Result of an invariant-checked episode.
struct CheckedEpisode {
  bool ok = true;
  std::string failure;
  double total_reward = 0.0;
  double assigned_price_sum = 0.0;  // canonical_sum of the assigned order prices
  std::vector<double> rewards;
  std::vector<Observation> observations;
};

/// Plays an episode with uniformly random legal actions while checking the engine invariants
/// after every event and at every decision point.
inline CheckedEpisode checked_random_episode(const Scenario& s, std::uint64_t seed, std::uint64_t policy_seed,
                                             bool keep_observations = false) {
  CheckedEpisode out;
  const auto fail = [&](const std::string& why) {
    if (out.ok) out.failure = why;
    out.ok = false;
  };
  Engine env;
  env.set_event_observer([&](const Engine& e, const SimEvent&) {
    const auto& c = e.counts();
    if (!c.conserved()) fail("order counts not conserved");
    std::int64_t serving = 0;
    for (const auto& d : e.drivers()) serving += std::holds_alternative<Serving>(d.status) ? 1 : 0;
    if (serving != c.assigned) fail("serving drivers do not match assigned orders");
  });
  std::mt19937_64 rng(policy_seed);
  auto obs = env.reset(s, seed);
  while (obs) {
    const auto sel = env.selected_driver();
    if (!sel) {
      fail("decision without a selected driver");
      break;
    }
    if (obs->selected_driver() != *sel) fail("observation selects a different driver");
    if (!env.drivers()[static_cast<std::size_t>(*sel)].idle()) fail("selected driver is not idle");
    std::int64_t available = 0;
    for (const auto* d : env.active_drivers()) {
      if (d->idle() && d->id == *sel) ++available;
    }
    if (available != 1) fail("expected exactly one available driver");
    if (obs->num_actions() == 0) fail("empty action set at a decision point");
    if (keep_observations) out.observations.push_back(*obs);
    std::uniform_int_distribution<std::size_t> pick(0, obs->num_actions() - 1);
    const auto r = env.step_index(pick(rng));
    out.rewards.push_back(r.reward);
    obs = r.next;
  }
  if (!env.counts().conserved()) fail("order counts not conserved at the end");
  out.total_reward = env.total_reward();
  std::vector<double> prices;
  for (const auto& o : env.orders()) {
    if (o.state == OrderState::Assigned || o.state == OrderState::Completed) prices.push_back(o.price);
  }
  out.assigned_price_sum = canonical_sum(prices);
  double stepwise = 0.0;
  for (const double r : out.rewards) stepwise += r;
  if (stepwise != out.total_reward) fail("engine total differs from the summed step rewards");
  return out;
}

inline bool same_observation(const Observation& a, const Observation& b) {
  return a.time == b.time && a.time_feature == b.time_feature && a.selected == b.selected &&
         a.drivers.rows() == b.drivers.rows() && a.orders.rows() == b.orders.rows() && a.drivers == b.drivers &&
         a.orders == b.orders && a.actions.kind == b.actions.kind && a.actions.order_rows == b.actions.order_rows &&
         a.driver_ids == b.driver_ids && a.order_ids == b.order_ids;
}

/// Observation with random feature rows. With `assign`, a random nonempty subset of the orders
/// forms the action set; otherwise the nine headings do.
inline Observation random_observation(std::mt19937_64& rng, int orders, int drivers, bool assign) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Observation obs;
  obs.time = 10.0 * u(rng);
  obs.time_feature = u(rng);
  obs.orders.resize(orders, kFeatureDim);
  obs.drivers.resize(drivers, kFeatureDim);
  for (int i = 0; i < orders; ++i) {
    for (int c = 0; c < kFeatureDim; ++c) obs.orders(i, c) = u(rng);
    obs.orders(i, kOrderPrice) = 1.0 + 3.0 * u(rng);
    obs.order_ids.push_back(i);
  }
  for (int j = 0; j < drivers; ++j) {
    for (int c = 0; c < kFeatureDim; ++c) obs.drivers(j, c) = u(rng);
    obs.driver_ids.push_back(j);
  }
  obs.selected = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(drivers) - 1)(rng);
  if (assign && orders > 0) {
    std::vector<std::size_t> rows;
    for (int i = 0; i < orders; ++i) {
      if (u(rng) < 0.6) rows.push_back(static_cast<std::size_t>(i));
    }
    if (rows.empty()) rows.push_back(std::uniform_int_distribution<std::size_t>(0, orders - 1)(rng));
    obs.actions = ActionSet::assign(std::move(rows));
  } else {
    obs.actions = ActionSet::reposition();
  }
  return obs;
}

/// Applies the row permutation `perm` (new row i = old row perm[i]) to the orders of `obs`.
inline Observation permute_orders(const Observation& obs, const std::vector<std::size_t>& perm) {
  Observation p = obs;
  std::vector<std::size_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    p.orders.row(static_cast<Eigen::Index>(i)) = obs.orders.row(static_cast<Eigen::Index>(perm[i]));
    p.order_ids[i] = obs.order_ids[perm[i]];
    inverse[perm[i]] = i;
  }
  if (obs.actions.is_assign()) {
    for (auto& r : p.actions.order_rows) r = inverse[r];
    std::sort(p.actions.order_rows.begin(), p.actions.order_rows.end());
  }
  return p;
}

/// Relative error used by the gradient checks: |a - n| / max(1, |a|, |n|).
inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

/// Which ReLU units are switched off in a forward pass.
inline std::vector<bool> relu_pattern(const policy::PolicyCache<double>& c) {
  std::vector<bool> off;
  const auto add = [&](const nn::Matrix<double>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) off.push_back(m.data()[i] == 0.0);
  };
  for (const auto* mlp : {&c.order_embed, &c.driver_embed, &c.repo, &c.critic}) {
    for (const auto& m : mlp->outputs) add(m);
  }
  add(c.query_hidden);
  return off;
}

/// Largest relative error between the analytic gradient of sum_k w_k . scores_k (+ v . values)
/// and central differences over the parameters listed in `indices`. With `straddled`, entries
/// whose +-h perturbations switch a ReLU unit are skipped and counted there.
inline double policy_gradient_error_at(policy::PolicyNet<double>& net, const std::vector<const Observation*>& batch,
                                       std::mt19937_64& rng, const std::vector<Eigen::Index>& indices,
                                       std::size_t* straddled = nullptr, double h = 1e-5) {
  std::normal_distribution<double> g(0.0, 1.0);
  policy::PolicyCache<double> cache;
  const auto out = net.forward(batch, &cache);
  std::vector<nn::Vector<double>> w(out.scores.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k].resize(out.scores[k].size());
    for (Eigen::Index i = 0; i < w[k].size(); ++i) w[k][i] = g(rng);
  }
  nn::Vector<double> wv;
  if (net.arch().critic) {
    wv.resize(out.values.size());
    for (Eigen::Index i = 0; i < wv.size(); ++i) wv[i] = g(rng);
  }
  std::vector<bool> pattern;
  const auto loss = [&] {
    policy::PolicyCache<double> c;
    const auto o = net.forward(batch, straddled ? &c : nullptr);
    if (straddled) pattern = relu_pattern(c);
    double l = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) l += w[k].dot(o.scores[k]);
    if (net.arch().critic) l += wv.dot(o.values);
    return l;
  };
  nn::Vector<double> grads = nn::Vector<double>::Zero(net.num_params());
  net.backward(cache, w, net.arch().critic ? &wv : nullptr, grads.data());
  auto& theta = net.params().values();
  double worst = 0.0;
  for (const auto i : indices) {
    const double saved = theta[i];
    theta[i] = saved + h;
    const double up = loss();
    const auto up_pattern = pattern;
    theta[i] = saved - h;
    const double down = loss();
    theta[i] = saved;
    if (straddled && up_pattern != pattern) {
      ++*straddled;
      continue;
    }
    worst = std::max(worst, rel_error(grads[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

/// As above over every parameter, or every `stride`-th one from a random offset.
inline double policy_gradient_error(policy::PolicyNet<double>& net, const std::vector<const Observation*>& batch,
                                    std::mt19937_64& rng, std::size_t stride = 1) {
  const std::size_t offset = stride > 1 ? std::uniform_int_distribution<std::size_t>(0, stride - 1)(rng) : 0;
  std::vector<Eigen::Index> indices;
  for (auto i = static_cast<Eigen::Index>(offset); i < static_cast<Eigen::Index>(net.num_params());
       i += static_cast<Eigen::Index>(stride)) {
    indices.push_back(i);
  }
  return policy_gradient_error_at(net, batch, rng, indices);
}

}  // namespace mdvdrp::testing
