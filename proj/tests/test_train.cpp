#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "mdvdrp/nn/mlp.hpp"
#include "mdvdrp/scenarios/domains.hpp"
#include "mdvdrp/train/dqn.hpp"
#include "mdvdrp/train/estimators.hpp"
#include "mdvdrp/train/ppo.hpp"
#include "mdvdrp/train/transitions.hpp"
#include "support.hpp"

using namespace mdvdrp;
using namespace mdvdrp::train;
using namespace mdvdrp::testing;

namespace {

policy::PolicyArch tiny(bool critic = false) {
  policy::PolicyArch a;
  a.embed_hidden = 6;
  a.embed = 5;
  a.weight_hidden = 4;
  a.head_hidden = 6;
  a.critic = critic;
  return a;
}

std::vector<Transition> random_steps(std::mt19937_64& rng, std::size_t len, bool terminal_end) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Transition> steps(len);
  double t = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    steps[i].time = t;
    steps[i].reward = u(rng) < 0.3 ? 0.0 : 4.0 * u(rng) - 1.0;
    steps[i].dt = u(rng) < 0.2 ? 0.0 : 3.0 * u(rng);
    steps[i].next_obs = std::make_shared<Observation>();
    t += steps[i].dt;
  }
  if (terminal_end) {
    steps.back().done = true;
    steps.back().next_obs = nullptr;
    steps.back().dt = 0.0;
  }
  return steps;
}

}  // namespace

TEST_CASE("two-driver episode links transitions like the illustration") {
  const auto log = two_driver_log();
  REQUIRE(log.size() == 4);
  CHECK(log[0].driver == 0);
  CHECK(log[1].driver == 1);
  CHECK(log[2].driver == 0);
  CHECK(log[3].driver == 1);
  CHECK(log[2].reward == 2.0);
  CHECK(log[3].reward == 3.0);

  const auto drivers = build_driver_centric(log);
  REQUIRE(drivers.size() == 2);
  const auto& d0 = drivers[0].steps;
  REQUIRE(d0.size() == 2);
  CHECK(d0[0].obs == log[0].obs);
  CHECK(d0[0].next_obs == log[2].obs);
  CHECK(d0[0].dt == 1.0);
  CHECK_FALSE(d0[0].done);
  CHECK(d0[1].done);
  CHECK(d0[1].next_obs == nullptr);
  CHECK(drivers[1].steps[0].next_obs == log[3].obs);

  const auto system = build_system_centric(log);
  REQUIRE(system.steps.size() == 4);
  CHECK(system.steps[0].next_obs == log[1].obs);
  CHECK(system.steps[0].dt == 0.0);
  CHECK(system.steps[1].next_obs == log[2].obs);
  CHECK(system.steps[1].dt == 1.0);
  CHECK(system.steps[3].done);
  double sys = 0.0, drv = 0.0;
  for (const auto& t : system.steps) sys += t.reward;
  for (const auto& s : drivers) {
    for (const auto& t : s.steps) drv += t.reward;
  }
  CHECK(sys == 5.0);
  CHECK(drv == sys);
}

TEST_CASE("driver streams partition the decisions of random episodes") {
  const auto s = scenarios::regional(scenarios::Demand::High, {.drivers = 4, .horizon = 60.0});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto log = random_log(s, seed);
    const auto streams = build_driver_centric(log);
    std::set<const Observation*> seen;
    std::size_t count = 0;
    double reward = 0.0;
    for (const auto& st : streams) {
      for (const auto& t : st.steps) {
        CHECK(t.driver == st.driver);
        CHECK(t.dt >= 0.0);
        CHECK(seen.insert(t.obs.get()).second);
        reward += t.reward;
        ++count;
      }
      CHECK(st.steps.back().done);
    }
    CHECK(count == log.size());
    double total = 0.0;
    for (const auto& t : build_system_centric(log).steps) total += t.reward;
    CHECK(reward == total);
  }
}

TEST_CASE("one driver makes both perspectives agree") {
  const auto s = scenarios::regional(scenarios::Demand::High, {.drivers = 1, .horizon = 80.0});
  const auto log = random_log(s, 3);
  const auto d = build_driver_centric(log);
  const auto sys = build_system_centric(log);
  REQUIRE(d.size() == 1);
  REQUIRE(d[0].steps.size() == sys.steps.size());
  for (std::size_t i = 0; i < sys.steps.size(); ++i) {
    CHECK(d[0].steps[i].next_obs == sys.steps[i].next_obs);
    CHECK(d[0].steps[i].dt == sys.steps[i].dt);
    CHECK(d[0].steps[i].done == sys.steps[i].done);
  }
  std::vector<DecisionRecord> single{log.front()};
  const auto one = build_driver_centric(single);
  REQUIRE(one.size() == 1);
  CHECK(one[0].steps.size() == 1);
  CHECK(one[0].steps[0].done);
}

TEST_CASE("discount and epsilon schedule") {
  CHECK(discount(0.99, 0.0) == 1.0);
  CHECK(discount(0.99, 2.0) == doctest::Approx(0.9801).epsilon(1e-15));
  CHECK(discount(1.0, 17.3) == 1.0);
  CHECK_THROWS(discount(1.5, 1.0));
  CHECK_THROWS(discount(0.9, -1.0));
  CHECK(epsilon_at(0) == 0.99);
  CHECK(epsilon_at(89) == doctest::Approx(0.1));
  CHECK(epsilon_at(500) == 0.1);
  CHECK(epsilon_at(10, 0.99, 0.01, 0.2) == doctest::Approx(0.89));
}

TEST_CASE("n-step targets match direct summation") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double gamma = 0.5 + 0.5 * u(rng);
    std::vector<RewardStep> window(5);
    double t = 10.0 * u(rng);
    for (auto& s : window) {
      s.time = t;
      s.reward = u(rng) * 3.0 - 1.0;
      t += 2.0 * u(rng);
    }
    const double boot = u(rng) * 10.0;
    double direct = 0.0;
    for (const auto& s : window) direct += std::pow(gamma, s.time - window[0].time) * s.reward;
    CHECK(std::abs(nstep_target(window, t, boot, true, gamma) - direct) < 1e-12);
    direct += std::pow(gamma, t - window[0].time) * boot;
    CHECK(std::abs(nstep_target(window, t, boot, false, gamma) - direct) < 1e-12);
  }
  const RewardStep one{3.0, 2.0};
  CHECK(nstep_target(std::span(&one, 1), 5.0, 10.0, false, 0.9) == doctest::Approx(2.0 + 0.81 * 10.0));
}

TEST_CASE("compound transitions match direct summation") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto steps = random_steps(rng, 1 + static_cast<std::size_t>(trial % 15), trial % 2 == 0);
    const double gamma = 0.9;
    for (std::size_t n : {1u, 3u, 20u}) {
      for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto c = compound(steps, k, n, gamma);
        double direct = 0.0;
        std::size_t j = k;
        bool done = false;
        for (; j < steps.size() && j < k + n; ++j) {
          direct += std::pow(gamma, steps[j].time - steps[k].time) * steps[j].reward;
          if (steps[j].done) {
            done = true;
            break;
          }
        }
        CHECK(std::abs(c.reward - direct) < 1e-12);
        CHECK(c.done == done);
        if (!done) {
          CHECK(c.next_obs == steps[j - 1].next_obs);
          CHECK(c.dt == doctest::Approx(steps[j - 1].time + steps[j - 1].dt - steps[k].time));
        }
      }
    }
  }
}

TEST_CASE("online assembler reproduces offline n-step transitions") {
  const auto s = scenarios::regional(scenarios::Demand::High, {.drivers = 3, .horizon = 60.0});
  const auto log = random_log(s, 4);
  for (const auto p : {Perspective::DriverCentric, Perspective::SystemCentric}) {
    for (std::size_t n : {1u, 4u}) {
      TransitionAssembler asm_(p, n, 0.95);
      for (const auto& d : log) asm_.record(d);
      asm_.finish();
      const auto online = asm_.take();
      std::vector<Transition> offline;
      for (const auto& st : build_streams(log, p)) {
        for (std::size_t k = 0; k < st.steps.size(); ++k) offline.push_back(compound(st.steps, k, n, 0.95));
      }
      REQUIRE(online.size() == offline.size());
      // Match by the starting observation, which is unique per decision.
      for (const auto& a : online) {
        const auto it = std::find_if(offline.begin(), offline.end(), [&](const Transition& b) { return b.obs == a.obs; });
        REQUIRE(it != offline.end());
        CHECK(a.reward == doctest::Approx(it->reward).epsilon(1e-12));
        CHECK(a.done == it->done);
        CHECK(a.next_obs == it->next_obs);
        if (!a.done) CHECK(a.dt == doctest::Approx(it->dt));
      }
    }
  }
}

TEST_CASE("gae matches the double-sum definition") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 10);
    const double gamma = 0.8 + 0.2 * u(rng), lambda = u(rng);
    std::vector<GaeStep> steps(n);
    for (auto& s : steps) {
      s.reward = 2.0 * u(rng) - 0.5;
      s.value = 3.0 * u(rng);
      s.dt = u(rng) < 0.2 ? 0.0 : 2.0 * u(rng);
    }
    const bool terminal = trial % 3 == 0;
    if (terminal) steps.back().done = true;
    const double boot = 5.0 * u(rng);
    const auto next_value = [&](std::size_t i) {
      if (steps[i].done) return 0.0;
      return i + 1 < n ? steps[i + 1].value : boot;
    };
    std::vector<double> delta(n), t(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = steps[i].reward + std::pow(gamma, steps[i].dt) * next_value(i) - steps[i].value;
      if (i + 1 < n) t[i + 1] = t[i] + steps[i].dt;
    }
    const auto r = gae(steps, boot, gamma, lambda);
    for (std::size_t i = 0; i < n; ++i) {
      double a = 0.0;
      for (std::size_t k = i; k < n; ++k) a += std::pow(lambda, static_cast<double>(k - i)) * std::pow(gamma, t[k] - t[i]) * delta[k];
      CHECK(std::abs(r.advantages[i] - a) < 1e-10);
      CHECK(std::abs(r.returns[i] - (a + steps[i].value)) < 1e-10);
    }
    const auto td = gae(steps, boot, gamma, 0.0);
    for (std::size_t i = 0; i < n; ++i) CHECK(td.advantages[i] == delta[i]);
    auto zero = steps;
    for (auto& s : zero) s.value = 0.0;
    const auto mc = gae(zero, 0.0, gamma, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      double g = 0.0;
      for (std::size_t k = i; k < n; ++k) g += std::pow(gamma, t[k] - t[i]) * steps[k].reward;
      CHECK(std::abs(mc.advantages[i] - g) < 1e-12);
    }
  }
}

TEST_CASE("replay buffer evicts oldest first") {
  ReplayBuffer buf(5);
  std::mt19937_64 rng(4);
  CHECK_THROWS(buf.sample(1, rng));
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.reward = i;
    buf.push(t);
    CHECK(buf.size() == std::min<std::size_t>(static_cast<std::size_t>(i) + 1, 5));
  }
  for (std::size_t i = 0; i < 5; ++i) CHECK(buf.at(i).reward == static_cast<double>(i + 3));
  std::array<int, 5> hits{};
  for (const auto* t : buf.sample(50000, rng)) ++hits[static_cast<std::size_t>(t->reward) - 3];
  for (const int h : hits) CHECK(std::abs(h / 50000.0 - 0.2) < 0.01);
}

TEST_CASE("dqn loss equals the hand-computed mean squared error") {
  std::mt19937_64 rng(5);
  DqnConfig c;
  c.gamma = 0.9;
  DqnTrainer<double> dqn(tiny(), c, 6);
  const auto s0 = std::make_shared<Observation>(random_observation(rng, 3, 2, true));
  const auto s1 = std::make_shared<Observation>(random_observation(rng, 0, 2, false));
  const auto s2 = std::make_shared<Observation>(random_observation(rng, 4, 3, true));
  Transition a{s0, 1, 2.0, s1, 1.5, false};
  Transition b{s2, 0, -1.0, nullptr, 0.0, true};
  if (s0->num_actions() < 2) a.action = 0;
  const std::vector<const Transition*> batch{&a, &b};

  const double qa = dqn.online().forward(*s0).scores[0][static_cast<Eigen::Index>(a.action)];
  const double qb = dqn.online().forward(*s2).scores[0][0];
  const double ya = 2.0 + std::pow(0.9, 1.5) * dqn.target().forward(*s1).scores[0].maxCoeff();
  const double yb = -1.0;
  const auto ys = dqn.targets(batch);
  CHECK(std::abs(ys[0] - ya) < 1e-12);
  CHECK(ys[1] == yb);
  const double hand = 0.5 * ((qa - ya) * (qa - ya) + (qb - yb) * (qb - yb));
  CHECK(std::abs(dqn.update_on(batch) - hand) < 1e-10);
}

TEST_CASE("dqn with exact targets leaves parameters unchanged") {
  std::mt19937_64 rng(7);
  DqnTrainer<double> dqn(tiny(), {}, 8);
  const auto s0 = std::make_shared<Observation>(random_observation(rng, 2, 2, true));
  Transition t{s0, 0, 0.0, nullptr, 0.0, true};
  t.reward = dqn.online().forward(*s0).scores[0][0];
  const auto before = dqn.online().params().values();
  const std::vector<const Transition*> batch{&t};
  CHECK(dqn.update_on(batch) == 0.0);
  CHECK(dqn.online().params().values() == before);
}

TEST_CASE("dqn gradient matches finite differences of its loss") {
  std::mt19937_64 rng(9);
  DqnTrainer<double> dqn(tiny(), {}, 10);
  const auto s0 = std::make_shared<Observation>(random_observation(rng, 3, 2, true));
  const auto s1 = std::make_shared<Observation>(random_observation(rng, 2, 2, true));
  Transition a{s0, 0, 1.0, s1, 0.7, false};
  Transition b{s1, 0, 2.0, nullptr, 0.0, true};
  const std::vector<const Transition*> batch{&a, &b};
  const auto y = dqn.targets(batch);
  const auto loss = [&](const policy::PolicyNet<double>& net) {
    const double ea = net.forward(*s0).scores[0][0] - y[0];
    const double eb = net.forward(*s1).scores[0][0] - y[1];
    return 0.5 * (ea * ea + eb * eb);
  };
  // One Adam step from zero moments moves every parameter by lr * sign(gradient).
  auto net = dqn.online();
  const auto before = net.params().values();
  dqn.update_on(batch);
  const nn::Vector<double> step = dqn.online().params().values() - before;
  const double h = 1e-5;
  int checked = 0;
  for (Eigen::Index i = 0; i < before.size(); i += 3) {
    auto& theta = net.params().values();
    theta[i] = before[i] + h;
    const double up = loss(net);
    theta[i] = before[i] - h;
    const double down = loss(net);
    theta[i] = before[i];
    const double g = (up - down) / (2 * h);
    if (std::abs(g) < 1e-3) continue;
    CHECK(step[i] * g < 0.0);
    CHECK(std::abs(std::abs(step[i]) - 1e-4) < 1e-8);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("target network is copied every 100 learner steps") {
  std::mt19937_64 rng(11);
  DqnTrainer<double> dqn(tiny(), {}, 12);
  const auto s0 = std::make_shared<Observation>(random_observation(rng, 3, 2, true));
  Transition t{s0, 0, 5.0, nullptr, 0.0, true};
  const std::vector<const Transition*> batch{&t};
  const auto initial = dqn.target().params().values();
  for (int i = 0; i < 99; ++i) dqn.update_on(batch);
  CHECK(dqn.target().params().values() == initial);
  CHECK(dqn.online().params().values() != initial);
  dqn.update_on(batch);
  CHECK(dqn.learner_steps() == 100);
  CHECK(dqn.target().params().values() == dqn.online().params().values());
  dqn.update_on(batch);
  CHECK(dqn.target().params().values() != dqn.online().params().values());
}

TEST_CASE("n-step defaults follow the perspective") {
  DqnConfig c;
  CHECK(c.effective_n_step() == 1);
  c.perspective = Perspective::SystemCentric;
  CHECK(c.effective_n_step() == 20);
  c.n_step = 3;
  CHECK(c.effective_n_step() == 3);
  c.batch = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("undiscounted full-length targets equal Monte-Carlo returns") {
  auto s = two_driver_script();
  s.drivers = fleet_at({0.5, 0.5}, 1);
  s.config.episode_horizon = 20.0;
  const auto log = random_log(s, 0);
  REQUIRE(log.size() > 2);
  DqnConfig c;
  c.gamma = 1.0;
  DqnTrainer<double> dqn(tiny(), c, 13);
  const auto stream = build_driver_centric(log)[0].steps;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const auto t = compound(stream, k, stream.size(), 1.0);
    const std::vector<const Transition*> batch{&t};
    double g = 0.0;
    for (std::size_t j = k; j < log.size(); ++j) g += log[j].reward;
    CHECK(dqn.targets(batch)[0] == g);
  }
  // One-step targets on the final transition are the final reward.
  const std::vector<const Transition*> last{&stream.back()};
  CHECK(dqn.targets(last)[0] == log.back().reward);
}

TEST_CASE("dqn episode fills the replay buffer") {
  const auto s = scenarios::regional(scenarios::Demand::High, {.drivers = 3, .horizon = 40.0});
  DqnConfig c;
  c.batch = 4;
  c.learning_starts = 4;
  DqnTrainer<double> dqn(tiny(), c, 14);
  Engine env;
  const auto stats = dqn.train_episode(env, s, 1);
  CHECK(stats.epsilon == 0.99);
  CHECK(dqn.replay().size() == static_cast<std::size_t>(stats.decisions));
  CHECK(stats.updates > 0);
  CHECK(dqn.episodes() == 1);
  CHECK(dqn.epsilon() == doctest::Approx(0.98));
}

TEST_CASE("ppo clip arithmetic") {
  std::mt19937_64 rng(15);
  policy::PolicyNet<double> net(tiny(true), 16);
  const auto obs = std::make_shared<Observation>(random_observation(rng, 3, 2, true));
  const auto logp = nn::log_softmax(net.forward(*obs).scores[0]);
  RolloutSample s{obs, 0, logp[0] - std::log(1.5), 1.0, 0.0};
  const std::vector<const RolloutSample*> one{&s};
  CHECK(ppo_objective(net, one, 0.2, 0.0, 0.0, static_cast<double*>(nullptr)).policy == doctest::Approx(-1.2));
  s.advantage = -1.0;
  CHECK(ppo_objective(net, one, 0.2, 0.0, 0.0, static_cast<double*>(nullptr)).policy == doctest::Approx(1.5));
  s.log_prob = logp[0];
  s.advantage = 0.7;
  const auto clipped = ppo_objective(net, one, 0.2, 0.5, 0.01, static_cast<double*>(nullptr));
  const auto plain = ppo_objective(net, one, std::numeric_limits<double>::infinity(), 0.5, 0.01,
                                   static_cast<double*>(nullptr));
  CHECK(clipped.total == plain.total);
}

TEST_CASE("ppo objective gradient matches finite differences") {
  std::mt19937_64 rng(17);
  policy::PolicyNet<double> net(tiny(true), 18);
  std::vector<RolloutSample> rollout;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    const auto obs = std::make_shared<Observation>(random_observation(rng, i + 1, 2, i != 1));
    const auto logp = nn::log_softmax(net.forward(*obs).scores[0]);
    // Behaviour probabilities slightly off so some samples sit inside the clip range and some outside.
    rollout.push_back({obs, 0, logp[0] + 0.5 * g(rng), g(rng), g(rng)});
  }
  std::vector<const RolloutSample*> ptrs;
  for (const auto& s : rollout) ptrs.push_back(&s);
  nn::Vector<double> grads = nn::Vector<double>::Zero(net.num_params());
  ppo_objective(net, ptrs, 0.2, 0.5, 0.05, grads.data(), 2);
  auto& theta = net.params().values();
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    const double up = ppo_objective(net, ptrs, 0.2, 0.5, 0.05, static_cast<double*>(nullptr)).total;
    theta[i] = saved - h;
    const double down = ppo_objective(net, ptrs, 0.2, 0.5, 0.05, static_cast<double*>(nullptr)).total;
    theta[i] = saved;
    worst = std::max(worst, rel_error(grads[i], (up - down) / (2 * h)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("unclipped single update equals the vanilla policy gradient") {
  std::mt19937_64 rng(19);
  policy::PolicyNet<double> net(tiny(true), 20);
  std::vector<RolloutSample> rollout;
  std::vector<const Observation*> obs;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    const auto o = std::make_shared<Observation>(random_observation(rng, i, 3, i % 2 == 0));
    const auto logp = nn::log_softmax(net.forward(*o).scores[0]);
    const std::size_t a = static_cast<std::size_t>(i) % static_cast<std::size_t>(logp.size());
    rollout.push_back({o, a, logp[static_cast<Eigen::Index>(a)], g(rng), 0.0});
    obs.push_back(o.get());
  }
  std::vector<const RolloutSample*> ptrs;
  for (const auto& s : rollout) ptrs.push_back(&s);
  nn::Vector<double> ppo = nn::Vector<double>::Zero(net.num_params());
  ppo_objective(net, ptrs, std::numeric_limits<double>::infinity(), 0.0, 0.0, ppo.data());

  // -1/N sum_i A_i grad log pi(a_i | s_i)
  policy::PolicyCache<double> cache;
  const auto out = net.forward(obs, &cache);
  std::vector<nn::Vector<double>> dz(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto p = nn::softmax(out.scores[i]);
    dz[i] = -p;
    dz[i][static_cast<Eigen::Index>(rollout[i].action)] += 1.0;
    dz[i] *= -rollout[i].advantage / static_cast<double>(obs.size());
  }
  nn::Vector<double> dv = nn::Vector<double>::Zero(static_cast<Eigen::Index>(obs.size()));
  nn::Vector<double> vanilla = nn::Vector<double>::Zero(net.num_params());
  net.backward(cache, dz, &dv, vanilla.data());
  CHECK((ppo - vanilla).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("non-finite ratio aborts the update with a diagnostic") {
  std::mt19937_64 rng(21);
  PpoConfig c;
  c.updates_per_epoch = 3;
  PpoTrainer<double> ppo(tiny(), c, 22);
  const auto obs = std::make_shared<Observation>(random_observation(rng, 2, 2, true));
  const std::vector<RolloutSample> rollout{{obs, 0, -std::numeric_limits<double>::infinity(), 1.0, 0.0},
                                           {obs, 0, -0.5, -1.0, 0.0}};
  const auto before = ppo.net().params().values();
  const auto stats = ppo.update(rollout);
  CHECK(stats.aborted);
  CHECK(stats.diagnostic.find("non-finite") != std::string::npos);
  CHECK(ppo.net().params().values() == before);
}

TEST_CASE("ppo collection and update") {
  const auto s = scenarios::regional(scenarios::Demand::High, {.drivers = 3, .horizon = 30.0});
  PpoConfig c;
  c.steps_per_epoch = 150;
  c.updates_per_epoch = 3;
  c.parallel_envs = 2;
  PpoTrainer<double> ppo(tiny(), c, 23);
  CHECK(ppo.net().arch().critic);
  std::vector<double> finished;
  const auto rollout = ppo.collect(s, finished);
  CHECK(rollout.size() == 300);
  CHECK_FALSE(finished.empty());
  for (const auto& r : rollout) {
    CHECK(std::isfinite(r.advantage));
    CHECK(r.log_prob <= 0.0);
    CHECK(r.action < r.obs->num_actions());
  }
  const auto stats = ppo.update(rollout);
  CHECK_FALSE(stats.aborted);
  CHECK(stats.samples == 300);
  CHECK(std::isfinite(stats.last.total));

  PpoTrainer<double> again(tiny(), c, 23);
  std::vector<double> f2;
  const auto r2 = again.collect(s, f2);
  CHECK(f2 == finished);
  CHECK(r2.back().advantage == rollout.back().advantage);
}

TEST_CASE("entropy coefficient anneals linearly") {
  PpoConfig c;
  c.entropy_start = 0.7;
  c.entropy_end = 0.01;
  c.entropy_anneal_epochs = 2000;
  CHECK(c.entropy_coef(0) == 0.7);
  CHECK(c.entropy_coef(1000) == doctest::Approx(0.355));
  CHECK(c.entropy_coef(5000) == 0.01);
}
