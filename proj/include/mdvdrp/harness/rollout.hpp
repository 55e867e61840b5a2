#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "mdvdrp/baselines/baselines.hpp"
#include "mdvdrp/policy/policy_net.hpp"
#include "mdvdrp/sim/engine.hpp"

namespace mdvdrp::harness {

/// Maps an observation to an index into its action set.
using ActFn = std::function<std::size_t(const Observation&, std::mt19937_64&)>;

template <class S>
ActFn greedy_policy(const policy::PolicyNet<S>& net);
ActFn baseline_policy(const baselines::BaselineSpec& spec, const SimConfig& config);
ActFn random_policy();

/// Mean reposition direction per spatial bin.
class FlowField {
 public:
  FlowField(Rect region, int bins);
  void add(Point at, Point direction);
  /// CSV with header bin_x,bin_y,center_x,center_y,mean_dx,mean_dy,count.
  void write_csv(std::ostream& out) const;

 private:
  Rect region_;
  int bins_;
  std::vector<double> sum_x_, sum_y_;
  std::vector<std::int64_t> count_;
};

struct EpisodeOutcome {
  double total_reward = 0.0;
  std::int64_t decisions = 0;
  std::int64_t repositions = 0;
  OrderCounts counts;
  std::map<int, std::int64_t> served_by_tag;  // assigned or completed orders per order tag

  /// Served orders as a percentage of created orders (100 when nothing was created).
  double served_pct() const;
};

/// Plays one episode with `act`. `flow`, if given, collects every reposition decision.
EpisodeOutcome run_episode(Engine& env, const Scenario& scenario, std::uint64_t seed, const ActFn& act,
                           std::mt19937_64& rng, FlowField* flow = nullptr);

struct EvalResult {
  std::vector<EpisodeOutcome> episodes;
  double mean_return = 0.0;
  double std_error = 0.0;  // of the mean across episodes
  double mean_served_pct = 0.0;

  std::vector<double> returns() const;
};

/// Episode i uses environment seed base_seed + i and a policy RNG seeded from it.
EvalResult evaluate(const Scenario& scenario, const ActFn& act, int episodes, std::uint64_t base_seed,
                    FlowField* flow = nullptr);

double mean(const std::vector<double>& xs);
/// Sample standard deviation (n - 1); zero for fewer than two values.
double stddev(const std::vector<double>& xs);
double std_error(const std::vector<double>& xs);

}  // namespace mdvdrp::harness
