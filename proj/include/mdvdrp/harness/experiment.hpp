#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdvdrp/harness/rollout.hpp"
#include "mdvdrp/policy/policy_net.hpp"
#include "mdvdrp/train/dqn.hpp"
#include "mdvdrp/train/ppo.hpp"

namespace mdvdrp::harness {

/// Which environment to build. `variant` is high|low for regional and hot-cold and a split such
/// as 50-50 for distribute; the historical domains read their data from `orders_path` or
/// `grid_path`.
struct DomainConfig {
  std::string domain = "regional";
  std::string variant = "high";
  int drivers = 0;       // 0 keeps the domain default
  double horizon = 0.0;  // 0 keeps the domain default
  int k = 20;            // distribute: drivers and orders
  std::string orders_path;
  std::string grid_path;
  int days = 30;
  std::optional<std::size_t> fixed_day;
};

Scenario make_scenario(const DomainConfig& domain, bool simple_mode = false);

enum class Algo { Dqn, Ppo, Baseline };

struct ExperimentConfig {
  DomainConfig domain;
  Algo algo = Algo::Dqn;
  std::string policy = "mpdm-demand";  // baseline runs
  train::Perspective perspective = train::Perspective::DriverCentric;
  std::vector<std::uint64_t> seeds{0};
  int budget = 1000;  // episodes (dqn) or epochs (ppo)
  int eval_every = 50;
  int eval_episodes = 5;
  std::uint64_t eval_seed = 1'000'000;
  bool float32 = false;
  policy::PolicyArch arch;
  train::DqnConfig dqn;
  train::PpoConfig ppo;
  std::string out = "runs/default";

  /// Defaults, then domain presets, then the keys present in `j`. Unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

Algo parse_algo(const std::string& s);
std::string algo_name(Algo a);

/// Domain-specific training defaults: Distribute explores longer, the historical domains
/// discount harder, and Historical Statistics uses parallel environments.
void apply_domain_presets(ExperimentConfig& config);

/// Evaluation of one training point of one seed.
struct EvalPoint {
  int point = 0;  // episodes or epochs completed
  std::vector<double> returns;
  std::vector<double> served_pct;
  double mean() const;
  double std_error() const;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EvalPoint> evals;
  std::size_t best = 0;  // index into evals
};

struct RunSummary {
  std::vector<SeedResult> seeds;
  std::uint64_t best_seed = 0;
  int best_point = 0;
  double best_mean = 0.0;
  double best_std_error = 0.0;
  double best_served_pct = 0.0;

  nlohmann::json to_json() const;
};

using Logger = std::function<void(const std::string&)>;

/// Trains every seed with periodic greedy evaluation and writes, under config.out:
///   config.json, eval_returns.csv, curves.csv, summary.json and seed_<s>/best.ckpt.
/// Seeds whose seed_<s>/evals.csv already exists are loaded instead of retrained.
RunSummary run_train(const ExperimentConfig& config, const Logger& log = {});

/// Rebuilds curves.csv and summary.json from eval_returns.csv in `dir`.
RunSummary report(const std::string& dir);

/// Greedy evaluation of a checkpoint. Throws on an incompatible checkpoint.
EvalResult run_eval_checkpoint(const std::string& checkpoint, const DomainConfig& domain, int episodes,
                               std::uint64_t seed, FlowField* flow = nullptr);
EvalResult run_eval_baseline(const std::string& policy, const DomainConfig& domain, int episodes, std::uint64_t seed,
                             FlowField* flow = nullptr);

nlohmann::json eval_to_json(const EvalResult& r);

/// Summary statistics from raw rows (seed, point, return, served_pct).
struct EvalRow {
  std::uint64_t seed = 0;
  int point = 0;
  int episode = 0;
  double ret = 0.0;
  double served_pct = 0.0;
};
RunSummary summarize(const std::vector<EvalRow>& rows);
void write_eval_rows(const std::string& path, const std::vector<EvalRow>& rows);
std::vector<EvalRow> read_eval_rows(const std::string& path);
/// Columns: episodes_or_epochs,mean_return,std_across_seeds.
void write_curves(const std::string& path, const RunSummary& summary);

}  // namespace mdvdrp::harness
