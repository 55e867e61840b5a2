#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdvdrp/harness/experiment.hpp"
#include "mdvdrp/harness/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace mdvdrp;

struct DomainFlags {
  std::optional<std::string> domain, variant, orders, grid;
  std::optional<int> drivers, k, days;
  std::optional<double> horizon;
  std::optional<std::size_t> fixed_day;

  void attach(CLI::App* cmd) {
    cmd->add_option("--domain", domain, "regional | hot-cold | distribute | historical-orders | historical-statistics");
    cmd->add_option("--variant", variant, "high | low, or a split such as 50-50 for distribute");
    cmd->add_option("--drivers", drivers, "Fleet size override");
    cmd->add_option("--horizon", horizon, "Episode horizon override");
    cmd->add_option("--k", k, "Distribute: number of drivers and orders");
    cmd->add_option("--orders", orders, "Historical order CSV");
    cmd->add_option("--grid", grid, "Poisson grid file");
    cmd->add_option("--days", days, "Days in the historical order file");
    cmd->add_option("--fixed-day", fixed_day, "Replay only this day");
  }

  void merge(json& j) const {
    if (domain) j["domain"] = *domain;
    if (variant) j["variant"] = *variant;
    if (drivers) j["drivers"] = *drivers;
    if (horizon) j["horizon"] = *horizon;
    if (k) j["k"] = *k;
    if (orders) j["orders_path"] = *orders;
    if (grid) j["grid_path"] = *grid;
    if (days) j["days"] = *days;
    if (fixed_day) j["fixed_day"] = *fixed_day;
  }
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
}

int fail(const std::string& command, const std::string& message, int code = 1) {
  std::cerr << json{{"error", message}, {"command", command}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-driver dispatching and repositioning: simulation, training and evaluation"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a dispatch policy with periodic evaluation");
  std::string train_config;
  DomainFlags train_domain;
  std::optional<std::string> algo, perspective, out;
  std::vector<std::uint64_t> seeds;
  std::optional<int> budget, eval_every, eval_episodes;
  bool float32 = false;
  bool quiet = false;
  train->add_option("--config", train_config, "JSON experiment config");
  train_domain.attach(train);
  train->add_option("--algo", algo, "dqn | ppo");
  train->add_option("--perspective", perspective, "driver | system");
  train->add_option("--seeds", seeds, "Training seeds")->delimiter(',');
  train->add_option("--budget", budget, "Episodes (dqn) or epochs (ppo)");
  train->add_option("--eval-every", eval_every, "Evaluation period");
  train->add_option("--eval-episodes", eval_episodes, "Episodes per evaluation");
  train->add_flag("--float32", float32, "Train in single precision");
  train->add_flag("--quiet", quiet, "No progress output");
  train->add_option("--out", out, "Run directory");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint or a baseline");
  std::string eval_config, checkpoint, eval_policy, flow_csv, eval_out;
  DomainFlags eval_domain;
  int episodes = 20;
  std::uint64_t eval_seed = 1'000'000;
  eval->add_option("--config", eval_config, "JSON config supplying the domain");
  eval_domain.attach(eval);
  auto* ck_opt = eval->add_option("--checkpoint", checkpoint, "Policy checkpoint");
  eval->add_option("--policy", eval_policy, "Baseline name, e.g. mpdm-demand")->excludes(ck_opt);
  eval->add_option("--episodes", episodes, "Evaluation episodes");
  eval->add_option("--seed", eval_seed, "Seed of the first evaluation episode");
  eval->add_option("--flow-csv", flow_csv, "Write a binned reposition-flow CSV");
  eval->add_option("--out", eval_out, "Write the result JSON here as well");

  // baseline
  auto* base = app.add_subcommand("baseline", "Evaluate a myopic baseline");
  std::string base_config, base_policy = "mpdm-demand", base_out;
  DomainFlags base_domain;
  int base_episodes = 20;
  std::uint64_t base_seed = 1'000'000;
  base->add_option("--config", base_config, "JSON config supplying the domain");
  base_domain.attach(base);
  base->add_option("--policy", base_policy, "mrm|mpdm - simple|random|demand");
  base->add_option("--episodes", base_episodes, "Evaluation episodes");
  base->add_option("--seed", base_seed, "Seed of the first evaluation episode");
  base->add_option("--out", base_out, "Directory for summary.json");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic historical order file and Poisson grid");
  harness::SyntheticOptions syn;
  std::string gen_out = "data";
  gen->add_option("--seed", syn.seed, "Generator seed");
  gen->add_option("--days", syn.days, "Number of days");
  gen->add_option("--daily-orders", syn.daily_orders, "Mean orders per day");
  gen->add_option("--hotspots", syn.hotspots, "Number of spatial hot spots");
  gen->add_option("--drivers-per-order", syn.drivers_per_order, "Driver activations per order in the grid");
  gen->add_option("--out", gen_out, "Output directory (orders.csv, grid.txt)");

  // report
  auto* rep = app.add_subcommand("report", "Rebuild curves and summary from raw evaluation returns");
  std::string rep_dir;
  rep->add_option("--out", rep_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("parse", e.what(), 2);
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*train) {
      json j = load_config(train_config);
      train_domain.merge(j);
      if (algo) j["algo"] = *algo;
      if (perspective) j["perspective"] = *perspective;
      if (!seeds.empty()) j["seeds"] = seeds;
      if (budget) j["budget"] = *budget;
      if (eval_every) j["eval_every"] = *eval_every;
      if (eval_episodes) j["eval_episodes"] = *eval_episodes;
      if (float32) j["float32"] = true;
      if (out) j["out"] = *out;
      const auto config = harness::ExperimentConfig::from_json(j);
      harness::Logger log;
      if (!quiet) log = [](const std::string& m) { std::cerr << m << std::endl; };
      const auto summary = harness::run_train(config, log);
      std::cout << summary.to_json().dump(2) << std::endl;
    } else if (*eval || *base) {
      const bool is_eval = eval->parsed();
      json j = load_config(is_eval ? eval_config : base_config);
      (is_eval ? eval_domain : base_domain).merge(j);
      j.erase("algo");
      const auto config = harness::ExperimentConfig::from_json(j);
      const int n = is_eval ? episodes : base_episodes;
      const std::uint64_t s = is_eval ? eval_seed : base_seed;
      std::optional<harness::FlowField> flow;
      if (is_eval && !flow_csv.empty()) flow.emplace(make_scenario(config.domain).config.region, 10);
      harness::EvalResult r;
      std::string policy_name;
      if (is_eval && !checkpoint.empty()) {
        r = harness::run_eval_checkpoint(checkpoint, config.domain, n, s, flow ? &*flow : nullptr);
        policy_name = checkpoint;
      } else {
        policy_name = is_eval ? eval_policy : base_policy;
        if (policy_name.empty()) throw std::invalid_argument("eval needs --checkpoint or --policy");
        r = harness::run_eval_baseline(policy_name, config.domain, n, s, flow ? &*flow : nullptr);
      }
      json res = harness::eval_to_json(r);
      res["policy"] = policy_name;
      res["domain"] = config.domain.domain;
      res["variant"] = config.domain.variant;
      if (flow) {
        std::ofstream f(flow_csv);
        if (!f) throw std::runtime_error("cannot open '" + flow_csv + "' for writing");
        flow->write_csv(f);
      }
      const std::string dest = is_eval ? eval_out : base_out;
      if (!dest.empty()) {
        if (is_eval) {
          write_text(dest, res.dump(2) + "\n");
        } else {
          std::filesystem::create_directories(dest);
          write_text(dest + "/summary.json", res.dump(2) + "\n");
        }
      }
      std::cout << res.dump(2) << std::endl;
    } else if (*gen) {
      const auto data = harness::generate_synthetic(syn);
      std::filesystem::create_directories(gen_out);
      harness::write_synthetic(data, gen_out + "/orders.csv", gen_out + "/grid.txt");
      std::cout << json{{"orders", data.orders.size()},
                        {"orders_path", gen_out + "/orders.csv"},
                        {"grid_path", gen_out + "/grid.txt"}}
                       .dump(2)
                << std::endl;
    } else if (*rep) {
      std::cout << harness::report(rep_dir).to_json().dump(2) << std::endl;
    }
  } catch (const std::exception& e) {
    return fail(command, e.what());
  }
  return 0;
}
