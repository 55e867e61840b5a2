#include "mdvdrp/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mdvdrp/nn/checkpoint.hpp"
#include "mdvdrp/scenarios/domains.hpp"

namespace mdvdrp::harness {

namespace fs = std::filesystem;
using nlohmann::json;

Scenario make_scenario(const DomainConfig& d, bool simple_mode) {
  Scenario s;
  if (d.domain == "regional") {
    scenarios::RegionalOptions o;
    if (d.drivers > 0) o.drivers = d.drivers;
    if (d.horizon > 0) o.horizon = d.horizon;
    s = scenarios::regional(scenarios::parse_demand(d.variant), o);
  } else if (d.domain == "hot-cold") {
    scenarios::HotColdOptions o;
    if (d.drivers > 0) o.drivers = d.drivers;
    if (d.horizon > 0) o.horizon = d.horizon;
    s = scenarios::hot_cold(scenarios::parse_demand(d.variant), o);
  } else if (d.domain == "distribute") {
    const auto dash = d.variant.find('-');
    double first = 0.0, second = 0.0;
    try {
      if (dash == std::string::npos) throw std::invalid_argument("");
      first = std::stod(d.variant.substr(0, dash));
      second = std::stod(d.variant.substr(dash + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("distribute variant must look like 50-50, got '" + d.variant + "'");
    }
    if (first < 0 || second < 0 || first + second <= 0) throw std::invalid_argument("bad distribute split '" + d.variant + "'");
    s = scenarios::distribute(first / (first + second), d.k);
  } else if (d.domain == "historical-orders") {
    if (d.orders_path.empty()) throw std::invalid_argument("historical-orders needs orders_path");
    scenarios::HistoricalOptions o;
    o.days = d.days;
    if (d.drivers > 0) o.drivers = d.drivers;
    if (d.horizon > 0) o.horizon_minutes = d.horizon;
    s = scenarios::historical_orders(d.orders_path, o);
    if (d.fixed_day) std::get<Replay>(s.orders.kind()).fixed_day = d.fixed_day;
  } else if (d.domain == "historical-statistics") {
    if (d.grid_path.empty()) throw std::invalid_argument("historical-statistics needs grid_path");
    scenarios::HistoricalOptions o;
    if (d.horizon > 0) o.horizon_minutes = d.horizon;
    s = scenarios::historical_statistics(d.grid_path, o);
  } else {
    throw std::invalid_argument("unknown domain '" + d.domain +
                                "' (expected regional, hot-cold, distribute, historical-orders or historical-statistics)");
  }
  s.config.simple_mode = simple_mode;
  s.config.validate();
  return s;
}

Algo parse_algo(const std::string& s) {
  if (s == "dqn") return Algo::Dqn;
  if (s == "ppo") return Algo::Ppo;
  if (s == "baseline") return Algo::Baseline;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected dqn, ppo or baseline)");
}

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::Dqn: return "dqn";
    case Algo::Ppo: return "ppo";
    case Algo::Baseline: return "baseline";
  }
  return "?";
}

void apply_domain_presets(ExperimentConfig& c) {
  if (c.domain.domain == "distribute") {
    c.dqn.epsilon_floor = 0.2;
    c.ppo.entropy_start = 0.7;
    c.ppo.entropy_end = 0.01;
    c.ppo.entropy_anneal_epochs = 2000;
  }
  if (c.domain.domain.rfind("historical", 0) == 0) {
    c.dqn.gamma = 0.9;
    c.ppo.gamma = 0.9;
  }
  if (c.domain.domain == "historical-statistics") {
    c.ppo.parallel_envs = 10;
    c.ppo.steps_per_epoch = 400;
    c.ppo.lr_policy = 5e-4;
    c.ppo.lr_value = 1e-3;
  }
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_dqn(const json& j, train::DqnConfig& c) {
  check_keys(j,
             {"gamma", "batch", "lr", "replay_capacity", "target_copy_every", "n_step", "epsilon_start", "epsilon_decay",
              "epsilon_floor", "learning_starts", "update_every"},
             "dqn");
  read(j, "gamma", c.gamma);
  read(j, "batch", c.batch);
  read(j, "lr", c.lr);
  read(j, "replay_capacity", c.replay_capacity);
  read(j, "target_copy_every", c.target_copy_every);
  read(j, "n_step", c.n_step);
  read(j, "epsilon_start", c.epsilon_start);
  read(j, "epsilon_decay", c.epsilon_decay);
  read(j, "epsilon_floor", c.epsilon_floor);
  read(j, "learning_starts", c.learning_starts);
  read(j, "update_every", c.update_every);
}

json dqn_json(const train::DqnConfig& c) {
  return {{"gamma", c.gamma},
          {"batch", c.batch},
          {"lr", c.lr},
          {"replay_capacity", c.replay_capacity},
          {"target_copy_every", c.target_copy_every},
          {"n_step", c.effective_n_step()},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_decay", c.epsilon_decay},
          {"epsilon_floor", c.epsilon_floor},
          {"learning_starts", c.learning_starts},
          {"update_every", c.update_every}};
}

void read_ppo(const json& j, train::PpoConfig& c) {
  check_keys(j,
             {"gamma", "lambda", "clip", "updates_per_epoch", "steps_per_epoch", "lr_policy", "lr_value", "value_coef",
              "entropy_start", "entropy_end", "entropy_anneal_epochs", "parallel_envs", "chunk", "normalize_advantages"},
             "ppo");
  read(j, "gamma", c.gamma);
  read(j, "lambda", c.lambda);
  read(j, "clip", c.clip);
  read(j, "updates_per_epoch", c.updates_per_epoch);
  read(j, "steps_per_epoch", c.steps_per_epoch);
  read(j, "lr_policy", c.lr_policy);
  read(j, "lr_value", c.lr_value);
  read(j, "value_coef", c.value_coef);
  read(j, "entropy_start", c.entropy_start);
  read(j, "entropy_end", c.entropy_end);
  read(j, "entropy_anneal_epochs", c.entropy_anneal_epochs);
  read(j, "parallel_envs", c.parallel_envs);
  read(j, "chunk", c.chunk);
  read(j, "normalize_advantages", c.normalize_advantages);
}

json ppo_json(const train::PpoConfig& c) {
  return {{"gamma", c.gamma},
          {"lambda", c.lambda},
          {"clip", c.clip},
          {"updates_per_epoch", c.updates_per_epoch},
          {"steps_per_epoch", c.steps_per_epoch},
          {"lr_policy", c.lr_policy},
          {"lr_value", c.lr_value},
          {"value_coef", c.value_coef},
          {"entropy_start", c.entropy_start},
          {"entropy_end", c.entropy_end},
          {"entropy_anneal_epochs", c.entropy_anneal_epochs},
          {"parallel_envs", c.parallel_envs},
          {"chunk", c.chunk},
          {"normalize_advantages", c.normalize_advantages}};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  check_keys(j,
             {"domain", "variant", "drivers", "horizon", "k", "orders_path", "grid_path", "days", "fixed_day", "algo",
              "policy", "perspective", "seeds", "budget", "eval_every", "eval_episodes", "eval_seed", "float32", "arch",
              "dqn", "ppo", "out"},
             "config");
  ExperimentConfig c;
  read(j, "domain", c.domain.domain);
  read(j, "variant", c.domain.variant);
  if (c.domain.domain == "distribute" && !j.contains("variant")) c.domain.variant = "50-50";
  read(j, "drivers", c.domain.drivers);
  read(j, "horizon", c.domain.horizon);
  read(j, "k", c.domain.k);
  read(j, "orders_path", c.domain.orders_path);
  read(j, "grid_path", c.domain.grid_path);
  read(j, "days", c.domain.days);
  if (j.contains("fixed_day") && !j.at("fixed_day").is_null()) c.domain.fixed_day = j.at("fixed_day").get<std::size_t>();
  if (j.contains("algo")) c.algo = parse_algo(j.at("algo").get<std::string>());
  read(j, "policy", c.policy);
  if (j.contains("perspective")) c.perspective = train::parse_perspective(j.at("perspective").get<std::string>());
  read(j, "seeds", c.seeds);
  read(j, "budget", c.budget);
  read(j, "eval_every", c.eval_every);
  read(j, "eval_episodes", c.eval_episodes);
  read(j, "eval_seed", c.eval_seed);
  read(j, "float32", c.float32);
  read(j, "out", c.out);
  apply_domain_presets(c);
  if (j.contains("arch")) {
    const auto& a = j.at("arch");
    check_keys(a, {"embed_hidden", "embed", "weight_hidden", "head_hidden"}, "arch");
    read(a, "embed_hidden", c.arch.embed_hidden);
    read(a, "embed", c.arch.embed);
    read(a, "weight_hidden", c.arch.weight_hidden);
    read(a, "head_hidden", c.arch.head_hidden);
  }
  if (j.contains("dqn")) read_dqn(j.at("dqn"), c.dqn);
  if (j.contains("ppo")) read_ppo(j.at("ppo"), c.ppo);
  c.dqn.perspective = c.perspective;
  c.ppo.perspective = c.perspective;
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json j{{"domain", domain.domain},
         {"variant", domain.variant},
         {"drivers", domain.drivers},
         {"horizon", domain.horizon},
         {"k", domain.k},
         {"orders_path", domain.orders_path},
         {"grid_path", domain.grid_path},
         {"days", domain.days},
         {"algo", algo_name(algo)},
         {"policy", policy},
         {"perspective", train::perspective_name(perspective)},
         {"seeds", seeds},
         {"budget", budget},
         {"eval_every", eval_every},
         {"eval_episodes", eval_episodes},
         {"eval_seed", eval_seed},
         {"float32", float32},
         {"arch",
          {{"embed_hidden", arch.embed_hidden},
           {"embed", arch.embed},
           {"weight_hidden", arch.weight_hidden},
           {"head_hidden", arch.head_hidden}}},
         {"dqn", dqn_json(dqn)},
         {"ppo", ppo_json(ppo)},
         {"out", out}};
  j["fixed_day"] = domain.fixed_day ? json(*domain.fixed_day) : json(nullptr);
  return j;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: seeds must not be empty");
  if (budget < 0) throw std::invalid_argument("config: budget must be >= 0");
  if (eval_every < 1) throw std::invalid_argument("config: eval_every must be >= 1");
  if (eval_episodes < 1) throw std::invalid_argument("config: eval_episodes must be >= 1");
  if (algo == Algo::Baseline) baselines::BaselineSpec::parse(policy);
  dqn.validate();
  ppo.validate();
}

double EvalPoint::mean() const { return harness::mean(returns); }
double EvalPoint::std_error() const { return harness::std_error(returns); }

json RunSummary::to_json() const {
  json per_seed = json::array();
  for (const auto& s : seeds) {
    const auto& b = s.evals.at(s.best);
    per_seed.push_back({{"seed", s.seed},
                        {"best_point", b.point},
                        {"best_mean", b.mean()},
                        {"best_std_error", b.std_error()},
                        {"best_served_pct", harness::mean(b.served_pct)},
                        {"initial_mean", s.evals.front().mean()}});
  }
  return {{"best_seed", best_seed},
          {"best_point", best_point},
          {"best_mean", best_mean},
          {"best_std_error", best_std_error},
          {"best_served_pct", best_served_pct},
          {"seeds", per_seed}};
}

RunSummary summarize(const std::vector<EvalRow>& rows) {
  std::map<std::uint64_t, std::map<int, EvalPoint>> grouped;
  for (const auto& r : rows) {
    auto& p = grouped[r.seed][r.point];
    p.point = r.point;
    p.returns.push_back(r.ret);
    p.served_pct.push_back(r.served_pct);
  }
  RunSummary s;
  bool first = true;
  for (auto& [seed, points] : grouped) {
    SeedResult sr;
    sr.seed = seed;
    for (auto& [pt, ev] : points) sr.evals.push_back(std::move(ev));
    for (std::size_t i = 1; i < sr.evals.size(); ++i) {
      if (sr.evals[i].mean() > sr.evals[sr.best].mean()) sr.best = i;
    }
    const auto& b = sr.evals[sr.best];
    if (first || b.mean() > s.best_mean) {
      first = false;
      s.best_seed = seed;
      s.best_point = b.point;
      s.best_mean = b.mean();
      s.best_std_error = b.std_error();
      s.best_served_pct = harness::mean(b.served_pct);
    }
    s.seeds.push_back(std::move(sr));
  }
  return s;
}

void write_eval_rows(const std::string& path, const std::vector<EvalRow>& rows) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.precision(17);
    out << "seed,episodes_or_epochs,episode,return,served_pct\n";
    for (const auto& r : rows) {
      out << r.seed << ',' << r.point << ',' << r.episode << ',' << r.ret << ',' << r.served_pct << '\n';
    }
    if (!out) throw std::runtime_error("failed writing '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

std::vector<EvalRow> read_eval_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "seed,episodes_or_epochs,episode,return,served_pct") {
    throw std::runtime_error(path + ": unexpected header '" + line + "'");
  }
  std::vector<EvalRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    EvalRow r;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(ss >> r.seed >> c1 >> r.point >> c2 >> r.episode >> c3 >> r.ret >> c4 >> r.served_pct) || c1 != ',' ||
        c2 != ',' || c3 != ',' || c4 != ',') {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    rows.push_back(r);
  }
  return rows;
}

void write_curves(const std::string& path, const RunSummary& summary) {
  std::map<int, std::vector<double>> by_point;
  for (const auto& s : summary.seeds) {
    for (const auto& e : s.evals) by_point[e.point].push_back(e.mean());
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.precision(10);
  out << "episodes_or_epochs,mean_return,std_across_seeds\n";
  for (const auto& [pt, means] : by_point) out << pt << ',' << mean(means) << ',' << stddev(means) << '\n';
}

namespace {

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

std::string checkpoint_meta(const std::string& arch_json, const ExperimentConfig& c, std::uint64_t seed, int point) {
  auto j = json::parse(arch_json);
  j["domain"] = c.domain.domain;
  j["variant"] = c.domain.variant;
  j["algo"] = algo_name(c.algo);
  j["perspective"] = train::perspective_name(c.perspective);
  j["seed"] = seed;
  j["point"] = point;
  return j.dump();
}

template <class S>
std::vector<EvalRow> train_seed(const ExperimentConfig& c, const Scenario& scenario, std::uint64_t seed,
                                const std::string& dir, const Logger& log) {
  std::vector<EvalRow> rows;
  double best = -std::numeric_limits<double>::infinity();
  const auto eval_point = [&](const policy::PolicyNet<S>& net, int point) {
    const auto r = evaluate(scenario, greedy_policy(net), c.eval_episodes, c.eval_seed);
    for (std::size_t i = 0; i < r.episodes.size(); ++i) {
      rows.push_back({seed, point, static_cast<int>(i), r.episodes[i].total_reward, r.episodes[i].served_pct()});
    }
    if (r.mean_return > best) {
      best = r.mean_return;
      auto ck = net.to_checkpoint();
      ck.meta = checkpoint_meta(ck.meta, c, seed, point);
      nn::save_checkpoint(dir + "/best.ckpt", ck);
    }
    if (log) {
      std::ostringstream m;
      m << "seed " << seed << " " << (c.algo == Algo::Dqn ? "episode " : "epoch ") << point << ": eval mean "
        << r.mean_return << " +- " << r.std_error << ", served " << r.mean_served_pct << "%";
      log(m.str());
    }
  };
  const auto due = [&](int i) { return i % c.eval_every == 0 || i == c.budget; };

  if (c.algo == Algo::Dqn) {
    train::DqnTrainer<S> t(c.arch, c.dqn, seed);
    Engine env;
    eval_point(t.online(), 0);
    for (int ep = 1; ep <= c.budget; ++ep) {
      t.train_episode(env, scenario, seed * 1'000'003ULL + static_cast<std::uint64_t>(ep));
      if (due(ep)) eval_point(t.online(), ep);
    }
  } else {
    train::PpoTrainer<S> t(c.arch, c.ppo, seed);
    eval_point(t.net(), 0);
    for (int epoch = 1; epoch <= c.budget; ++epoch) {
      const auto stats = t.train_epoch(scenario);
      if (stats.aborted && log) log("seed " + std::to_string(seed) + " epoch " + std::to_string(epoch) + " aborted: " + stats.diagnostic);
      if (due(epoch)) eval_point(t.net(), epoch);
    }
  }
  return rows;
}

}  // namespace

RunSummary run_train(const ExperimentConfig& c, const Logger& log) {
  c.validate();
  if (c.algo == Algo::Baseline) throw std::invalid_argument("train: use the baseline command for baseline policies");
  const Scenario scenario = make_scenario(c.domain);
  fs::create_directories(c.out);
  write_json(c.out + "/config.json", c.to_json());
  std::vector<EvalRow> all;
  for (const auto seed : c.seeds) {
    const std::string dir = c.out + "/seed_" + std::to_string(seed);
    const std::string evals = dir + "/evals.csv";
    std::vector<EvalRow> rows;
    if (fs::exists(evals)) {
      rows = read_eval_rows(evals);
      if (log) log("seed " + std::to_string(seed) + ": resumed from " + evals);
    } else {
      fs::create_directories(dir);
      rows = c.float32 ? train_seed<float>(c, scenario, seed, dir, log) : train_seed<double>(c, scenario, seed, dir, log);
      write_eval_rows(evals, rows);
    }
    all.insert(all.end(), rows.begin(), rows.end());
  }
  write_eval_rows(c.out + "/eval_returns.csv", all);
  const auto summary = summarize(all);
  write_curves(c.out + "/curves.csv", summary);
  write_json(c.out + "/summary.json", summary.to_json());
  return summary;
}

RunSummary report(const std::string& dir) {
  const auto rows = read_eval_rows(dir + "/eval_returns.csv");
  if (rows.empty()) throw std::runtime_error(dir + "/eval_returns.csv has no rows");
  const auto summary = summarize(rows);
  write_curves(dir + "/curves.csv", summary);
  write_json(dir + "/summary.json", summary.to_json());
  return summary;
}

EvalResult run_eval_checkpoint(const std::string& checkpoint, const DomainConfig& domain, int episodes,
                               std::uint64_t seed, FlowField* flow) {
  const auto ck = nn::load_checkpoint(checkpoint);
  const auto net = policy::PolicyNet<double>::from_checkpoint(ck);
  const Scenario scenario = make_scenario(domain);
  return evaluate(scenario, greedy_policy(net), episodes, seed, flow);
}

EvalResult run_eval_baseline(const std::string& policy, const DomainConfig& domain, int episodes, std::uint64_t seed,
                             FlowField* flow) {
  const auto spec = baselines::BaselineSpec::parse(policy);
  const Scenario scenario = make_scenario(domain, spec.reposition == baselines::Repositioning::Simple);
  return evaluate(scenario, baseline_policy(spec, scenario.config), episodes, seed, flow);
}

json eval_to_json(const EvalResult& r) {
  return {{"episodes", r.episodes.size()},
          {"mean_return", r.mean_return},
          {"std_error", r.std_error},
          {"mean_served_pct", r.mean_served_pct},
          {"returns", r.returns()}};
}

}  // namespace mdvdrp::harness
