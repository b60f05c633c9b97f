// Copyright 2026 The pdalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pdalab/cli/run.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pdalab/common/csv.hpp"
#include "pdalab/common/random.hpp"

namespace pdalab::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string to_string(pda::NoiseMode m) {
  return m == pda::NoiseMode::decaying ? "decaying" : "constant";
}

pda::NoiseMode parse_noise(const std::string& s) {
  if (s == "decaying") return pda::NoiseMode::decaying;
  if (s == "constant") return pda::NoiseMode::constant;
  throw std::invalid_argument("unknown noise mode '" + s + "'");
}

std::string to_string(pda::ProxMode m) { return m == pda::ProxMode::zero ? "zero" : "snapshot"; }

pda::ProxMode parse_prox(const std::string& s) {
  if (s == "zero") return pda::ProxMode::zero;
  if (s == "snapshot") return pda::ProxMode::snapshot;
  throw std::invalid_argument("unknown prox mode '" + s + "'");
}

json pda_to_json(const pda::PdaConfig& c) {
  return {{"lambda", c.lambda}, {"sigma0", c.sigma0}, {"noise", to_string(c.noise)},
          {"smoothing", c.smoothing.to_string()}, {"prox", to_string(c.prox)},
          {"passes", c.passes}, {"minibatch", c.minibatch}, {"lr", c.lr},
          {"max_grad_norm", c.max_grad_norm}, {"gamma", c.gamma}, {"gae_lambda", c.gae_lambda},
          {"normalize_returns", c.normalize_returns}, {"hidden", c.hidden}};
}

pda::PdaConfig pda_from_json(const json& j) {
  reject_unknown_keys(j, {"lambda", "sigma0", "noise", "smoothing", "prox", "passes", "minibatch",
                          "lr", "max_grad_norm", "gamma", "gae_lambda", "normalize_returns", "hidden"},
                      "config.pda");
  pda::PdaConfig c;
  read_if(j, "lambda", c.lambda);
  read_if(j, "sigma0", c.sigma0);
  if (j.contains("noise")) c.noise = parse_noise(j.at("noise").get<std::string>());
  if (j.contains("smoothing")) c.smoothing = pda::SmoothingMode::parse(j.at("smoothing").get<std::string>());
  if (j.contains("prox")) c.prox = parse_prox(j.at("prox").get<std::string>());
  read_if(j, "passes", c.passes);
  read_if(j, "minibatch", c.minibatch);
  read_if(j, "lr", c.lr);
  read_if(j, "max_grad_norm", c.max_grad_norm);
  read_if(j, "gamma", c.gamma);
  read_if(j, "gae_lambda", c.gae_lambda);
  read_if(j, "normalize_returns", c.normalize_returns);
  read_if(j, "hidden", c.hidden);
  return c;
}

json ppo_to_json(const ppo::PpoConfig& c) {
  return {{"clip", c.clip}, {"vf_coeff", c.vf_coeff}, {"ent_coeff", c.ent_coeff}, {"lr", c.lr},
          {"lr_decay", c.lr_decay}, {"minibatch", c.minibatch}, {"passes", c.passes},
          {"max_grad_norm", c.max_grad_norm}, {"gamma", c.gamma}, {"gae_lambda", c.gae_lambda},
          {"init_log_std", c.init_log_std}, {"normalize_returns", c.normalize_returns},
          {"hidden", c.hidden}};
}

ppo::PpoConfig ppo_from_json(const json& j) {
  reject_unknown_keys(j, {"clip", "vf_coeff", "ent_coeff", "lr", "lr_decay", "minibatch", "passes",
                          "max_grad_norm", "gamma", "gae_lambda", "init_log_std",
                          "normalize_returns", "hidden"},
                      "config.ppo");
  ppo::PpoConfig c;
  read_if(j, "clip", c.clip);
  read_if(j, "vf_coeff", c.vf_coeff);
  read_if(j, "ent_coeff", c.ent_coeff);
  read_if(j, "lr", c.lr);
  read_if(j, "lr_decay", c.lr_decay);
  read_if(j, "minibatch", c.minibatch);
  read_if(j, "passes", c.passes);
  read_if(j, "max_grad_norm", c.max_grad_norm);
  read_if(j, "gamma", c.gamma);
  read_if(j, "gae_lambda", c.gae_lambda);
  read_if(j, "init_log_std", c.init_log_std);
  read_if(j, "normalize_returns", c.normalize_returns);
  read_if(j, "hidden", c.hidden);
  return c;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

std::ofstream open_csv(const fs::path& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << "\n";
  return out;
}

}  // namespace

std::string to_string(Algo algo) { return algo == Algo::pda ? "pda" : "ppo"; }

Algo parse_algo(const std::string& name) {
  if (name == "pda") return Algo::pda;
  if (name == "ppo") return Algo::ppo;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void RunConfig::validate() const {
  // Builds the environment to reject unknown ids early.
  envs::make_env(env);
  if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
  if (steps_per_collect == 0) throw std::invalid_argument("config: steps_per_collect must be positive");
  if (n_envs == 0) throw std::invalid_argument("config: n_envs must be positive");
  if (eval_episodes < 1) throw std::invalid_argument("config: eval_episodes must be >= 1");
  if (checkpoint_every < 0) throw std::invalid_argument("config: checkpoint_every must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
  pda.validate();
  ppo.validate();
}

fs::path RunConfig::run_dir() const {
  std::string name = to_string(algo) + "-" + env + "-s" + std::to_string(seed);
  for (char& ch : name) {
    if (ch == ':') ch = '_';
  }
  return fs::path(out_dir) / name;
}

json to_json(const RunConfig& c) {
  return {{"algo", to_string(c.algo)}, {"env", c.env}, {"seed", c.seed},
          {"iterations", c.iterations}, {"steps_per_collect", c.steps_per_collect},
          {"n_envs", c.n_envs}, {"eval_episodes", c.eval_episodes}, {"eval_seed", c.eval_seed},
          {"checkpoint_every", c.checkpoint_every}, {"out_dir", c.out_dir},
          {"pda", pda_to_json(c.pda)}, {"ppo", ppo_to_json(c.ppo)}};
}

RunConfig config_from_json(const json& j) {
  reject_unknown_keys(j, {"algo", "env", "seed", "iterations", "steps_per_collect", "n_envs",
                          "eval_episodes", "eval_seed", "checkpoint_every", "out_dir", "pda", "ppo"},
                      "config");
  RunConfig c;
  if (j.contains("algo")) c.algo = parse_algo(j.at("algo").get<std::string>());
  read_if(j, "env", c.env);
  read_if(j, "seed", c.seed);
  read_if(j, "iterations", c.iterations);
  read_if(j, "steps_per_collect", c.steps_per_collect);
  read_if(j, "n_envs", c.n_envs);
  read_if(j, "eval_episodes", c.eval_episodes);
  read_if(j, "eval_seed", c.eval_seed);
  read_if(j, "checkpoint_every", c.checkpoint_every);
  read_if(j, "out_dir", c.out_dir);
  if (j.contains("pda")) c.pda = pda_from_json(j.at("pda"));
  if (j.contains("ppo")) c.ppo = ppo_from_json(j.at("ppo"));
  return c;
}

RunConfig load_config(const fs::path& path) { return config_from_json(read_json(path)); }

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

std::string default_out_root() {
  const char* env = std::getenv("PDA_LAB_OUT");
  return env && *env ? std::string(env) : std::string("runs");
}

std::string format_metrics_row(const MetricsRow& row) {
  const auto& s = row.stats;
  std::ostringstream out;
  out << s.iter << ',' << s.env_steps << ',' << csv::format_double(s.beta) << ','
      << csv::format_double(s.sigma) << ',' << csv::format_double(s.value_loss) << ','
      << csv::format_double(s.psi_loss) << ',' << csv::format_double(s.actor_loss) << ','
      << csv::format_double(s.train_return_mean) << ','
      << csv::format_double(row.test_return_mean) << ','
      << csv::format_double(row.test_return_std);
  return out.str();
}

std::vector<MetricsRow> read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader) throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != 10) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    MetricsRow r;
    r.stats = {static_cast<int>(v[0]), static_cast<std::size_t>(v[1]), v[2], v[3], v[4], v[5],
               v[6], v[7]};
    r.test_return_mean = v[8];
    r.test_return_std = v[9];
    rows.push_back(r);
  }
  return rows;
}

Trainer::Trainer(const RunConfig& config) : config_(config) {
  config_.validate();
  env_ = envs::make_env(config_.env);
  const auto& spec = env_->spec();
  if (config_.algo == Algo::pda) {
    pda_ = std::make_unique<pda::PdaAgent>(spec.obs_dim, spec.act_dim, config_.pda, config_.seed);
  } else {
    auto ppo_cfg = config_.ppo;
    if (ppo_cfg.lr_decay) ppo_cfg.decay_iterations = config_.iterations;
    ppo_ = std::make_unique<ppo::PpoAgent>(spec.obs_dim, spec.act_dim, ppo_cfg, config_.seed);
  }
  collector_ = std::make_unique<rollout::Collector>(*env_, config_.n_envs, config_.seed);
}

const rollout::Agent& Trainer::agent() const {
  if (pda_) return *pda_;
  return *ppo_;
}

rollout::EvalResult Trainer::test() const {
  return rollout::evaluate(agent(), *env_, config_.eval_episodes, config_.eval_seed);
}

MetricsRow Trainer::baseline() const {
  MetricsRow row;
  row.stats.iter = 0;
  row.stats.env_steps = 0;
  if (pda_) {
    row.stats.beta = pda_->schedule().beta;
    row.stats.sigma = pda::sigma(pda_->schedule());
  } else {
    row.stats.beta = kNaN;
    double sd = 0.0;
    const auto log_std = ppo_->policy().log_std_values();
    for (double v : log_std) sd += std::exp(v);
    row.stats.sigma = sd / static_cast<double>(log_std.size());
  }
  row.stats.value_loss = row.stats.psi_loss = row.stats.actor_loss = kNaN;
  row.stats.train_return_mean = kNaN;
  const auto ev = test();
  row.test_return_mean = ev.mean;
  row.test_return_std = ev.std;
  return row;
}

MetricsRow Trainer::step() {
  MetricsRow row;
  row.stats = pda_ ? pda::pda_iteration(*pda_, *collector_, config_.steps_per_collect)
                   : ppo::ppo_iteration(*ppo_, *collector_, config_.steps_per_collect);
  const auto ev = test();
  row.test_return_mean = ev.mean;
  row.test_return_std = ev.std;
  return row;
}

json Trainer::checkpoint() const {
  return {{"algo", to_string(config_.algo)},
          {"agent", pda_ ? pda_->checkpoint() : ppo_->checkpoint()}};
}

void Trainer::restore(const json& j) {
  if (j.at("algo").get<std::string>() != to_string(config_.algo)) {
    throw std::invalid_argument("checkpoint algorithm does not match the run config");
  }
  if (pda_) {
    pda_->restore(j.at("agent"));
  } else {
    ppo_->restore(j.at("agent"));
  }
}

namespace {

// Shared loop of train and track; `after_epoch` runs after each row is
// written.
template <typename Hook>
fs::path run_training(const RunConfig& config, Trainer& trainer, Hook after_epoch) {
  const fs::path dir = config.run_dir();
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(config));
  auto metrics = open_csv(dir / "metrics.csv", kMetricsHeader);
  metrics << format_metrics_row(trainer.baseline()) << "\n" << std::flush;
  for (int i = 1; i <= config.iterations; ++i) {
    const auto row = trainer.step();
    metrics << format_metrics_row(row) << "\n" << std::flush;
    if (config.checkpoint_every > 0 && i % config.checkpoint_every == 0) {
      write_json(dir / ("checkpoint_iter" + std::to_string(i) + ".json"), trainer.checkpoint());
    }
    after_epoch(i, row);
  }
  write_json(dir / "checkpoint_final.json", trainer.checkpoint());
  return dir;
}

}  // namespace

fs::path cmd_train(const RunConfig& config) {
  Trainer trainer(config);
  return run_training(config, trainer, [](int, const MetricsRow&) {});
}

std::vector<TrackEpoch> cmd_track(const RunConfig& config, const TrackOptions& options) {
  if (config.env != "pendulum") throw std::invalid_argument("track: needs the pendulum environment");
  if (config.algo != Algo::pda) throw std::invalid_argument("track: needs algo pda");
  Trainer trainer(config);
  const auto& spec = trainer.env().spec();
  const auto thetas = subsolver::linspace(-std::numbers::pi, std::numbers::pi, options.theta_points);
  const auto taus = subsolver::linspace(spec.act_low[0], spec.act_high[0], options.tau_points);
  const auto states = subsolver::pendulum_state_grid(thetas, options.theta_dots);
  const fs::path dir = config.run_dir();

  std::vector<TrackEpoch> epochs;
  run_training(config, trainer, [&](int epoch, const MetricsRow& row) {
    const auto problem = subsolver::pda_state_problem(*trainer.pda_agent());
    const auto tr = subsolver::tracking_mae(problem, states, spec, options.solver);
    epochs.push_back({epoch, tr.mae, tr.max_action_tol, row.test_return_mean});
    for (int e : options.dump_epochs) {
      if (e != epoch) continue;
      const auto rows = subsolver::landscape_dump(problem, spec, thetas, taus,
                                                  options.landscape_theta_dot, options.solver);
      subsolver::write_landscape_csv(
          (dir / ("landscape_epoch" + std::to_string(epoch) + ".csv")).string(), rows);
    }
  });
  auto out = open_csv(dir / "tracking.csv", "epoch,mae,max_action_tol,test_return_mean");
  for (const auto& e : epochs) {
    out << e.epoch << ',' << csv::format_double(e.mae) << ',' << csv::format_double(e.max_action_tol)
        << ',' << csv::format_double(e.test_return_mean) << "\n";
  }
  return epochs;
}

TheoryOutcome cmd_theory(const std::vector<std::string>& case_ids,
                         const theorylab::TheorySettings& settings, const fs::path& out_dir) {
  std::vector<theorylab::TheoryCase> cases;
  for (const auto& id : case_ids) cases.push_back(theorylab::parse_case(id));
  TheoryOutcome outcome;
  outcome.all_passed = true;
  for (const auto& tc : cases) {
    for (auto& e : theorylab::run_case(tc, settings)) {
      outcome.all_passed = outcome.all_passed && e.passed;
      outcome.entries.push_back(std::move(e));
    }
  }
  json report = {{"K", settings.K}, {"eps_values", settings.eps_values},
                 {"tolerance", settings.tolerance}, {"all_passed", outcome.all_passed},
                 {"checks", outcome.entries}};
  fs::create_directories(out_dir);
  write_json(out_dir / "theory-report.json", report);
  return outcome;
}

double last5_mean(const std::vector<MetricsRow>& rows) {
  std::vector<double> trained;
  for (const auto& r : rows) {
    if (r.stats.iter >= 1) trained.push_back(r.test_return_mean);
  }
  if (trained.empty()) throw std::invalid_argument("last5_mean: no trained epochs");
  const std::size_t n = std::min<std::size_t>(5, trained.size());
  double sum = 0.0;
  for (std::size_t i = trained.size() - n; i < trained.size(); ++i) sum += trained[i];
  return sum / static_cast<double>(n);
}

std::vector<CompareRow> cmd_compare(const RunConfig& base, const std::vector<Algo>& algos,
                                    const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("compare: need at least one seed");
  if (algos.empty()) throw std::invalid_argument("compare: need at least one algorithm");
  std::vector<CompareRow> table;
  for (Algo algo : algos) {
    CompareRow row;
    row.algo = algo;
    row.seeds = seeds;
    for (auto seed : seeds) {
      RunConfig cfg = base;
      cfg.algo = algo;
      cfg.seed = seed;
      const auto dir = cmd_train(cfg);
      row.per_seed.push_back(last5_mean(read_metrics(dir / "metrics.csv")));
    }
    double sum = 0.0;
    for (double v : row.per_seed) sum += v;
    row.mean = sum / static_cast<double>(row.per_seed.size());
    double var = 0.0;
    for (double v : row.per_seed) var += (v - row.mean) * (v - row.mean);
    row.std = std::sqrt(var / static_cast<double>(row.per_seed.size()));
    table.push_back(row);
  }
  const fs::path dir(base.out_dir);
  fs::create_directories(dir);
  auto summary = open_csv(dir / "comparison.csv", "algo,env,n_seeds,mean,std");
  auto per_seed = open_csv(dir / "comparison_seeds.csv", "algo,env,seed,last5_test_return_mean");
  for (const auto& row : table) {
    summary << to_string(row.algo) << ',' << base.env << ',' << row.seeds.size() << ','
            << csv::format_double(row.mean) << ',' << csv::format_double(row.std) << "\n";
    for (std::size_t i = 0; i < row.seeds.size(); ++i) {
      per_seed << to_string(row.algo) << ',' << base.env << ',' << row.seeds[i] << ','
               << csv::format_double(row.per_seed[i]) << "\n";
    }
  }
  return table;
}

rollout::EvalResult cmd_eval(const fs::path& run_dir, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("eval: episodes must be >= 1");
  Trainer trainer(load_config(run_dir / "config.json"));
  trainer.restore(read_json(run_dir / "checkpoint_final.json"));
  return rollout::evaluate(trainer.agent(), trainer.env(), episodes, seed);
}

}  // namespace pdalab::cli
