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

#ifndef PDALAB_CLI_RUN_HPP_
#define PDALAB_CLI_RUN_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdalab/common/metrics.hpp"
#include "pdalab/envs/env.hpp"
#include "pdalab/pda/pda.hpp"
#include "pdalab/ppo/ppo.hpp"
#include "pdalab/rollout/rollout.hpp"
#include "pdalab/subsolver/subsolver.hpp"
#include "pdalab/theorylab/theorylab.hpp"

namespace pdalab::cli {

namespace fs = std::filesystem;

enum class Algo { pda, ppo };
std::string to_string(Algo algo);
Algo parse_algo(const std::string& name);

// Everything a run needs. config.json written into the run directory holds
// every effective value, so a run is reproducible from that file alone.
struct RunConfig {
  Algo algo = Algo::pda;
  std::string env = "pendulum";
  std::uint64_t seed = 0;
  int iterations = 50;
  std::size_t steps_per_collect = 2048;
  std::size_t n_envs = 1;
  int eval_episodes = 10;
  std::uint64_t eval_seed = 12345;
  int checkpoint_every = 10;  // 0 keeps only the final checkpoint
  std::string out_dir = "runs";
  pda::PdaConfig pda;
  ppo::PpoConfig ppo;

  void validate() const;
  // <out_dir>/<algo>-<env>-s<seed>, with ':' in the env id replaced by '_'.
  fs::path run_dir() const;
};

nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys throw std::invalid_argument.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const fs::path& path);
bool operator==(const RunConfig& a, const RunConfig& b);

// Output root: PDA_LAB_OUT when set, else "runs".
std::string default_out_root();

inline constexpr const char* kMetricsHeader =
    "iter,env_steps,beta,sigma,value_loss,psi_loss,actor_loss,train_return_mean,"
    "test_return_mean,test_return_std";

struct MetricsRow {
  IterationStats stats;
  double test_return_mean = 0.0;
  double test_return_std = 0.0;
};

std::string format_metrics_row(const MetricsRow& row);
std::vector<MetricsRow> read_metrics(const fs::path& path);

// Agent, environment prototype and collector of one run.
class Trainer {
 public:
  explicit Trainer(const RunConfig& config);

  // Row 0: the untrained policy, with NaN losses and no environment steps.
  MetricsRow baseline() const;
  // One training iteration followed by the deterministic test evaluation.
  MetricsRow step();

  const rollout::Agent& agent() const;
  pda::PdaAgent* pda_agent() { return pda_.get(); }
  const envs::Env& env() const { return *env_; }
  const RunConfig& config() const { return config_; }
  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& j);

 private:
  rollout::EvalResult test() const;

  RunConfig config_;
  std::unique_ptr<envs::Env> env_;
  std::unique_ptr<pda::PdaAgent> pda_;
  std::unique_ptr<ppo::PpoAgent> ppo_;
  std::unique_ptr<rollout::Collector> collector_;
};

// Trains for config.iterations and writes config.json, metrics.csv and
// checkpoints into config.run_dir(). Returns the run directory.
fs::path cmd_train(const RunConfig& config);

struct TrackOptions {
  std::vector<int> dump_epochs{5, 8, 11};
  std::size_t theta_points = 41;
  std::vector<double> theta_dots{-1.0, 0.0, 1.0};
  std::size_t tau_points = 41;
  double landscape_theta_dot = 0.2;
  subsolver::SolverSettings solver;
};

struct TrackEpoch {
  int epoch = 0;
  double mae = 0.0;
  double max_action_tol = 0.0;
  double test_return_mean = 0.0;
};

// PDA on pendulum, recording the actor's tracking error after every epoch
// and the sub-problem landscape at the requested epochs. Writes tracking.csv
// and landscape_epoch<N>.csv next to the usual train outputs.
std::vector<TrackEpoch> cmd_track(const RunConfig& config, const TrackOptions& options);

struct TheoryOutcome {
  std::vector<theorylab::CheckEntry> entries;
  bool all_passed = false;
};

// Runs every case and writes theory-report.json into out_dir.
TheoryOutcome cmd_theory(const std::vector<std::string>& case_ids,
                         const theorylab::TheorySettings& settings, const fs::path& out_dir);

struct CompareRow {
  Algo algo = Algo::pda;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed;  // mean test return of the last 5 epochs
  double mean = 0.0;
  double std = 0.0;              // population, across seeds
};

// Mean test_return_mean over the final min(5, n) training epochs.
double last5_mean(const std::vector<MetricsRow>& rows);

// Trains every (algo, seed) pair from `base` and writes comparison.csv and
// comparison_seeds.csv into base.out_dir.
std::vector<CompareRow> cmd_compare(const RunConfig& base, const std::vector<Algo>& algos,
                                    const std::vector<std::uint64_t>& seeds);

// Restores the final checkpoint of a run and evaluates it.
rollout::EvalResult cmd_eval(const fs::path& run_dir, int episodes, std::uint64_t seed);

}  // namespace pdalab::cli

#endif  // PDALAB_CLI_RUN_HPP_
