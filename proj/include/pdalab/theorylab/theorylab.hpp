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

#ifndef PDALAB_THEORYLAB_THEORYLAB_HPP_
#define PDALAB_THEORYLAB_THEORYLAB_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdalab/envs/synthetic.hpp"

namespace pdalab::theorylab {

using envs::SyntheticInstance;

// Step-size families for exact PDA with beta_t = t + 1.
//   mu_pos:  lambda_k = mu_d                   (requires mu_d > 0)
//   mu_zero: lambda_k = lambda * (k + 1)^1.5   (requires mu_d = 0)
//   mu_neg:  lambda_k = K (K + 1) |mu_d|       (requires mu_d < 0, K = horizon)
enum class ScheduleCase { mu_pos, mu_zero, mu_neg };

std::string to_string(ScheduleCase c);
ScheduleCase parse_schedule_case(const std::string& name);

struct ExactPdaOptions {
  double eps_inject = 0.0;   // per-step suboptimality given to the returned policy
  double lambda = 0.5;       // base weight of the mu_zero schedule
  double gamma = 0.99;
  // Amplitude of an additive evaluation error (-1)^t * amp * (a - a*) / width
  // added to every advantage estimate; zero gives exact evaluation.
  double varsigma_amp = 0.0;
};

// Schedule and iterates at step k. Beta, lambda and mu_tilde describe the
// cumulative objective Psi_k whose minimizer is pi_{k+1}.
struct ExactRecord {
  int k = 0;
  double beta = 0.0;
  double beta_sum = 0.0;     // sum_{t <= k} beta_t
  double lambda = 0.0;
  double mu_tilde = 0.0;     // mu_d * beta_sum + lambda
  double pi = 0.0;           // exact minimizer pi_k
  double pi_hat = 0.0;       // returned policy pi_hat_k
  double eps_opt = 0.0;      // Psi_{k-1}(pi_hat_k) - Psi_{k-1}(pi_k)
  double value_gap = 0.0;    // V(pi_hat_k) - V*
  double weighted_gap = 0.0; // 2/(k(k+1)) sum_{t<k} (t+1)(1-gamma)(V(pi_hat_t) - V*)
  double bregman_to_opt = 0.0;  // D(pi_k, pi*)
  double slope = 0.0;        // slope of the evaluation error added at step k
};

// Exact PDA on a single-state instance. records[k] holds k = 0..K.
struct ExactTrace {
  SyntheticInstance instance;
  ScheduleCase schedule = ScheduleCase::mu_pos;
  int horizon = 0;
  ExactPdaOptions options;
  double pi0 = 0.0;
  double pi_star = 0.0;
  double mu_d = 0.0;
  double lipschitz_true = 0.0;    // M_Q
  double lipschitz_approx = 0.0;  // M_Q~, including the evaluation error
  double varsigma = 0.0;          // max_t |delta_t(pi_t)| + |delta_t(pi*)|
  std::vector<ExactRecord> records;
};

// Harmonic number sum_{j=1..k} 1/j.
double harmonic(int k);

// D(x, y) = (x - y)^2 / 2.
double bregman(double x, double y);

// Runs K >= 2 iterations. Throws std::invalid_argument when the schedule case
// does not match the sign of the instance curvature.
ExactTrace run_exact_pda(const SyntheticInstance& instance, ScheduleCase schedule, int K,
                         const ExactPdaOptions& options = {});

// Psi_k(a) = sum_{t<=k} beta_t psi~_t(a) + lambda_k D(pi0, a) for k < K.
double cumulative_objective(const ExactTrace& trace, int k, double a);

// Largest value of LHS - RHS of the three-point inequality
//   Psi_k(pi_hat_{k+1}) - eps_k + mu_k D(pi_{k+1}, a) <= Psi_k(a)
// over a = pi_{k+1} and `trials` uniform actions in the box.
double check_lemma1(const ExactTrace& trace, int k, int trials, std::uint64_t seed);

struct BoundRow {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const { return rhs - lhs; }
};

// Right-hand side of the convex-case rate at iteration k.
double theorem1_rhs(const ExactTrace& trace, int k, double eps, double varsigma);

// One row per k = 1..K. Throws std::invalid_argument for mu_neg traces.
std::vector<BoundRow> check_theorem1(const ExactTrace& trace);

struct Theorem2Result {
  int horizon = 0;
  int k_bar = 0;
  double neg_psi = 0.0;      // c(pi_hat_kbar) - c(pi_hat_kbar+1)
  double lower = 0.0;
  double upper = 0.0;
  double lower_margin() const { return neg_psi - lower; }
  double upper_margin() const { return upper - neg_psi; }
};

// Locates kbar minimizing beta_t [-psi_t + C_t + E_t] over t < K and
// evaluates both sides of the nonconvex-case bound there. Throws
// std::invalid_argument unless the trace uses the mu_neg schedule.
Theorem2Result check_theorem2(const ExactTrace& trace);

// Report entry for one (case, check) pair. `runs` lists one object per
// injected eps with its max violation and margins.
struct CheckEntry {
  std::string instance;
  ScheduleCase schedule = ScheduleCase::mu_pos;
  std::string check;
  int K = 0;
  double max_violation = 0.0;
  bool passed = false;
  nlohmann::json runs = nlohmann::json::array();
};

void to_json(nlohmann::json& j, const CheckEntry& e);

// Parses "family:schedule", e.g. "quadratic:mu_pos". Throws
// std::invalid_argument for unknown ids and mismatched schedules.
struct TheoryCase {
  SyntheticInstance instance;
  ScheduleCase schedule = ScheduleCase::mu_pos;
  std::string id() const;
};
TheoryCase parse_case(const std::string& id);
std::vector<std::string> default_case_ids();

struct TheorySettings {
  int K = 200;
  std::vector<double> eps_values{0.0, 1e-3};
  std::vector<int> lemma_ks{1, 5, 20};
  int lemma_trials = 1000;
  double lambda = 0.5;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
};

// Lemma 1 plus the theorem matching the schedule. Theorem 2 is evaluated for
// every horizon 2..K.
std::vector<CheckEntry> run_case(const TheoryCase& tc, const TheorySettings& settings);

}  // namespace pdalab::theorylab

#endif  // PDALAB_THEORYLAB_THEORYLAB_HPP_
