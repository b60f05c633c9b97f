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

#include "pdalab/theorylab/theorylab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdalab/common/random.hpp"

namespace pdalab::theorylab {

using envs::SyntheticFamily;

std::string to_string(ScheduleCase c) {
  switch (c) {
    case ScheduleCase::mu_pos: return "mu_pos";
    case ScheduleCase::mu_zero: return "mu_zero";
    case ScheduleCase::mu_neg: return "mu_neg";
  }
  return "unknown";
}

ScheduleCase parse_schedule_case(const std::string& name) {
  if (name == "mu_pos") return ScheduleCase::mu_pos;
  if (name == "mu_zero") return ScheduleCase::mu_zero;
  if (name == "mu_neg") return ScheduleCase::mu_neg;
  throw std::invalid_argument("unknown schedule case '" + name + "'");
}

double harmonic(int k) {
  double h = 0.0;
  for (int j = 1; j <= k; ++j) h += 1.0 / j;
  return h;
}

double bregman(double x, double y) { return 0.5 * (x - y) * (x - y); }

namespace {

void require_matching_case(const SyntheticInstance& inst, ScheduleCase schedule) {
  const double mu = inst.curvature();
  const bool ok = (schedule == ScheduleCase::mu_pos && mu > 0) ||
                  (schedule == ScheduleCase::mu_zero && mu == 0) ||
                  (schedule == ScheduleCase::mu_neg && mu < 0);
  if (!ok) {
    throw std::invalid_argument("schedule " + to_string(schedule) + " does not match the " +
                                envs::to_string(inst.family) + " instance (curvature " +
                                std::to_string(mu) + ")");
  }
}

double schedule_lambda(ScheduleCase schedule, double mu_d, double base, int k, int horizon) {
  switch (schedule) {
    case ScheduleCase::mu_pos: return mu_d;
    case ScheduleCase::mu_zero: return base * std::pow(k + 1.0, 1.5);
    case ScheduleCase::mu_neg: return static_cast<double>(horizon) * (horizon + 1) * std::abs(mu_d);
  }
  return 0.0;
}

// Minimizer over the box of B c(a) + L a + (lambda/2)(a - pi0)^2, assumed
// convex in a.
double prox_argmin(const SyntheticInstance& inst, double B, double L, double lambda,
                   double pi0) {
  switch (inst.family) {
    case SyntheticFamily::quadratic: {
      const double q = inst.coeff;
      const double a = (2 * B * q * inst.center - L + lambda * pi0) / (2 * B * q + lambda);
      return std::clamp(a, inst.low, inst.high);
    }
    case SyntheticFamily::piecewise_linear: {
      if (!(lambda > 0)) throw std::invalid_argument("piecewise prox needs lambda > 0");
      const double z = pi0 - L / lambda - inst.center;
      const double tau = B * inst.coeff / lambda;
      const double shrunk = std::copysign(std::max(std::abs(z) - tau, 0.0), z);
      return std::clamp(inst.center + shrunk, inst.low, inst.high);
    }
    case SyntheticFamily::cosine: {
      // The derivative is nondecreasing when the objective is convex, so
      // bisect on its sign until the bracket stops shrinking.
      auto slope = [&](double a) {
        return -B * inst.coeff * std::sin(a) + L + lambda * (a - pi0);
      };
      double lo = inst.low;
      double hi = inst.high;
      if (slope(lo) >= 0) return lo;
      if (slope(hi) <= 0) return hi;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (slope(mid) < 0 ? lo : hi) = mid;
      }
      const double f_lo = std::abs(slope(lo));
      const double f_hi = std::abs(slope(hi));
      return f_lo <= f_hi ? lo : hi;
    }
  }
  return inst.low;
}

}  // namespace

ExactTrace run_exact_pda(const SyntheticInstance& instance, ScheduleCase schedule, int K,
                         const ExactPdaOptions& options) {
  instance.validate();
  require_matching_case(instance, schedule);
  if (K < 2) throw std::invalid_argument("run_exact_pda: K must be >= 2");
  if (!(options.eps_inject >= 0)) throw std::invalid_argument("run_exact_pda: eps_inject must be >= 0");
  if (!(options.gamma >= 0 && options.gamma < 1)) throw std::invalid_argument("run_exact_pda: gamma must lie in [0, 1)");
  if (schedule == ScheduleCase::mu_zero && !(options.lambda > 0)) {
    throw std::invalid_argument("run_exact_pda: mu_zero schedule needs lambda > 0");
  }

  ExactTrace tr;
  tr.instance = instance;
  tr.schedule = schedule;
  tr.horizon = K;
  tr.options = options;
  tr.pi0 = 0.5 * (instance.low + instance.high);
  tr.pi_star = instance.minimizer();
  tr.mu_d = instance.curvature();
  const double width = instance.high - instance.low;
  tr.lipschitz_true = instance.lipschitz();
  tr.lipschitz_approx = tr.lipschitz_true + std::abs(options.varsigma_amp) / width;

  const double c_star = instance.min_cost();
  const double horizon_scale = 1.0 / (1.0 - options.gamma);
  double beta_sum = 0.0;
  double linear_sum = 0.0;   // sum_t beta_t * slope_t
  double weighted = 0.0;     // sum_{t<k} (t+1)(c(pi_hat_t) - c*)
  double pi = tr.pi0;
  double pi_hat = tr.pi0;
  double eps_opt = 0.0;
  tr.records.reserve(K + 1);
  for (int k = 0; k <= K; ++k) {
    ExactRecord r;
    r.k = k;
    r.beta = k + 1.0;
    beta_sum += r.beta;
    r.beta_sum = beta_sum;
    r.lambda = schedule_lambda(schedule, tr.mu_d, options.lambda, k, K);
    r.mu_tilde = tr.mu_d * beta_sum + r.lambda;
    r.slope = (k % 2 == 0 ? 1.0 : -1.0) * options.varsigma_amp / width;
    r.pi = pi;
    r.pi_hat = pi_hat;
    r.eps_opt = eps_opt;
    const double gap = instance.cost(pi_hat) - c_star;
    r.value_gap = gap * horizon_scale;
    r.weighted_gap = k == 0 ? 0.0 : 2.0 * weighted / (static_cast<double>(k) * (k + 1));
    r.bregman_to_opt = bregman(pi, tr.pi_star);
    tr.records.push_back(r);
    if (k == K) break;

    tr.varsigma = std::max(tr.varsigma, std::abs(r.slope * (pi - tr.pi_star)));
    weighted += (k + 1.0) * gap;
    linear_sum += r.beta * r.slope;
    if (r.mu_tilde < 0) throw std::logic_error("run_exact_pda: cumulative objective is not convex");

    auto phi = [&](double a) {
      return beta_sum * instance.cost(a) + linear_sum * a + r.lambda * bregman(a, tr.pi0);
    };
    pi = prox_argmin(instance, beta_sum, linear_sum, r.lambda, tr.pi0);
    pi_hat = pi;
    eps_opt = 0.0;
    if (options.eps_inject > 0) {
      // Walk away from pi* until the objective gap reaches eps_inject, or the
      // box edge if the gap stays below it.
      double dir = pi >= tr.pi_star ? 1.0 : -1.0;
      if ((dir > 0 ? instance.high : instance.low) == pi) dir = -dir;
      const double edge = dir > 0 ? instance.high : instance.low;
      const double base = phi(pi);
      if (phi(edge) - base <= options.eps_inject) {
        pi_hat = edge;
      } else {
        double lo = 0.0;
        double hi = std::abs(edge - pi);
        for (int i = 0; i < 200; ++i) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          (phi(pi + dir * mid) - base <= options.eps_inject ? lo : hi) = mid;
        }
        pi_hat = pi + dir * lo;
      }
      eps_opt = std::max(phi(pi_hat) - base, 0.0);
    }
  }
  return tr;
}

double cumulative_objective(const ExactTrace& trace, int k, double a) {
  if (k < 0 || k >= trace.horizon) throw std::out_of_range("cumulative_objective: k out of range");
  const auto& inst = trace.instance;
  double total = 0.0;
  for (int t = 0; t <= k; ++t) {
    const auto& r = trace.records[t];
    const double psi = inst.cost(a) - inst.cost(r.pi_hat) + r.slope * (a - trace.pi_star);
    total += r.beta * psi;
  }
  return total + trace.records[k].lambda * bregman(trace.pi0, a);
}

double check_lemma1(const ExactTrace& trace, int k, int trials, std::uint64_t seed) {
  if (k < 0 || k + 1 > trace.horizon) throw std::out_of_range("check_lemma1: k out of range");
  const auto& rec = trace.records[k];
  const auto& next = trace.records[k + 1];
  const double lhs_base = cumulative_objective(trace, k, next.pi_hat) - next.eps_opt;
  auto violation = [&](double a) {
    return lhs_base + rec.mu_tilde * bregman(next.pi, a) - cumulative_objective(trace, k, a);
  };
  double worst = violation(next.pi);
  Rng rng(seed);
  for (int i = 0; i < trials; ++i) {
    worst = std::max(worst, violation(uniform(rng, trace.instance.low, trace.instance.high)));
  }
  return worst;
}

double theorem1_rhs(const ExactTrace& trace, int k, double eps, double varsigma) {
  if (k < 1) throw std::invalid_argument("theorem1_rhs: k must be >= 1");
  const double M = trace.lipschitz_approx;
  const double d0 = bregman(trace.pi0, trace.pi_star);
  const double kk = k;
  switch (trace.schedule) {
    case ScheduleCase::mu_pos: {
      const double mu = trace.mu_d;
      return 2 * mu * d0 / (kk * kk) + 4 * M * M / (mu * kk) + varsigma + 2 * eps / kk +
             4 * M * std::sqrt(2 * eps) / (std::sqrt(mu) * kk);
    }
    case ScheduleCase::mu_zero: {
      const double lam = trace.options.lambda;
      return 2 * lam * d0 / std::sqrt(kk) + 8 * M * M / (lam * std::sqrt(kk)) + varsigma +
             2 * eps / kk + 8 * M * std::sqrt(2 * eps) / (std::sqrt(lam) * std::pow(kk, 0.75));
    }
    case ScheduleCase::mu_neg: break;
  }
  throw std::invalid_argument("theorem1_rhs: the convex-case bound needs mu_pos or mu_zero");
}

std::vector<BoundRow> check_theorem1(const ExactTrace& trace) {
  if (trace.schedule == ScheduleCase::mu_neg) {
    throw std::invalid_argument("check_theorem1: mu_neg traces are checked by check_theorem2");
  }
  std::vector<BoundRow> rows;
  for (int k = 1; k <= trace.horizon; ++k) {
    const auto& r = trace.records[k];
    BoundRow row;
    row.k = k;
    row.lhs = r.weighted_gap;
    if (trace.schedule == ScheduleCase::mu_pos) row.lhs += trace.mu_d * r.bregman_to_opt;
    row.rhs = theorem1_rhs(trace, k, trace.options.eps_inject, trace.varsigma);
    rows.push_back(row);
  }
  return rows;
}

Theorem2Result check_theorem2(const ExactTrace& trace) {
  if (trace.schedule != ScheduleCase::mu_neg) {
    throw std::invalid_argument("check_theorem2: needs a mu_neg trace");
  }
  const auto& inst = trace.instance;
  const int K = trace.horizon;
  const double mu_abs = std::abs(trace.mu_d);
  const double mm = trace.lipschitz_true + trace.lipschitz_approx;
  const double eps = trace.options.eps_inject;
  const double one_minus_gamma = 1.0 - trace.options.gamma;
  const double d_max = bregman(inst.low, inst.high);

  Theorem2Result res;
  res.horizon = K;
  double best = std::numeric_limits<double>::infinity();
  double prev_lambda = 0.0;
  double prev_mu = 0.0;
  for (int t = 0; t < K; ++t) {
    const auto& r = trace.records[t];
    const double neg_psi = inst.cost(r.pi_hat) - inst.cost(trace.records[t + 1].pi_hat);
    const double C = (r.lambda - prev_lambda) / r.beta * d_max +
                     r.beta * mm * mm / (r.mu_tilde + prev_mu);
    const double E = 4 * eps / r.beta;
    const double weighted = r.beta * (neg_psi + C + E);
    if (weighted < best) {
      best = weighted;
      res.k_bar = t;
      res.neg_psi = neg_psi;
    }
    prev_lambda = r.lambda;
    prev_mu = r.mu_tilde;
  }
  const double kp1 = K + 1.0;
  const double v_gap0 = (inst.cost(trace.pi0) - inst.min_cost()) / one_minus_gamma;
  res.lower = -mm * mm / (mu_abs * kp1);
  res.upper = 2 * v_gap0 / kp1 + 3 * mm * mm / (one_minus_gamma * mu_abs * kp1) +
              4 * eps * (harmonic(K) + 1) / (one_minus_gamma * kp1);
  return res;
}

void to_json(nlohmann::json& j, const CheckEntry& e) {
  j = {{"instance", e.instance}, {"schedule_case", to_string(e.schedule)}, {"check", e.check},
       {"K", e.K}, {"max_violation", e.max_violation}, {"passed", e.passed}, {"runs", e.runs}};
}

std::string TheoryCase::id() const {
  return envs::to_string(instance.family) + ":" + to_string(schedule);
}

TheoryCase parse_case(const std::string& id) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("theory case '" + id + "' must look like family:schedule");
  }
  TheoryCase tc;
  tc.instance = SyntheticInstance::make(envs::parse_family(id.substr(0, colon)));
  tc.schedule = parse_schedule_case(id.substr(colon + 1));
  require_matching_case(tc.instance, tc.schedule);
  return tc;
}

std::vector<std::string> default_case_ids() {
  return {"quadratic:mu_pos", "piecewise:mu_zero", "cosine:mu_neg"};
}

namespace {

CheckEntry make_entry(const TheoryCase& tc, const std::string& check, int K) {
  CheckEntry e;
  e.instance = envs::to_string(tc.instance.family);
  e.schedule = tc.schedule;
  e.check = check;
  e.K = K;
  e.max_violation = -std::numeric_limits<double>::infinity();
  return e;
}

}  // namespace

std::vector<CheckEntry> run_case(const TheoryCase& tc, const TheorySettings& settings) {
  if (settings.K < 2) throw std::invalid_argument("run_case: K must be >= 2");
  std::vector<CheckEntry> out;

  auto options_for = [&](double eps) {
    ExactPdaOptions o;
    o.eps_inject = eps;
    o.lambda = settings.lambda;
    return o;
  };

  CheckEntry lemma = make_entry(tc, "lemma1", settings.K);
  for (double eps : settings.eps_values) {
    const auto trace = run_exact_pda(tc.instance, tc.schedule, settings.K, options_for(eps));
    nlohmann::json per_k = nlohmann::json::array();
    double worst = -std::numeric_limits<double>::infinity();
    for (int k : settings.lemma_ks) {
      const double v = check_lemma1(trace, k, settings.lemma_trials,
                                    mix_seed(settings.seed, static_cast<std::uint64_t>(k)));
      worst = std::max(worst, v);
      per_k.push_back({{"k", k}, {"max_violation", v}});
    }
    lemma.max_violation = std::max(lemma.max_violation, worst);
    lemma.runs.push_back({{"eps", eps}, {"max_violation", worst}, {"margins", per_k}});
  }
  lemma.passed = lemma.max_violation <= settings.tolerance;
  out.push_back(lemma);

  if (tc.schedule != ScheduleCase::mu_neg) {
    CheckEntry thm = make_entry(tc, "theorem1", settings.K);
    bool trend_ok = true;
    for (double eps : settings.eps_values) {
      const auto trace = run_exact_pda(tc.instance, tc.schedule, settings.K, options_for(eps));
      const auto rows = check_theorem1(trace);
      double worst = -std::numeric_limits<double>::infinity();
      std::vector<double> margins;
      for (const auto& row : rows) {
        worst = std::max(worst, -row.margin());
        margins.push_back(row.margin());
      }
      nlohmann::json run = {{"eps", eps}, {"max_violation", worst}, {"margins", margins}};
      if (settings.K >= 10) {
        const double ratio = trace.records[settings.K].weighted_gap / trace.records[10].weighted_gap;
        run["gap_ratio_K_over_10"] = ratio;
        trend_ok = trend_ok && ratio < 1.0;
      }
      thm.max_violation = std::max(thm.max_violation, worst);
      thm.runs.push_back(run);
    }
    thm.passed = thm.max_violation <= settings.tolerance && trend_ok;
    out.push_back(thm);
  } else {
    CheckEntry thm = make_entry(tc, "theorem2", settings.K);
    for (double eps : settings.eps_values) {
      double worst = -std::numeric_limits<double>::infinity();
      nlohmann::json per_h = nlohmann::json::array();
      for (int h = 2; h <= settings.K; ++h) {
        const auto res = check_theorem2(run_exact_pda(tc.instance, tc.schedule, h, options_for(eps)));
        worst = std::max({worst, -res.lower_margin(), -res.upper_margin()});
        per_h.push_back({{"k", h}, {"k_bar", res.k_bar}, {"lower_margin", res.lower_margin()},
                         {"upper_margin", res.upper_margin()}});
      }
      thm.max_violation = std::max(thm.max_violation, worst);
      thm.runs.push_back({{"eps", eps}, {"max_violation", worst}, {"margins", per_h}});
    }
    thm.passed = thm.max_violation <= settings.tolerance;
    out.push_back(thm);
  }
  return out;
}

}  // namespace pdalab::theorylab
