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

#include "pdalab/subsolver/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pdalab/common/csv.hpp"
#include "pdalab/rollout/rollout.hpp"

namespace pdalab::subsolver {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

class Evaluator {
 public:
  explicit Evaluator(const SubProblem& problem) : problem_(problem) {}

  double operator()(const std::vector<double>& x) {
    const double v = problem_.objective(x);
    if (!std::isfinite(v)) throw std::domain_error("exact_argmin: objective is not finite on the box");
    if (v < best_value_) {
      best_value_ = v;
      best_ = x;
    }
    return v;
  }

  const std::vector<double>& best() const { return best_; }
  double best_value() const { return best_value_; }

 private:
  const SubProblem& problem_;
  std::vector<double> best_;
  double best_value_ = std::numeric_limits<double>::infinity();
};

// Golden-section search along coordinate j of x within [lo, hi]; every
// evaluation feeds the evaluator's running best. Returns the final bracket
// half-width.
double golden(Evaluator& eval, std::vector<double> x, std::size_t j, double lo, double hi,
              int iters) {
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  x[j] = c;
  double fc = eval(x);
  x[j] = d;
  double fd = eval(x);
  for (int i = 0; i < iters; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      x[j] = c;
      fc = eval(x);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      x[j] = d;
      fd = eval(x);
    }
  }
  x[j] = 0.5 * (a + b);
  eval(x);
  return 0.5 * (b - a);
}

}  // namespace

ArgminResult exact_argmin(const SubProblem& problem, int grid_n, int refine_iters,
                          const std::vector<std::vector<double>>& seeds) {
  const std::size_t d = problem.low.size();
  if (d == 0 || d > 2 || problem.high.size() != d) {
    throw std::invalid_argument("exact_argmin: supports 1 or 2 action dimensions");
  }
  if (grid_n < 3) throw std::invalid_argument("exact_argmin: grid_n must be >= 3");
  if (refine_iters < 0) throw std::invalid_argument("exact_argmin: refine_iters must be >= 0");
  for (std::size_t j = 0; j < d; ++j) {
    if (!(problem.low[j] < problem.high[j])) throw std::invalid_argument("exact_argmin: empty box");
  }

  Evaluator eval(problem);
  std::vector<double> h(d);
  for (std::size_t j = 0; j < d; ++j) h[j] = (problem.high[j] - problem.low[j]) / (grid_n - 1);
  auto grid_point = [&](std::size_t j, int i) {
    return i == grid_n - 1 ? problem.high[j] : problem.low[j] + i * h[j];
  };

  std::vector<double> x(d);
  if (d == 1) {
    for (int i = 0; i < grid_n; ++i) {
      x[0] = grid_point(0, i);
      eval(x);
    }
  } else {
    for (int i = 0; i < grid_n; ++i) {
      x[0] = grid_point(0, i);
      for (int k = 0; k < grid_n; ++k) {
        x[1] = grid_point(1, k);
        eval(x);
      }
    }
  }
  for (const auto& s : seeds) {
    if (s.size() != d) throw std::invalid_argument("exact_argmin: seed has wrong dimension");
    std::vector<double> p(d);
    for (std::size_t j = 0; j < d; ++j) p[j] = std::clamp(s[j], problem.low[j], problem.high[j]);
    eval(p);
  }

  const std::vector<double> start = eval.best();
  const double start_value = eval.best_value();

  // Local slope at the starting point, for the value tolerance.
  double slope = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    for (double dir : {-1.0, 1.0}) {
      auto nb = start;
      nb[j] = std::clamp(start[j] + dir * h[j], problem.low[j], problem.high[j]);
      if (nb[j] == start[j]) continue;
      const double v = problem.objective(nb);
      if (!std::isfinite(v)) throw std::domain_error("exact_argmin: objective is not finite on the box");
      slope = std::max(slope, std::abs(v - start_value) / std::abs(nb[j] - start[j]));
    }
  }

  double tol = 0.0;
  if (d == 1) {
    const double lo = std::max(problem.low[0], start[0] - h[0]);
    const double hi = std::min(problem.high[0], start[0] + h[0]);
    tol = refine_iters > 0 ? golden(eval, start, 0, lo, hi, refine_iters) : h[0];
  } else {
    std::vector<double> window = h;
    tol = h[0];
    for (int round = 0; round < refine_iters; ++round) {
      for (std::size_t j = 0; j < 2; ++j) {
        auto center = eval.best();
        const double lo = std::max(problem.low[j], center[j] - window[j]);
        const double hi = std::min(problem.high[j], center[j] + window[j]);
        golden(eval, center, j, lo, hi, 20);
        window[j] *= 0.5;
      }
      tol = std::max(window[0], window[1]);
    }
  }

  ArgminResult out;
  out.action = eval.best();
  out.value = eval.best_value();
  out.action_tol = tol;
  out.value_tol = slope * tol;
  return out;
}

StateProblem pda_state_problem(const pda::PdaAgent& agent) {
  StateProblem p;
  p.obs_dim = agent.obs_dim();
  p.act_dim = agent.act_dim();
  p.psi = [&agent](std::span<const double> obs, std::span<const double> a) {
    return agent.psi_sum(obs, a, 1)[0];
  };
  p.objective = [&agent](std::span<const double> obs, std::span<const double> a) {
    return agent.subproblem_objective(obs, a);
  };
  p.actor = [&agent](std::span<const double> obs) { return agent.actor_mean(obs, 1); };
  return p;
}

namespace {

SubProblem bind_state(const StateProblem& problem, std::span<const double> obs) {
  SubProblem sub;
  sub.low.assign(problem.act_dim, -1.0);
  sub.high.assign(problem.act_dim, 1.0);
  sub.objective = [&problem, obs](std::span<const double> a) { return problem.objective(obs, a); };
  return sub;
}

std::size_t state_count(const StateProblem& problem, std::span<const double> states) {
  if (problem.obs_dim == 0 || states.empty() || states.size() % problem.obs_dim != 0) {
    throw std::invalid_argument("subsolver: state grid must be a nonempty multiple of obs_dim");
  }
  return states.size() / problem.obs_dim;
}

}  // namespace

TrackingResult tracking_mae(const StateProblem& problem, std::span<const double> states,
                            const envs::EnvSpec& spec, const SolverSettings& settings) {
  const std::size_t n = state_count(problem, states);
  if (spec.act_dim != problem.act_dim) throw std::invalid_argument("tracking_mae: action dimension mismatch");
  TrackingResult out;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto obs = states.subspan(i * problem.obs_dim, problem.obs_dim);
    auto actor = problem.actor(obs);
    auto res = exact_argmin(bind_state(problem, obs), settings.grid_n, settings.refine_iters, {actor});
    auto actor_env = rollout::to_env_action(actor, spec);
    auto argmin_env = rollout::to_env_action(res.action, spec);
    for (std::size_t j = 0; j < problem.act_dim; ++j) total += std::abs(actor_env[j] - argmin_env[j]);
    out.max_action_tol = std::max(out.max_action_tol, res.action_tol);
  }
  out.mae = total / static_cast<double>(n * problem.act_dim);
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  out.back() = hi;
  return out;
}

std::vector<double> pendulum_state_grid(std::span<const double> thetas,
                                        std::span<const double> theta_dots) {
  std::vector<double> out;
  for (double td : theta_dots) {
    for (double th : thetas) {
      out.push_back(std::cos(th));
      out.push_back(std::sin(th));
      out.push_back(td);
    }
  }
  return out;
}

std::vector<LandscapeRow> landscape_dump(const StateProblem& problem, const envs::EnvSpec& spec,
                                         std::span<const double> thetas,
                                         std::span<const double> taus, double theta_dot,
                                         const SolverSettings& settings) {
  if (problem.obs_dim != 3 || problem.act_dim != 1 || spec.act_dim != 1) {
    throw std::invalid_argument("landscape_dump: expects the pendulum (obs 3, action 1)");
  }
  std::vector<std::vector<double>> tau_agent;
  for (double tau : taus) tau_agent.push_back(rollout::to_agent_action(std::vector<double>{tau}, spec));
  std::vector<LandscapeRow> rows;
  rows.reserve(thetas.size() * taus.size());
  for (double theta : thetas) {
    const std::vector<double> obs{std::cos(theta), std::sin(theta), theta_dot};
    auto actor = problem.actor(obs);
    auto seeds = tau_agent;
    seeds.push_back(actor);
    auto res = exact_argmin(bind_state(problem, obs), settings.grid_n, settings.refine_iters, seeds);
    const double argmin_tau = rollout::to_env_action(res.action, spec)[0];
    const double actor_tau = rollout::to_env_action(actor, spec)[0];
    for (std::size_t i = 0; i < taus.size(); ++i) {
      rows.push_back({theta, taus[i], problem.objective(obs, tau_agent[i]), argmin_tau, actor_tau});
    }
  }
  return rows;
}

void write_landscape_csv(const std::string& path, const std::vector<LandscapeRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "theta,tau,psi_prime,argmin_tau,actor_tau\n";
  for (const auto& r : rows) {
    out << csv::format_double(r.theta) << ',' << csv::format_double(r.tau) << ','
        << csv::format_double(r.psi_prime) << ',' << csv::format_double(r.argmin_tau) << ','
        << csv::format_double(r.actor_tau) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

AssumptionReport measure_assumptions(const StateProblem& problem, std::span<const double> states,
                                     const SolverSettings& settings) {
  const std::size_t n = state_count(problem, states);
  AssumptionReport rep;
  rep.states = n;
  rep.eps_opt_min = std::numeric_limits<double>::infinity();
  rep.eps_opt_max = -std::numeric_limits<double>::infinity();
  rep.curvature = std::numeric_limits<double>::infinity();
  const auto axis = linspace(-1.0, 1.0, static_cast<std::size_t>(settings.grid_n));
  const double h = axis[1] - axis[0];
  double eps_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto obs = states.subspan(i * problem.obs_dim, problem.obs_dim);
    auto actor = problem.actor(obs);
    auto res = exact_argmin(bind_state(problem, obs), settings.grid_n, settings.refine_iters, {actor});
    const double eps = problem.objective(obs, actor) - res.value;
    rep.eps_opt_min = std::min(rep.eps_opt_min, eps);
    rep.eps_opt_max = std::max(rep.eps_opt_max, eps);
    eps_total += eps;
    rep.solver_tol = std::max(rep.solver_tol, res.value_tol);

    for (std::size_t j = 0; j < problem.act_dim; ++j) {
      std::vector<double> a(problem.act_dim, 0.0);
      std::vector<double> line(axis.size());
      for (std::size_t g = 0; g < axis.size(); ++g) {
        a[j] = axis[g];
        line[g] = problem.psi(obs, a);
      }
      for (std::size_t g = 0; g + 1 < line.size(); ++g) {
        rep.lipschitz = std::max(rep.lipschitz, std::abs(line[g + 1] - line[g]) / h);
      }
      for (std::size_t g = 1; g + 1 < line.size(); ++g) {
        rep.curvature = std::min(rep.curvature, (line[g + 1] - 2 * line[g] + line[g - 1]) / (h * h));
      }
    }
  }
  rep.eps_opt_mean = eps_total / static_cast<double>(n);
  return rep;
}

}  // namespace pdalab::subsolver
