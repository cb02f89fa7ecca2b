#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qtruss/encoding.hpp"
#include "qtruss/errors.hpp"
#include "qtruss/quadratic_form.hpp"
#include "qtruss/samplers.hpp"

namespace qtruss {

/// Sequential-programming driver settings. Vector fields accept a single
/// entry broadcast over all variables. Empty box vectors mean unbounded steps.
struct SpConfig {
  int bits_per_var = 2;
  Eigen::VectorXd epsilon0;      ///< initial grid spacing, > 0
  double xi = 0.5;               ///< grid shrink factor on failed iterations
  Eigen::VectorXd box_min;       ///< per-iteration step box, <= 0
  Eigen::VectorXd box_max;       ///< per-iteration step box, >= 0
  int n_steps = 200;             ///< cap on successful iterations
  int n_failed = 10;             ///< cap on consecutive failed iterations
  double epsilon_min = 1e-14;    ///< absolute floor for the grid spacing
};

/// Minimisation problem fed to the driver: an exact evaluator, a quadratic
/// model builder, and variable bounds (+-inf allowed, broadcastable).
struct SpProblem {
  int n_vars = 0;
  std::function<double(const Eigen::VectorXd&)> evaluate;
  std::function<QuadraticForm(const Eigen::VectorXd&)> model_at;
  Eigen::VectorXd x_min;
  Eigen::VectorXd x_max;
};

enum class StopReason { n_steps, n_failed, converged };

inline const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::n_steps: return "n_steps";
    case StopReason::n_failed: return "n_failed";
    case StopReason::converged: return "converged";
  }
  return "unknown";
}

struct SpIteration {
  int index = 0;           ///< global iteration counter (accepted and failed)
  double f = 0.0;          ///< objective after this iteration
  double epsilon_inf = 0.0;///< max component of the persistent grid spacing
  bool accepted = false;
  double sampler_energy = 0.0;  ///< best QUBO energy returned (offset excluded)
};

struct SpResult {
  Eigen::VectorXd x_final;
  double f_final = 0.0;
  std::vector<SpIteration> iterations;
  StopReason stop_reason = StopReason::n_failed;
};

/// Step bounds for the current iterate: box intersected with the distance to
/// the variable bounds, so every decoded step keeps x feasible.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> clip_bounds(const Eigen::VectorXd& x,
                                                               const Eigen::VectorXd& x_min,
                                                               const Eigen::VectorXd& x_max,
                                                               const Eigen::VectorXd& box_min,
                                                               const Eigen::VectorXd& box_max) {
  const Eigen::Index n = x.size();
  if (x_min.size() != n || x_max.size() != n || box_min.size() != n || box_max.size() != n) {
    throw Error("clip_bounds: size mismatch");
  }
  Eigen::VectorXd lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lo[i] = std::max(x_min[i] - x[i], box_min[i]);
    hi[i] = std::min(x_max[i] - x[i], box_max[i]);
  }
  return {std::move(lo), std::move(hi)};
}

/// Intersect the discretisation range with the step bounds. A range lying
/// entirely outside collapses onto the nearer bound endpoint (frozen variable).
inline void clip_range(Eigen::VectorXd& d_min, Eigen::VectorXd& d_max,
                       const Eigen::VectorXd& delta_min, const Eigen::VectorXd& delta_max) {
  const Eigen::Index n = d_min.size();
  if (d_max.size() != n || delta_min.size() != n || delta_max.size() != n) {
    throw Error("clip_range: size mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = std::max(d_min[i], delta_min[i]);
    const double hi = std::min(d_max[i], delta_max[i]);
    if (lo <= hi) {
      d_min[i] = lo;
      d_max[i] = hi;
    } else if (d_min[i] > delta_max[i]) {
      d_min[i] = d_max[i] = delta_max[i];
    } else {
      d_min[i] = d_max[i] = delta_min[i];
    }
  }
}

namespace detail {

inline Eigen::VectorXd broadcast(const Eigen::VectorXd& v, Eigen::Index n, double fallback,
                                 const char* name) {
  if (v.size() == 0) return Eigen::VectorXd::Constant(n, fallback);
  if (v.size() == 1) return Eigen::VectorXd::Constant(n, v[0]);
  if (v.size() == n) return v;
  throw Error(std::string(name) + ": expected 1 or n entries");
}

}  // namespace detail

/// Iterative minimisation of `problem` through binarised quadratic
/// subproblems: per iteration the model at the current iterate is restricted
/// to a shrinking step grid, rewritten as a QUBO and handed to the sampler.
/// A step is kept only when the objective strictly decreases; otherwise the
/// grid spacing shrinks by xi until a failure or success cap fires.
inline SpResult run_sp(const SpProblem& problem, const SpConfig& config, const Sampler& sampler,
                       const SamplerConfig& sampler_config, Eigen::VectorXd x0) {
  const Eigen::Index n = problem.n_vars;
  if (x0.size() != n) throw Error("run_sp: x0 size mismatch");
  if (!(config.xi > 0.0 && config.xi < 1.0)) throw Error("run_sp: xi must lie in (0, 1)");
  if (config.n_failed < 1) throw Error("run_sp: n_failed must be >= 1");
  if (config.epsilon_min < 0.0) throw Error("run_sp: epsilon_min must be >= 0");
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd x_min = detail::broadcast(problem.x_min, n, -inf, "x_min");
  const Eigen::VectorXd x_max = detail::broadcast(problem.x_max, n, inf, "x_max");
  const Eigen::VectorXd box_min = detail::broadcast(config.box_min, n, -inf, "box_min");
  const Eigen::VectorXd box_max = detail::broadcast(config.box_max, n, inf, "box_max");
  Eigen::VectorXd eps = detail::broadcast(config.epsilon0, n, 0.0, "epsilon0");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0)) throw Error("run_sp: epsilon0 must be > 0");
    if (box_min[i] > 0.0 || box_max[i] < 0.0) throw Error("run_sp: step box must contain zero");
    if (x0[i] < x_min[i] || x0[i] > x_max[i]) {
      throw Error("run_sp: x0 infeasible at component " + std::to_string(i));
    }
  }

  const auto check_model = [&](const QuadraticForm& model, double f) {
    if (model.size() != n) throw Error("run_sp: model size mismatch");
    if (std::abs(model.constant - f) > 1e-10 * std::max(1.0, std::abs(f))) {
      throw Error("run_sp: model constant disagrees with evaluate");
    }
  };

  SpResult result;
  Eigen::VectorXd x = std::move(x0);
  double f = problem.evaluate(x);
  QuadraticForm model = problem.model_at(x);
  check_model(model, f);

  int successes = 0;
  int consecutive_failures = 0;
  int iteration = 0;
  StopReason reason = StopReason::n_steps;

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  while (successes < config.n_steps) {
    auto [delta_min, delta_max] = clip_bounds(x, x_min, x_max, box_min, box_max);
    EncodingSpec nominal = encoding_from_error(eps, zero, config.bits_per_var);
    Eigen::VectorXd d_min = nominal.d_min;
    Eigen::VectorXd d_max = nominal.d_max;
    clip_range(d_min, d_max, delta_min, delta_max);
    const EncodingSpec spec = encoding_from_range(std::move(d_min), std::move(d_max), config.bits_per_var);

    const QuboEncoding enc = qubo_from_quadratic(model, spec);
    const std::vector<Sample> samples = sampler(enc.problem, sampler_config);
    if (samples.empty()) throw SamplerError("sampler returned no samples");
    const Eigen::VectorXd delta = decode(spec, enc.expand(samples.front().bits, spec.total_bits()));

    const Eigen::VectorXd x_new = x + delta;
    const double f_new = problem.evaluate(x_new);
    const bool accepted = f_new < f;
    if (accepted) {
      x = x_new;
      f = f_new;
      ++successes;
      consecutive_failures = 0;
      model = problem.model_at(x);
      check_model(model, f);
    } else {
      ++consecutive_failures;
      eps = (config.xi * eps).cwiseMax(config.epsilon_min);
    }
    result.iterations.push_back({iteration, f, eps.maxCoeff(), accepted, samples.front().energy});
    ++iteration;

    if (consecutive_failures >= config.n_failed) {
      const bool at_floor = (eps.array() <= config.epsilon_min * (1.0 + 1e-12)).all();
      reason = at_floor ? StopReason::converged : StopReason::n_failed;
      break;
    }
  }

  result.x_final = std::move(x);
  result.f_final = f;
  result.stop_reason = reason;
  return result;
}

}  // namespace qtruss
