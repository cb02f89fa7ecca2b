#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qtruss/quadratic_form.hpp"
#include "qtruss/samplers.hpp"
#include "qtruss/sp_driver.hpp"
#include "qtruss/truss.hpp"

namespace qtruss {

/// Settings for the alternating equilibrium-solve / design-update loop.
/// Empty SpConfig fields are resolved to the standard defaults at run time:
/// the equilibrium grid starts at 1e-4/(2^L - 1) with an unbounded step box,
/// the design grid spans the +-0.05 trust box.
struct OptConfig {
  double v_target = 0.0;  ///< target volume; <= 0 means the initial design volume
  double volume_penalty = 100.0;
  double alpha_min = 0.02;
  double alpha_max = 1.1;
  Eigen::VectorXd design_box_min;  ///< per-outer-step move limit, default -0.05
  Eigen::VectorXd design_box_max;  ///< per-outer-step move limit, default +0.05
  SpConfig equilibrium_sp;
  SpConfig design_sp;
  int max_outer = 500;
  double equilibrium_residual_tol = 1e-4;
  int equilibrium_retries = 4;
};

namespace detail {

inline SpConfig resolve_equilibrium_sp(SpConfig sp) {
  if (sp.epsilon0.size() == 0) {
    const double levels = std::pow(2.0, sp.bits_per_var) - 1.0;
    sp.epsilon0 = Eigen::VectorXd::Constant(1, 1e-4 / levels);
  }
  return sp;  // empty box stays unbounded
}

inline SpConfig resolve_design_sp(SpConfig sp, const Eigen::VectorXd& move_lo,
                                  const Eigen::VectorXd& move_hi) {
  if (sp.epsilon0.size() == 0) {
    const double levels = std::pow(2.0, sp.bits_per_var) - 1.0;
    sp.epsilon0 = (move_hi - move_lo) / levels;
  }
  return sp;  // the driver's own step box stays unbounded; the move limit
              // enters through the subproblem variable bounds
}

}  // namespace detail

struct EquilibriumSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd omega;      ///< compliance sensitivities at u
  double residual = 0.0;      ///< ||K u - f|| / ||f||
  std::vector<SpIteration> iterations;  ///< concatenated over continuation rounds
  StopReason stop_reason = StopReason::n_failed;
  int rounds = 0;
};

/// Minimise the potential energy with the sequential driver (the model is the
/// exact quadratic, so every subproblem model is exact). Reruns the driver
/// from the current iterate while the equilibrium residual exceeds
/// `residual_tol`, up to `retries` extra rounds.
inline EquilibriumSolution solve_equilibrium(const UnitStiffnessSet& units, const Eigen::VectorXd& alpha,
                                             const Eigen::VectorXd& f, const SpConfig& sp_config,
                                             const Sampler& sampler, const SamplerConfig& sampler_config,
                                             Eigen::VectorXd u0, double residual_tol = 1e-4,
                                             int retries = 4) {
  const Eigen::MatrixXd stiffness = global_stiffness(units, alpha);
  if (u0.size() != stiffness.rows()) throw Error("solve_equilibrium: u0 size mismatch");

  SpProblem problem;
  problem.n_vars = static_cast<int>(stiffness.rows());
  problem.evaluate = [&stiffness, &f](const Eigen::VectorXd& u) {
    return potential_energy(stiffness, u, f);
  };
  problem.model_at = [&stiffness, &f](const Eigen::VectorXd& u) {
    return QuadraticForm{potential_energy(stiffness, u, f), stiffness * u - f, 0.5 * stiffness};
  };

  const SpConfig sp = detail::resolve_equilibrium_sp(sp_config);
  const double f_norm = f.norm();
  const double denom = f_norm > 0.0 ? f_norm : 1.0;

  EquilibriumSolution solution;
  Eigen::VectorXd u = std::move(u0);
  for (int round = 0; round <= retries; ++round) {
    SpResult sp_result = run_sp(problem, sp, sampler, sampler_config, u);
    u = std::move(sp_result.x_final);
    const int base = solution.iterations.empty() ? 0 : solution.iterations.back().index + 1;
    for (SpIteration it : sp_result.iterations) {
      it.index += base;
      solution.iterations.push_back(it);
    }
    solution.stop_reason = sp_result.stop_reason;
    solution.rounds = round + 1;
    solution.residual = (stiffness * u - f).norm() / denom;
    if (solution.residual <= residual_tol) break;
  }
  if (solution.residual > residual_tol) {
    throw NumericalError("equilibrium residual " + std::to_string(solution.residual) +
                         " above tolerance after " + std::to_string(solution.rounds) + " rounds");
  }
  solution.omega = compliance_sensitivity(units, u);
  solution.u = std::move(u);
  return solution;
}

/// One design step: minimise the linearised compliance under the volume
/// equality (quadratic penalty). The design box caps the total move of this
/// step: the subproblem bounds are the alpha bounds intersected with
/// alpha +- box.
inline DesignVector update_design(const TrussModel& model, const DesignVector& design,
                                  double compliance_value, const Eigen::VectorXd& omega,
                                  double v_target, const OptConfig& config, const Sampler& sampler,
                                  const SamplerConfig& sampler_config) {
  design.validate();
  const Eigen::Index n = design.alpha.size();
  if (omega.size() != n) throw Error("update_design: omega size mismatch");
  const Eigen::VectorXd d = volume_gradient(model);

  const Eigen::VectorXd move_lo =
      config.design_box_min.size() == 0
          ? Eigen::VectorXd::Constant(n, -0.05)
          : detail::broadcast(config.design_box_min, n, -0.05, "design_box_min");
  const Eigen::VectorXd move_hi =
      config.design_box_max.size() == 0
          ? Eigen::VectorXd::Constant(n, 0.05)
          : detail::broadcast(config.design_box_max, n, 0.05, "design_box_max");

  LinearConstraintSet constraints;
  constraints.eq_penalty = Eigen::VectorXd::Constant(1, config.volume_penalty);
  constraints.ineq_penalty = Eigen::VectorXd(0);

  SpProblem problem;
  problem.n_vars = static_cast<int>(n);
  problem.x_min = design.lower.cwiseMax(design.alpha + move_lo);
  problem.x_max = design.upper.cwiseMin(design.alpha + move_hi);
  const Eigen::VectorXd alpha0 = design.alpha;
  problem.evaluate = [&, alpha0](const Eigen::VectorXd& x) {
    const double h = d.dot(x) - v_target;
    return compliance_value + omega.dot(x - alpha0) + config.volume_penalty * h * h;
  };
  problem.model_at = [&, alpha0](const Eigen::VectorXd& x) {
    LinearConstraintSet local = constraints;
    local.equalities = {LinearConstraint{d.dot(x) - v_target, d}};
    const QuadraticForm objective = linear_form(compliance_value + omega.dot(x - alpha0), omega);
    return penalty_augment(objective, local).form;
  };

  const SpConfig sp = detail::resolve_design_sp(config.design_sp, move_lo, move_hi);
  SpResult result = run_sp(problem, sp, sampler, sampler_config, design.alpha);
  return DesignVector{std::move(result.x_final), design.lower, design.upper};
}

struct OuterIteration {
  int index = 0;
  double compliance = 0.0;
  double volume_ratio = 0.0;
  double equilibrium_residual = 0.0;
  bool accepted = false;
  Eigen::VectorXd alpha;
};

struct OptimizeResult {
  DesignVector design;           ///< best accepted design
  double compliance = std::numeric_limits<double>::quiet_NaN();
  double volume_ratio = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd displacement;  ///< reduced equilibrium displacement of `design`
  std::vector<OuterIteration> trace;
  std::string stop_reason = "max_outer";
  std::vector<std::uint64_t> seeds_used;
};

/// Alternate equilibrium solves and design updates until the compliance stops
/// strictly decreasing (patience one) or `max_outer` is reached. Per-call
/// sampler seeds are derived from the base seed and recorded in order.
inline OptimizeResult optimize(const TrussModel& model, const Eigen::VectorXd& alpha0,
                               const OptConfig& config, const Sampler& sampler,
                               const SamplerConfig& base_sampler) {
  const DofMap dofs(model);
  const UnitStiffnessSet units = assemble_unit_stiffness(model, dofs);
  const Eigen::VectorXd f = dofs.reduce(model.loads());

  DesignVector design{alpha0, Eigen::VectorXd::Constant(alpha0.size(), config.alpha_min),
                      Eigen::VectorXd::Constant(alpha0.size(), config.alpha_max)};
  design.validate();
  const double v_target = config.v_target > 0.0 ? config.v_target : volume(model, alpha0);
  if (!(v_target > 0.0)) throw Error("optimize: target volume must be > 0");

  OptimizeResult result;
  result.design = design;
  result.volume_ratio = volume(model, design.alpha) / v_target;
  const SpConfig eq_sp = detail::resolve_equilibrium_sp(config.equilibrium_sp);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs.n_free());
  double best_compliance = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < config.max_outer; ++outer) {
    SamplerConfig eq_sampler = base_sampler;
    eq_sampler.seed = detail::splitmix64(base_sampler.seed + 2 * static_cast<std::uint64_t>(outer) + 1);
    result.seeds_used.push_back(eq_sampler.seed);
    EquilibriumSolution eq =
        solve_equilibrium(units, design.alpha, f, eq_sp, sampler, eq_sampler, u,
                          config.equilibrium_residual_tol, config.equilibrium_retries);
    u = eq.u;
    const double c = compliance(f, u);
    const double ratio = volume(model, design.alpha) / v_target;
    const bool accepted = c < best_compliance;
    result.trace.push_back({outer, c, ratio, eq.residual, accepted, design.alpha});
    if (!accepted) {
      result.stop_reason = "no_decrease";
      break;
    }
    best_compliance = c;
    result.design = design;
    result.compliance = c;
    result.volume_ratio = ratio;
    result.displacement = u;

    SamplerConfig des_sampler = base_sampler;
    des_sampler.seed = detail::splitmix64(base_sampler.seed + 2 * static_cast<std::uint64_t>(outer) + 2);
    result.seeds_used.push_back(des_sampler.seed);
    design = update_design(model, design, c, eq.omega, v_target, config, sampler, des_sampler);
  }
  return result;
}

}  // namespace qtruss
