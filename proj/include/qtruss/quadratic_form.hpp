#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "qtruss/errors.hpp"

namespace qtruss {

/// Local polynomial model up to order two, stored so that
///   evaluate(delta) = constant + delta^T gradient + delta^T hessian delta,
/// i.e. `hessian` already carries the 1/2 of the second Taylor coefficient.
struct QuadraticForm {
  double constant = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;

  int size() const { return static_cast<int>(gradient.size()); }

  double evaluate(const Eigen::VectorXd& delta) const {
    if (delta.size() != gradient.size()) throw Error("QuadraticForm::evaluate: size mismatch");
    if (hessian.size() == 0) return constant + gradient.dot(delta);
    return constant + gradient.dot(delta) + delta.dot(hessian * delta);
  }
};

/// Second-order Taylor model from the raw derivatives: value, gradient and the
/// full (unhalved) hessian. Rejects asymmetric hessians.
inline QuadraticForm taylor2(double value, Eigen::VectorXd gradient, Eigen::MatrixXd hessian_full) {
  if (hessian_full.rows() != hessian_full.cols() || hessian_full.rows() != gradient.size()) {
    throw Error("taylor2: hessian/gradient size mismatch");
  }
  const double scale = std::max(1.0, hessian_full.size() > 0 ? hessian_full.cwiseAbs().maxCoeff() : 0.0);
  if (hessian_full.size() > 0) {
    const double asym = (hessian_full - hessian_full.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) throw Error("taylor2: hessian asymmetric beyond tolerance");
  }
  return {value, std::move(gradient), 0.5 * hessian_full};
}

/// First-order model: a QuadraticForm with a zero hessian.
inline QuadraticForm linear_form(double value, Eigen::VectorXd gradient) {
  const Eigen::Index n = gradient.size();
  return {value, std::move(gradient), Eigen::MatrixXd::Zero(n, n)};
}

/// One linearised constraint: current value and gradient w.r.t. the step.
struct LinearConstraint {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Equality constraints h_j = 0 and inequality constraints l_j <= 0 with their
/// quadratic penalty factors.
struct LinearConstraintSet {
  std::vector<LinearConstraint> equalities;
  std::vector<LinearConstraint> inequalities;
  Eigen::VectorXd eq_penalty;
  Eigen::VectorXd ineq_penalty;
};

struct AugmentedForm {
  QuadraticForm form;  ///< quadratic in (delta, lambda); lambda appended after delta
  int n_slack = 0;     ///< number of appended slack variables (= inequalities)
};

/// Quadratic-penalty augmentation: the constrained problem becomes
///   f(delta) + sum_j c_j^h (h_j + grad_j . delta)^2
///            + sum_j c_j^l (l_j + grad_j . delta + lambda_j)^2
/// expanded exactly into a QuadraticForm over (delta, lambda). Slack variables
/// lambda_j are appended with an implied lower bound of zero; callers choose a
/// finite upper bound when binarising (max(1, 2|l_j|) works at the current point).
inline AugmentedForm penalty_augment(const QuadraticForm& objective,
                                     const LinearConstraintSet& constraints) {
  const int n = objective.size();
  const int n_eq = static_cast<int>(constraints.equalities.size());
  const int n_slack = static_cast<int>(constraints.inequalities.size());
  if (constraints.eq_penalty.size() != n_eq || constraints.ineq_penalty.size() != n_slack) {
    throw Error("penalty_augment: penalty vector size mismatch");
  }
  for (int j = 0; j < n_eq; ++j) {
    if (!(constraints.eq_penalty[j] > 0.0)) throw Error("penalty_augment: non-positive equality penalty");
    if (constraints.equalities[static_cast<std::size_t>(j)].gradient.size() != n) {
      throw Error("penalty_augment: equality gradient size mismatch");
    }
  }
  for (int j = 0; j < n_slack; ++j) {
    if (!(constraints.ineq_penalty[j] > 0.0)) throw Error("penalty_augment: non-positive inequality penalty");
    if (constraints.inequalities[static_cast<std::size_t>(j)].gradient.size() != n) {
      throw Error("penalty_augment: inequality gradient size mismatch");
    }
  }
  if (n_eq == 0 && n_slack == 0) return {objective, 0};

  const int total = n + n_slack;
  QuadraticForm out;
  out.constant = objective.constant;
  out.gradient = Eigen::VectorXd::Zero(total);
  out.gradient.head(n) = objective.gradient;
  out.hessian = Eigen::MatrixXd::Zero(total, total);
  if (objective.hessian.size() > 0) out.hessian.topLeftCorner(n, n) = objective.hessian;

  for (int j = 0; j < n_eq; ++j) {
    const LinearConstraint& h = constraints.equalities[static_cast<std::size_t>(j)];
    const double c = constraints.eq_penalty[j];
    out.constant += c * h.value * h.value;
    out.gradient.head(n) += 2.0 * c * h.value * h.gradient;
    out.hessian.topLeftCorner(n, n) += c * (h.gradient * h.gradient.transpose());
  }
  for (int j = 0; j < n_slack; ++j) {
    const LinearConstraint& l = constraints.inequalities[static_cast<std::size_t>(j)];
    const double c = constraints.ineq_penalty[j];
    const int s = n + j;
    out.constant += c * l.value * l.value;
    out.gradient.head(n) += 2.0 * c * l.value * l.gradient;
    out.gradient[s] += 2.0 * c * l.value;
    out.hessian.topLeftCorner(n, n) += c * (l.gradient * l.gradient.transpose());
    // cross terms 2c lambda (grad . delta): split across the symmetric blocks
    out.hessian.block(0, s, n, 1) += c * l.gradient;
    out.hessian.block(s, 0, 1, n) += c * l.gradient.transpose();
    out.hessian(s, s) += c;
  }
  return {std::move(out), n_slack};
}

}  // namespace qtruss
