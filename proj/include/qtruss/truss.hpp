#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qtruss/errors.hpp"

namespace qtruss {

/// One axial member: endpoint node indices, initial cross-section and material.
struct Bar {
  int node_i = -1;
  int node_j = -1;
  double area0 = 0.0;            ///< initial cross-sectional area [m^2]
  double youngs_modulus = 0.0;   ///< [Pa]
};

/// Fixed degree of freedom, addressed as (node index, axis index).
using Support = std::pair<int, int>;

inline constexpr double kDegenerateBarLength = 1e-12;

/// Immutable pin-jointed truss: geometry, members, supports and nodal loads.
///
/// Degrees of freedom are numbered node*dimension + axis over all nodes; the
/// load vector spans all of them and must vanish on supported entries.
class TrussModel {
 public:
  TrussModel(int dimension, Eigen::MatrixXd nodes, std::vector<Bar> bars,
             std::vector<Support> supports, Eigen::VectorXd loads)
      : dimension_(dimension),
        nodes_(std::move(nodes)),
        bars_(std::move(bars)),
        supports_(std::move(supports)),
        loads_(std::move(loads)) {
    validate();
    fixed_.assign(static_cast<std::size_t>(num_dofs()), false);
    for (const auto& [node, axis] : supports_) {
      fixed_[static_cast<std::size_t>(node * dimension_ + axis)] = true;
    }
    for (int dof = 0; dof < num_dofs(); ++dof) {
      if (fixed_[static_cast<std::size_t>(dof)] && loads_[dof] != 0.0) {
        throw ModelError("load applied to fixed dof " + std::to_string(dof));
      }
    }
  }

  int dimension() const { return dimension_; }
  int num_nodes() const { return static_cast<int>(nodes_.rows()); }
  int num_bars() const { return static_cast<int>(bars_.size()); }
  int num_dofs() const { return num_nodes() * dimension_; }

  Eigen::VectorXd node(int index) const { return nodes_.row(index).transpose(); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const std::vector<Bar>& bars() const { return bars_; }
  const std::vector<Support>& supports() const { return supports_; }
  const Eigen::VectorXd& loads() const { return loads_; }

  bool is_fixed(int dof) const { return fixed_[static_cast<std::size_t>(dof)]; }

 private:
  void validate() const {
    if (dimension_ != 2 && dimension_ != 3) {
      throw ModelError("dimension must be 2 or 3, got " + std::to_string(dimension_));
    }
    if (nodes_.cols() != dimension_) {
      throw ModelError("node coordinates have " + std::to_string(nodes_.cols()) +
                       " components, expected " + std::to_string(dimension_));
    }
    if (nodes_.rows() < 2) throw ModelError("a truss needs at least two nodes");
    const int m = num_nodes();
    for (std::size_t k = 0; k < bars_.size(); ++k) {
      const Bar& bar = bars_[k];
      const std::string where = "bar " + std::to_string(k);
      if (bar.node_i < 0 || bar.node_i >= m || bar.node_j < 0 || bar.node_j >= m) {
        throw ModelError(where + ": node index out of range");
      }
      if (bar.node_i == bar.node_j) throw ModelError(where + ": connects a node to itself");
      if (!(bar.area0 > 0.0)) throw ModelError(where + ": area0 must be > 0");
      if (!(bar.youngs_modulus > 0.0)) throw ModelError(where + ": youngs_modulus must be > 0");
      const double len = (nodes_.row(bar.node_j) - nodes_.row(bar.node_i)).norm();
      if (len < kDegenerateBarLength) throw ModelError(where + ": degenerate (coincident endpoints)");
    }
    const int min_supports = dimension_ * (dimension_ + 1) / 2;
    if (static_cast<int>(supports_.size()) < min_supports) {
      throw ModelError("need at least " + std::to_string(min_supports) +
                       " support constraints, got " + std::to_string(supports_.size()));
    }
    for (const auto& [node, axis] : supports_) {
      if (node < 0 || node >= m) throw ModelError("support node index out of range");
      if (axis < 0 || axis >= dimension_) throw ModelError("support axis out of range");
    }
    if (loads_.size() != num_dofs()) {
      throw ModelError("load vector has " + std::to_string(loads_.size()) +
                       " entries, expected " + std::to_string(num_dofs()));
    }
  }

  int dimension_;
  Eigen::MatrixXd nodes_;  // num_nodes x dimension
  std::vector<Bar> bars_;
  std::vector<Support> supports_;
  Eigen::VectorXd loads_;  // full dof vector
  std::vector<bool> fixed_;
};

struct BarGeometry {
  double length = 0.0;
  Eigen::VectorXd direction;  ///< unit vector from node_i to node_j
};

inline BarGeometry bar_geometry(const TrussModel& model, int k) {
  if (k < 0 || k >= model.num_bars()) {
    throw Error("bar index " + std::to_string(k) + " out of range");
  }
  const Bar& bar = model.bars()[static_cast<std::size_t>(k)];
  Eigen::VectorXd delta = model.node(bar.node_j) - model.node(bar.node_i);
  const double length = delta.norm();
  if (length < kDegenerateBarLength) {
    throw ModelError("bar " + std::to_string(k) + ": degenerate (coincident endpoints)");
  }
  return {length, delta / length};
}

/// Elementary axial stiffness of bar k in the initial design, (2d x 2d),
/// ordered (node_i dofs, node_j dofs).
inline Eigen::MatrixXd element_stiffness0(const TrussModel& model, int k) {
  const Bar& bar = model.bars()[static_cast<std::size_t>(k)];
  const BarGeometry geom = bar_geometry(model, k);
  const int d = model.dimension();
  const double coeff = bar.youngs_modulus * bar.area0 / geom.length;
  const Eigen::MatrixXd block = coeff * (geom.direction * geom.direction.transpose());
  Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  ke.topLeftCorner(d, d) = block;
  ke.bottomRightCorner(d, d) = block;
  ke.topRightCorner(d, d) = -block;
  ke.bottomLeftCorner(d, d) = -block;
  return ke;
}

/// Maps full dof indices to the reduced (free-dof) numbering with supports eliminated.
class DofMap {
 public:
  explicit DofMap(const TrussModel& model) {
    full_to_reduced_.assign(static_cast<std::size_t>(model.num_dofs()), -1);
    for (int dof = 0; dof < model.num_dofs(); ++dof) {
      if (!model.is_fixed(dof)) {
        full_to_reduced_[static_cast<std::size_t>(dof)] = static_cast<int>(free_dofs_.size());
        free_dofs_.push_back(dof);
      }
    }
  }

  int n_free() const { return static_cast<int>(free_dofs_.size()); }
  const std::vector<int>& free_dofs() const { return free_dofs_; }
  int n_full() const { return static_cast<int>(full_to_reduced_.size()); }

  /// Reduced index of a full dof, or -1 when the dof is fixed.
  int to_reduced(int full_dof) const { return full_to_reduced_[static_cast<std::size_t>(full_dof)]; }

  Eigen::VectorXd reduce(const Eigen::VectorXd& full) const {
    if (full.size() != n_full()) throw Error("reduce: full vector size mismatch");
    Eigen::VectorXd out(n_free());
    for (int r = 0; r < n_free(); ++r) out[r] = full[free_dofs_[static_cast<std::size_t>(r)]];
    return out;
  }

  /// Scatter a reduced vector back to full size; fixed dofs get zero.
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const {
    if (reduced.size() != n_free()) throw Error("expand: reduced vector size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_full());
    for (int r = 0; r < n_free(); ++r) out[free_dofs_[static_cast<std::size_t>(r)]] = reduced[r];
    return out;
  }

 private:
  std::vector<int> free_dofs_;
  std::vector<int> full_to_reduced_;
};

struct MatrixTriplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Per-bar unit stiffness contributions scattered into the reduced system.
/// The global stiffness for a design alpha is sum_k alpha_k * K_k.
class UnitStiffnessSet {
 public:
  UnitStiffnessSet(int n_free, std::vector<std::vector<MatrixTriplet>> bar_triplets)
      : n_free_(n_free), bars_(std::move(bar_triplets)) {}

  int n_free() const { return n_free_; }
  int num_bars() const { return static_cast<int>(bars_.size()); }
  const std::vector<MatrixTriplet>& bar(int k) const { return bars_[static_cast<std::size_t>(k)]; }

  void add_scaled(int k, double alpha_k, Eigen::MatrixXd& into) const {
    for (const MatrixTriplet& t : bars_[static_cast<std::size_t>(k)]) {
      into(t.row, t.col) += alpha_k * t.value;
    }
  }

  /// u^T K_k u for one bar.
  double quadratic(int k, const Eigen::VectorXd& u) const {
    double acc = 0.0;
    for (const MatrixTriplet& t : bars_[static_cast<std::size_t>(k)]) {
      acc += t.value * u[t.row] * u[t.col];
    }
    return acc;
  }

 private:
  int n_free_;
  std::vector<std::vector<MatrixTriplet>> bars_;
};

inline UnitStiffnessSet assemble_unit_stiffness(const TrussModel& model, const DofMap& dofs) {
  const int d = model.dimension();
  std::vector<std::vector<MatrixTriplet>> bars;
  bars.reserve(static_cast<std::size_t>(model.num_bars()));
  for (int k = 0; k < model.num_bars(); ++k) {
    const Bar& bar = model.bars()[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd ke = element_stiffness0(model, k);
    // global dofs backing the element rows/cols
    std::vector<int> gdof(static_cast<std::size_t>(2 * d));
    for (int a = 0; a < d; ++a) {
      gdof[static_cast<std::size_t>(a)] = bar.node_i * d + a;
      gdof[static_cast<std::size_t>(d + a)] = bar.node_j * d + a;
    }
    std::vector<MatrixTriplet> triplets;
    for (int r = 0; r < 2 * d; ++r) {
      const int rr = dofs.to_reduced(gdof[static_cast<std::size_t>(r)]);
      if (rr < 0) continue;
      for (int c = 0; c < 2 * d; ++c) {
        const int rc = dofs.to_reduced(gdof[static_cast<std::size_t>(c)]);
        if (rc < 0) continue;
        if (ke(r, c) != 0.0) triplets.push_back({rr, rc, ke(r, c)});
      }
    }
    bars.push_back(std::move(triplets));
  }
  return UnitStiffnessSet(dofs.n_free(), std::move(bars));
}

/// Design variables: per-bar area ratios with box bounds.
struct DesignVector {
  Eigen::VectorXd alpha;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const {
    if (lower.size() != alpha.size() || upper.size() != alpha.size()) {
      throw Error("design bounds size mismatch");
    }
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (!(lower[i] > 0.0)) throw Error("alpha lower bound must be > 0");
      if (lower[i] > upper[i]) throw Error("alpha bounds inverted");
      if (alpha[i] < lower[i] || alpha[i] > upper[i]) {
        throw Error("alpha outside bounds at component " + std::to_string(i));
      }
    }
  }
};

inline Eigen::MatrixXd global_stiffness(const UnitStiffnessSet& units, const Eigen::VectorXd& alpha) {
  if (alpha.size() != units.num_bars()) throw Error("global_stiffness: alpha size mismatch");
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(units.n_free(), units.n_free());
  for (int b = 0; b < units.num_bars(); ++b) units.add_scaled(b, alpha[b], k);
  return k;
}

inline Eigen::MatrixXd global_stiffness(const UnitStiffnessSet& units, const DesignVector& design) {
  design.validate();
  return global_stiffness(units, design.alpha);
}

/// Potential energy 0.5 u^T K(alpha) u - f^T u of the reduced system.
inline double potential_energy(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& f) {
  if (u.size() != stiffness.rows() || f.size() != stiffness.rows()) {
    throw Error("potential_energy: size mismatch");
  }
  return 0.5 * u.dot(stiffness * u) - f.dot(u);
}

inline double potential_energy(const UnitStiffnessSet& units, const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& f) {
  return potential_energy(global_stiffness(units, alpha), u, f);
}

/// Gradient K(alpha) u - f; vanishes exactly at equilibrium.
inline Eigen::VectorXd potential_gradient(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& f) {
  if (u.size() != stiffness.rows() || f.size() != stiffness.rows()) {
    throw Error("potential_gradient: size mismatch");
  }
  return stiffness * u - f;
}

inline Eigen::VectorXd potential_gradient(const UnitStiffnessSet& units, const Eigen::VectorXd& alpha,
                                          const Eigen::VectorXd& u, const Eigen::VectorXd& f) {
  return potential_gradient(global_stiffness(units, alpha), u, f);
}

/// Cholesky solve of K(alpha) u = f. Verification oracle for the iterative
/// equilibrium path; throws when the reduced stiffness is not SPD.
inline Eigen::VectorXd direct_solve(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& f) {
  if (stiffness.rows() == 0) throw NumericalError("direct_solve: empty system");
  Eigen::LLT<Eigen::MatrixXd> llt(stiffness);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("structure under-constrained: stiffness not positive definite");
  }
  Eigen::VectorXd u = llt.solve(f);
  const double fnorm = f.norm();
  if (fnorm == 0.0) return Eigen::VectorXd::Zero(f.size());
  double resid = (stiffness * u - f).norm();
  if (resid > 1e-12 * fnorm) {
    u += llt.solve(f - stiffness * u);  // one refinement step
    resid = (stiffness * u - f).norm();
  }
  if (resid > 1e-10 * fnorm) {
    throw NumericalError("direct_solve: residual " + std::to_string(resid / fnorm) +
                         " exceeds 1e-10 relative; system nearly singular");
  }
  return u;
}

inline Eigen::VectorXd direct_solve(const UnitStiffnessSet& units, const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& f) {
  return direct_solve(global_stiffness(units, alpha), f);
}

/// Work of the external loads, C = f^T u.
inline double compliance(const Eigen::VectorXd& f, const Eigen::VectorXd& u) {
  if (f.size() != u.size()) throw Error("compliance: size mismatch");
  return f.dot(u);
}

/// dC/dalpha_k at equilibrium: omega_k = -u^T K_k u (always <= 0).
inline Eigen::VectorXd compliance_sensitivity(const UnitStiffnessSet& units, const Eigen::VectorXd& u) {
  if (u.size() != units.n_free()) throw Error("compliance_sensitivity: size mismatch");
  Eigen::VectorXd omega(units.num_bars());
  for (int k = 0; k < units.num_bars(); ++k) omega[k] = -units.quadratic(k, u);
  return omega;
}

/// Material volume sum_k alpha_k L_k A0_k.
inline double volume(const TrussModel& model, const Eigen::VectorXd& alpha) {
  if (alpha.size() != model.num_bars()) throw Error("volume: alpha size mismatch");
  double v = 0.0;
  for (int k = 0; k < model.num_bars(); ++k) {
    v += alpha[k] * bar_geometry(model, k).length * model.bars()[static_cast<std::size_t>(k)].area0;
  }
  return v;
}

/// Volume gradient D_k = L_k A0_k, constant in alpha.
inline Eigen::VectorXd volume_gradient(const TrussModel& model) {
  Eigen::VectorXd d(model.num_bars());
  for (int k = 0; k < model.num_bars(); ++k) {
    d[k] = bar_geometry(model, k).length * model.bars()[static_cast<std::size_t>(k)].area0;
  }
  return d;
}

}  // namespace qtruss
