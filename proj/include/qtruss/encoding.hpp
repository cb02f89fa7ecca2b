#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qtruss/errors.hpp"
#include "qtruss/quadratic_form.hpp"

namespace qtruss {

using BitVector = std::vector<std::uint8_t>;

/// Per-variable binarisation of a continuous step vector onto a uniform grid:
///   delta_i = d_min_i + epsilon_i * sum_j bits_{i,j} 2^j,  j = 0..L-1.
/// Variables with epsilon = 0 are frozen at d_min and occupy no qubits.
struct EncodingSpec {
  int bits_per_var = 2;
  Eigen::VectorXd epsilon;  ///< grid spacing per variable (>= 0)
  Eigen::VectorXd center;   ///< grid centre value per variable
  Eigen::VectorXd d_min;
  Eigen::VectorXd d_max;
  Eigen::VectorXd beta;     ///< [2^0, 2^1, ..., 2^(L-1)]

  int num_vars() const { return static_cast<int>(epsilon.size()); }
  int total_bits() const { return num_vars() * bits_per_var; }
  bool frozen(int var) const { return epsilon[var] == 0.0; }
};

namespace detail {
inline Eigen::VectorXd powers_of_two(int l) {
  Eigen::VectorXd beta(l);
  double p = 1.0;
  for (int j = 0; j < l; ++j, p *= 2.0) beta[j] = p;
  return beta;
}
inline double grid_levels(int l) { return std::pow(2.0, l) - 1.0; }       // 2^L - 1
inline double half_levels(int l) { return std::pow(2.0, l - 1) - 1.0; }   // 2^(L-1) - 1
}  // namespace detail

/// Build the spec from bounds: epsilon = (d_max - d_min)/(2^L - 1) and
/// center = (d_max + d_min - epsilon)/2. A collapsed range freezes the variable.
inline EncodingSpec encoding_from_range(Eigen::VectorXd d_min, Eigen::VectorXd d_max, int bits_per_var) {
  if (bits_per_var < 1) throw Error("encoding: bits_per_var must be >= 1");
  if (d_min.size() != d_max.size()) throw Error("encoding: range size mismatch");
  const int n = static_cast<int>(d_min.size());
  EncodingSpec spec;
  spec.bits_per_var = bits_per_var;
  spec.beta = detail::powers_of_two(bits_per_var);
  spec.epsilon.resize(n);
  spec.center.resize(n);
  const double levels = detail::grid_levels(bits_per_var);
  for (int i = 0; i < n; ++i) {
    if (d_min[i] > d_max[i]) {
      throw Error("encoding: inverted range at component " + std::to_string(i));
    }
    spec.epsilon[i] = (d_max[i] - d_min[i]) / levels;
    spec.center[i] = 0.5 * (d_max[i] + d_min[i] - spec.epsilon[i]);
  }
  spec.d_min = std::move(d_min);
  spec.d_max = std::move(d_max);
  return spec;
}

/// Build the spec from (epsilon, center): d_min = center - (2^(L-1)-1) epsilon,
/// d_max = center + 2^(L-1) epsilon.
inline EncodingSpec encoding_from_error(Eigen::VectorXd epsilon, Eigen::VectorXd center, int bits_per_var) {
  if (bits_per_var < 1) throw Error("encoding: bits_per_var must be >= 1");
  if (epsilon.size() != center.size()) throw Error("encoding: epsilon/center size mismatch");
  const int n = static_cast<int>(epsilon.size());
  EncodingSpec spec;
  spec.bits_per_var = bits_per_var;
  spec.beta = detail::powers_of_two(bits_per_var);
  spec.d_min.resize(n);
  spec.d_max.resize(n);
  const double lo = detail::half_levels(bits_per_var);
  const double hi = lo + 1.0;  // 2^(L-1)
  for (int i = 0; i < n; ++i) {
    if (epsilon[i] < 0.0) throw Error("encoding: negative epsilon at component " + std::to_string(i));
    spec.d_min[i] = center[i] - lo * epsilon[i];
    spec.d_max[i] = center[i] + hi * epsilon[i];
  }
  spec.epsilon = std::move(epsilon);
  spec.center = std::move(center);
  return spec;
}

/// Decode a full-length bit vector (num_vars * L bits, variable-major,
/// little-endian within each variable) to the continuous step.
inline Eigen::VectorXd decode(const EncodingSpec& spec, const BitVector& bits) {
  if (static_cast<int>(bits.size()) != spec.total_bits()) {
    throw Error("decode: expected " + std::to_string(spec.total_bits()) + " bits, got " +
                std::to_string(bits.size()));
  }
  const int l = spec.bits_per_var;
  Eigen::VectorXd delta(spec.num_vars());
  for (int i = 0; i < spec.num_vars(); ++i) {
    double level = 0.0;
    for (int j = 0; j < l; ++j) {
      if (bits[static_cast<std::size_t>(i * l + j)]) level += spec.beta[j];
    }
    delta[i] = spec.d_min[i] + spec.epsilon[i] * level;
  }
  return delta;
}

/// Upper-triangular sparse QUBO, minimise b^T Q b + offset over b in {0,1}^n.
struct QuboProblem {
  int n_bits = 0;
  std::map<std::pair<int, int>, double> q;  ///< keys (i, j) with i <= j
  double offset = 0.0;

  void add(int i, int j, double value) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n_bits) throw Error("QuboProblem::add: index out of range");
    if (value == 0.0) return;
    auto [it, inserted] = q.emplace(std::make_pair(i, j), value);
    if (!inserted) {
      it->second += value;
      if (it->second == 0.0) q.erase(it);
    }
  }

  /// b^T Q b, offset excluded.
  double energy(const BitVector& bits) const {
    if (static_cast<int>(bits.size()) != n_bits) throw Error("QuboProblem::energy: bit count mismatch");
    double e = 0.0;
    for (const auto& [key, value] : q) {
      if (bits[static_cast<std::size_t>(key.first)] && bits[static_cast<std::size_t>(key.second)]) {
        e += value;
      }
    }
    return e;
  }
};

/// QUBO for a quadratic form under an encoding, plus the map from QUBO bit
/// index back to the spec's full bit index (frozen variables are excluded).
struct QuboEncoding {
  QuboProblem problem;
  std::vector<int> bit_index;  ///< problem bit -> full bit index (var*L + j)

  /// Expand a sampled bit vector to the spec's full length; frozen variables
  /// decode to d_min regardless of their (absent) bits.
  BitVector expand(const BitVector& sampled, int total_bits) const {
    if (sampled.size() != bit_index.size()) throw Error("QuboEncoding::expand: bit count mismatch");
    BitVector full(static_cast<std::size_t>(total_bits), 0);
    for (std::size_t p = 0; p < sampled.size(); ++p) {
      full[static_cast<std::size_t>(bit_index[p])] = sampled[p];
    }
    return full;
  }
};

/// Exact rewrite of `form` restricted to the encoding grid:
///   offset + b^T Q b = form.evaluate(decode(spec, expand(b)))  for every b.
/// Q = V^T A V + diag(V^T (g + 2 A d_min)), offset picks up the d_min terms.
inline QuboEncoding qubo_from_quadratic(const QuadraticForm& form, const EncodingSpec& spec) {
  const int n = spec.num_vars();
  if (form.size() != n) throw Error("qubo_from_quadratic: form/spec size mismatch");
  const int l = spec.bits_per_var;
  const bool has_hessian = form.hessian.size() > 0;

  QuboEncoding enc;
  std::vector<int> active;  // active variable indices
  active.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (!spec.frozen(i)) active.push_back(i);
  }
  enc.problem.n_bits = static_cast<int>(active.size()) * l;
  enc.bit_index.reserve(static_cast<std::size_t>(enc.problem.n_bits));
  std::vector<int> qubit_base(static_cast<std::size_t>(n), -1);
  for (std::size_t a = 0; a < active.size(); ++a) {
    qubit_base[static_cast<std::size_t>(active[a])] = static_cast<int>(a) * l;
    for (int j = 0; j < l; ++j) enc.bit_index.push_back(active[a] * l + j);
  }

  // constant terms: form constant plus the d_min part of the substitution
  double offset = form.constant + spec.d_min.dot(form.gradient);
  Eigen::VectorXd lin = form.gradient;
  if (has_hessian) {
    const Eigen::VectorXd a_dmin = form.hessian * spec.d_min;
    offset += spec.d_min.dot(a_dmin);
    lin += 2.0 * a_dmin;
  }
  enc.problem.offset = offset;

  for (int i : active) {
    const int base_i = qubit_base[static_cast<std::size_t>(i)];
    const double aii = has_hessian ? form.hessian(i, i) : 0.0;
    for (int a = 0; a < l; ++a) {
      const double w_ia = spec.epsilon[i] * spec.beta[a];
      // linear part plus the b^2 = b diagonal of the quadratic part
      enc.problem.add(base_i + a, base_i + a, w_ia * lin[i] + w_ia * w_ia * aii);
      if (!has_hessian) continue;
      // same-variable bit pairs
      for (int b = a + 1; b < l; ++b) {
        const double w_ib = spec.epsilon[i] * spec.beta[b];
        enc.problem.add(base_i + a, base_i + b, 2.0 * w_ia * w_ib * aii);
      }
      // cross-variable pairs
      for (int j : active) {
        if (j <= i) continue;
        const double aij = form.hessian(i, j);
        if (aij == 0.0) continue;
        const int base_j = qubit_base[static_cast<std::size_t>(j)];
        for (int b = 0; b < l; ++b) {
          const double w_jb = spec.epsilon[j] * spec.beta[b];
          // A is symmetric: fold (i,j) and (j,i) into the upper triangle
          enc.problem.add(base_i + a, base_j + b, 2.0 * w_ia * w_jb * aij);
        }
      }
    }
  }
  return enc;
}

/// Ising image of a QUBO under b = (1 + s)/2: fields h, couplings J and the
/// constant shift such that Ising(s) + offset = QUBO(b).
struct IsingProblem {
  Eigen::VectorXd h;
  std::map<std::pair<int, int>, double> j;
  double offset = 0.0;

  double energy(const std::vector<int>& spins) const {
    if (static_cast<Eigen::Index>(spins.size()) != h.size()) throw Error("IsingProblem::energy: size mismatch");
    double e = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) e += h[i] * spins[static_cast<std::size_t>(i)];
    for (const auto& [key, value] : j) {
      e += value * spins[static_cast<std::size_t>(key.first)] * spins[static_cast<std::size_t>(key.second)];
    }
    return e;
  }
};

inline IsingProblem qubo_to_ising(const QuboProblem& qubo) {
  IsingProblem ising;
  ising.h = Eigen::VectorXd::Zero(qubo.n_bits);
  ising.offset = 0.0;
  for (const auto& [key, value] : qubo.q) {
    const auto [i, j] = key;
    if (i == j) {
      ising.h[i] += 0.5 * value;
      ising.offset += 0.5 * value;
    } else {
      ising.h[i] += 0.25 * value;
      ising.h[j] += 0.25 * value;
      ising.offset += 0.25 * value;
      const double w = 0.25 * value;
      auto [it, inserted] = ising.j.emplace(key, w);
      if (!inserted) it->second += w;
    }
  }
  return ising;
}

}  // namespace qtruss
