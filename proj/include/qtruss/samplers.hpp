#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qtruss/encoding.hpp"
#include "qtruss/errors.hpp"

namespace qtruss {

/// One low-energy state returned by a sampler. `energy` is b^T Q b with the
/// problem offset excluded.
struct Sample {
  BitVector bits;
  double energy = 0.0;
  int occurrences = 1;
};

struct SamplerConfig {
  int num_reads = 200;
  std::uint64_t seed = 0;
  int sa_sweeps = 1000;                          ///< simulated annealing only
  std::chrono::milliseconds timeout{10000};      ///< remote only
};

/// Contract shared by all backends: a non-empty list sorted by ascending
/// energy, ties broken by lexicographically smallest bit vector.
using Sampler = std::function<std::vector<Sample>(const QuboProblem&, const SamplerConfig&)>;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool lex_less(const BitVector& a, const BitVector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool sample_order(const Sample& a, const Sample& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return lex_less(a.bits, b.bits);
}

/// Flip-oriented view: diagonal terms plus a symmetric adjacency built from
/// the upper-triangular coefficient map.
struct QuboView {
  int n = 0;
  double max_abs = 0.0;
  std::vector<double> diag;
  std::vector<std::vector<std::pair<int, double>>> adj;

  explicit QuboView(const QuboProblem& problem) : n(problem.n_bits) {
    diag.assign(static_cast<std::size_t>(n), 0.0);
    adj.assign(static_cast<std::size_t>(n), {});
    for (const auto& [key, value] : problem.q) {
      const auto [i, j] = key;
      max_abs = std::max(max_abs, std::abs(value));
      if (i == j) {
        diag[static_cast<std::size_t>(i)] += value;
      } else {
        adj[static_cast<std::size_t>(i)].emplace_back(j, value);
        adj[static_cast<std::size_t>(j)].emplace_back(i, value);
      }
    }
  }

  /// Energy change of flipping bit k under the current assignment.
  double flip_delta(const BitVector& bits, int k) const {
    double field = diag[static_cast<std::size_t>(k)];
    for (const auto& [j, w] : adj[static_cast<std::size_t>(k)]) {
      if (bits[static_cast<std::size_t>(j)]) field += w;
    }
    return bits[static_cast<std::size_t>(k)] ? -field : field;
  }
};

inline std::vector<Sample> empty_problem_result() {
  return {Sample{BitVector{}, 0.0, 1}};
}

}  // namespace detail

inline constexpr int kExhaustiveBitLimit = 24;

/// Exact oracle: enumerates all 2^n states (Gray-code order) and returns the
/// `num_reads` best. Guarded to kExhaustiveBitLimit bits.
inline std::vector<Sample> exhaustive_sample(const QuboProblem& problem, const SamplerConfig& config) {
  if (config.num_reads < 1) throw SamplerError("num_reads must be >= 1");
  if (problem.n_bits == 0) return detail::empty_problem_result();
  if (problem.n_bits > kExhaustiveBitLimit) {
    throw SamplerError("exhaustive sampler limited to " + std::to_string(kExhaustiveBitLimit) +
                       " bits, got " + std::to_string(problem.n_bits));
  }
  const detail::QuboView view(problem);
  const int n = problem.n_bits;
  const std::uint64_t count = 1ULL << n;
  const std::size_t keep = std::min<std::uint64_t>(static_cast<std::uint64_t>(config.num_reads), count);

  // max-heap on (energy, lex) so the worst kept state sits on top
  std::vector<Sample> heap;
  heap.reserve(keep + 1);
  auto heap_cmp = detail::sample_order;  // worst-on-top via std heap of "less"
  const double margin = 1e-9 * std::max(1.0, view.max_abs) * n;

  BitVector bits(static_cast<std::size_t>(n), 0);
  double running = 0.0;
  for (std::uint64_t step = 0;; ++step) {
    const bool candidate = heap.size() < keep || running <= heap.front().energy + margin;
    if (candidate) {
      Sample s{bits, problem.energy(bits), 1};  // exact recompute, no drift
      if (heap.size() < keep) {
        heap.push_back(std::move(s));
        std::push_heap(heap.begin(), heap.end(), heap_cmp);
      } else if (detail::sample_order(s, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), heap_cmp);
        heap.back() = std::move(s);
        std::push_heap(heap.begin(), heap.end(), heap_cmp);
      }
    }
    if (step + 1 == count) break;
    // Gray-code successor: exactly one bit differs
    const int flip = static_cast<int>(__builtin_ctzll(step + 1));
    running += view.flip_delta(bits, flip);
    bits[static_cast<std::size_t>(flip)] ^= 1;
  }
  std::sort_heap(heap.begin(), heap.end(), heap_cmp);
  return heap;
}

/// Metropolis single-flip simulated annealing: `num_reads` independent
/// restarts, geometric temperature schedule per restart, best state of each
/// restart kept. Deterministic for a fixed (problem, seed).
inline std::vector<Sample> simulated_annealing_sample(const QuboProblem& problem,
                                                      const SamplerConfig& config) {
  if (config.num_reads < 1) throw SamplerError("num_reads must be >= 1");
  if (config.sa_sweeps < 1) throw SamplerError("sa_sweeps must be >= 1");
  if (problem.n_bits == 0) return detail::empty_problem_result();

  const detail::QuboView view(problem);
  const int n = problem.n_bits;
  const double t_start = view.max_abs > 0.0 ? view.max_abs : 1.0;
  const double t_end = 1e-3 * t_start;
  const int sweeps = config.sa_sweeps;
  const double cool = sweeps > 1 ? std::pow(t_end / t_start, 1.0 / (sweeps - 1)) : 1.0;

  std::vector<Sample> found;
  found.reserve(static_cast<std::size_t>(config.num_reads));
  for (int read = 0; read < config.num_reads; ++read) {
    std::mt19937_64 rng(detail::splitmix64(config.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(read + 1)));
    BitVector bits(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) bits[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(rng() & 1u);

    // cached local fields: phi_k = sum_j W_kj b_j
    std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
      for (const auto& [j, w] : view.adj[static_cast<std::size_t>(k)]) {
        if (bits[static_cast<std::size_t>(j)]) phi[static_cast<std::size_t>(k)] += w;
      }
    }
    double energy = problem.energy(bits);
    BitVector best_bits = bits;
    double best_energy = energy;

    double temp = t_start;
    for (int sweep = 0; sweep < sweeps; ++sweep, temp *= cool) {
      for (int k = 0; k < n; ++k) {
        const double field = view.diag[static_cast<std::size_t>(k)] + phi[static_cast<std::size_t>(k)];
        const double delta = bits[static_cast<std::size_t>(k)] ? -field : field;
        if (delta > 0.0 && detail::uniform_double(rng) >= std::exp(-delta / temp)) continue;
        const double sign = bits[static_cast<std::size_t>(k)] ? -1.0 : 1.0;
        bits[static_cast<std::size_t>(k)] ^= 1;
        energy += delta;
        for (const auto& [j, w] : view.adj[static_cast<std::size_t>(k)]) {
          phi[static_cast<std::size_t>(j)] += sign * w;
        }
        if (energy < best_energy ||
            (energy == best_energy && detail::lex_less(bits, best_bits))) {
          best_energy = energy;
          best_bits = bits;
        }
      }
    }
    found.push_back(Sample{std::move(best_bits), 0.0, 1});
  }

  // exact energies, then merge identical states
  for (Sample& s : found) s.energy = problem.energy(s.bits);
  std::sort(found.begin(), found.end(), [](const Sample& a, const Sample& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return detail::lex_less(a.bits, b.bits);
  });
  std::vector<Sample> merged;
  for (Sample& s : found) {
    if (!merged.empty() && merged.back().bits == s.bits) {
      merged.back().occurrences += 1;
    } else {
      merged.push_back(std::move(s));
    }
  }
  return merged;
}

}  // namespace qtruss
