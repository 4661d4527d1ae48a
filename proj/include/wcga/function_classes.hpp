#pragma once

// The classes A^r_beta over the trigonometric system: member generation,
// membership, the partial-sum tail bound, the A_beta Hoelder bound and the
// width lower bound for coordinate vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/QR>

#include "wcga/core.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/rng.hpp"

namespace wcga {

struct ClassSpec {
  double r = 1.0;
  double beta = 1.0;
  std::size_t d = 1;
  double B = 1.0;

  void validate() const {
    if (!(r > 0.0)) throw ParameterError("smoothness r must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
    if (d == 0) throw ParameterError("dimension must be positive");
    if (!(B > 0.0)) throw ParameterError("bound B must be positive");
  }
};

enum class MemberMode { extremal, slack };

inline constexpr std::uint64_t kMemberStream = 0xA3B;

/// For each block j picks max(1, ceil(density |block|)) frequencies, draws
/// phases uniformly and moduli log-uniformly over two decades, then rescales
/// the block to l_beta norm 2^{-rj} (extremal) or 2^{-rj} times a uniform
/// factor in (0, 1] (slack).
inline CoefficientVector sample_member(const ClassSpec& spec, const TrigSystem& system, double density,
                                       std::uint64_t seed, MemberMode mode = MemberMode::extremal) {
  spec.validate();
  if (system.dim() != spec.d) throw DimensionError("class and system dimensions differ");
  if (!(density > 0.0 && density <= 1.0)) throw ParameterError("density must lie in (0, 1]");
  CoefficientVector out;
  for (std::size_t j = 0; j <= system.max_level(); ++j) {
    CounterRng rng(seed, {kMemberStream, j});
    const auto [lo, hi] = system.block_range(j);
    const std::size_t size = hi - lo;
    const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(density * static_cast<double>(size))), 1, size);
    auto picks = rng.sample_without_replacement(size, n);
    std::vector<Complex> c(n);
    double sum = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      const double modulus = std::pow(10.0, -2.0 * rng.uniform());
      c[q] = std::polar(modulus, kTwoPi * rng.uniform());
      sum += std::pow(modulus, spec.beta);
    }
    double target = std::pow(2.0, -spec.r * static_cast<double>(j));
    if (mode == MemberMode::slack) target *= 1.0 - rng.uniform();
    const double factor = target / std::pow(sum, 1.0 / spec.beta);
    for (std::size_t q = 0; q < n; ++q) out.set(lo + picks[q], c[q] * factor);
  }
  return out;
}

struct MembershipReport {
  bool member = true;
  std::vector<double> block_norms;
  std::vector<double> slack;  // 2^{-rj} - b_j
};

inline MembershipReport class_membership_check(const CoefficientVector& coeffs, const ClassSpec& spec,
                                               const TrigSystem& system) {
  spec.validate();
  MembershipReport rep;
  rep.block_norms = a_beta_block_norms(coeffs, spec.beta, system);
  for (std::size_t j = 0; j < rep.block_norms.size(); ++j) {
    const double cap = std::pow(2.0, -spec.r * static_cast<double>(j));
    rep.slack.push_back(cap - rep.block_norms[j]);
    if (rep.block_norms[j] > cap * (1.0 + 1e-12)) rep.member = false;
  }
  return rep;
}

/// Blocks 0..n of the expansion, i.e. the frequencies with |k|_inf < 2^n.
inline CoefficientVector partial_sum(const CoefficientVector& coeffs, const TrigSystem& system, long n) {
  CoefficientVector out;
  if (n < 0) return out;
  const std::size_t end = system.prefix_size(static_cast<std::size_t>(n));
  for (const auto& [i, c] : coeffs) {
    if (i < end) out.set(i, c);
  }
  return out;
}

struct TailBound {
  double lhs = 0.0;        // ||f - S_n f||_p
  double rhs_shape = 0.0;  // B sum_{j >= n} 2^{-r(j+1)}
  bool holds = true;
};

/// ||f - S_n f||_p against B sum_{j>=n} 2^{-r(j+1)}, where S_n keeps blocks
/// 0..n so that S_{j+1} - S_j is block j+1 with A_beta norm <= 2^{-r(j+1)}.
inline TailBound tail_bound_check(const CoefficientVector& coeffs, const ClassSpec& spec, const TrigSystem& system,
                                  std::size_t n, double p) {
  if (!class_membership_check(coeffs, spec, system).member) {
    throw ParameterError("tail bound needs a class member");
  }
  TailBound out;
  const CoefficientVector tail = coeffs - partial_sum(coeffs, system, static_cast<long>(n));
  out.lhs = continuous_lp_norm(system, tail, p);
  const double q = std::pow(2.0, -spec.r);
  out.rhs_shape = spec.B * std::pow(q, static_cast<double>(n) + 1.0) / (1.0 - q);
  out.holds = out.lhs <= out.rhs_shape * (1.0 + 1e-9);
  return out;
}

struct HolderBound {
  double lhs = 0.0;  // |f|_{A_beta}
  double rhs = 0.0;  // (2N+1)^{d(1/beta - 1/2)} ||f||_2
  bool holds = true;
};

/// |f|_{A_beta} <= (2N+1)^{d(1/beta-1/2)} ||f||_2 for f with frequencies
/// |k|_inf <= N.
inline HolderBound a_beta_holder_bound_check(const CoefficientVector& coeffs, const TrigSystem& system, double beta,
                                             int N) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
  check_indices(coeffs, system.size());
  double sb = 0.0;
  for (const auto& [i, c] : coeffs) {
    for (int k : system.frequency(i)) {
      if (std::abs(k) > N) throw ParameterError("coefficient frequency exceeds N");
    }
    sb += std::pow(std::abs(c), beta);
  }
  HolderBound out;
  out.lhs = std::pow(sb, 1.0 / beta);
  out.rhs = std::pow(2.0 * N + 1.0, static_cast<double>(system.dim()) * (1.0 / beta - 0.5)) * coeffs.l2_norm();
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

/// max_j dist(e_j, span Q) for a matrix Q with orthonormal columns.
inline double worst_coordinate_distance(const CMatrix& Q) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < Q.rows(); ++j) {
    worst = std::max(worst, std::sqrt(std::max(0.0, 1.0 - Q.row(j).squaredNorm())));
  }
  return worst;
}

struct WidthCheck {
  double min_worst = 1.0;
  double bound = 1.0;
  std::size_t violations = 0;
  std::size_t trials = 0;
};

inline constexpr std::uint64_t kWidthStream = 0x3D7;

/// Random n-dimensional subspaces of C^N (orthonormalized Gaussian frames):
/// the farthest coordinate vector is at distance >= sqrt(1 - n/N).
inline WidthCheck width_lower_bound_check(std::size_t N, std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (N == 0 || n >= N) throw ParameterError("need 0 <= n < N");
  WidthCheck out;
  out.bound = std::sqrt(1.0 - static_cast<double>(n) / static_cast<double>(N));
  out.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    double worst = 1.0;
    if (n > 0) {
      CounterRng rng(seed, {kWidthStream, t});
      CMatrix G(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
      for (Eigen::Index c = 0; c < G.cols(); ++c) {
        for (Eigen::Index r = 0; r < G.rows(); ++r) G(r, c) = rng.complex_normal();
      }
      Eigen::HouseholderQR<CMatrix> qr(G);
      const CMatrix Q = qr.householderQ() * CMatrix::Identity(G.rows(), G.cols());
      worst = worst_coordinate_distance(Q);
    }
    out.min_worst = std::min(out.min_worst, worst);
    if (worst < out.bound - 1e-9) ++out.violations;
  }
  return out;
}

}  // namespace wcga
