#ifndef ETFP_ANALYSIS_HPP_
#define ETFP_ANALYSIS_HPP_

// Collusion-resistance bounds for a fingerprint design: restricted isometry
// constants (brute force and the Gershgorin coherence bound), distances
// between the "guilty" and "not guilty" sets of uniform fingerprint averages,
// worst-case type I/II error bounds of the correlation detector, minmax
// bounds, the optimal threshold and asymptotic indicators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "etfp/designs.hpp"
#include "etfp/jacobi.hpp"

namespace etfp {

inline constexpr std::uint64_t kEnumerationGuard = 1'000'000;

// C(n, k), saturating at cap + 1 so callers can compare against a guard
// without overflow.
inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k,
                                     std::uint64_t cap = kEnumerationGuard) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(c));
}

// Visits every size-k subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_combination(Index n, Index k, Fn &&fn) {
  if (k < 0 || k > n) return;
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    fn(std::span<const Index>(idx));
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

// ---------------------------------------------------------------------------
// Restricted isometry

// Smallest delta for which F is (K, delta)-RIP: the maximum over all size-K
// column subsets of || F_K^T F_K - I ||_2.
template <typename Scalar>
Scalar rip_delta_bruteforce(const DesignMatrix<Scalar> &F, Index K) {
  using Dense = typename DesignMatrix<Scalar>::Dense;
  if (K < 1 || K > F.users()) {
    throw DomainError("rip_delta_bruteforce: need 1 <= K <= M");
  }
  const auto count = binomial_capped(std::uint64_t(F.users()), std::uint64_t(K));
  if (count > kEnumerationGuard) {
    throw CapacityError("rip_delta_bruteforce: C(" + std::to_string(F.users()) + "," +
                        std::to_string(K) +
                        ") subsets exceed the 10^6 enumeration guard; use gershgorin_delta_bound");
  }
  // The guard keeps M small whenever K >= 2, so a full dense Gram fits.
  if (K == 1) {
    Scalar worst = 0;
    for (Index j = 0; j < F.users(); ++j) {
      worst = std::max(worst, std::abs(F.matrix().col(j).squaredNorm() - Scalar(1)));
    }
    return worst;
  }
  const Dense dense = F.dense();
  const Dense gram = dense.transpose() * dense;
  Dense sub(K, K);
  Scalar worst = 0;
  for_each_combination(F.users(), K, [&](std::span<const Index> cols) {
    for (Index a = 0; a < K; ++a) {
      for (Index b = 0; b < K; ++b) sub(a, b) = gram(cols[a], cols[b]);
      sub(a, a) -= Scalar(1);
    }
    worst = std::max(worst, symmetric_spectral_norm(sub));
  });
  return worst;
}

// delta_2K <= (2K - 1) mu for unit-norm columns.
inline double gershgorin_delta_bound(double mu, Index K) {
  if (K < 1) throw DomainError("gershgorin_delta_bound: K must be at least 1");
  if (!(mu >= 0)) throw DomainError("gershgorin_delta_bound: mu must be nonnegative");
  return double(2 * K - 1) * mu;
}

// ---------------------------------------------------------------------------
// Guilty / not-guilty distances

// A distance lower bound; `vacuous` marks the case where the expression under
// the square root is nonpositive and the bound says nothing.
struct DistanceBound {
  double value = 0;
  bool vacuous = false;
};

inline DistanceBound distance_lower_bound_rip(double delta2K, Index K) {
  if (K < 2) throw DomainError("distance bound undefined for K < 2");
  const double slack = 1.0 - delta2K;
  if (slack <= 0) return {0.0, true};
  return {std::sqrt(slack / double(K * (K - 1))), false};
}

inline DistanceBound distance_lower_bound_coherence(double mu, Index K) {
  if (K < 2) throw DomainError("distance bound undefined for K < 2");
  return distance_lower_bound_rip(gershgorin_delta_bound(mu, K), K);
}

// Exact guilty/not-guilty distance of the regular simplex with M vertices.
inline double simplex_distance_exact(Index M, Index K) {
  if (M < 3 || K < 2 || K > M - 1) {
    throw DomainError("simplex_distance_exact: need M >= 3 and 2 <= K <= M-1");
  }
  return std::sqrt(double(M) / (double(K * (K - 1)) * double(M - 1)));
}

template <typename Scalar = double>
struct GuiltySetSpec {
  const DesignMatrix<Scalar> &F;
  Index user;  // 0-based
  Index max_coalition;

  void validate() const {
    if (max_coalition < 2 || max_coalition > F.users()) {
      throw DomainError("guilty-set spec: need 2 <= K <= M");
    }
    if (user < 0 || user >= F.users()) {
      throw DomainError("guilty-set spec: user index out of range");
    }
  }
};

// min || mean(f_K) - mean(f_K') || over coalitions K containing the user and
// K' not containing it, 1 <= |K|, |K'| <= max_coalition, uniform weights.
template <typename Scalar>
Scalar distance_exact_bruteforce(const GuiltySetSpec<Scalar> &spec) {
  using Dense = typename DesignMatrix<Scalar>::Dense;
  spec.validate();
  const auto &F = spec.F;
  const Index M = F.users();
  const Index K = spec.max_coalition;
  const Index m = spec.user;

  std::uint64_t guilty = 0;
  std::uint64_t innocent = 0;
  for (Index size = 1; size <= K; ++size) {
    guilty += binomial_capped(std::uint64_t(M - 1), std::uint64_t(size - 1));
    innocent += binomial_capped(std::uint64_t(M - 1), std::uint64_t(size));
  }
  if (guilty > kEnumerationGuard || innocent > kEnumerationGuard ||
      guilty * innocent > kEnumerationGuard) {
    throw CapacityError("distance_exact_bruteforce: coalition pairs exceed the 10^6 guard");
  }

  const Dense dense = F.dense();
  Dense with_user(F.dim(), Index(guilty));
  Dense without_user(F.dim(), Index(innocent));
  Index gi = 0;
  Index ni = 0;
  // Subsets of the other M-1 users, re-indexed to skip m.
  auto lift = [m](Index i) { return i < m ? i : i + 1; };
  for (Index size = 0; size <= K; ++size) {
    for_each_combination(M - 1, size, [&](std::span<const Index> others) {
      typename DesignMatrix<Scalar>::Vector sum = Dense::Zero(F.dim(), 1);
      for (Index i : others) sum += dense.col(lift(i));
      if (size + 1 <= K) {
        with_user.col(gi++) = (sum + dense.col(m)) / Scalar(size + 1);
      }
      if (size >= 1) {
        without_user.col(ni++) = sum / Scalar(size);
      }
    });
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a2 = with_user.colwise().squaredNorm().transpose();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> b2 = without_user.colwise().squaredNorm();
  const Dense cross = with_user.transpose() * without_user;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < cross.cols(); ++j) {
    for (Index i = 0; i < cross.rows(); ++i) {
      best = std::min(best, a2(i) + b2(j) - Scalar(2) * cross(i, j));
    }
  }
  return std::sqrt(std::max(best, Scalar(0)));
}

// ---------------------------------------------------------------------------
// Error probabilities

// Upper tail of the standard normal, Q(x) = erfc(x / sqrt 2) / 2.
inline double q_function(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

inline double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

struct BoundInputs {
  Index N = 1;
  Index M = 1;
  Index K = 1;
  double per_dim_energy = 1;  // D_f
  double sigma2 = 1;
  double mu = 0;

  double gamma() const { return std::sqrt(double(N) * per_dim_energy); }
  double sigma() const { return std::sqrt(sigma2); }

  void validate() const {
    if (K < 1) throw DomainError("bound inputs: K must be at least 1");
    if (N < 1 || M < 1) throw DomainError("bound inputs: N and M must be positive");
    if (!(mu >= 0 && mu <= 1)) throw DomainError("bound inputs: mu must lie in [0, 1]");
    if (!(per_dim_energy > 0)) throw DomainError("bound inputs: D_f must be positive");
    if (!(sigma2 > 0)) throw DomainError("bound inputs: sigma^2 must be positive");
  }
};

// Worst-case false-accusation bound Q((gamma/sigma)(tau - mu)).
inline double type1_bound(const BoundInputs &b, double tau) {
  b.validate();
  return clamp_probability(q_function(b.gamma() / b.sigma() * (tau - b.mu)));
}

// Worst-case miss bound Q((gamma/sigma)((1+mu) alpha_max - mu - tau)).
inline double type2_bound(const BoundInputs &b, double tau, double alpha_max) {
  b.validate();
  if (!(alpha_max >= 0 && alpha_max <= 1)) {
    throw DomainError("type2_bound: alpha_max must lie in [0, 1]");
  }
  return clamp_probability(
      q_function(b.gamma() / b.sigma() * ((1 + b.mu) * alpha_max - b.mu - tau)));
}

// Midpoint of the innocent and guilty worst-case means: (1 + mu) / (2K).
inline double optimal_threshold(double mu, Index K) {
  if (K < 1) throw DomainError("optimal_threshold: K must be at least 1");
  return (1 + mu) / (2.0 * double(K));
}

struct MinmaxBounds {
  std::optional<double> lower;  // Q(d_low / 2); absent for K < 2
  std::optional<double> d_low;
  double upper = 0;             // Q(d_up / 2)
  double d_up = 0;
  double d_orthogonal = 0;      // sqrt(N D_f) / (sigma K)
  double d_simplex = 0;         // sqrt(N D_f) / (sigma K) * M / (M - 1)
};

inline MinmaxBounds minmax_bounds(const BoundInputs &b) {
  b.validate();
  MinmaxBounds out;
  const double base = b.gamma() / (b.sigma() * double(b.K));
  out.d_up = base * (1.0 - double(2 * b.K - 1) * b.mu);
  out.upper = clamp_probability(q_function(out.d_up / 2));
  out.d_orthogonal = base;
  out.d_simplex = b.M > 1 ? base * double(b.M) / double(b.M - 1)
                          : std::numeric_limits<double>::infinity();
  if (b.K >= 2 && b.M >= 2) {
    out.d_low = std::sqrt(double(b.M) / double(b.M - 1)) * b.gamma() /
                (b.sigma() * std::sqrt(double(b.K * (b.K - 1))));
    out.lower = clamp_probability(q_function(*out.d_low / 2));
  }
  return out;
}

inline double error_exponent(Index K) {
  if (K < 1) throw DomainError("error_exponent: K must be at least 1");
  return 1.0 / (8.0 * double(K) * double(K));
}

// Order-of-magnitude coalition size sqrt(N / ln N) beyond which any
// fingerprinting system can be overcome; the hidden constant is unknown.
inline double ergun_scale(double N) {
  if (!(N >= 2)) throw DomainError("ergun_scale: N must be at least 2");
  return std::sqrt(N / std::log(N));
}

}  // namespace etfp

#endif  // ETFP_ANALYSIS_HPP_
