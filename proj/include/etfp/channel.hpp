#ifndef ETFP_CHANNEL_HPP_
#define ETFP_CHANNEL_HPP_

// Embedding x_m = s + gamma f_m, the linear-average-plus-noise collusion
// attack y = sum_k alpha_k (s + gamma f_k) + eps, forgery extraction and the
// colluders' host-recovery objective.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "etfp/designs.hpp"
#include "etfp/random.hpp"

namespace etfp {

inline constexpr double kWeightSumTolerance = 1e-9;

template <typename Scalar = double>
class HostSignal {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit HostSignal(Vector samples) : samples_(std::move(samples)) {
    if (!samples_.allFinite()) {
      throw DomainError("host signal has non-finite samples");
    }
  }
  static HostSignal zero(Index n) { return HostSignal(Vector::Zero(n)); }

  Index size() const { return samples_.size(); }
  const Vector &samples() const { return samples_; }

 private:
  Vector samples_;
};

// Fingerprint energy: D_f per dimension, gamma^2 = N D_f in total.
class EmbeddingParams {
 public:
  EmbeddingParams(Index dim, double per_dim_energy) : dim_(dim), per_dim_energy_(per_dim_energy) {
    if (dim < 1) throw DomainError("EmbeddingParams: dimension must be positive");
    if (!(per_dim_energy > 0) || !std::isfinite(per_dim_energy)) {
      throw DomainError("EmbeddingParams: D_f must be positive and finite");
    }
  }

  Index dim() const { return dim_; }
  double per_dim_energy() const { return per_dim_energy_; }
  double gamma2() const { return double(dim_) * per_dim_energy_; }
  double gamma() const { return std::sqrt(gamma2()); }

 private:
  Index dim_;
  double per_dim_energy_;
};

// Coalition (0-based user indices, strictly increasing), matching weights,
// per-dimension noise power and the noise seed.
struct AttackSpec {
  std::vector<Index> coalition;
  std::vector<double> weights;
  double noise_sigma2 = 0;
  std::uint64_t seed = 0;

  static AttackSpec uniform(std::vector<Index> members, double sigma2, std::uint64_t seed) {
    AttackSpec a;
    a.coalition = std::move(members);
    std::sort(a.coalition.begin(), a.coalition.end());
    a.weights.assign(a.coalition.size(), 1.0 / double(a.coalition.size()));
    a.noise_sigma2 = sigma2;
    a.seed = seed;
    return a;
  }

  // Throws DomainError on an empty or out-of-range coalition, repeated
  // members, weights outside [0,1], or a weight sum off 1 by more than 1e-9.
  void validate(Index users) const {
    if (coalition.empty()) throw DomainError("attack: coalition is empty");
    if (weights.size() != coalition.size()) {
      throw DomainError("attack: weight keys must equal coalition members");
    }
    double sum = 0;
    for (std::size_t i = 0; i < coalition.size(); ++i) {
      if (coalition[i] < 0 || coalition[i] >= users) {
        throw DomainError("attack: user " + std::to_string(coalition[i] + 1) + " out of range 1.." +
                          std::to_string(users));
      }
      if (i > 0 && coalition[i] <= coalition[i - 1]) {
        throw DomainError("attack: coalition members must be distinct and sorted");
      }
      if (!(weights[i] >= 0 && weights[i] <= 1)) {
        throw DomainError("attack: weights must lie in [0, 1]");
      }
      sum += weights[i];
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      throw DomainError("attack: weights sum to " + std::to_string(sum) + ", not 1");
    }
    if (!(noise_sigma2 >= 0) || !std::isfinite(noise_sigma2)) {
      throw DomainError("attack: noise power must be nonnegative");
    }
  }
};

template <typename Scalar = double>
struct Forgery {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y;
  AttackSpec spec;
};

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> embed(const HostSignal<Scalar> &s,
                                              const DesignMatrix<Scalar> &F,
                                              const EmbeddingParams &p, Index m) {
  if (m < 0 || m >= F.users()) {
    throw DomainError("embed: user index " + std::to_string(m + 1) + " out of range");
  }
  if (s.size() != F.dim()) throw DimensionError("embed: host and design dimensions differ");
  return s.samples() + Scalar(p.gamma()) * F.column(m);
}

// Forgery minus host: gamma * sum_k alpha_k f_k + eps with eps_i ~ N(0, sigma2)
// drawn from `gen`. The caller guarantees a valid coalition.
template <typename Scalar, typename Gen>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> forge_residual(const DesignMatrix<Scalar> &F,
                                                        const EmbeddingParams &p,
                                                        std::span<const Index> coalition,
                                                        std::span<const double> weights,
                                                        double sigma2, Gen &gen) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector z(F.dim());
  if (sigma2 > 0) {
    std::normal_distribution<Scalar> normal(Scalar(0), Scalar(std::sqrt(sigma2)));
    for (Index i = 0; i < z.size(); ++i) z(i) = normal(gen);
  } else {
    z.setZero();
  }
  const Scalar gamma = Scalar(p.gamma());
  const auto &A = F.matrix();
  for (std::size_t i = 0; i < coalition.size(); ++i) {
    const Scalar w = gamma * Scalar(weights[i]);
    for (typename DesignMatrix<Scalar>::Sparse::InnerIterator it(A, coalition[i]); it; ++it) {
      z(it.row()) += w * it.value();
    }
  }
  return z;
}

// y = sum_k alpha_k (s + gamma f_k) + eps, with eps drawn from a generator
// seeded by a.seed.
template <typename Scalar>
Forgery<Scalar> forge(const HostSignal<Scalar> &s, const DesignMatrix<Scalar> &F,
                      const EmbeddingParams &p, const AttackSpec &a) {
  a.validate(F.users());
  if (s.size() != F.dim() || p.dim() != F.dim()) {
    throw DimensionError("forge: host, embedding and design dimensions differ");
  }
  Generator gen(a.seed);
  // sum_k alpha_k s = s within the weight-sum tolerance; use the literal sum
  // so the forgery is exactly linear in the weights.
  double weight_sum = 0;
  for (double w : a.weights) weight_sum += w;
  Forgery<Scalar> out;
  out.y = Scalar(weight_sum) * s.samples() +
          forge_residual<Scalar>(F, p, a.coalition, a.weights, a.noise_sigma2, gen);
  out.spec = a;
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> extract(const Forgery<Scalar> &y,
                                                const HostSignal<Scalar> &s) {
  if (y.y.size() != s.size()) throw DimensionError("extract: forgery and host dimensions differ");
  return y.y - s.samples();
}

// Watermark-to-noise ratio 10 log10(D_f / sigma^2) in dB.
inline double wnr(double per_dim_energy, double sigma2) {
  if (!(per_dim_energy > 0) || !(sigma2 > 0)) {
    throw DomainError("wnr: energies must be strictly positive");
  }
  return 10.0 * std::log10(per_dim_energy / sigma2);
}

// ---------------------------------------------------------------------------
// Host recovery

// g(x) = sum_k (||x - c_k||^2 - mean_k' ||x - c_k'||^2)^2 for copies c_k
// stored as the columns of `copies`.
template <typename DerivedX, typename DerivedC>
typename DerivedX::Scalar host_recovery_objective(const Eigen::MatrixBase<DerivedX> &x,
                                                  const Eigen::MatrixBase<DerivedC> &copies) {
  using Scalar = typename DerivedX::Scalar;
  if (copies.cols() < 2) throw DomainError("host recovery needs at least two copies");
  if (copies.rows() != x.size()) throw DimensionError("host recovery: dimension mismatch");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d = (copies.colwise() - x).colwise().squaredNorm().transpose();
  return (d.array() - d.mean()).square().sum();
}

// grad g(x) = 4 sum_k e_k (x - c_k), with e_k the centered squared distances.
template <typename DerivedX, typename DerivedC>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> host_recovery_gradient(
    const Eigen::MatrixBase<DerivedX> &x, const Eigen::MatrixBase<DerivedC> &copies) {
  using Scalar = typename DerivedX::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (copies.cols() < 2) throw DomainError("host recovery needs at least two copies");
  if (copies.rows() != x.size()) throw DimensionError("host recovery: dimension mismatch");
  const auto diff = (copies.colwise() - x).eval();  // c_k - x
  const Vector d = diff.colwise().squaredNorm().transpose();
  const Vector e = (d.array() - d.mean()).matrix();
  return Scalar(-4) * (diff * e);
}

struct HostRecoveryOptions {
  int max_iterations = 100000;
  double objective_tolerance = 1e-12;
  double armijo_slope = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
};

template <typename Scalar = double>
struct HostRecoveryResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective = 0;
  int iterations = 0;
  bool converged = false;
  // The centered copies span R^N, i.e. the fingerprints lie in no common
  // affine hyperplane; only then is the minimizer unique. Needs >= N+1 copies.
  bool well_posed = false;
};

// Gradient descent with Armijo backtracking on g. Returns once g <= the
// objective tolerance, or flags non-convergence at the iteration cap or when
// the line search can make no progress.
template <typename DerivedC, typename DerivedX>
HostRecoveryResult<typename DerivedC::Scalar> recover_host(const Eigen::MatrixBase<DerivedC> &copies,
                                                           const Eigen::MatrixBase<DerivedX> &init,
                                                           const HostRecoveryOptions &opt = {}) {
  using Scalar = typename DerivedC::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  HostRecoveryResult<Scalar> out;
  out.x = init;
  out.objective = host_recovery_objective(out.x, copies);

  const Dense centered = copies.colwise() - copies.rowwise().mean();
  Eigen::ColPivHouseholderQR<Dense> qr(centered);
  qr.setThreshold(Scalar(1e-10));
  out.well_posed = qr.rank() == copies.rows();

  Scalar step = Scalar(opt.initial_step);
  while (out.objective > Scalar(opt.objective_tolerance)) {
    if (out.iterations >= opt.max_iterations) return out;
    const Vector grad = host_recovery_gradient(out.x, copies);
    const Scalar slope = grad.squaredNorm();
    if (slope == Scalar(0)) return out;
    // Start from twice the last accepted step so the search can grow again.
    step = std::min(Scalar(opt.initial_step), step * Scalar(2));
    Vector trial;
    Scalar trial_value = 0;
    for (;;) {
      trial = out.x - step * grad;
      trial_value = host_recovery_objective(trial, copies);
      if (trial_value <= out.objective - Scalar(opt.armijo_slope) * step * slope) break;
      step *= Scalar(opt.shrink);
      if (step < std::numeric_limits<Scalar>::min()) return out;
    }
    out.x = std::move(trial);
    out.objective = trial_value;
    ++out.iterations;
  }
  out.converged = true;
  return out;
}

}  // namespace etfp

#endif  // ETFP_CHANNEL_HPP_
