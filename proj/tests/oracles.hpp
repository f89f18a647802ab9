#ifndef ETFP_TESTS_ORACLES_HPP_
#define ETFP_TESTS_ORACLES_HPP_

// Independent reference computations used only by the tests. None of them
// share code paths with the library routines they check.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etfp/channel.hpp"
#include "etfp/detection.hpp"
#include "etfp/experiment.hpp"
#include "etfp/random.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Adaptive Simpson on the standard normal density.
inline double simpson(const std::function<double(double)> &f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) {
    return left + right + (left + right - whole) / 15;
  }
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)> &f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 60);
}

// Upper normal tail by integrating the density from x to 40 in unit panels.
inline double q_quadrature(double x) {
  auto phi = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2 * std::numbers::pi); };
  double total = 0;
  for (double a = x; a < 40; a += 1.0) total += integrate(phi, a, std::min(a + 1.0, 40.0), 1e-16);
  return total;
}

inline MatrixXd gram(const MatrixXd &F) {
  MatrixXd G(F.cols(), F.cols());
  for (Index i = 0; i < F.cols(); ++i) {
    for (Index j = 0; j < F.cols(); ++j) {
      double s = 0;
      for (Index n = 0; n < F.rows(); ++n) s += F(n, i) * F(n, j);
      G(i, j) = s;
    }
  }
  return G;
}

inline double coherence(const MatrixXd &F) {
  const MatrixXd G = gram(F);
  double mu = 0;
  for (Index i = 0; i < G.rows(); ++i) {
    for (Index j = 0; j < G.cols(); ++j) {
      if (i != j) mu = std::max(mu, std::abs(G(i, j)));
    }
  }
  return mu;
}

// Visits every size-k subset of {0..n-1} as a bitmask (n <= 30).
inline void for_each_subset(int n, int k, const std::function<void(const std::vector<Index> &)> &fn) {
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    std::vector<Index> cols;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) cols.push_back(i);
    }
    fn(cols);
  }
}

// max over K-subsets of max |eig(G_S) - 1| via Eigen's symmetric solver.
inline double rip_delta(const MatrixXd &F, int K) {
  const MatrixXd G = gram(F);
  double delta = 0;
  for_each_subset(int(F.cols()), K, [&](const std::vector<Index> &S) {
    MatrixXd sub(S.size(), S.size());
    for (std::size_t a = 0; a < S.size(); ++a) {
      for (std::size_t b = 0; b < S.size(); ++b) sub(a, b) = G(S[a], S[b]);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sub, Eigen::EigenvaluesOnly);
    delta = std::max(delta, (es.eigenvalues().array() - 1.0).abs().maxCoeff());
  });
  return delta;
}

// min distance between uniform means of subsets containing / avoiding user m.
inline double guilty_distance(const MatrixXd &F, Index m, int K) {
  const int M = int(F.cols());
  std::vector<VectorXd> with, without;
  for (int size = 1; size <= K; ++size) {
    for_each_subset(M, size, [&](const std::vector<Index> &S) {
      VectorXd mean = VectorXd::Zero(F.rows());
      bool has = false;
      for (Index i : S) {
        mean += F.col(i);
        has = has || i == m;
      }
      mean /= double(S.size());
      (has ? with : without).push_back(mean);
    });
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto &a : with) {
    for (const auto &b : without) best = std::min(best, (a - b).norm());
  }
  return best;
}

inline VectorXd central_difference(const std::function<double(const VectorXd &)> &f,
                                   const VectorXd &x, double h) {
  VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

// Threshold sweep the slow way: draw each trial exactly as the harness
// documents, then for every grid tau run the detector and score the events.
inline etfp::SweepAggregate naive_sweep(const etfp::ExperimentConfig &cfg,
                                        const etfp::DesignMatrix<double> &F) {
  const std::vector<double> grid = cfg.tau_grid(F.coherence());
  const etfp::EmbeddingParams p(F.dim(), cfg.per_dim_energy);
  const Index M = F.users();
  etfp::SweepAggregate agg;
  for (std::size_t ki = 0; ki < cfg.k_values.size(); ++ki) {
    const Index K = cfg.k_values[ki];
    etfp::SweepRow row;
    row.K = K;
    row.tau = grid;
    row.detections.assign(grid.size(), 0);
    row.false_alarms.assign(grid.size(), 0);
    const std::vector<double> weights(std::size_t(K), 1.0 / double(K));
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      etfp::Generator gen(etfp::trial_seed(cfg.master_seed.value_or(0), ki, t));
      std::vector<Index> users(static_cast<std::size_t>(M));
      for (Index i = 0; i < M; ++i) users[std::size_t(i)] = i;
      for (Index i = 0; i < K; ++i) {
        std::uniform_int_distribution<Index> pick(i, M - 1);
        std::swap(users[std::size_t(i)], users[std::size_t(pick(gen))]);
      }
      std::vector<Index> coalition(users.begin(), users.begin() + K);
      const VectorXd z = etfp::forge_residual<double>(F, p, coalition, weights, cfg.sigma2, gen);
      std::sort(coalition.begin(), coalition.end());
      const auto T = etfp::test_statistics(z, F, p);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto ev = etfp::trial_events(etfp::focused_detect(T, grid[g]), coalition);
        row.detections[g] += ev.detected;
        row.false_alarms[g] += ev.false_alarm;
      }
      ++row.trials;
    }
    agg.rows.push_back(std::move(row));
  }
  return agg;
}

// Steiner ETF for v = 4 (pairs of four points), rows as +/-/0 strings, before
// the 1/sqrt(3) scaling.
inline const char *const kSixBySixteen[6] = {
    "+-+-+-+-00000000",
    "++--0000+-+-0000",
    "+--+00000000+-+-",
    "0000++--++--0000",
    "0000+--+0000++--",
    "00000000+--++--+",
};

inline MatrixXd six_by_sixteen() {
  MatrixXd F(6, 16);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 16; ++j) {
      const char c = kSixBySixteen[i][j];
      F(i, j) = c == '+' ? 1.0 : c == '-' ? -1.0 : 0.0;
    }
  }
  return F;
}

inline double binomial_se(double p, double n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace oracle

#endif  // ETFP_TESTS_ORACLES_HPP_
