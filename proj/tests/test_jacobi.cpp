#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "etfp/errors.hpp"
#include "etfp/jacobi.hpp"

using namespace etfp;

TEST(Jacobi, MatchesEigenSolver) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 12;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = g(rng);
    A = (A + A.transpose()).eval();
    Eigen::VectorXd ours = jacobi_eigenvalues(A);
    std::sort(ours.data(), ours.data() + n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    EXPECT_LT((ours - es.eigenvalues()).cwiseAbs().maxCoeff(), 1e-11) << "n=" << n;
    EXPECT_NEAR(symmetric_spectral_norm(A), es.eigenvalues().cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(Jacobi, DiagonalAndRepeated) {
  const Eigen::Vector3d d(3, -1, 2);
  Eigen::VectorXd ev = jacobi_eigenvalues(Eigen::MatrixXd(d.asDiagonal()));
  EXPECT_EQ(ev, Eigen::VectorXd(d));
  Eigen::MatrixXd J = Eigen::MatrixXd::Constant(4, 4, 1.0);
  ev = jacobi_eigenvalues(J);
  std::sort(ev.data(), ev.data() + 4);
  EXPECT_NEAR(ev(3), 4.0, 1e-13);
  EXPECT_LT(ev.head(3).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Jacobi, TwoByTwoClosedForm) {
  Eigen::Matrix2d A;
  A << 1, 1.0 / 3, 1.0 / 3, 1;
  Eigen::VectorXd ev = jacobi_eigenvalues(A);
  std::sort(ev.data(), ev.data() + 2);
  EXPECT_NEAR(ev(0), 2.0 / 3, 1e-15);
  EXPECT_NEAR(ev(1), 4.0 / 3, 1e-15);
}

TEST(Jacobi, RejectsNonSquare) {
  EXPECT_THROW(jacobi_eigenvalues(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
}
