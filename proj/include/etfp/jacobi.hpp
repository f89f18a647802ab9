#ifndef ETFP_JACOBI_HPP_
#define ETFP_JACOBI_HPP_

#include <cmath>

#include <Eigen/Dense>

#include "etfp/errors.hpp"

namespace etfp {

inline constexpr double kJacobiOffDiagonalTolerance = 1e-14;
inline constexpr int kJacobiMaxSweeps = 64;

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Sweeps until
// the off-diagonal Frobenius mass drops below 1e-14. Intended for the small
// Gram blocks of the RIP enumeration.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> jacobi_eigenvalues(
    const Eigen::MatrixBase<Derived> &symmetric) {
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (symmetric.rows() != symmetric.cols()) {
    throw DimensionError("jacobi_eigenvalues: matrix must be square");
  }
  Dense a = symmetric;
  const Eigen::Index n = a.rows();
  auto off_mass = [&] {
    Scalar sum = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
  };

  for (int sweep = 0; sweep < kJacobiMaxSweeps && off_mass() >= Scalar(kJacobiOffDiagonalTolerance);
       ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        // Rotation angle that annihilates a(p,q); t is the smaller root of
        // t^2 + 2 theta t - 1 = 0.
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  return a.diagonal();
}

// Spectral norm of a symmetric matrix: the largest |eigenvalue|.
template <typename Derived>
typename Derived::Scalar symmetric_spectral_norm(const Eigen::MatrixBase<Derived> &symmetric) {
  return jacobi_eigenvalues(symmetric).cwiseAbs().maxCoeff();
}

}  // namespace etfp

#endif  // ETFP_JACOBI_HPP_
