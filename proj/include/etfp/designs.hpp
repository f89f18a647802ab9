#ifndef ETFP_DESIGNS_HPP_
#define ETFP_DESIGNS_HPP_

// Fingerprint design matrices: Sylvester Hadamard matrices, (2,k,v)-Steiner
// incidence matrices, the Steiner/Hadamard equiangular tight frame
// construction, regular simplexes and orthogonal bases.
//
// Every design is an N x M matrix whose M columns are unit-norm fingerprints
// in R^N. Columns are stored sparse: a Steiner ETF column has only r nonzeros
// out of b rows, and the 8128 x 16384 design does not fit in memory densely.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "etfp/errors.hpp"

namespace etfp {

using Index = Eigen::Index;

inline constexpr double kStructuralTolerance = 1e-10;

// ---------------------------------------------------------------------------
// Hadamard matrices

// Square +-1 matrix with pairwise orthogonal rows.
class HadamardMatrix {
 public:
  using Entries = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

  // Throws ValidationError unless `entries` is square, +-1 valued and has
  // orthogonal rows.
  explicit HadamardMatrix(Entries entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
      throw ValidationError("Hadamard matrix must be square and nonempty");
    }
    if (((entries_.array() != 1) && (entries_.array() != -1)).any()) {
      throw ValidationError("Hadamard entries must be +1 or -1");
    }
    const Entries gram = entries_ * entries_.transpose();
    const Entries expected = Entries::Identity(order(), order()) * order();
    if (gram != expected) {
      throw ValidationError("Hadamard rows are not pairwise orthogonal");
    }
  }

  Index order() const { return entries_.rows(); }
  const Entries &entries() const { return entries_; }
  int operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  Entries entries_;
};

inline constexpr int kMaxSylvesterPower = 20;

// Order-2^k Hadamard matrix from the doubling rule H_2n = [[H, H], [H, -H]].
// The first row is all +1.
inline HadamardMatrix sylvester_hadamard(int k) {
  if (k < 0) {
    throw DomainError("sylvester_hadamard: k must be nonnegative");
  }
  if (k > kMaxSylvesterPower) {
    throw CapacityError("sylvester_hadamard: k=" + std::to_string(k) +
                        " exceeds the size guard of " +
                        std::to_string(kMaxSylvesterPower));
  }
  HadamardMatrix::Entries h = HadamardMatrix::Entries::Ones(1, 1);
  for (int step = 0; step < k; ++step) {
    const Index n = h.rows();
    HadamardMatrix::Entries next(2 * n, 2 * n);
    next << h, h, h, -h;
    h = std::move(next);
  }
  return HadamardMatrix(std::move(h));
}

// ---------------------------------------------------------------------------
// Steiner systems

// b x v block/point incidence matrix of a (2,k,v)-Steiner system: every
// block holds k points, every point lies in r blocks and every pair of points
// lies in exactly one block.
class SteinerIncidence {
 public:
  using Entries = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

  // Verifies all invariants. The error message names the first offending
  // column pair (1-based) when the pair property fails.
  explicit SteinerIncidence(Entries entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.cols() < 2) {
      throw ValidationError("Steiner incidence needs at least one block and two points");
    }
    if (((entries_.array() != 0) && (entries_.array() != 1)).any()) {
      throw ValidationError("Steiner incidence entries must be 0 or 1");
    }
    const Eigen::VectorXi block_sizes = entries_.rowwise().sum();
    block_size_ = block_sizes(0);
    for (Index i = 0; i < blocks(); ++i) {
      if (block_sizes(i) != block_size_) {
        throw ValidationError("Steiner incidence: block " + std::to_string(i + 1) + " has " +
                              std::to_string(block_sizes(i)) + " points, block 1 has " +
                              std::to_string(block_size_));
      }
    }
    if (block_size_ < 2) {
      throw ValidationError("Steiner incidence: blocks must contain at least two points");
    }
    const Entries overlaps = entries_.transpose() * entries_;
    replication_ = overlaps(0, 0);
    for (Index j = 0; j < points(); ++j) {
      if (overlaps(j, j) != replication_) {
        throw ValidationError("Steiner incidence: column " + std::to_string(j + 1) + " has " +
                              std::to_string(overlaps(j, j)) + " ones, column 1 has " +
                              std::to_string(replication_));
      }
      for (Index i = 0; i < j; ++i) {
        if (overlaps(i, j) != 1) {
          throw ValidationError("Steiner incidence: columns " + std::to_string(i + 1) + " and " +
                                std::to_string(j + 1) + " share " +
                                std::to_string(overlaps(i, j)) + " rows, expected exactly 1");
        }
      }
    }
    const Index v = points();
    const Index k = block_size_;
    if (blocks() * k * (k - 1) != v * (v - 1) || replication_ * (k - 1) != v - 1) {
      throw ValidationError("Steiner incidence: counts violate b = v(v-1)/(k(k-1)), r = (v-1)/(k-1)");
    }
  }

  Index points() const { return entries_.cols(); }       // v
  Index blocks() const { return entries_.rows(); }       // b
  Index block_size() const { return block_size_; }       // k
  Index replication() const { return replication_; }     // r
  const Entries &entries() const { return entries_; }
  int operator()(Index block, Index point) const { return entries_(block, point); }

 private:
  Entries entries_;
  Index block_size_ = 0;
  Index replication_ = 0;
};

// The (2,2,v)-Steiner system: one block per unordered pair, rows ordered
// lexicographically (1,2),(1,3),...,(1,v),(2,3),...
inline SteinerIncidence steiner_pairs_incidence(Index v) {
  if (v < 2) {
    throw DomainError("steiner_pairs_incidence: v must be at least 2");
  }
  SteinerIncidence::Entries a = SteinerIncidence::Entries::Zero(v * (v - 1) / 2, v);
  Index row = 0;
  for (Index i = 0; i < v; ++i) {
    for (Index j = i + 1; j < v; ++j, ++row) {
      a(row, i) = 1;
      a(row, j) = 1;
    }
  }
  return SteinerIncidence(std::move(a));
}

// ---------------------------------------------------------------------------
// Design matrices

enum class DesignKind { etf, simplex, orthogonal, imported };

inline std::string_view to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::etf: return "etf";
    case DesignKind::simplex: return "simplex";
    case DesignKind::orthogonal: return "orthogonal";
    case DesignKind::imported: return "imported";
  }
  return "imported";
}

inline DesignKind parse_design_kind(std::string_view text) {
  if (text == "etf") return DesignKind::etf;
  if (text == "simplex") return DesignKind::simplex;
  if (text == "orthogonal") return DesignKind::orthogonal;
  if (text == "imported") return DesignKind::imported;
  throw ParseError("unknown design kind '" + std::string(text) + "'");
}

template <typename Scalar>
class DesignMatrix;

template <typename Scalar>
Scalar coherence(const DesignMatrix<Scalar> &F);

namespace detail {

// Calls fn(first_column, block) for consecutive column blocks of the Gram
// matrix F^T F, each block dense M x width. Memory stays O(M * width).
template <typename Scalar, typename Fn>
void for_each_gram_block(const Eigen::SparseMatrix<Scalar> &F, Fn &&fn, Index width = 256) {
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index m = F.cols();
  for (Index j0 = 0; j0 < m; j0 += width) {
    const Index w = std::min(width, m - j0);
    const Dense cols = Dense(F.middleCols(j0, w));
    const Dense block = F.transpose() * cols;
    fn(j0, block);
  }
}

template <typename Scalar>
Scalar max_off_diagonal_gram(const Eigen::SparseMatrix<Scalar> &F) {
  Scalar worst = 0;
  for_each_gram_block(F, [&](Index j0, const auto &block) {
    for (Index c = 0; c < block.cols(); ++c) {
      for (Index i = 0; i < block.rows(); ++i) {
        if (i != j0 + c) worst = std::max(worst, std::abs(block(i, c)));
      }
    }
  });
  return worst;
}

}  // namespace detail

// N x M ensemble of unit-norm fingerprints with its worst-case coherence
// cached. Construction checks unit norms and the kind's shape rule
// (etf: M >= N, simplex: M = N+1, orthogonal: M = N).
template <typename Scalar = double>
class DesignMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  DesignMatrix(DesignKind kind, Sparse columns) : kind_(kind), columns_(std::move(columns)) {
    validate();
    coherence_ = users() >= 2 ? detail::max_off_diagonal_gram(columns_) : Scalar(0);
  }

  // Trusts `known_coherence`; constructions that know mu in closed form use
  // this to skip the O(nnz * M) Gram scan.
  DesignMatrix(DesignKind kind, Sparse columns, Scalar known_coherence)
      : kind_(kind), columns_(std::move(columns)), coherence_(known_coherence) {
    validate();
  }

  template <typename Derived>
  DesignMatrix(DesignKind kind, const Eigen::MatrixBase<Derived> &dense)
      : DesignMatrix(kind, Sparse(dense.sparseView())) {}

  DesignKind kind() const { return kind_; }
  Index dim() const { return columns_.rows(); }    // N
  Index users() const { return columns_.cols(); }  // M
  Scalar coherence() const { return coherence_; }
  const Sparse &matrix() const { return columns_; }
  Dense dense() const { return Dense(columns_); }
  Vector column(Index m) const { return Vector(columns_.col(m)); }

 private:
  void validate() {
    columns_.makeCompressed();
    const Index n = dim();
    const Index m = users();
    if (n < 1 || m < 1) {
      throw DimensionError("design matrix must be nonempty");
    }
    if (kind_ == DesignKind::etf && m < n) {
      throw ValidationError("etf design needs M >= N");
    }
    if (kind_ == DesignKind::simplex && m != n + 1) {
      throw ValidationError("simplex design needs M = N + 1");
    }
    if (kind_ == DesignKind::orthogonal && m != n) {
      throw ValidationError("orthogonal design needs M = N");
    }
    const Scalar tol = std::max(Scalar(kStructuralTolerance),
                                Scalar(64) * std::numeric_limits<Scalar>::epsilon());
    for (Index j = 0; j < m; ++j) {
      const Scalar norm = columns_.col(j).norm();
      if (!(std::abs(norm - Scalar(1)) <= tol)) {
        throw ValidationError("design column " + std::to_string(j + 1) +
                              " is not unit norm (norm " + std::to_string(double(norm)) + ")");
      }
    }
  }

  DesignKind kind_;
  Sparse columns_;
  Scalar coherence_ = 0;
};

// Replaces the i-th one (top to bottom) in point column j of the incidence
// matrix by row i+1 of H (rows 2..r+1, skipping the all-ones row), each H row
// spanning that point's r+1 output columns, then scales by 1/sqrt(r).
// Output columns are point-major. N = b, M = v(r+1), mu = 1/r.
template <typename Scalar = double>
DesignMatrix<Scalar> steiner_etf(const SteinerIncidence &A, const HadamardMatrix &H) {
  const Index r = A.replication();
  if (H.order() != r + 1) {
    throw DimensionError("steiner_etf: Hadamard order " + std::to_string(H.order()) +
                         " must equal replication number + 1 = " + std::to_string(r + 1));
  }
  const Index v = A.points();
  const Index width = r + 1;
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(r));

  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(v * width * r));
  for (Index point = 0; point < v; ++point) {
    Index hadamard_row = 1;
    for (Index block = 0; block < A.blocks(); ++block) {
      if (A(block, point) == 0) continue;
      for (Index c = 0; c < width; ++c) {
        triplets.emplace_back(block, point * width + c, scale * Scalar(H(hadamard_row, c)));
      }
      ++hadamard_row;
    }
  }
  typename DesignMatrix<Scalar>::Sparse F(A.blocks(), v * width);
  F.setFromTriplets(triplets.begin(), triplets.end());
  return DesignMatrix<Scalar>(DesignKind::etf, std::move(F), Scalar(1) / Scalar(r));
}

// Regular simplex of N+1 unit vectors in R^N with pairwise inner product
// -1/N, built one dimension at a time: in row d the d-th vector takes the
// value that completes its unit norm, and every later vector takes the value
// that makes its inner product with vector d equal -1/N.
template <typename Scalar = double>
DesignMatrix<Scalar> simplex_design(Index N) {
  if (N < 1) {
    throw DomainError("simplex_design: N must be at least 1");
  }
  using Dense = typename DesignMatrix<Scalar>::Dense;
  const Scalar target = Scalar(-1) / Scalar(N);
  Dense S = Dense::Zero(N, N + 1);
  for (Index d = 0; d < N; ++d) {
    const Scalar partial = S.col(d).head(d).squaredNorm();
    S(d, d) = std::sqrt(Scalar(1) - partial);
    for (Index j = d + 1; j <= N; ++j) {
      S(d, j) = (target - S.col(d).head(d).dot(S.col(j).head(d))) / S(d, d);
    }
  }
  return DesignMatrix<Scalar>(DesignKind::simplex,
                              typename DesignMatrix<Scalar>::Sparse(S.sparseView()),
                              Scalar(1) / Scalar(N));
}

template <typename Scalar = double>
DesignMatrix<Scalar> orthogonal_design(Index N) {
  if (N < 1) {
    throw DomainError("orthogonal_design: N must be at least 1");
  }
  typename DesignMatrix<Scalar>::Sparse I(N, N);
  I.setIdentity();
  return DesignMatrix<Scalar>(DesignKind::orthogonal, std::move(I), Scalar(0));
}

// Worst-case coherence max_{i != j} |<f_i, f_j>|, recomputed from the columns.
template <typename Scalar>
Scalar coherence(const DesignMatrix<Scalar> &F) {
  if (F.users() < 2) {
    throw DomainError("coherence: needs at least two fingerprints");
  }
  return detail::max_off_diagonal_gram(F.matrix());
}

// Lower bound sqrt((M-N)/(N(M-1))) on the coherence of M unit vectors in R^N.
inline double welch_bound(Index N, Index M) {
  if (N < 1 || M <= N) {
    throw DomainError("welch_bound: requires M > N >= 1");
  }
  return std::sqrt(double(M - N) / (double(N) * double(M - 1)));
}

struct EtfReport {
  bool unit_norm = false;
  bool equiangular = false;
  bool tight = false;
  double norm_violation = 0;         // max_j | ||f_j|| - 1 |
  double equiangular_violation = 0;  // half-spread of |off-diagonal Gram| values
  double tight_violation = 0;        // max entry of |F F^T - (M/N) I|
  double common_inner_product = 0;   // midpoint of |off-diagonal Gram| values

  bool pass() const { return unit_norm && equiangular && tight; }
  double worst_violation() const {
    return std::max({norm_violation, equiangular_violation, tight_violation});
  }
};

// Raw-matrix form; accepts columns that are not unit norm.
template <typename Scalar>
EtfReport verify_etf(const Eigen::SparseMatrix<Scalar> &A, double tol = kStructuralTolerance) {
  if (!(tol > 0)) {
    throw DomainError("verify_etf: tolerance must be positive");
  }
  EtfReport report;
  const Index users = A.cols();
  const Index dim = A.rows();
  for (Index j = 0; j < users; ++j) {
    report.norm_violation =
        std::max(report.norm_violation, double(std::abs(A.col(j).norm() - Scalar(1))));
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0;
  detail::for_each_gram_block(A, [&](Index j0, const auto &block) {
    for (Index c = 0; c < block.cols(); ++c) {
      for (Index i = 0; i < block.rows(); ++i) {
        if (i == j0 + c) continue;
        const double magnitude = std::abs(double(block(i, c)));
        lo = std::min(lo, magnitude);
        hi = std::max(hi, magnitude);
      }
    }
  });
  if (users >= 2) {
    report.common_inner_product = 0.5 * (lo + hi);
    report.equiangular_violation = 0.5 * (hi - lo);
  }

  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Dense frame = Dense(A * A.transpose());
  const Scalar ratio = Scalar(users) / Scalar(dim);
  const Dense target = Dense::Identity(dim, dim) * ratio;
  report.tight_violation = double((frame - target).cwiseAbs().maxCoeff());

  report.unit_norm = report.norm_violation <= tol;
  report.equiangular = report.equiangular_violation <= tol;
  report.tight = report.tight_violation <= tol;
  return report;
}

template <typename Scalar>
EtfReport verify_etf(const DesignMatrix<Scalar> &F, double tol = kStructuralTolerance) {
  return verify_etf(F.matrix(), tol);
}

}  // namespace etfp

#endif  // ETFP_DESIGNS_HPP_
