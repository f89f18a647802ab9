#include <gtest/gtest.h>

#include <cmath>

#include "etfp/designs.hpp"
#include "etfp/errors.hpp"
#include "oracles.hpp"

using namespace etfp;

namespace {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

IntMatrix from_rows(std::initializer_list<std::initializer_list<int>> rows) {
  IntMatrix m(Index(rows.size()), Index(rows.begin()->size()));
  Index i = 0;
  for (const auto &r : rows) {
    Index j = 0;
    for (int x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

}  // namespace

TEST(Sylvester, SmallOrders) {
  EXPECT_EQ(sylvester_hadamard(0).entries(), from_rows({{1}}));
  EXPECT_EQ(sylvester_hadamard(1).entries(), from_rows({{1, 1}, {1, -1}}));
  EXPECT_EQ(sylvester_hadamard(2).entries(),
            from_rows({{1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}}));
}

TEST(Sylvester, Guards) {
  EXPECT_THROW(sylvester_hadamard(-1), DomainError);
  EXPECT_THROW(sylvester_hadamard(21), CapacityError);
}

TEST(Sylvester, RowsPairwiseOrthogonalAndDoubling) {
  for (int k = 0; k <= 10; ++k) {
    const auto H = sylvester_hadamard(k);
    const Index n = H.order();
    ASSERT_EQ(n, Index(1) << k);
    for (Index j = 0; j < n; ++j) ASSERT_EQ(H(0, j), 1);
    for (Index a = 0; a < n; ++a) {
      for (Index b = a + 1; b < n; ++b) {
        long dot = 0;
        for (Index j = 0; j < n; ++j) dot += H(a, j) * H(b, j);
        ASSERT_EQ(dot, 0) << "k=" << k << " rows " << a << "," << b;
      }
    }
    if (k > 0) {
      const auto h = sylvester_hadamard(k - 1).entries();
      const Index m = h.rows();
      EXPECT_EQ(H.entries().topLeftCorner(m, m), h);
      EXPECT_EQ(H.entries().topRightCorner(m, m), h);
      EXPECT_EQ(H.entries().bottomLeftCorner(m, m), h);
      EXPECT_EQ(H.entries().bottomRightCorner(m, m), -h);
    }
  }
}

TEST(Hadamard, RejectsBadEntries) {
  EXPECT_THROW(HadamardMatrix(from_rows({{1, 1}, {1, 1}})), ValidationError);
  EXPECT_THROW(HadamardMatrix(from_rows({{1, 2}, {1, -1}})), ValidationError);
  EXPECT_THROW(HadamardMatrix(from_rows({{1, 1, 1}, {1, -1, 1}})), ValidationError);
}

TEST(SteinerPairs, SmallCases) {
  const auto two = steiner_pairs_incidence(2);
  EXPECT_EQ(two.entries(), from_rows({{1, 1}}));
  const auto four = steiner_pairs_incidence(4);
  EXPECT_EQ(four.entries(), from_rows({{1, 1, 0, 0},
                                       {1, 0, 1, 0},
                                       {1, 0, 0, 1},
                                       {0, 1, 1, 0},
                                       {0, 1, 0, 1},
                                       {0, 0, 1, 1}}));
  EXPECT_EQ(four.points(), 4);
  EXPECT_EQ(four.blocks(), 6);
  EXPECT_EQ(four.replication(), 3);
  EXPECT_EQ(four.block_size(), 2);
  EXPECT_THROW(steiner_pairs_incidence(1), DomainError);
}

TEST(SteinerPairs, ExhaustiveSteinerProperty) {
  for (Index v = 2; v <= 40; ++v) {
    const auto A = steiner_pairs_incidence(v);
    ASSERT_EQ(A.blocks(), v * (v - 1) / 2);
    for (Index j = 0; j < v; ++j) {
      int ones = 0;
      for (Index i = 0; i < A.blocks(); ++i) ones += A(i, j);
      ASSERT_EQ(ones, v - 1);
    }
    for (Index a = 0; a < v; ++a) {
      for (Index b = a + 1; b < v; ++b) {
        int shared = 0;
        for (Index i = 0; i < A.blocks(); ++i) shared += A(i, a) * A(i, b);
        ASSERT_EQ(shared, 1) << "v=" << v << " columns " << a << "," << b;
      }
    }
  }
}

TEST(SteinerIncidence, DuplicatedPairRowNamesColumns) {
  IntMatrix m = steiner_pairs_incidence(4).entries();
  m.row(1) = m.row(0);
  try {
    SteinerIncidence bad(m);
    FAIL() << "expected a validation error";
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos) << e.what();
  }
}

TEST(SteinerIncidence, RejectsUnevenBlocksAndEntries) {
  EXPECT_THROW(SteinerIncidence(from_rows({{1, 1, 1}, {1, 1, 0}})), ValidationError);
  EXPECT_THROW(SteinerIncidence(from_rows({{1, 2}})), ValidationError);
}

TEST(SteinerEtf, MatchesGoldenMatrix) {
  const auto F = steiner_etf<double>(steiner_pairs_incidence(4), sylvester_hadamard(2));
  ASSERT_EQ(F.dim(), 6);
  ASSERT_EQ(F.users(), 16);
  EXPECT_EQ(F.kind(), DesignKind::etf);
  const Eigen::MatrixXd expected = oracle::six_by_sixteen() / std::sqrt(3.0);
  const Eigen::MatrixXd got = F.dense();
  for (Index i = 0; i < 6; ++i) {
    for (Index j = 0; j < 16; ++j) {
      EXPECT_EQ(got(i, j) > 0, expected(i, j) > 0);
      EXPECT_EQ(got(i, j) < 0, expected(i, j) < 0);
      EXPECT_NEAR(got(i, j), expected(i, j), 1e-15);
    }
  }
  EXPECT_NEAR(oracle::coherence(got), 1.0 / 3, 1e-15);
  EXPECT_NEAR(F.coherence(), welch_bound(6, 16), 1e-12);
}

TEST(SteinerEtf, OneTwentyBy256Equiangular) {
  const auto F = steiner_etf<double>(steiner_pairs_incidence(16), sylvester_hadamard(4));
  ASSERT_EQ(F.dim(), 120);
  ASSERT_EQ(F.users(), 256);
  const Eigen::MatrixXd G = oracle::gram(F.dense());
  for (Index i = 0; i < 256; ++i) {
    for (Index j = 0; j < 256; ++j) {
      if (i == j) {
        ASSERT_NEAR(G(i, j), 1.0, 1e-12);
      } else {
        ASSERT_NEAR(std::abs(G(i, j)), 1.0 / 15, 1e-12);
      }
    }
  }
}

TEST(SteinerEtf, OrderMismatch) {
  EXPECT_THROW(steiner_etf<double>(steiner_pairs_incidence(4), sylvester_hadamard(3)),
               DimensionError);
}

TEST(SteinerEtf, FloatScalar) {
  const auto F = steiner_etf<float>(steiner_pairs_incidence(8), sylvester_hadamard(3));
  EXPECT_EQ(F.dim(), 28);
  EXPECT_EQ(F.users(), 64);
  EXPECT_NEAR(F.coherence(), 1.0f / 7, 1e-6f);
}

TEST(SteinerEtf, EveryConstructionIsTightAndMeetsWelch) {
  for (int k = 1; k <= 5; ++k) {
    const Index v = Index(1) << k;
    const auto F = steiner_etf<double>(steiner_pairs_incidence(v), sylvester_hadamard(k));
    const auto report = verify_etf(F, 1e-10);
    EXPECT_TRUE(report.pass()) << "v=" << v << " worst " << report.worst_violation();
    EXPECT_NEAR(coherence(F), welch_bound(F.dim(), F.users()), 1e-12);
    const Eigen::MatrixXd D = F.dense();
    const Eigen::MatrixXd frame = D * D.transpose();
    const double ratio = double(F.users()) / double(F.dim());
    for (Index i = 0; i < frame.rows(); ++i) ASSERT_NEAR(frame(i, i), ratio, 1e-10);
  }
}

TEST(Simplex, SmallCases) {
  const auto one = simplex_design<double>(1);
  EXPECT_EQ(one.dense(), (Eigen::MatrixXd(1, 2) << 1, -1).finished());
  const Eigen::MatrixXd two = simplex_design<double>(2).dense();
  const Eigen::MatrixXd G = oracle::gram(two);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(G(i, j), i == j ? 1.0 : -0.5, 1e-12);
  }
  EXPECT_NEAR(simplex_design<double>(4).coherence(), 0.25, 1e-12);
  EXPECT_NEAR(coherence(simplex_design<double>(6)), 1.0 / 6, 1e-12);
  EXPECT_THROW(simplex_design<double>(0), DomainError);
}

TEST(Simplex, GramIdentity) {
  for (Index N = 1; N <= 40; ++N) {
    const auto S = simplex_design<double>(N);
    ASSERT_EQ(S.users(), N + 1);
    const Eigen::MatrixXd D = S.dense();
    EXPECT_DOUBLE_EQ(D(0, 0), 1.0);
    EXPECT_EQ(D.col(0).tail(N - 1).norm(), 0.0);
    const Eigen::MatrixXd G = oracle::gram(D);
    const double inv = 1.0 / double(N);
    for (Index i = 0; i <= N; ++i) {
      for (Index j = 0; j <= N; ++j) {
        ASSERT_NEAR(G(i, j), (i == j ? 1.0 + inv : 0.0) - inv, 1e-12) << "N=" << N;
      }
    }
    EXPECT_TRUE(verify_etf(S).pass()) << "N=" << N;
  }
}

TEST(Orthogonal, Identity) {
  EXPECT_EQ(orthogonal_design<double>(1).dense(), Eigen::MatrixXd::Identity(1, 1));
  const auto I3 = orthogonal_design<double>(3);
  EXPECT_EQ(I3.dense(), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(I3.coherence(), 0.0);
  EXPECT_EQ(coherence(orthogonal_design<double>(2)), 0.0);
  EXPECT_EQ(orthogonal_design<double>(195).users(), 195);
  EXPECT_THROW(orthogonal_design<double>(0), DomainError);
}

TEST(Coherence, NeedsTwoColumns) {
  EXPECT_THROW(coherence(orthogonal_design<double>(1)), DomainError);
}

TEST(Coherence, CachedValueMatchesGramScan) {
  Eigen::MatrixXd R = Eigen::MatrixXd::Random(7, 12);
  R.colwise().normalize();
  const DesignMatrix<double> F(DesignKind::imported, R);
  EXPECT_NEAR(F.coherence(), oracle::coherence(R), 1e-12);
  EXPECT_NEAR(coherence(F), oracle::coherence(R), 1e-12);
}

TEST(Welch, ClosedForm) {
  EXPECT_NEAR(welch_bound(6, 16), 1.0 / 3, 1e-15);
  EXPECT_NEAR(welch_bound(6, 7), 1.0 / 6, 1e-15);
  EXPECT_NEAR(welch_bound(120, 256), 1.0 / 15, 1e-15);
  EXPECT_THROW(welch_bound(4, 4), DomainError);
  EXPECT_THROW(welch_bound(5, 3), DomainError);
}

TEST(DesignMatrix, KindShapeAndNormChecks) {
  EXPECT_THROW(DesignMatrix<double>(DesignKind::orthogonal, Eigen::MatrixXd::Identity(3, 4)),
               ValidationError);
  EXPECT_THROW(DesignMatrix<double>(DesignKind::simplex, Eigen::MatrixXd::Identity(3, 3)),
               ValidationError);
  EXPECT_THROW(DesignMatrix<double>(DesignKind::etf, Eigen::MatrixXd::Identity(4, 3)),
               ValidationError);
  Eigen::MatrixXd scaled = Eigen::MatrixXd::Identity(3, 3);
  scaled(1, 1) = 1.0 + 1e-8;
  EXPECT_THROW(DesignMatrix<double>(DesignKind::imported, scaled), ValidationError);
}

TEST(DesignKindText, RoundTrip) {
  for (auto k : {DesignKind::etf, DesignKind::simplex, DesignKind::orthogonal, DesignKind::imported}) {
    EXPECT_EQ(parse_design_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_design_kind("gaussian"), ParseError);
}

TEST(VerifyEtf, PassAndFail) {
  const auto F = steiner_etf<double>(steiner_pairs_incidence(4), sylvester_hadamard(2));
  const auto ok = verify_etf(F, 1e-10);
  EXPECT_TRUE(ok.pass());
  EXPECT_NEAR(ok.common_inner_product, 1.0 / 3, 1e-12);
  EXPECT_TRUE(verify_etf(orthogonal_design<double>(4), 1e-10).pass());

  Eigen::SparseMatrix<double> bent = F.matrix();
  bent.coeffRef(0, 0) += 1e-3;
  const auto bad = verify_etf(bent, 1e-10);
  EXPECT_FALSE(bad.pass());
  EXPECT_GT(bad.worst_violation(), 5e-4);
  EXPECT_LT(bad.worst_violation(), 2e-3);
  EXPECT_THROW(verify_etf(F, 0.0), DomainError);
}

TEST(VerifyEtf, NonEtfFailsEquiangularity) {
  Eigen::MatrixXd R = Eigen::MatrixXd::Random(4, 9);
  R.colwise().normalize();
  const auto report = verify_etf(DesignMatrix<double>(DesignKind::imported, R));
  EXPECT_TRUE(report.unit_norm);
  EXPECT_FALSE(report.equiangular);
}
