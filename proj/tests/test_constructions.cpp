#include <gtest/gtest.h>

#include <cmath>

#include "oplength/constructions.hpp"
#include "oplength/random.hpp"
#include "oracles.hpp"

using namespace oplength;

namespace {

// b (x) e written out entry by entry: rows/cols of the M_n factor outermost.
CMatrix kron_oracle(const CMatrix& e, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(e.rows() * b.rows(), e.cols() * b.cols());
  for (Index i = 0; i < e.rows(); ++i)
    for (Index j = 0; j < e.cols(); ++j)
      for (Index r = 0; r < b.rows(); ++r)
        for (Index c = 0; c < b.cols(); ++c) out(i * b.rows() + r, j * b.cols() + c) = e(i, j) * b(r, c);
  return out;
}

double recon(const FactorizationCertificate& c, const BlockMatrix& x) {
  return oracle::eig_norm(oracle::dense_evaluate(c) - x.inflated());
}

}  // namespace

TEST(UniversalLengthOne, ReconstructsWithinBudget) {
  for (Index n : {1, 2, 3, 4}) {
    const auto x = random_block_matrix(n, 3, 100 + static_cast<std::uint64_t>(n));
    const auto c = universal_length_one(x);
    EXPECT_EQ(c.widths(), (std::vector<Index>{n, n * n, n}));
    EXPECT_LE(recon(c, x), 1e-12 * std::max(1.0, x.max_entry_norm()));
    const double budget = static_cast<double>(n * n) * x.max_entry_norm();
    EXPECT_LE(cost(c), budget + 1e-12);
    EXPECT_NEAR(c.alphas()[0].norm(), std::sqrt(static_cast<double>(n)), 1e-12);
  }
}

TEST(UniversalLengthOne, IdentityCase) {
  const auto x = BlockMatrix::identity(2, 2);
  const auto c = universal_length_one(x);
  EXPECT_LE(recon(c, x), 1e-15);
  EXPECT_LE(cost(c), 4.0);
}

TEST(DiagonalCertificate, CostEqualsNorm) {
  Rng rng = make_rng(5);
  const auto x = BlockMatrix::from_function(3, 3, 2, [&](Index i, Index j) {
    return i == j ? random_element(2, rng) : AlgebraElement::zero(2);
  });
  const auto c = diagonal_certificate(x);
  EXPECT_LE(recon(c, x), 1e-14);
  EXPECT_NEAR(cost(c), oracle::eig_norm(x.inflated()), 1e-10);
  EXPECT_THROW(diagonal_certificate(random_block_matrix(2, 2, 1)), PreconditionError);
}

TEST(Tensor, MatchesEntrywiseKronecker) {
  Rng rng = make_rng(6);
  const auto b = random_element(3, rng);
  const CMatrix e = gaussian_matrix(2, 2, rng);
  EXPECT_LE((tensor(b, e).matrix() - kron_oracle(e, b.matrix())).norm(), 1e-14);
}

TEST(MatrixUnitFamily, RelationsHold) {
  for (Index kB : {1, 2, 3})
    for (Index n : {2, 3})
      for (Index r = 0; r < n; ++r)
        for (Index s = 0; s < n; ++s) {
          const auto f = matrix_unit_family(kB, n, r, s);
          const auto res = family_residuals(f);
          EXPECT_EQ(res.left_relation, 0.0);
          EXPECT_EQ(res.right_relation, 0.0);
          EXPECT_LE(res.row_sum, 1.0 + 1e-15);
          EXPECT_LE(res.column_sum, 1.0 + 1e-15);
        }
  EXPECT_THROW(matrix_unit_family(2, 2, 2, 0), PreconditionError);
}

TEST(FactorThroughFamily, RejectsBrokenFamily) {
  auto f = matrix_unit_family(2, 2, 0, 0);
  f.b[0] = f.b[0] * Complex(2.0);
  const auto x = random_block_matrix(2, 4, 7);
  EXPECT_THROW(factor_through_family(x, f), PreconditionError);
}

TEST(FactorThroughFamily, ReconstructsCompression) {
  for (Index n : {2, 3}) {
    const Index k = 2 * n;
    const auto x = random_unit_block_matrix(n, k, 200 + static_cast<std::uint64_t>(n));
    Rng rng = make_rng(201);
    // random rank-2 projections
    const CMatrix u = haar_unitary(k, rng);
    const AlgebraElement p(u.leftCols(2) * u.leftCols(2).adjoint());
    const CMatrix v = haar_unitary(k, rng);
    const AlgebraElement q(v.leftCols(2) * v.leftCols(2).adjoint());
    const auto fam = family_from_projections(p, q, n);
    const auto c = factor_through_family(x, fam);
    EXPECT_EQ(c.depth(), 3);
    const auto target = BlockMatrix::from_function(n, n, k, [&](Index i, Index j) { return p * x.block(i, j) * q; });
    EXPECT_LE(recon(c, target), 1e-9);
    double sup_a = 0.0, sup_d = 0.0;
    for (const auto& a : fam.a) sup_a = std::max(sup_a, a.norm());
    for (const auto& d : fam.d) sup_d = std::max(sup_d, d.norm());
    const double nx = oracle::eig_norm(x.inflated());
    for (const auto& e : c.diags()[1].entries()) EXPECT_LE(oracle::eig_norm(e.matrix()), nx + 1e-9);
    EXPECT_LE(cost(c), sup_a * sup_d * nx * (1.0 + 1e-9));
  }
}

TEST(ProjectionFamily, ZeroProjection) {
  const auto v = projection_family(AlgebraElement::zero(4), 3);
  ASSERT_EQ(v.size(), 3u);
  for (const auto& e : v) EXPECT_EQ(e.matrix().norm(), 0.0);
}

TEST(ProjectionFamily, RankOne) {
  const AlgebraElement p(matrix_unit(4, 0, 0));
  const auto v = projection_family(p, 4);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) {
      const CMatrix g = v[i].matrix().adjoint() * v[j].matrix();
      const CMatrix expected = i == j ? p.matrix() : CMatrix::Zero(4, 4);
      EXPECT_LE((g - expected).norm(), 1e-14);
    }
}

TEST(ProjectionFamily, RandomRankTwo) {
  Rng rng = make_rng(300);
  const CMatrix u = haar_unitary(8, rng);
  const AlgebraElement p(u.leftCols(2) * u.leftCols(2).adjoint());
  const auto v = projection_family(p, 4);
  CMatrix range_sum = CMatrix::Zero(8, 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    range_sum += v[i].matrix() * v[i].matrix().adjoint();
    for (std::size_t j = 0; j < v.size(); ++j) {
      const CMatrix g = v[i].matrix().adjoint() * v[j].matrix();
      const CMatrix expected = i == j ? p.matrix() : CMatrix::Zero(8, 8);
      EXPECT_LE(oracle::eig_norm(g - expected), 1e-10);
    }
  }
  EXPECT_LE(oracle::eig_norm(range_sum), 1.0 + 1e-10);
}

TEST(ProjectionFamily, CapacityExceeded) {
  EXPECT_THROW(projection_family(leading_projection(4, 2), 3), CapacityError);
  EXPECT_THROW(projection_family(AlgebraElement(CMatrix::Identity(2, 2) * 0.5), 2), PreconditionError);
}

TEST(CornerEmbedding, IdentityTwoByTwo) {
  const auto x = BlockMatrix::identity(2, 1);
  const auto c = corner_embedding_certificate(x, 0, 0);
  const auto target = corner_embedding(x, 0, 0);
  // [e_11 0; 0 e_11] over M_2
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  expected(2, 2) = 1.0;
  EXPECT_LE((target.inflated() - expected).norm(), 1e-15);
  EXPECT_LE(recon(c, target), 1e-12);
  EXPECT_LE(cost(c), 1.0 + 1e-12);
}

TEST(CornerEmbedding, AllCornersSmallSizes) {
  for (Index n : {2, 3})
    for (Index kB : {2, 3})
      for (Index r = 0; r < n; ++r)
        for (Index s = 0; s < n; ++s) {
          const auto x = random_block_matrix(n, kB, 400 + static_cast<std::uint64_t>(n * 10 + kB));
          const auto c = corner_embedding_certificate(x, r, s);
          const auto target = BlockMatrix::from_function(n, n, n * kB, [&](Index i, Index j) {
            return AlgebraElement(kron_oracle(matrix_unit(n, r, s), x.block(i, j).matrix()));
          });
          EXPECT_EQ(c.depth(), 3);
          EXPECT_LE(recon(c, target), 1e-9 * std::max(1.0, oracle::eig_norm(x.inflated())));
          EXPECT_LE(cost(c), oracle::eig_norm(x.inflated()) * (1.0 + 1e-9));
        }
}

TEST(Ampliation, NormPreserved) {
  const auto x = random_block_matrix(3, 2, 500);
  EXPECT_NEAR(oracle::eig_norm(ampliation(x).inflated()), oracle::eig_norm(x.inflated()), 1e-9);
}

TEST(Partition, Validation) {
  EXPECT_NO_THROW(diagonal_block_partition(6, 3));
  EXPECT_THROW(diagonal_block_partition(6, 4), PreconditionError);
  // wrong trace
  EXPECT_THROW(ProjectionPartition({leading_projection(4, 1), AlgebraElement(matrix_unit(4, 1, 1))}),
               PreconditionError);
  // not orthogonal
  EXPECT_THROW(ProjectionPartition({leading_projection(4, 2), leading_projection(4, 2)}), PreconditionError);
}

TEST(Pinch, IdempotentAndContractive) {
  const auto part = diagonal_block_partition(12, 3);
  for (std::uint64_t seed = 600; seed < 605; ++seed) {
    const auto x = random_block_matrix(3, 12, seed);
    const auto y = pinch(x, part);
    EXPECT_LE(oracle::eig_norm(pinch(y, part).inflated() - y.inflated()), 1e-12);
    EXPECT_LE(oracle::eig_norm(y.inflated()), oracle::eig_norm(x.inflated()) + 1e-9);
  }
}

TEST(PinchingRow, DecompositionMatchesDirectRow) {
  for (Index P : {2, 3, 4})
    for (Index n : {2, 3}) {
      const auto part = diagonal_block_partition(12, P);
      const auto row = pinching_row_decomposition(part, n);
      EXPECT_LE(oracle::eig_norm(row.product().inflated() - pinching_row(part, n).inflated()), 1e-12);
      EXPECT_LE(row.left.norm(), 1.0 + 1e-12);
      EXPECT_LE(row.diag.norm(), 1.0 + 1e-12);
      EXPECT_LE(row.right.norm(), 1.0 + 1e-12);
    }
}

TEST(PinchingRow, ConjugationGivesPinch) {
  // alpha diag(X_1..X_P) alpha^* = sum_m p_m X_m p_m, checked densely.
  const Index n = 2, P = 3, k = 6;
  const auto part = diagonal_block_partition(k, P);
  std::vector<BlockMatrix> xs;
  for (Index m = 0; m < P; ++m) xs.push_back(random_block_matrix(n, k, 700 + static_cast<std::uint64_t>(m)));
  CMatrix big = CMatrix::Zero(P * n * k, P * n * k);
  for (Index m = 0; m < P; ++m) big.block(m * n * k, m * n * k, n * k, n * k) = xs[static_cast<std::size_t>(m)].inflated();
  const CMatrix a = pinching_row(part, n).inflated();
  CMatrix expected = CMatrix::Zero(n * k, n * k);
  for (Index m = 0; m < P; ++m) {
    const CMatrix pm = kron_oracle(CMatrix::Identity(n, n), part[m].matrix());
    expected += pm * xs[static_cast<std::size_t>(m)].inflated() * pm;
  }
  EXPECT_LE(oracle::eig_norm(a * big * a.adjoint() - expected), 1e-10);
}

TEST(PinchedSum, CertifiesPinchOfCommonInput) {
  const Index n = 2, k = 4;
  const auto part = diagonal_block_partition(k, n);
  const auto x = random_unit_block_matrix(n, k, 800);
  std::vector<FactorizationCertificate> inner;
  for (Index m = 0; m < n; ++m) inner.push_back(pad_to(universal_length_one(x * Complex(0.5)), 3));
  const auto c = pinched_sum_certificate(inner, part);
  EXPECT_EQ(c.depth(), 5);
  EXPECT_LE(recon(c, pinch(x * Complex(0.5), part)), 1e-9);

  std::vector<FactorizationCertificate> heavy;
  for (Index m = 0; m < n; ++m) heavy.push_back(universal_length_one(x * Complex(4.0)));
  EXPECT_THROW(pinched_sum_certificate(heavy, part), PreconditionError);
}

TEST(AmpliationCertificate, DepthFiveAndNormCost) {
  for (Index n : {2, 3})
    for (Index kB : {1, 2, 3}) {
      const auto x = random_block_matrix(n, kB, 900 + static_cast<std::uint64_t>(n * 10 + kB));
      const auto c = ampliation_certificate(x);
      const auto target = BlockMatrix::from_function(n, n, n * kB, [&](Index i, Index j) {
        return AlgebraElement(kron_oracle(CMatrix::Identity(n, n), x.block(i, j).matrix()));
      });
      const double nx = oracle::eig_norm(x.inflated());
      EXPECT_EQ(c.depth(), 5);
      EXPECT_LE(recon(c, target), 1e-9 * std::max(1.0, nx));
      EXPECT_LE(cost(c), nx * (1.0 + 1e-9));
    }
}

TEST(AmpliationCertificate, ZeroInput) {
  const auto c = ampliation_certificate(BlockMatrix(2, 2, 2));
  EXPECT_EQ(cost(c), 0.0);
}
