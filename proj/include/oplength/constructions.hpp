#pragma once
//
// Explicit certificate constructions.
//
// All scalar factors produced here depend only on shape parameters (n, k,
// corner indices, partition sizes), never on the values of the input.
//

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oplength/certificate.hpp"
#include "oplength/matcore.hpp"

namespace oplength {

inline constexpr double kRelationTol = 1e-10;

// ---------------------------------------------------------------------------
// Universal depth-1 certificate
// ---------------------------------------------------------------------------

/// x = alpha_0 D alpha_1 with N = n^2 and D_{sigma(i,j)} = x_ij, where
/// sigma(i, j) = i*n + j. ||alpha_0|| = ||alpha_1|| = sqrt(n), so the cost is
/// n * max_ij ||x_ij||, well inside the n^2 * max_ij ||x_ij|| budget.
inline FactorizationCertificate universal_length_one(const BlockMatrix& x) {
  if (x.block_rows() != x.block_cols()) throw ShapeError("universal_length_one: input must be square");
  const Index n = x.block_rows();
  const Index N = n * n;
  CMatrix a0 = CMatrix::Zero(n, N);
  CMatrix a1 = CMatrix::Zero(N, n);
  std::vector<AlgebraElement> entries;
  entries.reserve(static_cast<std::size_t>(N));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index sigma = i * n + j;
      a0(i, sigma) = 1.0;
      a1(sigma, j) = 1.0;
      entries.push_back(x.block(i, j));
    }
  return FactorizationCertificate(x.order(), {ScalarMatrix(std::move(a0)), ScalarMatrix(std::move(a1))},
                                  {DiagonalMatrix(x.order(), std::move(entries))});
}

/// Depth-1 certificate of a block-diagonal x with identity scalars; cost ||x||.
inline FactorizationCertificate diagonal_certificate(const BlockMatrix& x) {
  if (x.block_rows() != x.block_cols()) throw ShapeError("diagonal_certificate: input must be square");
  const Index n = x.block_rows();
  std::vector<AlgebraElement> entries;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j)
      if (i != j && x.block(i, j).matrix().cwiseAbs().maxCoeff() != 0.0)
        throw PreconditionError("diagonal_certificate: input has nonzero off-diagonal entries");
    entries.push_back(x.block(i, i));
  }
  return FactorizationCertificate(x.order(), {ScalarMatrix::identity(n), ScalarMatrix::identity(n)},
                                  {DiagonalMatrix(x.order(), std::move(entries))});
}

// ---------------------------------------------------------------------------
// Isometry families and the D_1 W D_2 W D_3 factorization
// ---------------------------------------------------------------------------

/// Elements with a_i b_j = delta_ij p, c_i d_j = delta_ij q,
/// ||sum b_i b_i^*|| <= 1 and ||sum c_j^* c_j|| <= 1.
struct IsometryFamily {
  AlgebraElement p, q;
  std::vector<AlgebraElement> a, b, c, d;

  Index size() const { return static_cast<Index>(a.size()); }
  Index order() const { return p.order(); }
};

struct FamilyResiduals {
  double left_relation = 0.0;   // bound on max_ij ||a_i b_j - delta_ij p||
  double right_relation = 0.0;  // bound on max_ij ||c_i d_j - delta_ij q||
  double row_sum = 0.0;         // ||sum b_i b_i^*||
  double column_sum = 0.0;      // ||sum c_j^* c_j||

  bool ok(double tol) const {
    return left_relation <= tol && right_relation <= tol && row_sum <= 1.0 + tol && column_sum <= 1.0 + tol;
  }
};

inline FamilyResiduals family_residuals(const IsometryFamily& f) {
  const Index n = f.size();
  if (static_cast<Index>(f.b.size()) != n || static_cast<Index>(f.c.size()) != n || static_cast<Index>(f.d.size()) != n)
    throw ShapeError("isometry family: lists have different lengths");
  const Index k = f.order();
  FamilyResiduals r;
  CMatrix bb = CMatrix::Zero(k, k);
  CMatrix cc = CMatrix::Zero(k, k);
  for (Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    bb += f.b[ii].matrix() * f.b[ii].matrix().adjoint();
    cc += f.c[ii].matrix().adjoint() * f.c[ii].matrix();
    for (Index j = 0; j < n; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      CMatrix lhs = f.a[ii].matrix() * f.b[jj].matrix();
      CMatrix rhs = f.c[ii].matrix() * f.d[jj].matrix();
      if (i == j) {
        lhs -= f.p.matrix();
        rhs -= f.q.matrix();
      }
      r.left_relation = std::max(r.left_relation, residual_norm(lhs));
      r.right_relation = std::max(r.right_relation, residual_norm(rhs));
    }
  }
  r.row_sum = spectral_norm(bb);
  r.column_sum = spectral_norm(cc);
  return r;
}

inline void check_family(const IsometryFamily& f) {
  const auto r = family_residuals(f);
  if (!r.ok(kRelationTol))
    throw PreconditionError("isometry family relations violated: left " + std::to_string(r.left_relation) + ", right " +
                            std::to_string(r.right_relation) + ", row sum " + std::to_string(r.row_sum) +
                            ", column sum " + std::to_string(r.column_sum));
}

/// Certificate of [p x_ij q] as D_1 W D_2 W D_3 with W the Fourier unitary,
/// D_1(i) = a_i, D_3(j) = d_j and
///   D_2(m) = sum_ij eps1(i, m) b_i x_ij c_j eps2(m, j),
///   eps(i, j) = sqrt(n) * conj(W(i, j)).
/// Each ||D_2(m)|| <= ||x||, so cost <= sup ||a_i|| sup ||d_j|| ||x||.
inline FactorizationCertificate factor_through_family(const BlockMatrix& x, const IsometryFamily& fam) {
  const Index n = x.block_rows();
  if (x.block_cols() != n) throw ShapeError("factor_through_family: input must be square");
  if (fam.size() != n) throw ShapeError("factor_through_family: family size differs from matrix size");
  if (fam.order() != x.order()) throw ShapeError("factor_through_family: family lives in a different algebra");
  check_family(fam);

  const Index k = x.order();
  const ScalarMatrix w = fourier_unitary(n);
  const double rn = std::sqrt(static_cast<double>(n));

  std::vector<CMatrix> sandwiched(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      sandwiched[static_cast<std::size_t>(i * n + j)] =
          fam.b[static_cast<std::size_t>(i)].matrix() * x.block(i, j).matrix() * fam.c[static_cast<std::size_t>(j)].matrix();

  std::vector<AlgebraElement> middle;
  middle.reserve(static_cast<std::size_t>(n));
  for (Index m = 0; m < n; ++m) {
    CMatrix acc = CMatrix::Zero(k, k);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const Complex coeff = rn * std::conj(w(i, m)) * rn * std::conj(w(m, j));
        acc += coeff * sandwiched[static_cast<std::size_t>(i * n + j)];
      }
    middle.emplace_back(std::move(acc));
  }

  return FactorizationCertificate(
      k, {ScalarMatrix::identity(n), w, w, ScalarMatrix::identity(n)},
      {DiagonalMatrix(k, fam.a), DiagonalMatrix(k, std::move(middle)), DiagonalMatrix(k, fam.d)});
}

/// Matrix units in A = M_n(B): p = q = 1 (x) e_rs, a_i = c_i = 1 (x) e_ri,
/// b_j = d_j = 1 (x) e_js. Indices are 0-based.
inline IsometryFamily matrix_unit_family(Index base_order, Index n, Index r, Index s) {
  if (base_order <= 0 || n <= 0) throw PreconditionError("matrix_unit_family: sizes must be positive");
  if (r < 0 || r >= n || s < 0 || s >= n)
    throw PreconditionError("matrix_unit_family: corner index out of range");
  const auto one = AlgebraElement::identity(base_order);
  IsometryFamily f;
  f.p = tensor(one, matrix_unit(n, r, s));
  f.q = f.p;
  for (Index i = 0; i < n; ++i) {
    f.a.push_back(tensor(one, matrix_unit(n, r, i)));
    f.b.push_back(tensor(one, matrix_unit(n, i, s)));
  }
  f.c = f.a;
  f.d = f.b;
  return f;
}

inline bool is_projection(const AlgebraElement& p, double tol = kRelationTol) {
  const CMatrix& m = p.matrix();
  return (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm()) && residual_norm(m * m - m) <= tol;
}

/// Partial isometries v_1..v_n with v_i^* v_j = delta_ij p and
/// sum v_i v_i^* <= 1: v_i maps the l-th vector of the spectral basis of
/// range(p) to the standard basis vector e_{i*rank + l}.
inline std::vector<AlgebraElement> projection_family(const AlgebraElement& p, Index n) {
  if (n <= 0) throw PreconditionError("projection_family: n must be positive");
  if (!is_projection(p)) throw PreconditionError("projection_family: input is not a projection");
  const Index k = p.order();
  const auto basis = hermitian_eigenbasis(p);
  Index rank = 0;
  while (rank < k && basis.values(rank) > 0.5) ++rank;
  if (n * rank > k)
    throw CapacityError("projection_family: need n * rank(p) = " + std::to_string(n * rank) + " <= k = " +
                        std::to_string(k));
  std::vector<AlgebraElement> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    CMatrix v = CMatrix::Zero(k, k);
    for (Index l = 0; l < rank; ++l) v.row(i * rank + l) = basis.vectors.col(l).adjoint();
    out.emplace_back(std::move(v));
  }
  return out;
}

/// Family with a_i = v_i^*, b_i = v_i built over p and c_j = w_j^*, d_j = w_j over q.
inline IsometryFamily family_from_projections(const AlgebraElement& p, const AlgebraElement& q, Index n) {
  IsometryFamily f;
  f.p = p;
  f.q = q;
  for (const auto& v : projection_family(p, n)) {
    f.a.push_back(v.adjoint());
    f.b.push_back(v);
  }
  for (const auto& w : projection_family(q, n)) {
    f.c.push_back(w.adjoint());
    f.d.push_back(w);
  }
  return f;
}

/// Projection onto the first `rank` standard basis vectors of C^k.
inline AlgebraElement leading_projection(Index k, Index rank) {
  CMatrix p = CMatrix::Zero(k, k);
  for (Index i = 0; i < rank; ++i) p(i, i) = 1.0;
  return AlgebraElement(std::move(p));
}

// ---------------------------------------------------------------------------
// Corner embedding  b -> b (x) e_rs
// ---------------------------------------------------------------------------

/// Depth-3 certificate over A = M_n(B) of [x_ij (x) e_rs] with cost <= ||x||.
/// The entries are lifted to x_ij (x) e_sr so that the compression by the
/// matrix-unit family p (.) q lands on x_ij (x) e_rs.
inline FactorizationCertificate corner_embedding_certificate(const BlockMatrix& x, Index r, Index s) {
  const Index n = x.block_rows();
  if (x.block_cols() != n) throw ShapeError("corner_embedding_certificate: input must be square");
  if (r < 0 || r >= n || s < 0 || s >= n)
    throw PreconditionError("corner_embedding_certificate: corner index out of range");
  const CMatrix esr = matrix_unit(n, s, r);
  const auto lifted = BlockMatrix::from_function(n, n, n * x.order(), [&](Index i, Index j) {
    return tensor(x.block(i, j), esr);
  });
  return factor_through_family(lifted, matrix_unit_family(x.order(), n, r, s));
}

/// [x_ij (x) e_rs] over M_n(B).
inline BlockMatrix corner_embedding(const BlockMatrix& x, Index r, Index s) {
  const Index n = x.block_rows();
  const CMatrix ers = matrix_unit(n, r, s);
  return BlockMatrix::from_function(x.block_rows(), x.block_cols(), n * x.order(),
                                    [&](Index i, Index j) { return tensor(x.block(i, j), ers); });
}

/// [x_ij (x) 1_n] over M_n(B).
inline BlockMatrix ampliation(const BlockMatrix& x) {
  const Index n = x.block_rows();
  const CMatrix one = CMatrix::Identity(n, n);
  return BlockMatrix::from_function(x.block_rows(), x.block_cols(), n * x.order(),
                                    [&](Index i, Index j) { return tensor(x.block(i, j), one); });
}

// ---------------------------------------------------------------------------
// Projection partitions and pinching
// ---------------------------------------------------------------------------

/// Pairwise orthogonal projections p_1..p_n in M_k with tau(p_m) = 1/n.
class ProjectionPartition {
 public:
  explicit ProjectionPartition(std::vector<AlgebraElement> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw PreconditionError("partition: empty");
    const Index k = parts_.front().order();
    const double target = 1.0 / static_cast<double>(parts_.size());
    CMatrix sum = CMatrix::Zero(k, k);
    for (std::size_t m = 0; m < parts_.size(); ++m) {
      const auto& p = parts_[m];
      if (p.order() != k) throw ShapeError("partition: orders differ");
      if (!is_projection(p)) throw PreconditionError("partition: element " + std::to_string(m) + " is not a projection");
      if (std::abs(normalized_trace(p).real() - target) > 1e-12)
        throw PreconditionError("partition: element " + std::to_string(m) + " does not have trace 1/n");
      for (std::size_t l = 0; l < m; ++l)
        if (residual_norm(p.matrix() * parts_[l].matrix()) > kRelationTol)
          throw PreconditionError("partition: elements are not orthogonal");
      sum += p.matrix();
    }
    if (spectral_norm(sum) > 1.0 + kRelationTol) throw PreconditionError("partition: sum exceeds the identity");
  }

  Index size() const { return static_cast<Index>(parts_.size()); }
  Index order() const { return parts_.front().order(); }
  const AlgebraElement& operator[](Index m) const { return parts_[static_cast<std::size_t>(m)]; }
  const std::vector<AlgebraElement>& parts() const { return parts_; }

 private:
  std::vector<AlgebraElement> parts_;
};

/// p_m = projection onto coordinates [m k/n, (m+1) k/n); requires n | k.
/// For k = n * k_B this is 1_B (x) e_mm.
inline ProjectionPartition diagonal_block_partition(Index k, Index n) {
  if (n <= 0 || k <= 0 || k % n != 0)
    throw PreconditionError("diagonal_block_partition: n = " + std::to_string(n) + " must divide k = " + std::to_string(k));
  const Index block = k / n;
  std::vector<AlgebraElement> parts;
  for (Index m = 0; m < n; ++m) {
    CMatrix p = CMatrix::Zero(k, k);
    for (Index t = 0; t < block; ++t) p(m * block + t, m * block + t) = 1.0;
    parts.emplace_back(std::move(p));
  }
  return ProjectionPartition(std::move(parts));
}

/// Entrywise sum_m p_m x_ij p_m.
inline BlockMatrix pinch(const BlockMatrix& x, const ProjectionPartition& part) {
  if (x.order() != part.order()) throw ShapeError("pinch: partition lives in a different algebra");
  return BlockMatrix::from_function(x.block_rows(), x.block_cols(), x.order(), [&](Index i, Index j) {
    const CMatrix e = x.block(i, j).matrix();
    CMatrix acc = CMatrix::Zero(e.rows(), e.cols());
    for (const auto& p : part.parts()) acc += p.matrix() * e * p.matrix();
    return AlgebraElement(std::move(acc));
  });
}

/// alpha = [1_n (x) p_1, ..., 1_n (x) p_P] in M_{n, Pn}(M_k) written as
/// alpha_0 D W with
///   alpha_0 = P^{-1/2} [1_n ... 1_n],
///   D at position m*n + a equal to sqrt(P) sum_i conj(W(m, i)) p_i,
///   W the P x P Fourier unitary inflated by 1_n.
/// Every factor has norm at most 1.
inline RowDecomposition pinching_row_decomposition(const ProjectionPartition& part, Index n) {
  if (n <= 0) throw PreconditionError("pinching_row_decomposition: n must be positive");
  const Index P = part.size();
  const Index k = part.order();
  const double rp = std::sqrt(static_cast<double>(P));

  CMatrix a0 = CMatrix::Zero(n, P * n);
  for (Index m = 0; m < P; ++m) a0.middleCols(m * n, n) = CMatrix::Identity(n, n) / rp;

  const ScalarMatrix w = fourier_unitary(P);
  std::vector<AlgebraElement> entries;
  entries.reserve(static_cast<std::size_t>(P * n));
  for (Index m = 0; m < P; ++m) {
    CMatrix dm = CMatrix::Zero(k, k);
    for (Index i = 0; i < P; ++i) dm += rp * std::conj(w(m, i)) * part[i].matrix();
    for (Index a = 0; a < n; ++a) entries.emplace_back(dm);
  }

  return {ScalarMatrix(std::move(a0)), DiagonalMatrix(k, std::move(entries)),
          ScalarMatrix(inflate(w.matrix(), n))};
}

/// The block row [1_n (x) p_1, ..., 1_n (x) p_P], computed directly.
inline BlockMatrix pinching_row(const ProjectionPartition& part, Index n) {
  const Index P = part.size();
  return BlockMatrix::from_function(n, P * n, part.order(), [&](Index a, Index col) {
    const Index m = col / n;
    const Index b = col % n;
    return a == b ? part[m] : AlgebraElement::zero(part.order());
  });
}

/// Depth d+2 certificate of [sum_m p_m X_m(i, j) p_m] from depth-d
/// certificates of X_1..X_P, each of cost at most 1. Cost <= max_m cost(X_m).
inline FactorizationCertificate pinched_sum_certificate(std::span<const FactorizationCertificate> inner,
                                                        const ProjectionPartition& part) {
  if (static_cast<Index>(inner.size()) != part.size())
    throw ShapeError("pinched_sum_certificate: need one inner certificate per projection");
  const Index n = inner.front().rows();
  for (const auto& c : inner) {
    if (c.rows() != n || c.cols() != n) throw ShapeError("pinched_sum_certificate: inner shapes differ");
    if (c.depth() != inner.front().depth()) throw ShapeError("pinched_sum_certificate: inner depths differ");
    if (c.order() != part.order()) throw ShapeError("pinched_sum_certificate: inner certificate over another algebra");
    if (cost(c) > 1.0 + 1e-9)
      throw PreconditionError("pinched_sum_certificate: inner certificate cost " + std::to_string(cost(c)) +
                              " exceeds 1; rescale first");
  }
  const auto sum = direct_sum(inner);
  const auto row = pinching_row_decomposition(part, n);
  return conjugate(row, sum, row.adjoint());
}

/// Depth-5 certificate over A = M_n(B) of [x_ij (x) 1_n] with cost <= ||x||:
/// pinching of the corner certificates of [x_ij (x) e_mm] by p_m = 1 (x) e_mm.
inline FactorizationCertificate ampliation_certificate(const BlockMatrix& x) {
  const Index n = x.block_rows();
  if (x.block_cols() != n) throw ShapeError("ampliation_certificate: input must be square");
  const double nx = operator_norm(x);
  const BlockMatrix unit = nx > 0.0 ? x * Complex(1.0 / nx) : x;
  std::vector<FactorizationCertificate> corners;
  corners.reserve(static_cast<std::size_t>(n));
  for (Index m = 0; m < n; ++m) corners.push_back(corner_embedding_certificate(unit, m, m));
  const auto part = diagonal_block_partition(n * x.order(), n);
  const auto c = pinched_sum_certificate(corners, part);
  return nx > 0.0 ? scale_diagonal(c, 3, nx) : c;
}

// ---------------------------------------------------------------------------
// d-norm bounds
// ---------------------------------------------------------------------------

struct DNormBounds {
  double lower = 0.0;
  double upper = 0.0;
  FactorizationCertificate witness;
};

/// ||x|| <= ||x||_(d) <= cheapest available certificate (universal depth-1
/// padded to d; identity-scalar certificate when x is block diagonal).
inline DNormBounds dnorm_bounds(const BlockMatrix& x, int d) {
  if (d < 1) throw PreconditionError("dnorm_bounds: depth must be at least 1");
  DNormBounds out;
  out.lower = operator_norm(x);
  out.witness = pad_to(universal_length_one(x), d);
  out.upper = cost(out.witness);
  bool block_diagonal = true;
  for (Index i = 0; i < x.block_rows() && block_diagonal; ++i)
    for (Index j = 0; j < x.block_cols(); ++j)
      if (i != j && x.block(i, j).matrix().cwiseAbs().maxCoeff() != 0.0) {
        block_diagonal = false;
        break;
      }
  if (block_diagonal) {
    auto diag = pad_to(diagonal_certificate(x), d);
    const double c = cost(diag);
    if (c < out.upper) {
      out.upper = c;
      out.witness = std::move(diag);
    }
  }
  return out;
}

}  // namespace oplength
