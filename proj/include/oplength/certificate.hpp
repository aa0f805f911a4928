#pragma once
//
// Factorization certificates x = alpha_0 D_1 alpha_1 ... D_d alpha_d with
// scalar alpha_i and diagonal D_i over M_k, and the operations that combine
// them without ever leaving the certificate form.
//

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "oplength/matcore.hpp"

namespace oplength {

class FactorizationCertificate {
 public:
  FactorizationCertificate() = default;

  /// Validates the shape chain: alpha_{i-1}.cols() == D_i.size() == alpha_i.rows().
  FactorizationCertificate(Index order, std::vector<ScalarMatrix> alphas, std::vector<DiagonalMatrix> diags,
                           std::optional<double> claimed_cost = std::nullopt)
      : order_(order), alphas_(std::move(alphas)), diags_(std::move(diags)) {
    if (order_ <= 0) throw ShapeError("certificate: block order must be positive");
    if (diags_.empty()) throw ShapeError("certificate: depth must be at least 1");
    if (alphas_.size() != diags_.size() + 1)
      throw ShapeError("certificate: expected " + std::to_string(diags_.size() + 1) + " scalar factors, got " +
                       std::to_string(alphas_.size()));
    for (std::size_t i = 0; i < diags_.size(); ++i) {
      const auto& d = diags_[i];
      if (d.order() != order_) throw ShapeError("certificate: D_" + std::to_string(i + 1) + " has the wrong block order");
      if (alphas_[i].cols() != d.size() || alphas_[i + 1].rows() != d.size())
        throw ShapeError("certificate: shape chain breaks at D_" + std::to_string(i + 1));
    }
    claimed_cost_ = claimed_cost ? *claimed_cost : recompute_cost();
  }

  int depth() const { return static_cast<int>(diags_.size()); }
  Index order() const { return order_; }
  Index rows() const { return alphas_.front().rows(); }
  Index cols() const { return alphas_.back().cols(); }

  /// N_0 = rows, N_1, ..., N_d, N_{d+1} = cols.
  std::vector<Index> widths() const {
    std::vector<Index> w;
    w.push_back(rows());
    for (const auto& d : diags_) w.push_back(d.size());
    w.push_back(cols());
    return w;
  }

  const std::vector<ScalarMatrix>& alphas() const { return alphas_; }
  const std::vector<DiagonalMatrix>& diags() const { return diags_; }

  /// Stored value only; cost() always recomputes.
  double claimed_cost() const { return claimed_cost_; }
  void set_claimed_cost(double c) { claimed_cost_ = c; }

  double recompute_cost() const {
    double c = 1.0;
    for (const auto& a : alphas_) c *= a.norm();
    for (const auto& d : diags_) c *= d.norm();
    return c;
  }

 private:
  Index order_ = 1;
  std::vector<ScalarMatrix> alphas_;
  std::vector<DiagonalMatrix> diags_;
  double claimed_cost_ = 0.0;
};

/// prod ||alpha_i|| * prod ||D_i||, never the stored claim.
inline double cost(const FactorizationCertificate& c) { return c.recompute_cost(); }

namespace detail {

// m * (alpha (x) I_k). The column-major layout of m viewed as
// (rows*k) x alpha.rows() makes this one dense product.
inline CMatrix times_inflated(const CMatrix& m, const CMatrix& alpha, Index k) {
  const Index r = m.rows();
  Eigen::Map<const CMatrix> view(m.data(), r * k, alpha.rows());
  CMatrix prod = view * alpha;
  return Eigen::Map<const CMatrix>(prod.data(), r, alpha.cols() * k);
}

// Projections and matrix units are mostly zero; those entries go through a
// sparse product.
inline void times_diagonal(CMatrix& m, const DiagonalMatrix& d) {
  const Index k = d.order();
  for (Index j = 0; j < d.size(); ++j) {
    const CMatrix& e = d[j].matrix();
    const Index nnz = (e.array() != Complex(0.0)).count();
    CMatrix col;
    if (4 * nnz < k * k) {
      const Eigen::SparseMatrix<Complex> sp = e.sparseView();
      col = m.middleCols(j * k, k) * sp;
    } else {
      col = m.middleCols(j * k, k) * e;
    }
    m.middleCols(j * k, k) = col;
  }
}

inline CMatrix block_diag(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline DiagonalMatrix concat(const DiagonalMatrix& a, const DiagonalMatrix& b) {
  auto e = a.entries();
  e.insert(e.end(), b.entries().begin(), b.entries().end());
  return DiagonalMatrix(a.order(), std::move(e));
}

}  // namespace detail

/// The alternating product, scalar factors inflated by the block order.
inline BlockMatrix evaluate(const FactorizationCertificate& c) {
  const Index k = c.order();
  CMatrix m = c.alphas().front().inflated(k);
  for (int i = 0; i < c.depth(); ++i) {
    detail::times_diagonal(m, c.diags()[static_cast<std::size_t>(i)]);
    m = detail::times_inflated(m, c.alphas()[static_cast<std::size_t>(i) + 1].matrix(), k);
  }
  return BlockMatrix(c.rows(), c.cols(), k, std::move(m));
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct VerificationReport {
  double recon_error = 0.0;  // ||evaluate(cert) - x||
  double cost = 0.0;
  double lower = 0.0;  // ||x||
  double ratio = 0.0;  // cost / max(lower, tiny)
  bool pass = false;
};

/// Shape mismatch throws ShapeError; a numerically wrong certificate
/// returns pass == false.
inline VerificationReport verify(const FactorizationCertificate& c, const BlockMatrix& x, double tol) {
  if (c.rows() != x.block_rows() || c.cols() != x.block_cols() || c.order() != x.order())
    throw ShapeError("verify: certificate shape " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                     " over M_" + std::to_string(c.order()) + " does not match target " +
                     std::to_string(x.block_rows()) + "x" + std::to_string(x.block_cols()) + " over M_" +
                     std::to_string(x.order()));
  VerificationReport r;
  r.recon_error = operator_norm(evaluate(c) - x);
  r.cost = cost(c);
  r.lower = operator_norm(x);
  constexpr double tiny = 1e-300;
  r.ratio = r.cost == 0.0 ? 0.0 : r.cost / std::max(r.lower, tiny);
  r.pass = r.recon_error <= tol * std::max(1.0, r.lower);
  return r;
}

// ---------------------------------------------------------------------------
// Structural operations
// ---------------------------------------------------------------------------

/// Depth-d certificate of the zero matrix: D_1 = 0, every other factor a unit.
inline FactorizationCertificate zero_certificate(Index rows, Index cols, Index order, int depth) {
  if (depth < 1) throw PreconditionError("zero_certificate: depth must be at least 1");
  std::vector<ScalarMatrix> alphas;
  std::vector<DiagonalMatrix> diags;
  alphas.push_back(ScalarMatrix(CMatrix::Identity(rows, 1)));
  for (int i = 0; i < depth; ++i) {
    diags.push_back(i == 0 ? DiagonalMatrix::zero(1, order) : DiagonalMatrix::identity(1, order));
    alphas.push_back(i + 1 == depth ? ScalarMatrix(CMatrix::Identity(1, cols)) : ScalarMatrix::identity(1));
  }
  return FactorizationCertificate(order, std::move(alphas), std::move(diags));
}

/// Appends a unit diagonal and an identity scalar factor: depth d+1, same
/// value, same cost.
inline FactorizationCertificate pad(const FactorizationCertificate& c) {
  auto alphas = c.alphas();
  auto diags = c.diags();
  diags.push_back(DiagonalMatrix::identity(c.cols(), c.order()));
  alphas.push_back(ScalarMatrix::identity(c.cols()));
  return FactorizationCertificate(c.order(), std::move(alphas), std::move(diags));
}

inline FactorizationCertificate pad_to(FactorizationCertificate c, int depth) {
  if (c.depth() > depth)
    throw PreconditionError("pad_to: certificate depth " + std::to_string(c.depth()) + " exceeds " + std::to_string(depth));
  while (c.depth() < depth) c = pad(c);
  return c;
}

/// Multiplies D_i (1-based) by s.
inline FactorizationCertificate scale_diagonal(const FactorizationCertificate& c, int i, Complex s) {
  auto diags = c.diags();
  auto& d = diags.at(static_cast<std::size_t>(i - 1));
  d = d.scaled(s);
  return FactorizationCertificate(c.order(), c.alphas(), std::move(diags));
}

/// Rescales the diagonal factors so each has norm (prod ||D_i||)^{1/d}.
/// Scalar factors are untouched. A vanishing product zeroes every D_i.
inline FactorizationCertificate balance_diagonals(const FactorizationCertificate& c) {
  const int d = c.depth();
  std::vector<double> norms;
  double prod = 1.0;
  for (const auto& D : c.diags()) {
    norms.push_back(D.norm());
    prod *= norms.back();
  }
  std::vector<DiagonalMatrix> diags;
  if (prod == 0.0) {
    for (const auto& D : c.diags()) diags.push_back(DiagonalMatrix::zero(D.size(), D.order()));
  } else {
    const double target = std::pow(prod, 1.0 / d);
    for (int i = 0; i < d; ++i) diags.push_back(c.diags()[static_cast<std::size_t>(i)].scaled(target / norms[static_cast<std::size_t>(i)]));
  }
  return FactorizationCertificate(c.order(), c.alphas(), std::move(diags));
}

/// Rescales every factor to norm cost^{1/(2d+1)}.
inline FactorizationCertificate balance_all(const FactorizationCertificate& c) {
  const double total = cost(c);
  const int nf = 2 * c.depth() + 1;
  std::vector<ScalarMatrix> alphas;
  std::vector<DiagonalMatrix> diags;
  if (total == 0.0) {
    for (const auto& a : c.alphas()) alphas.push_back(ScalarMatrix::zero(a.rows(), a.cols()));
    for (const auto& D : c.diags()) diags.push_back(DiagonalMatrix::zero(D.size(), D.order()));
  } else {
    const double target = std::pow(total, 1.0 / nf);
    for (const auto& a : c.alphas()) alphas.push_back(Complex(target / a.norm()) * a);
    for (const auto& D : c.diags()) diags.push_back(D.scaled(target / D.norm()));
  }
  return FactorizationCertificate(c.order(), std::move(alphas), std::move(diags));
}

namespace detail {

// Interior factors at unit norm, alpha_0 and alpha_d each carrying sqrt(cost).
inline FactorizationCertificate normalize_ends(const FactorizationCertificate& c) {
  const double total = cost(c);
  std::vector<ScalarMatrix> alphas;
  std::vector<DiagonalMatrix> diags;
  const std::size_t last = c.alphas().size() - 1;
  if (total == 0.0) {
    for (const auto& a : c.alphas()) alphas.push_back(ScalarMatrix::zero(a.rows(), a.cols()));
    for (const auto& D : c.diags()) diags.push_back(DiagonalMatrix::zero(D.size(), D.order()));
  } else {
    const double end = std::sqrt(total);
    for (std::size_t i = 0; i < c.alphas().size(); ++i) {
      const auto& a = c.alphas()[i];
      const double target = (i == 0 || i == last) ? end : 1.0;
      alphas.push_back(Complex(target / a.norm()) * a);
    }
    for (const auto& D : c.diags()) diags.push_back(D.scaled(1.0 / D.norm()));
  }
  return FactorizationCertificate(c.order(), std::move(alphas), std::move(diags));
}

}  // namespace detail

/// Certificate of evaluate(u) + evaluate(v) with cost <= cost(u) + cost(v).
inline FactorizationCertificate add(const FactorizationCertificate& u, const FactorizationCertificate& v) {
  if (u.depth() != v.depth()) throw ShapeError("add: depths differ");
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw ShapeError("add: outer shapes differ");
  if (u.order() != v.order()) throw ShapeError("add: block orders differ");
  const auto nu = detail::normalize_ends(u);
  const auto nv = detail::normalize_ends(v);
  const std::size_t last = nu.alphas().size() - 1;

  std::vector<ScalarMatrix> alphas;
  std::vector<DiagonalMatrix> diags;
  for (std::size_t i = 0; i <= last; ++i) {
    const CMatrix& a = nu.alphas()[i].matrix();
    const CMatrix& b = nv.alphas()[i].matrix();
    CMatrix m;
    if (i == 0) {
      m.resize(a.rows(), a.cols() + b.cols());
      m << a, b;
    } else if (i == last) {
      m.resize(a.rows() + b.rows(), a.cols());
      m << a, b;
    } else {
      m = detail::block_diag(a, b);
    }
    alphas.emplace_back(std::move(m));
  }
  for (std::size_t i = 0; i < nu.diags().size(); ++i) diags.push_back(detail::concat(nu.diags()[i], nv.diags()[i]));
  return FactorizationCertificate(u.order(), std::move(alphas), std::move(diags));
}

/// Block-diagonal direct sum of certificates of equal depth. When every
/// summand has the same scalar-factor norm profile only the diagonals are
/// rebalanced (scalars stay exactly as given); otherwise all factors are.
/// Either way cost <= max_m cost(c_m) for a common profile.
inline FactorizationCertificate direct_sum(std::span<const FactorizationCertificate> certs) {
  if (certs.empty()) throw PreconditionError("direct_sum: no summands");
  const int d = certs.front().depth();
  const Index k = certs.front().order();
  for (const auto& c : certs) {
    if (c.depth() != d) throw ShapeError("direct_sum: depths differ");
    if (c.order() != k) throw ShapeError("direct_sum: block orders differ");
  }
  bool same_profile = true;
  const auto& ref = certs.front().alphas();
  for (const auto& c : certs)
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double a = ref[i].norm();
      const double b = c.alphas()[i].norm();
      if (std::abs(a - b) > 1e-12 * std::max(1.0, a)) same_profile = false;
    }

  std::vector<FactorizationCertificate> balanced;
  balanced.reserve(certs.size());
  for (const auto& c : certs) balanced.push_back(same_profile ? balance_diagonals(c) : balance_all(c));

  std::vector<ScalarMatrix> alphas;
  std::vector<DiagonalMatrix> diags;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CMatrix m = balanced.front().alphas()[i].matrix();
    for (std::size_t j = 1; j < balanced.size(); ++j) m = detail::block_diag(m, balanced[j].alphas()[i].matrix());
    alphas.emplace_back(std::move(m));
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i) {
    DiagonalMatrix m = balanced.front().diags()[i];
    for (std::size_t j = 1; j < balanced.size(); ++j) m = detail::concat(m, balanced[j].diags()[i]);
    diags.push_back(std::move(m));
  }
  return FactorizationCertificate(k, std::move(alphas), std::move(diags));
}

// ---------------------------------------------------------------------------
// Conjugation by a factored row
// ---------------------------------------------------------------------------

/// A block matrix written as left * diag * right with scalar outer factors.
struct RowDecomposition {
  ScalarMatrix left;
  DiagonalMatrix diag;
  ScalarMatrix right;

  Index rows() const { return left.rows(); }
  Index cols() const { return right.cols(); }

  /// The adjoint, as right^* diag^* left^*.
  RowDecomposition adjoint() const { return {right.adjoint(), diag.adjoint(), left.adjoint()}; }

  BlockMatrix product() const {
    return evaluate(FactorizationCertificate(diag.order(), {left, right}, {diag}));
  }

  double cost() const { return left.norm() * diag.norm() * right.norm(); }
};

/// Certificate of (L) * evaluate(inner) * (R) at depth d+2. The outer
/// scalars of inner merge into the neighbouring scalars of L and R.
inline FactorizationCertificate conjugate(const RowDecomposition& l, const FactorizationCertificate& inner,
                                          const RowDecomposition& r) {
  if (l.diag.order() != inner.order() || r.diag.order() != inner.order())
    throw ShapeError("conjugate: block orders differ");
  if (l.right.cols() != inner.rows() || inner.cols() != r.left.rows())
    throw ShapeError("conjugate: outer factors do not chain with the inner certificate");
  if (l.left.cols() != l.diag.size() || l.diag.size() != l.right.rows() || r.left.cols() != r.diag.size() ||
      r.diag.size() != r.right.rows())
    throw ShapeError("conjugate: malformed row decomposition");

  const auto& ia = inner.alphas();
  std::vector<ScalarMatrix> alphas;
  alphas.push_back(l.left);
  alphas.push_back(l.right * ia.front());
  for (std::size_t i = 1; i + 1 < ia.size(); ++i) alphas.push_back(ia[i]);
  alphas.push_back(ia.back() * r.left);
  alphas.push_back(r.right);

  std::vector<DiagonalMatrix> diags;
  diags.push_back(l.diag);
  for (const auto& D : inner.diags()) diags.push_back(D);
  diags.push_back(r.diag);
  return FactorizationCertificate(inner.order(), std::move(alphas), std::move(diags));
}

}  // namespace oplength
