#pragma once
//
// Dense complex block-matrix arithmetic over a base algebra M_k.
//
// An element of M_{m,n}(M_k) is stored through its inflated representation,
// the (m*k) x (n*k) complex matrix whose (i, j) block of size k x k is the
// (i, j) entry. Scalar matrices act on block matrices through inflation
// alpha -> alpha (x) 1_k, which in this layout is kron(alpha, I_k).
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "oplength/errors.hpp"

namespace oplength {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

namespace detail {

inline void require_finite(const CMatrix& m, const char* what) {
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag()))
        throw NumericError(std::string(what) + ": non-finite entry");
}

}  // namespace detail

/// Largest singular value. Empty matrices have norm 0.
inline double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  detail::require_finite(m, "operator_norm");
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

/// Upper bound on the operator norm of a residual: the Frobenius norm when
/// that is already below `cutoff`, the exact operator norm otherwise.
inline double residual_norm(const CMatrix& m, double cutoff = 1e-12) {
  const double f = m.norm();
  return f <= cutoff ? f : spectral_norm(m);
}

/// kron(s, I_k): the inflation of a scalar matrix to the block level.
inline CMatrix inflate(const CMatrix& s, Index k) {
  CMatrix out = CMatrix::Zero(s.rows() * k, s.cols() * k);
  for (Index j = 0; j < s.cols(); ++j)
    for (Index i = 0; i < s.rows(); ++i)
      if (s(i, j) != Complex(0.0))
        for (Index t = 0; t < k; ++t) out(i * k + t, j * k + t) = s(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// AlgebraElement
// ---------------------------------------------------------------------------

/// One k x k complex block: an element of the base algebra M_k.
class AlgebraElement {
 public:
  AlgebraElement() = default;

  explicit AlgebraElement(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw ShapeError("AlgebraElement: block must be square, got " + std::to_string(m_.rows()) +
                       "x" + std::to_string(m_.cols()));
  }

  static AlgebraElement identity(Index k) { return AlgebraElement(CMatrix::Identity(k, k)); }
  static AlgebraElement zero(Index k) { return AlgebraElement(CMatrix::Zero(k, k)); }

  Index order() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Index r, Index c) const { return m_(r, c); }

  AlgebraElement adjoint() const {
    AlgebraElement out(m_.adjoint());
    out.norm_ = norm_;
    return out;
  }

  /// Operator norm, computed once and carried along by copies.
  double norm() const {
    if (norm_ < 0.0) norm_ = spectral_norm(m_);
    return norm_;
  }

  bool is_hermitian(double tol) const {
    return (m_ - m_.adjoint()).norm() <= tol * std::max(1.0, m_.norm());
  }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    check_same(o);
    m_ += o.m_;
    norm_ = -1.0;
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    check_same(o);
    m_ -= o.m_;
    norm_ = -1.0;
    return *this;
  }
  AlgebraElement& operator*=(Complex s) {
    m_ *= s;
    if (norm_ >= 0.0) norm_ *= std::abs(s);
    return *this;
  }

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(AlgebraElement a, Complex s) { return a *= s; }
  friend AlgebraElement operator*(Complex s, AlgebraElement a) { return a *= s; }
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
    a.check_same(b);
    return AlgebraElement(a.m_ * b.m_);
  }

 private:
  void check_same(const AlgebraElement& o) const {
    if (o.order() != order())
      throw ShapeError("AlgebraElement: block orders differ (" + std::to_string(order()) + " vs " +
                       std::to_string(o.order()) + ")");
  }

  CMatrix m_;
  mutable double norm_ = -1.0;
};

/// kron(e, b): the element b (x) e of M_n(B) = B (x) M_n, stored with the
/// M_n factor outermost.
inline AlgebraElement tensor(const AlgebraElement& b, const CMatrix& e) {
  const Index kb = b.order();
  CMatrix out = CMatrix::Zero(e.rows() * kb, e.cols() * kb);
  for (Index j = 0; j < e.cols(); ++j)
    for (Index i = 0; i < e.rows(); ++i)
      if (e(i, j) != Complex(0.0)) out.block(i * kb, j * kb, kb, kb) = e(i, j) * b.matrix();
  return AlgebraElement(std::move(out));
}

/// Matrix unit e_rs of size n (0-based indices).
inline CMatrix matrix_unit(Index n, Index r, Index s) {
  CMatrix e = CMatrix::Zero(n, n);
  e(r, s) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// ScalarMatrix
// ---------------------------------------------------------------------------

/// A complex matrix acting on block matrices by inflation.
class ScalarMatrix {
 public:
  ScalarMatrix() = default;
  explicit ScalarMatrix(CMatrix m) : m_(std::move(m)) {}

  static ScalarMatrix identity(Index n) { return ScalarMatrix(CMatrix::Identity(n, n)); }
  static ScalarMatrix zero(Index rows, Index cols) { return ScalarMatrix(CMatrix::Zero(rows, cols)); }

  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Index r, Index c) const { return m_(r, c); }

  ScalarMatrix adjoint() const { return ScalarMatrix(m_.adjoint()); }
  double norm() const { return spectral_norm(m_); }
  CMatrix inflated(Index k) const { return inflate(m_, k); }

  friend ScalarMatrix operator*(const ScalarMatrix& a, const ScalarMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("ScalarMatrix: inner dimensions differ");
    return ScalarMatrix(a.m_ * b.m_);
  }
  friend ScalarMatrix operator*(Complex s, const ScalarMatrix& a) { return ScalarMatrix(s * a.m_); }

 private:
  CMatrix m_;
};

// ---------------------------------------------------------------------------
// DiagonalMatrix
// ---------------------------------------------------------------------------

/// Diagonal element of M_N(M_k), stored as its N diagonal entries.
class DiagonalMatrix {
 public:
  DiagonalMatrix() = default;

  DiagonalMatrix(Index order, std::vector<AlgebraElement> entries)
      : order_(order), entries_(std::move(entries)) {
    for (const auto& e : entries_)
      if (e.order() != order_) throw ShapeError("DiagonalMatrix: entry order mismatch");
  }

  static DiagonalMatrix identity(Index size, Index order) {
    return DiagonalMatrix(order, std::vector<AlgebraElement>(size, AlgebraElement::identity(order)));
  }
  static DiagonalMatrix zero(Index size, Index order) {
    return DiagonalMatrix(order, std::vector<AlgebraElement>(size, AlgebraElement::zero(order)));
  }

  Index size() const { return static_cast<Index>(entries_.size()); }
  Index order() const { return order_; }
  const std::vector<AlgebraElement>& entries() const { return entries_; }
  const AlgebraElement& operator[](Index i) const { return entries_[static_cast<std::size_t>(i)]; }

  /// max_i ||D_i||; exact for a block-diagonal operator.
  double norm() const {
    double n = 0.0;
    for (const auto& e : entries_) n = std::max(n, e.norm());
    return n;
  }

  DiagonalMatrix adjoint() const {
    std::vector<AlgebraElement> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.adjoint());
    return DiagonalMatrix(order_, std::move(out));
  }

  DiagonalMatrix scaled(Complex s) const {
    std::vector<AlgebraElement> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(s * e);
    return DiagonalMatrix(order_, std::move(out));
  }

  CMatrix inflated() const {
    const Index n = size();
    CMatrix out = CMatrix::Zero(n * order_, n * order_);
    for (Index i = 0; i < n; ++i) out.block(i * order_, i * order_, order_, order_) = (*this)[i].matrix();
    return out;
  }

 private:
  Index order_ = 0;
  std::vector<AlgebraElement> entries_;
};

// ---------------------------------------------------------------------------
// BlockMatrix
// ---------------------------------------------------------------------------

/// Element of M_{m,n}(M_k), held as its inflated (m*k) x (n*k) matrix.
class BlockMatrix {
 public:
  BlockMatrix() = default;

  BlockMatrix(Index rows, Index cols, Index order)
      : rows_(rows), cols_(cols), order_(order), m_(CMatrix::Zero(rows * order, cols * order)) {
    if (rows < 0 || cols < 0 || order <= 0) throw ShapeError("BlockMatrix: bad dimensions");
  }

  BlockMatrix(Index rows, Index cols, Index order, CMatrix inflated)
      : rows_(rows), cols_(cols), order_(order), m_(std::move(inflated)) {
    if (order <= 0 || m_.rows() != rows * order || m_.cols() != cols * order)
      throw ShapeError("BlockMatrix: inflated matrix has the wrong size");
  }

  template <class F>
  static BlockMatrix from_function(Index rows, Index cols, Index order, F&& f) {
    BlockMatrix x(rows, cols, order);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) x.set_block(i, j, f(i, j));
    return x;
  }

  static BlockMatrix identity(Index n, Index order) {
    return BlockMatrix(n, n, order, CMatrix::Identity(n * order, n * order));
  }

  Index block_rows() const { return rows_; }
  Index block_cols() const { return cols_; }
  Index order() const { return order_; }
  const CMatrix& inflated() const { return m_; }

  AlgebraElement block(Index i, Index j) const {
    return AlgebraElement(m_.block(i * order_, j * order_, order_, order_));
  }

  void set_block(Index i, Index j, const AlgebraElement& a) {
    if (a.order() != order_) throw ShapeError("BlockMatrix: entry order mismatch");
    m_.block(i * order_, j * order_, order_, order_) = a.matrix();
  }

  BlockMatrix adjoint() const { return BlockMatrix(cols_, rows_, order_, m_.adjoint()); }

  /// max_ij ||x_ij||.
  double max_entry_norm() const {
    double best = 0.0;
    for (Index i = 0; i < rows_; ++i)
      for (Index j = 0; j < cols_; ++j) best = std::max(best, block(i, j).norm());
    return best;
  }

  bool same_shape(const BlockMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && order_ == o.order_;
  }

  BlockMatrix& operator+=(const BlockMatrix& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  BlockMatrix& operator-=(const BlockMatrix& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  BlockMatrix& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend BlockMatrix operator+(BlockMatrix a, const BlockMatrix& b) { return a += b; }
  friend BlockMatrix operator-(BlockMatrix a, const BlockMatrix& b) { return a -= b; }
  friend BlockMatrix operator*(BlockMatrix a, Complex s) { return a *= s; }
  friend BlockMatrix operator*(Complex s, BlockMatrix a) { return a *= s; }

 private:
  void check_same(const BlockMatrix& o) const {
    if (!same_shape(o)) throw ShapeError("BlockMatrix: shapes differ");
  }

  Index rows_ = 0;
  Index cols_ = 0;
  Index order_ = 1;
  CMatrix m_;
};

inline double operator_norm(const BlockMatrix& x) { return spectral_norm(x.inflated()); }
inline double operator_norm(const AlgebraElement& a) { return a.norm(); }
inline double operator_norm(const ScalarMatrix& s) { return s.norm(); }
inline double operator_norm(const DiagonalMatrix& d) { return d.norm(); }

// ---------------------------------------------------------------------------
// Hermitian spectral calculus
// ---------------------------------------------------------------------------

inline constexpr double kHermitianTol = 1e-10;
/// Eigenvalues closer than this (relative to the spectral radius) form one
/// spectral component; also the inclusion slack of closed half-line thresholds.
inline constexpr double kSpectralTieTol = 1e-12;

/// Orthonormal eigenbasis, eigenvalues descending. Each eigenvector has its
/// first nonzero component real and positive; exact ties are ordered by the
/// normalized vectors, lexicographically descending.
struct HermitianEigenbasis {
  Eigen::VectorXd values;
  CMatrix vectors;  // columns
};

namespace detail {

inline void require_hermitian(const AlgebraElement& a, const char* what) {
  detail::require_finite(a.matrix(), what);
  if (!a.is_hermitian(kHermitianTol)) throw PreconditionError(std::string(what) + ": input is not Hermitian");
}

inline void normalize_phase(Eigen::Ref<CVector> v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = Complex(v(i).real(), 0.0);
      return;
    }
  }
}

inline bool lex_greater(const CVector& a, const CVector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() > b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() > b(i).imag();
  }
  return false;
}

}  // namespace detail

inline HermitianEigenbasis hermitian_eigenbasis(const AlgebraElement& a) {
  detail::require_hermitian(a, "hermitian_spectral");
  const Index k = a.order();
  CMatrix sym = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericError("hermitian_spectral: eigensolver failed");

  std::vector<std::pair<double, CVector>> pairs;
  pairs.reserve(static_cast<std::size_t>(k));
  for (Index i = k - 1; i >= 0; --i) {
    CVector v = es.eigenvectors().col(i);
    detail::normalize_phase(v);
    pairs.emplace_back(es.eigenvalues()(i), std::move(v));
  }
  // Eigen returns ascending values; after reversal only ties need ordering.
  const double scale = std::max(1.0, pairs.empty() ? 0.0 : std::max(std::abs(pairs.front().first),
                                                                      std::abs(pairs.back().first)));
  std::size_t start = 0;
  while (start < pairs.size()) {
    std::size_t end = start + 1;
    while (end < pairs.size() && pairs[start].first - pairs[end].first <= kSpectralTieTol * scale) ++end;
    std::stable_sort(pairs.begin() + static_cast<std::ptrdiff_t>(start), pairs.begin() + static_cast<std::ptrdiff_t>(end),
                     [](const auto& x, const auto& y) { return detail::lex_greater(x.second, y.second); });
    start = end;
  }

  HermitianEigenbasis out{Eigen::VectorXd(k), CMatrix(k, k)};
  for (Index i = 0; i < k; ++i) {
    out.values(i) = pairs[static_cast<std::size_t>(i)].first;
    out.vectors.col(i) = pairs[static_cast<std::size_t>(i)].second;
  }
  return out;
}

struct SpectralComponent {
  double eigenvalue;
  AlgebraElement projection;
};

/// Distinct eigenvalues (descending) with their eigenprojections.
inline std::vector<SpectralComponent> hermitian_spectral(const AlgebraElement& a) {
  const auto basis = hermitian_eigenbasis(a);
  const Index k = a.order();
  const double scale = std::max(1.0, k > 0 ? basis.values.cwiseAbs().maxCoeff() : 0.0);
  std::vector<SpectralComponent> out;
  Index start = 0;
  while (start < k) {
    Index end = start + 1;
    while (end < k && basis.values(start) - basis.values(end) <= kSpectralTieTol * scale) ++end;
    const auto cols = basis.vectors.middleCols(start, end - start);
    const double mean = basis.values.segment(start, end - start).mean();
    out.push_back({mean, AlgebraElement(cols * cols.adjoint())});
    start = end;
  }
  return out;
}

/// E_a[t, inf): projection onto the eigenvectors of a with eigenvalue >= t,
/// up to a tolerance relative to t.
inline AlgebraElement spectral_projection(const AlgebraElement& a, double t) {
  const auto basis = hermitian_eigenbasis(a);
  const Index k = a.order();
  CMatrix proj = CMatrix::Zero(k, k);
  for (Index i = 0; i < k; ++i)
    if (basis.values(i) >= t - kSpectralTieTol * std::abs(t)) proj += basis.vectors.col(i) * basis.vectors.col(i).adjoint();
  return AlgebraElement(std::move(proj));
}

/// f(a) for Hermitian a through its eigendecomposition.
inline AlgebraElement hermitian_function(const AlgebraElement& a, const std::function<double(double)>& f) {
  const auto basis = hermitian_eigenbasis(a);
  Eigen::VectorXd fv = basis.values.unaryExpr([&](double v) { return f(v); });
  return AlgebraElement(basis.vectors * fv.cast<Complex>().asDiagonal() * basis.vectors.adjoint());
}

/// Positive square root; negative rounding noise in the spectrum is clipped.
inline AlgebraElement psd_sqrt(const AlgebraElement& a) {
  return hermitian_function(a, [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

/// tau(x) = Tr(x) / k, so tau(1) = 1.
inline Complex normalized_trace(const AlgebraElement& x) {
  return x.matrix().trace() / static_cast<double>(x.order());
}

/// (sum_ij tau(x_ij^* x_ij))^{1/2}.
inline double block_l2(const BlockMatrix& x) {
  return std::sqrt(x.inflated().squaredNorm() / static_cast<double>(x.order()));
}

// ---------------------------------------------------------------------------
// Fourier unitary
// ---------------------------------------------------------------------------

/// W(j, l) = n^{-1/2} exp(2 pi i j l / n), 0-based. Unitary, symmetric and
/// every entry has modulus n^{-1/2}.
inline ScalarMatrix fourier_unitary(Index n) {
  if (n <= 0) throw PreconditionError("fourier_unitary: n must be positive");
  CMatrix w(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < n; ++j)
    for (Index l = 0; l < n; ++l) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((j * l) % n) / static_cast<double>(n);
      w(j, l) = s * Complex(std::cos(angle), std::sin(angle));
    }
  // Exact values where the angle is a multiple of pi/2.
  for (Index j = 0; j < n; ++j)
    for (Index l = 0; l < n; ++l) {
      const Index r = (4 * ((j * l) % n)) % n;
      if (r == 0) {
        const Index q = (4 * ((j * l) % n)) / n;
        const Complex unit[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        w(j, l) = s * unit[q];
      }
    }
  return ScalarMatrix(std::move(w));
}

}  // namespace oplength
