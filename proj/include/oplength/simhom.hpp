#pragma once
//
// Linear maps on M_k, their amplifications u (x) id_m, and lower bounds on
// the norms of those amplifications by alternating ascent.
//
// For a map on M_k, amplification beyond level k does not increase the
// norm, so level = k gives the completely bounded norm up to the quality of
// the ascent. Only lower bounds are computed; every reported value comes
// with a stored witness.
//

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "oplength/certificate.hpp"
#include "oplength/random.hpp"

namespace oplength {

/// A linear map on M_k together with its Hilbert-Schmidt adjoint.
template <class M>
concept ElementMap = requires(const M& m, const CMatrix& x) {
  { m.order() } -> std::convertible_to<Index>;
  { m.apply(x) } -> std::convertible_to<CMatrix>;
  { m.adjoint_apply(x) } -> std::convertible_to<CMatrix>;
};

class IdentityMap {
 public:
  explicit IdentityMap(Index k) : k_(k) {}
  Index order() const { return k_; }
  CMatrix apply(const CMatrix& x) const { return x; }
  CMatrix adjoint_apply(const CMatrix& y) const { return y; }

 private:
  Index k_;
};

/// u(x) = xi^{-1} x xi: a unital homomorphism with ||u|| <= ||xi|| ||xi^{-1}||.
class SimilarityHom {
 public:
  explicit SimilarityHom(AlgebraElement xi) : xi_(std::move(xi)) {
    detail::require_finite(xi_.matrix(), "SimilarityHom");
    Eigen::JacobiSVD<CMatrix> svd(xi_.matrix());
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(s.size() - 1) > 1e-14 * s(0)))
      throw PreconditionError("SimilarityHom: xi is singular");
    inv_ = AlgebraElement(xi_.matrix().fullPivLu().inverse());
  }

  Index order() const { return xi_.order(); }
  const AlgebraElement& xi() const { return xi_; }
  const AlgebraElement& xi_inverse() const { return inv_; }

  CMatrix apply(const CMatrix& x) const { return inv_.matrix() * x * xi_.matrix(); }
  CMatrix adjoint_apply(const CMatrix& y) const { return inv_.matrix().adjoint() * y * xi_.matrix().adjoint(); }
  AlgebraElement operator()(const AlgebraElement& x) const { return AlgebraElement(apply(x.matrix())); }

  /// ||xi|| ||xi^{-1}||, an upper bound for the norm at every level.
  double upper_bound() const { return xi_.norm() * inv_.norm(); }

 private:
  AlgebraElement xi_;
  AlgebraElement inv_;
};

/// delta(x) = x T - T x, a derivation for the identity representation.
class InnerDerivation {
 public:
  explicit InnerDerivation(AlgebraElement t) : t_(std::move(t)) {}

  Index order() const { return t_.order(); }
  const AlgebraElement& generator() const { return t_; }

  CMatrix apply(const CMatrix& x) const { return x * t_.matrix() - t_.matrix() * x; }
  CMatrix adjoint_apply(const CMatrix& y) const { return y * t_.matrix().adjoint() - t_.matrix().adjoint() * y; }
  AlgebraElement operator()(const AlgebraElement& x) const { return AlgebraElement(apply(x.matrix())); }

 private:
  AlgebraElement t_;
};

/// (map (x) id_m)(X) for X in M_m(M_k): the map applied to every k x k block.
template <ElementMap Map>
CMatrix amplify(const Map& map, const CMatrix& x) {
  const Index k = map.order();
  const Index m = x.rows() / k;
  CMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) out.block(i * k, j * k, k, k) = map.apply(x.block(i * k, j * k, k, k));
  return out;
}

template <ElementMap Map>
CMatrix amplify_adjoint(const Map& map, const CMatrix& y) {
  const Index k = map.order();
  const Index m = y.rows() / k;
  CMatrix out(y.rows(), y.cols());
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) out.block(i * k, j * k, k, k) = map.adjoint_apply(y.block(i * k, j * k, k, k));
  return out;
}

struct AscentOptions {
  int max_iterations = 500;
  double stagnation = 1e-8;
};

struct NormLowerBound {
  double value = 0.0;
  Index level = 0;         // level requested; witness lives in M_level(M_k)
  Index found_at_level = 0;
  CMatrix witness;         // ||witness|| <= 1 up to rounding
  int restarts = 0;
};

namespace detail {

// Unitary polar factor U V^* of a square matrix.
inline CMatrix polar_unitary(const CMatrix& g) {
  Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace detail

/// Lower bound for ||map (x) id_level||.
///
/// Runs alternating ascent at every level 1..level with `restarts` random
/// starts each. Given X the best output pairing is the top singular pair
/// (u, v) of the image; given the pairing, the unit-ball maximizer of
/// Re <u, (map (x) id)(X) v> is the unitary polar factor of the adjoint image
/// of u v^*. Each restart draws from its own stream keyed by (seed, level,
/// restart), so the result is nondecreasing in both level and restarts.
template <ElementMap Map>
NormLowerBound norm_lower(const Map& map, Index level, int restarts, std::uint64_t seed, const AscentOptions& opt = {}) {
  if (level < 1) throw PreconditionError("norm_lower: level must be at least 1");
  if (restarts < 1) throw PreconditionError("norm_lower: need at least one restart");
  const Index k = map.order();

  NormLowerBound best;
  best.level = level;
  best.restarts = restarts;
  best.witness = CMatrix::Zero(level * k, level * k);

  for (Index l = 1; l <= level; ++l) {
    const Index dim = l * k;
    for (int r = 0; r < restarts; ++r) {
      Rng rng = make_rng(seed, (static_cast<std::uint64_t>(l) << 32) | static_cast<std::uint64_t>(r));
      CMatrix x = detail::polar_unitary(gaussian_matrix(dim, dim, rng));
      double val = spectral_norm(amplify(map, x)) / spectral_norm(x);
      for (int it = 0; it < opt.max_iterations; ++it) {
        const CMatrix y = amplify(map, x);
        Eigen::JacobiSVD<CMatrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.singularValues()(0) == 0.0) break;
        const CMatrix g = amplify_adjoint(map, svd.matrixU().col(0) * svd.matrixV().col(0).adjoint());
        if (g.norm() == 0.0) break;
        const CMatrix xn = detail::polar_unitary(g);
        const double nv = spectral_norm(amplify(map, xn)) / spectral_norm(xn);
        const double gain = nv - val;
        if (nv > val) {
          x = xn;
          val = nv;
        }
        if (gain <= opt.stagnation * std::max(1.0, val)) break;
      }
      if (val > best.value) {
        best.value = val;
        best.found_at_level = l;
        best.witness.setZero();
        best.witness.topLeftCorner(dim, dim) = x / spectral_norm(x);
      }
    }
  }
  return best;
}

/// Pushes a certificate through u: every diagonal entry D becomes u(D), the
/// scalar factors stay. Evaluates to (u (x) id)(evaluate(c)).
inline FactorizationCertificate push_through(const SimilarityHom& u, const FactorizationCertificate& c) {
  if (u.order() != c.order()) throw ShapeError("push_through: homomorphism acts on a different algebra");
  std::vector<DiagonalMatrix> diags;
  for (const auto& D : c.diags()) {
    std::vector<AlgebraElement> entries;
    entries.reserve(static_cast<std::size_t>(D.size()));
    for (const auto& e : D.entries()) entries.push_back(u(e));
    diags.emplace_back(c.order(), std::move(entries));
  }
  return FactorizationCertificate(c.order(), c.alphas(), std::move(diags));
}

/// (u (x) id)(x) applied blockwise.
inline BlockMatrix apply_entrywise(const SimilarityHom& u, const BlockMatrix& x) {
  return BlockMatrix::from_function(x.block_rows(), x.block_cols(), x.order(),
                                    [&](Index i, Index j) { return u(x.block(i, j)); });
}

struct HaagerupReport {
  double lower = 0.0;
  double oracle = 0.0;  // ||xi|| ||xi^{-1}||
  Index level = 0;
  int restarts = 0;
  bool consistent = false;  // lower <= oracle (1 + 1e-6)
  bool target_applies = false;
  bool target_met = false;  // lower >= 0.98 oracle
  NormLowerBound estimate;
};

/// On M_k the commutant is scalar, so the infimum of ||xi^{-1}|| ||xi|| over
/// all similarities implementing u is attained at xi itself; the estimate is
/// compared against that value.
inline HaagerupReport haagerup_check(const AlgebraElement& xi, Index level, int restarts, std::uint64_t seed) {
  const SimilarityHom u(xi);
  HaagerupReport rep;
  rep.estimate = norm_lower(u, level, restarts, seed);
  rep.lower = rep.estimate.value;
  rep.oracle = u.upper_bound();
  rep.level = level;
  rep.restarts = restarts;
  rep.consistent = rep.lower <= rep.oracle * (1.0 + 1e-6);
  rep.target_applies = level >= xi.order() && restarts >= 50;
  rep.target_met = rep.lower >= 0.98 * rep.oracle;
  return rep;
}

inline constexpr double kDerivationSlack = 0.05;

struct DerivationReport {
  double cb_lower = 0.0;     // norm_lower(delta, level)
  double level1_lower = 0.0; // norm_lower(delta, 1)
  double constant = 0.0;     // K d
  bool vacuous = false;      // delta == 0
  bool consistent = false;   // cb_lower <= K d level1_lower (1 + slack)
};

/// Observational comparison of two lower bounds; consistency is not a proof
/// of the inequality ||delta||_cb <= K d ||delta||.
inline DerivationReport derivation_check(const AlgebraElement& t, double K, int d, Index level, int restarts,
                                         std::uint64_t seed) {
  const InnerDerivation delta(t);
  DerivationReport rep;
  rep.constant = K * d;
  rep.cb_lower = norm_lower(delta, level, restarts, seed).value;
  rep.level1_lower = norm_lower(delta, 1, restarts, seed).value;
  rep.vacuous = rep.cb_lower == 0.0 && rep.level1_lower == 0.0;
  rep.consistent = rep.vacuous || rep.cb_lower <= rep.constant * rep.level1_lower * (1.0 + kDerivationSlack);
  return rep;
}

}  // namespace oplength
