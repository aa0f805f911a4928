#pragma once
//
// Splitting a block matrix of small L2 mass into a part compressed by two
// projections of trace at most 1/n and a remainder with uniformly small
// entries.
//

#include <cmath>
#include <string>

#include "oplength/matcore.hpp"

namespace oplength {

struct SpectralSplit {
  AlgebraElement a;  // (sum_ij x_ij^* x_ij)^{1/2}
  AlgebraElement b;  // (sum_ij x_ij x_ij^*)^{1/2}
  AlgebraElement p;  // E_b[eps sqrt(n), inf)
  AlgebraElement q;  // E_a[eps sqrt(n), inf)
  BlockMatrix compressed;  // [p x_ij q]
  BlockMatrix remainder;   // x - compressed
  double epsilon = 0.0;
  double threshold = 0.0;  // eps sqrt(n)
};

/// Requires block_l2(x) < eps strictly; ties up to rounding are refused.
/// Guarantees tau(p), tau(q) <= 1/n and ||y_ij|| <= 2 eps sqrt(n).
inline SpectralSplit spectral_split(const BlockMatrix& x, double eps) {
  const Index n = x.block_rows();
  if (x.block_cols() != n) throw ShapeError("spectral_split: input must be square");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw PreconditionError("spectral_split: eps must be positive");
  const double mass = block_l2(x);
  if (!(mass < eps * (1.0 - 1e-12)))
    throw PreconditionError("spectral_split: L2 mass " + std::to_string(mass) + " is not below eps " + std::to_string(eps));

  const Index k = x.order();
  CMatrix right = CMatrix::Zero(k, k);
  CMatrix left = CMatrix::Zero(k, k);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const CMatrix e = x.block(i, j).matrix();
      right += e.adjoint() * e;
      left += e * e.adjoint();
    }

  SpectralSplit s;
  s.epsilon = eps;
  s.threshold = eps * std::sqrt(static_cast<double>(n));
  s.a = psd_sqrt(AlgebraElement(0.5 * (right + right.adjoint())));
  s.b = psd_sqrt(AlgebraElement(0.5 * (left + left.adjoint())));
  s.q = spectral_projection(s.a, s.threshold);
  s.p = spectral_projection(s.b, s.threshold);
  s.compressed = BlockMatrix::from_function(n, n, k, [&](Index i, Index j) { return s.p * x.block(i, j) * s.q; });
  s.remainder = x - s.compressed;
  return s;
}

}  // namespace oplength
