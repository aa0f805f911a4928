#pragma once
//
// Seeded random instances. Every generator draws from its own mt19937_64
// stream so outputs are reproducible for a fixed seed.
//

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "oplength/constructions.hpp"
#include "oplength/matcore.hpp"

namespace oplength {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Standard complex Gaussian entries (independent real and imaginary parts
/// of variance 1/2).
inline CMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(0.5));
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = dist(rng);
      const double im = dist(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of R's
/// diagonal moved into Q.
inline CMatrix haar_unitary(Index k, Rng& rng) {
  const CMatrix g = gaussian_matrix(k, k, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR();
  for (Index j = 0; j < k; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline AlgebraElement random_element(Index k, Rng& rng) { return AlgebraElement(gaussian_matrix(k, k, rng)); }

inline AlgebraElement random_hermitian(Index k, Rng& rng) {
  const CMatrix g = gaussian_matrix(k, k, rng);
  return AlgebraElement(0.5 * (g + g.adjoint()));
}

enum class Distribution { gaussian, unitary, block_diagonal };

inline Distribution parse_distribution(std::string_view s) {
  if (s == "gaussian") return Distribution::gaussian;
  if (s == "unitary") return Distribution::unitary;
  if (s == "block-diagonal" || s == "blockdiag") return Distribution::block_diagonal;
  throw PreconditionError("unknown distribution '" + std::string(s) + "'");
}

inline std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::gaussian: return "gaussian";
    case Distribution::unitary: return "unitary";
    case Distribution::block_diagonal: return "block-diagonal";
  }
  return "gaussian";
}

/// Random n x n block matrix over M_k.
///   gaussian:        independent complex Gaussian blocks
///   unitary:         independent Haar unitary blocks
///   block_diagonal:  entries pinched by the diagonal block partition of
///                    M_k into n parts, plus `noise` times Gaussian blocks
///                    (requires n | k; noise 0 gives a pinch-invariant matrix)
inline BlockMatrix random_block_matrix(Index n, Index k, std::uint64_t seed, Distribution dist = Distribution::gaussian,
                                       double noise = 0.0) {
  if (n < 1 || k < 1) throw PreconditionError("random_block_matrix: n and k must be positive");
  Rng rng = make_rng(seed);
  switch (dist) {
    case Distribution::gaussian:
      return BlockMatrix(n, n, k, gaussian_matrix(n * k, n * k, rng));
    case Distribution::unitary:
      return BlockMatrix::from_function(n, n, k, [&](Index, Index) { return AlgebraElement(haar_unitary(k, rng)); });
    case Distribution::block_diagonal: {
      const auto part = diagonal_block_partition(k, n);
      BlockMatrix x = pinch(BlockMatrix(n, n, k, gaussian_matrix(n * k, n * k, rng)), part);
      if (noise != 0.0) x += BlockMatrix(n, n, k, gaussian_matrix(n * k, n * k, rng)) * Complex(noise);
      return x;
    }
  }
  throw PreconditionError("random_block_matrix: bad distribution");
}

/// Random instance rescaled to operator norm `norm`.
inline BlockMatrix random_unit_block_matrix(Index n, Index k, std::uint64_t seed, double norm = 1.0) {
  BlockMatrix x = random_block_matrix(n, k, seed);
  return x * Complex(norm / operator_norm(x));
}

}  // namespace oplength
