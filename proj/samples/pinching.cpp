// Certify a pinched random matrix at depth 5 and absorb the rest of the
// matrix with the small-mass remainder assembly.

#include <iostream>

#include "oplength/oplength.hpp"

int main() {
  using namespace oplength;

  // 3 x 3 over M_12, close to block diagonal for the partition into 3 parts.
  BlockMatrix x = random_block_matrix(3, 12, 42, Distribution::block_diagonal, 0.01);
  x = x * Complex(1.0 / operator_norm(x));

  const auto res = pinching_pipeline(x, /*with_total=*/true);
  std::cout << "pinched: depth " << res.report.depth << ", cost " << res.report.cost << " <= ||x|| = " << res.report.bound
            << ", recon " << res.report.recon_error << '\n';
  if (res.total) {
    const auto& t = res.total->report;
    std::cout << "whole x: depth " << t.depth << ", eps " << t.epsilon << ", cost " << t.cost << " <= bound " << t.bound
              << (t.pass ? "  [pass]" : "  [FAIL]") << '\n';
  }
  return res.report.pass ? 0 : 1;
}
