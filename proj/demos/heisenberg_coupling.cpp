// Couple two Heisenberg Brownian motions started at (0,0,0) and (0,0,c) and
// watch the meeting probability grow with T against the closed-form bound.

#include "subriem/subriem.hpp"

#include <cstdio>

int main() {
  using namespace subriem;
  const HPoint g{0.0, 0.0, 0.0};
  const HPoint gt{0.0, 0.0, 1.0};
  McOptions opts;
  opts.seed = 11;

  std::printf("%8s %12s %10s %12s\n", "T", "P(fail)", "stderr", "bound");
  for (double T : {1.0, 4.0, 16.0, 64.0, 256.0}) {
    const auto p = failure_probability(g, gt, T, 20000, opts);
    const auto b = tv_bound(g, gt, T, BoundVariant::ProofStage);
    std::printf("%8.1f %12.5f %10.5f %12.5f\n", T, p.mean, p.std_error, b.total);
  }

  // One coupled pair in detail.
  RandomStream rng = substream(opts.seed, 0);
  for (int attempt = 0; attempt < 20; ++attempt) {
    const auto out = couple_heisenberg(g, gt, 16.0, rng);
    if (!out.success) continue;
    const auto a = to_heisenberg(out.endpoint), c = to_heisenberg(out.endpoint_tilde);
    std::printf("\nmet after %d tries: (%.6f, %.6f, %.6f) vs (%.6f, %.6f, %.6f)\n", attempt + 1, a.x1, a.x2, a.z,
                c.x1, c.x2, c.z);
    break;
  }
}
