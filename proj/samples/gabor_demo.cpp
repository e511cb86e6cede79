// Gaussian Gabor frame at density 1/2: bounds, canonical dual, a round trip
// and the off-diagonal decay of the Gram matrix.

#include "tfa/tfa.hpp"

#include <cmath>
#include <cstdio>
#include <random>

int main() {
  using namespace tfa;
  const Grid g(256, 1.0 / 16);
  const Lattice L(g, 16, 8);
  const SampledSignal w = make_window("gaussian", g);

  const FrameBounds fb = frame_bounds(w, L);
  std::printf("lattice alpha=%.3f beta=%.3f density=%.3f\n", L.alpha(), L.beta(), L.density());
  std::printf("frame bounds c1=%.6f c2=%.6f ratio=%.4f\n", fb.c1, fb.c2, fb.ratio());

  const DualWindowResult d = dual_window(w, L);
  std::printf("dual window: %d CG iterations, residual %.2e\n", d.iterations, d.residual);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  SampledSignal f(g);
  for (std::size_t j = 0; j < g.size(); ++j)
    f[j] = cplx(nd(rng), nd(rng));
  const SampledSignal back = reconstruct(gabor_coefficients(f, w, L), d.gamma, L);
  std::printf("round trip relative error %.2e\n", (back - f).norm() / f.norm());

  const Grid small(128, 1.0 / std::sqrt(128.0));
  const GaborMatrix M =
      gabor_matrix(make_symbol("constant", small), make_window("gaussian", small), Lattice(small, 8, 8));
  const DecayFit fit = fit_decay(envelope(M), 0.5);
  std::printf("Gram envelope: H(z) <= %.3f exp(-%.4f |z|^2)  (pi/2 = %.4f), certified=%s\n",
              fit.C, fit.epsilon, pi / 2, fit.certified ? "yes" : "no");
  return 0;
}
