#pragma once

// Wiener amalgam norms W(L^inf, A^s_r): local suprema over the cells
// lambda + C of a lattice, measured in the weighted sequence norm.

#include "tfa/errors.hpp"
#include "tfa/fft.hpp"
#include "tfa/seqspace.hpp"
#include "tfa/tfcore.hpp"
#include "tfa/weights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace tfa {

/// Closed boxes lambda + [-alpha/2, alpha/2] x [-beta/2, beta/2].
struct CellCover {
  LatticeGeometry lattice;

  static CellCover unit() { return {{1.0, 1.0}}; }
  double half_x() const { return 0.5 * lattice.alpha; }
  double half_xi() const { return 0.5 * lattice.beta; }
};

namespace detail {

/// Cell indices n with |u - n*step| <= step/2 (one or two of them).
inline std::pair<long, long> cells_containing(double u, double step) {
  const double q = u / step;
  const double eps = 1e-9;
  return {static_cast<long>(std::ceil(q - 0.5 - eps)),
          static_cast<long>(std::floor(q + 0.5 + eps))};
}

inline std::pair<long, long> cell_range(const Grid &g, double step) {
  const auto lo = cells_containing(g.point(0), step);
  const auto hi = cells_containing(g.point(static_cast<long>(g.size()) - 1), step);
  return {lo.first, hi.second};
}

} // namespace detail

/// (sup_{Y in lambda + C} |F(Y)|)_lambda over every cell meeting the box.
inline LatticeSeq local_sup(const PhaseArray &F, const CellCover &cover) {
  const TFGrid &ax = F.axes();
  const double ax_step = cover.lattice.alpha;
  const double xi_step = cover.lattice.beta;
  if (!(ax_step > 0.0) || !(xi_step > 0.0))
    throw InvalidArgument("cell cover needs positive steps");
  const auto [k0, k1] = detail::cell_range(ax.time, ax_step);
  const auto [i0, i1] = detail::cell_range(ax.freq, xi_step);
  const long nk = k1 - k0 + 1;
  const long ni = i1 - i0 + 1;
  std::vector<double> sup(static_cast<std::size_t>(nk * ni), -1.0);

  for (std::size_t p = 0; p < F.rows(); ++p) {
    const auto [ka, kb] =
        detail::cells_containing(ax.time.point(static_cast<long>(p)), ax_step);
    for (std::size_t l = 0; l < F.cols(); ++l) {
      const auto [ia, ib] =
          detail::cells_containing(ax.freq.point(static_cast<long>(l)), xi_step);
      const double v = std::abs(F(p, l));
      for (long k = ka; k <= kb; ++k)
        for (long i = ia; i <= ib; ++i) {
          double &s = sup[static_cast<std::size_t>((k - k0) * ni + (i - i0))];
          s = std::max(s, v);
        }
    }
  }
  LatticeSeq out(cover.lattice);
  for (long k = 0; k < nk; ++k)
    for (long i = 0; i < ni; ++i) {
      const double s = sup[static_cast<std::size_t>(k * ni + i)];
      if (s < 0.0)
        throw EmptyCell("cell (" + std::to_string(k + k0) + ", " +
                        std::to_string(i + i0) + ") contains no grid point");
      out.set({k + k0, i + i0}, s);
    }
  return out;
}

/// Largest number of grid points inside a single cell.
inline std::size_t max_points_per_cell(const TFGrid &ax, const CellCover &cover) {
  auto count_axis = [](const Grid &g, double step) {
    std::map<long, std::size_t> n;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto [a, b] = detail::cells_containing(g.point(static_cast<long>(j)), step);
      for (long c = a; c <= b; ++c)
        ++n[c];
    }
    std::size_t m = 0;
    for (const auto &[c, v] : n)
      m = std::max(m, v);
    return m;
  };
  return count_axis(ax.time, cover.lattice.alpha) *
         count_axis(ax.freq, cover.lattice.beta);
}

inline double wiener_norm(const PhaseArray &F, const CellCover &cover,
                          const SeqNormParams &p) {
  return seq_norm(local_sup(F, cover), p);
}

/// Linear (zero-padded) convolution dA * sum_Y F(Z - Y) G(Y). The result
/// lives on the axes Grid(2N, delta) of each input axis.
inline PhaseArray convolve2d(const PhaseArray &F, const PhaseArray &G) {
  if (!(F.axes() == G.axes()))
    throw GridMismatch("convolution inputs sampled on different grids");
  const std::size_t n1 = F.rows(), n2 = F.cols();
  const std::size_t m1 = 2 * n1, m2 = 2 * n2;
  std::vector<cplx> a(m1 * m2), b(m1 * m2);
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t l = 0; l < n2; ++l) {
      a[p * m2 + l] = F(p, l);
      b[p * m2 + l] = G(p, l);
    }
  fft::Plan fwd(m1, m2, fft::Direction::Forward);
  fft::Plan bwd(m1, m2, fft::Direction::Backward);
  fwd.execute(a);
  fwd.execute(b);
  for (std::size_t q = 0; q < a.size(); ++q)
    a[q] *= b[q];
  bwd.execute(a);
  const double scale = F.cell_area() / static_cast<double>(m1 * m2);
  for (auto &v : a)
    v *= scale;
  const TFGrid out{Grid(m1, F.axes().time.delta()), Grid(m2, F.axes().freq.delta())};
  return PhaseArray(out, std::move(a));
}

struct WienerConvolutionReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double K_prime = 0.0;
  double c_used = 1.0;
  std::size_t points_per_cell = 0;
};

/// ||F * G||_{W(cr)} <= K' ||F||_{W(r)} ||G||_{W(r)} with
/// K' = n_C dA sup_lambda sum_mu max_{nu in {-1,0,1}^2}
///      e^{c r|lambda|^p - r|mu|^p - r|lambda - mu + nu|^p},  p = 1/s.
inline WienerConvolutionReport verify_wiener_convolution(const PhaseArray &F,
                                                         const PhaseArray &G,
                                                         const CellCover &cover,
                                                         const SeqNormParams &p) {
  p.validate();
  const PhaseArray H = convolve2d(F, G);
  WienerConvolutionReport rep;
  rep.c_used = subconv_constant(p.s);
  rep.lhs = wiener_norm(H, cover, {rep.c_used * p.r, p.s});
  const double nf = wiener_norm(F, cover, p);
  const double ng = wiener_norm(G, cover, p);

  const LatticeSeq cells_g = local_sup(G, cover);
  const LatticeSeq cells_h = local_sup(H, cover);
  const auto &geom = cover.lattice;
  const double pw = 1.0 / p.s;
  auto wlog = [&](LatticeIndex l) { return p.r * std::pow(geom.radius(l), pw); };
  double kbest = 0.0;
  for (const auto &[lh, vh] : cells_h.values()) {
    const double grow = rep.c_used * wlog(lh);
    double acc = 0.0;
    for (const auto &[mu, vg] : cells_g.values()) {
      double best = -std::numeric_limits<double>::infinity();
      for (long dk = -1; dk <= 1; ++dk)
        for (long di = -1; di <= 1; ++di)
          best = std::max(best, -wlog(lh - mu + LatticeIndex{dk, di}));
      acc += std::exp(grow - wlog(mu) + best);
    }
    kbest = std::max(kbest, acc);
  }
  rep.points_per_cell = max_points_per_cell(F.axes(), cover);
  rep.K_prime = static_cast<double>(rep.points_per_cell) * F.cell_area() * kbest;
  rep.rhs = rep.K_prime * nf * ng;
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

} // namespace tfa
