#pragma once

// Weyl quantization a^w f(x) = int int a((x+y)/2, xi) e^{2 pi i (x-y) xi} f(y) dy dxi
// on the cyclic grid, Gabor matrices of a^w, and the magic formula
//   |<a^w pi(X) g, pi(Y) g>| = |V_Phi a((X+Y)/2, j(Y-X))|,  Phi = W(g, g).

#include "tfa/errors.hpp"
#include "tfa/fft.hpp"
#include "tfa/frames.hpp"
#include "tfa/tfcore.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace tfa {

/// j(x, xi) = (xi, -x).
inline PhasePoint jmap(PhasePoint z) { return {z.xi, -z.x}; }

/// [X, Y] = xi_X y - x_X eta_Y = <j(X), Y>.
inline double symplectic_pairing(PhasePoint X, PhasePoint Y) {
  return X.xi * Y.x - X.x * Y.xi;
}

/// Signal grid behind a Weyl symbol layout (2N x N, spacings delta/2, 1/(N delta)).
inline Grid signal_grid_of(const SymbolGrid &a) {
  const TFGrid &ax = a.axes();
  const std::size_t n = ax.freq.size();
  if (ax.time.size() != 2 * n)
    throw ShapeMismatch("symbol x-axis must have 2N samples for N frequency bins");
  const Grid g(n, 2.0 * ax.time.delta());
  if (!(ax.freq == g.dual()))
    throw ShapeMismatch("symbol frequency axis is not the dual of its x-axis");
  return g;
}

/// K(x_j, y_k) = int a((x_j + y_k)/2, xi) e^{2 pi i (x_j - y_k) xi} dxi as an
/// N x N matrix; a^w f = delta * K f.
inline Eigen::MatrixXcd weyl_kernel(const SymbolGrid &a) {
  const Grid g = signal_grid_of(a);
  const long n = static_cast<long>(g.size());
  // A_p(d) = (1/(N delta)) (-1)^d sum_l a(u_p, xi_l) e^{2 pi i d l / N}
  std::vector<cplx> rows(a.values().begin(), a.values().end());
  fft::Plan plan(1, g.size(), fft::Direction::Backward);
  for (long p = 0; p < 2 * n; ++p)
    plan.execute(std::span<cplx>(rows.data() + p * n, static_cast<std::size_t>(n)));
  const double w = g.freq_spacing();
  Eigen::MatrixXcd K(n, n);
  for (long j = 0; j < n; ++j)
    for (long k = 0; k < n; ++k) {
      const long d = j - k;
      K(j, k) = w * detail::parity_sign(d) * rows[(j + k) * n + detail::wrap(d, n)];
    }
  return K;
}

inline SampledSignal kernel_apply(const Eigen::MatrixXcd &K, const SampledSignal &f) {
  if (static_cast<std::size_t>(K.cols()) != f.size())
    throw ShapeMismatch("kernel and signal sizes differ");
  Eigen::Map<const Eigen::VectorXcd> fv(f.samples().data(), static_cast<long>(f.size()));
  Eigen::VectorXcd out = f.grid().delta() * (K * fv);
  return SampledSignal(f.grid(), std::vector<cplx>(out.data(), out.data() + out.size()));
}

inline SampledSignal weyl_apply(const SymbolGrid &a, const SampledSignal &f) {
  if (!(signal_grid_of(a) == f.grid()))
    throw ShapeMismatch("symbol layout does not match the signal grid");
  return kernel_apply(weyl_kernel(a), f);
}

/// |<a^w f, g> - <a, W(g, f)>| / (||a|| ||f|| ||g||).
inline double weak_form_check(const SymbolGrid &a, const SampledSignal &f,
                              const SampledSignal &g) {
  if (!(signal_grid_of(a) == f.grid()))
    throw ShapeMismatch("symbol layout does not match the signal grid");
  f.require_same_grid(g);
  const double scale = a.norm() * f.norm() * g.norm();
  if (scale == 0.0)
    return 0.0;
  const cplx lhs = inner(weyl_apply(a, f), g);
  const cplx rhs = inner(a, wigner_symbol(g, f));
  return std::abs(lhs - rhs) / scale;
}

// ---------------------------------------------------------------------------
// Gabor matrices

struct GaborMatrix {
  Lattice lattice;
  std::vector<LatticeIndex> indices; // row/column order
  Eigen::MatrixXcd entries;          // entries(row lambda, col mu)
  std::string window_id;
  std::string symbol_id;
};

/// M[lambda, mu] = <a^w pi(mu) g, pi(lambda) h>, with h = g unless a second
/// (e.g. dual) window is supplied.
inline GaborMatrix gabor_matrix(const SymbolGrid &a, const SampledSignal &g,
                                const Lattice &L, const SampledSignal *h = nullptr,
                                std::string window_id = {},
                                std::string symbol_id = {}) {
  if (!(g.grid() == L.grid()))
    throw GridMismatch("window and lattice grids differ");
  if (!(signal_grid_of(a) == L.grid()))
    throw GridMismatch("symbol layout does not match the lattice grid");
  const SampledSignal &left = h ? *h : g;
  if (!(left.grid() == L.grid()))
    throw GridMismatch("second window and lattice grids differ");
  const Eigen::MatrixXcd K = weyl_kernel(a);
  const auto idx = L.indices();
  const long m = static_cast<long>(idx.size());
  Eigen::MatrixXcd M(m, m);
  for (long col = 0; col < m; ++col) {
    const SampledSignal v = kernel_apply(K, tf_shift(g, L.point(idx[col])));
    const LatticeSeq c = gabor_coefficients(v, left, L);
    for (long row = 0; row < m; ++row)
      M(row, col) = c.at(idx[row]);
  }
  return {L, idx, std::move(M), std::move(window_id), std::move(symbol_id)};
}

// ---------------------------------------------------------------------------
// Magic formula

struct MagicPair {
  PhasePoint X;
  PhasePoint Y;
};

struct MagicRow {
  MagicPair pair;
  double lhs = 0.0; // |<a^w pi(X) g, pi(Y) g>|
  double rhs = 0.0; // |V_Phi a((X+Y)/2, j(Y-X))|
  double deviation = 0.0;
};

struct MagicReport {
  double max_deviation = 0.0; // |lhs - rhs| / max(lhs, rhs, 1e-6)
  std::vector<MagicRow> rows;
};

/// Relative deviation with an absolute floor: values below 1e-6 are compared
/// absolutely, so the test reads |lhs - rhs| <= 1e-6 max(lhs, rhs) or 1e-12.
inline double magic_deviation(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({lhs, rhs, 1e-6});
}

inline MagicReport magic_formula_check(const SymbolGrid &a, const SampledSignal &g,
                                       const std::vector<MagicPair> &pairs) {
  const Grid grid = signal_grid_of(a);
  if (!(grid == g.grid()))
    throw ShapeMismatch("symbol layout does not match the window grid");
  const long n = static_cast<long>(grid.size());
  const SymbolGrid phi = wigner_symbol(g, g);
  const Eigen::MatrixXcd K = weyl_kernel(a);
  BigStftEngine engine(a, phi);

  struct Key {
    long x, xi;
    auto operator<=>(const Key &) const = default;
  };
  std::map<Key, PhaseArray> slices;
  MagicReport rep;
  for (const auto &pr : pairs) {
    const auto bx = grid.dual().steps(pr.X.xi);
    const auto by = grid.dual().steps(pr.Y.xi);
    if (!grid.steps(pr.X.x) || !grid.steps(pr.Y.x) || !bx || !by)
      throw OffGridShift("magic-formula pair is not grid aligned");
    if ((*bx + *by) % 2 != 0)
      throw MidpointUnrepresentable(
          "frequency midpoint falls between bins (odd bin sum)");
    const long sx = *grid.steps(pr.X.x) + *grid.steps(pr.Y.x); // doubled grid
    const long sxi = (*bx + *by) / 2;

    const SampledSignal v = kernel_apply(K, tf_shift(g, pr.X));
    const double lhs = std::abs(inner(v, tf_shift(g, pr.Y)));

    auto it = slices.find({sx, sxi});
    if (it == slices.end())
      it = slices.emplace(Key{sx, sxi}, engine.slice(sx, sxi)).first;
    // zeta = j(Y - X) = (xi_Y - xi_X, -(x_Y - x_X))
    const long k1 = detail::wrap(*by - *bx + n, 2 * n);
    const long k2 = detail::wrap(-(*grid.steps(pr.Y.x) - *grid.steps(pr.X.x)) + n / 2, n);
    const double rhs = std::abs(it->second(static_cast<std::size_t>(k1),
                                           static_cast<std::size_t>(k2)));
    const double dev = magic_deviation(lhs, rhs);
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.rows.push_back({pr, lhs, rhs, dev});
  }
  return rep;
}

/// Random grid-aligned pairs in the inner half of the box whose frequency
/// midpoint is representable.
inline std::vector<MagicPair> random_magic_pairs(const Grid &grid, std::size_t count,
                                                 unsigned seed) {
  std::mt19937_64 rng(seed);
  const long q = static_cast<long>(grid.size()) / 4;
  std::uniform_int_distribution<long> pick(-q, q - 1);
  std::vector<MagicPair> out;
  out.reserve(count);
  while (out.size() < count) {
    const long x1 = pick(rng), x2 = pick(rng), b1 = pick(rng);
    long b2 = pick(rng);
    if ((b1 + b2) % 2 != 0)
      b2 += (b2 + 1 < q) ? 1 : -1;
    out.push_back({{static_cast<double>(x1) * grid.delta(),
                    static_cast<double>(b1) * grid.freq_spacing()},
                   {static_cast<double>(x2) * grid.delta(),
                    static_cast<double>(b2) * grid.freq_spacing()}});
  }
  return out;
}

} // namespace tfa
