#pragma once

// Direct quadrature sums used as references. No FFTs here.

#include "tfa/tfcore.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using tfa::cplx;
using tfa::I;
using tfa::pi;

inline long wrap(long i, long n) { return ((i % n) + n) % n; }

inline cplx expi(double phase) { return std::polar(1.0, 2.0 * pi * phase); }

/// delta * sum_j f(x_j) e^{-2 pi i x_j xi_k}
inline std::vector<cplx> fourier(const tfa::SampledSignal &f) {
  const auto &g = f.grid();
  const long n = static_cast<long>(g.size());
  const tfa::Grid d = g.dual();
  std::vector<cplx> out(g.size());
  for (long k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (long j = 0; j < n; ++j)
      acc += f[j] * expi(-g.point(j) * d.point(k));
    out[k] = g.delta() * acc;
  }
  return out;
}

/// V_g f(x, xi) = delta * sum_j f_j conj(g(t_j - x)) e^{-2 pi i t_j xi}, cyclic.
inline cplx stft_at(const tfa::SampledSignal &f, const tfa::SampledSignal &w, long shift,
                    double xi) {
  const auto &g = f.grid();
  const long n = static_cast<long>(g.size());
  cplx acc = 0.0;
  for (long j = 0; j < n; ++j)
    acc += f[j] * std::conj(w[wrap(j - shift, n)]) * expi(-g.point(j) * xi);
  return g.delta() * acc;
}

/// W(f,g)(u, xi) = int f(u + t/2) conj(g(u - t/2)) e^{-2 pi i xi t} dt with
/// u = (j + k - N) delta / 2, t = (j - k) delta, dt = 2 delta.
inline cplx wigner_at(const tfa::SampledSignal &f, const tfa::SampledSignal &g, long p,
                      double xi) {
  const long n = static_cast<long>(f.size());
  const double d = f.grid().delta();
  cplx acc = 0.0;
  for (long j = 0; j < n; ++j) {
    const long k = p - j;
    if (k < 0 || k >= n)
      continue;
    acc += f[j] * std::conj(g[k]) * expi(-xi * static_cast<double>(j - k) * d);
  }
  return 2.0 * d * acc;
}

/// K(x_j, y_k) = (1/(N delta)) sum_l a((x_j + y_k)/2, xi_l) e^{2 pi i (x_j - y_k) xi_l}
inline Eigen::MatrixXcd weyl_kernel(const tfa::SymbolGrid &a, const tfa::Grid &g) {
  const long n = static_cast<long>(g.size());
  const tfa::Grid d = g.dual();
  Eigen::MatrixXcd K(n, n);
  for (long j = 0; j < n; ++j)
    for (long k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (long l = 0; l < n; ++l)
        acc += a(static_cast<std::size_t>(j + k), static_cast<std::size_t>(l)) *
               expi((g.point(j) - g.point(k)) * d.point(l));
      K(j, k) = acc * d.delta();
    }
  return K;
}

/// V_Phi a(X, Xi) over all Xi of the dual axes, window cyclically shifted by
/// (sx, sxi) samples: dA * sum a(Y) conj(Phi(Y - X)) e^{-2 pi i <Xi, Y>}.
/// The exponential factorises, so the two phase tables are built once.
inline tfa::PhaseArray big_stft_slice(const tfa::SymbolGrid &a, const tfa::SymbolGrid &phi,
                                      long sx, long sxi) {
  const auto &ax = a.axes();
  const long n1 = static_cast<long>(a.rows());
  const long n2 = static_cast<long>(a.cols());
  const tfa::TFGrid dual{ax.time.dual(), ax.freq.dual()};
  std::vector<cplx> e1(static_cast<std::size_t>(n1 * n1)), e2(static_cast<std::size_t>(n2 * n2));
  for (long k = 0; k < n1; ++k)
    for (long p = 0; p < n1; ++p)
      e1[k * n1 + p] = expi(-dual.time.point(k) * ax.time.point(p));
  for (long k = 0; k < n2; ++k)
    for (long l = 0; l < n2; ++l)
      e2[k * n2 + l] = expi(-dual.freq.point(k) * ax.freq.point(l));
  std::vector<cplx> prod(static_cast<std::size_t>(n1 * n2));
  for (long p = 0; p < n1; ++p)
    for (long l = 0; l < n2; ++l)
      prod[p * n2 + l] = a(p, l) * std::conj(phi(wrap(p - sx, n1), wrap(l - sxi, n2)));
  tfa::PhaseArray out(dual);
  for (long k1 = 0; k1 < n1; ++k1)
    for (long k2 = 0; k2 < n2; ++k2) {
      cplx acc = 0.0;
      for (long p = 0; p < n1; ++p) {
        cplx row = 0.0;
        for (long l = 0; l < n2; ++l)
          row += prod[p * n2 + l] * e2[k2 * n2 + l];
        acc += e1[k1 * n1 + p] * row;
      }
      out(k1, k2) = acc * a.cell_area();
    }
  return out;
}

/// int e^{-2 pi i [X, Y]} F(Y) dY at every grid point X.
inline tfa::PhaseArray symplectic_fourier(const tfa::PhaseArray &F) {
  const auto &ax = F.axes();
  tfa::PhaseArray out(ax);
  for (std::size_t i = 0; i < F.rows(); ++i)
    for (std::size_t k = 0; k < F.cols(); ++k) {
      const double x = ax.time.point(static_cast<long>(i));
      const double xi = ax.freq.point(static_cast<long>(k));
      cplx acc = 0.0;
      for (std::size_t p = 0; p < F.rows(); ++p)
        for (std::size_t l = 0; l < F.cols(); ++l) {
          const double y = ax.time.point(static_cast<long>(p));
          const double eta = ax.freq.point(static_cast<long>(l));
          acc += F(p, l) * expi(-(xi * y - x * eta));
        }
      out(i, k) = acc * F.cell_area();
    }
  return out;
}

inline tfa::SampledSignal random_signal(const tfa::Grid &g, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  tfa::SampledSignal f(g);
  for (std::size_t j = 0; j < g.size(); ++j)
    f[j] = cplx(nd(rng), nd(rng));
  return f;
}

inline double max_abs_diff(const tfa::PhaseArray &a, const tfa::PhaseArray &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

} // namespace oracle
