#pragma once

// Finite Gabor systems {pi(lambda) g} on separable lattices of a cyclic grid:
// analysis, frame operator, frame bounds, dual window, synthesis.

#include "tfa/errors.hpp"
#include "tfa/fft.hpp"
#include "tfa/seqspace.hpp"
#include "tfa/tfcore.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace tfa {

/// alpha = a * delta, beta = b / (N delta). Indices are centred:
/// k in [-K/2, K - K/2), i in [-I/2, I - I/2) with K = N/a, I = N/b.
class Lattice {
public:
  Lattice(Grid grid, std::size_t a, std::size_t b) : grid_(grid), a_(a), b_(b) {
    if (a == 0 || b == 0 || grid.size() % a != 0 || grid.size() % b != 0)
      throw InvalidArgument("lattice steps must divide N (N=" +
                            std::to_string(grid.size()) + ", a=" +
                            std::to_string(a) + ", b=" + std::to_string(b) + ")");
  }

  const Grid &grid() const { return grid_; }
  std::size_t a() const { return a_; }
  std::size_t b() const { return b_; }
  double alpha() const { return static_cast<double>(a_) * grid_.delta(); }
  double beta() const { return static_cast<double>(b_) * grid_.freq_spacing(); }
  double density() const {
    return static_cast<double>(a_ * b_) / static_cast<double>(grid_.size());
  }
  LatticeGeometry geometry() const { return {alpha(), beta()}; }

  long time_count() const { return static_cast<long>(grid_.size() / a_); }
  long freq_count() const { return static_cast<long>(grid_.size() / b_); }
  std::size_t size() const {
    return static_cast<std::size_t>(time_count() * freq_count());
  }
  long k_first() const { return -(time_count() / 2); }
  long i_first() const { return -(freq_count() / 2); }

  /// Lattice points in storage order (time index outer).
  std::vector<LatticeIndex> indices() const {
    std::vector<LatticeIndex> out;
    out.reserve(size());
    for (long k = 0; k < time_count(); ++k)
      for (long i = 0; i < freq_count(); ++i)
        out.push_back({k + k_first(), i + i_first()});
    return out;
  }
  std::size_t position(LatticeIndex l) const {
    return static_cast<std::size_t>((l.k - k_first()) * freq_count() +
                                    (l.i - i_first()));
  }
  PhasePoint point(LatticeIndex l) const { return geometry().point(l); }

  /// Difference of two indices reduced to the centred index range.
  LatticeIndex wrap_difference(LatticeIndex d) const {
    const long K = time_count(), I_ = freq_count();
    return {detail::wrap(d.k - k_first(), K) + k_first(),
            detail::wrap(d.i - i_first(), I_) + i_first()};
  }

private:
  Grid grid_;
  std::size_t a_, b_;
};

/// <f, pi(lambda) g> for every lambda, one FFT per time position.
inline LatticeSeq gabor_coefficients(const SampledSignal &f,
                                     const SampledSignal &g, const Lattice &L) {
  if (!(f.grid() == L.grid()) || !(g.grid() == L.grid()))
    throw GridMismatch("signal, window and lattice grids differ");
  const long n = static_cast<long>(L.grid().size());
  const long a = static_cast<long>(L.a());
  const long b = static_cast<long>(L.b());
  LatticeSeq out(L.geometry());
  fft::Plan plan(1, L.grid().size(), fft::Direction::Forward);
  std::vector<cplx> buf(L.grid().size());
  const double head = L.grid().delta() * detail::parity_sign(n / 2);
  for (long kk = 0; kk < L.time_count(); ++kk) {
    const long k = kk + L.k_first();
    for (long j = 0; j < n; ++j)
      buf[j] = detail::parity_sign(j) * f[j] * std::conj(g[detail::wrap(j - k * a, n)]);
    plan.execute(buf);
    for (long ii = 0; ii < L.freq_count(); ++ii) {
      const long i = ii + L.i_first();
      const long bin = detail::wrap(i * b + n / 2, n);
      out.set({k, i}, head * detail::parity_sign(bin) * buf[bin]);
    }
  }
  return out;
}

/// sum_lambda c_lambda pi(lambda) gamma. Missing indices count as zero.
inline SampledSignal reconstruct(const LatticeSeq &coeffs,
                                 const SampledSignal &gamma, const Lattice &L) {
  if (!(gamma.grid() == L.grid()))
    throw GridMismatch("dual window and lattice grids differ");
  if (!coeffs.empty() && !(coeffs.geometry() == L.geometry()))
    throw GridMismatch("coefficients were computed on another lattice");
  const long n = static_cast<long>(L.grid().size());
  const long a = static_cast<long>(L.a());
  const long b = static_cast<long>(L.b());
  SampledSignal out(L.grid());
  std::vector<cplx> spec(L.grid().size());
  for (long kk = 0; kk < L.time_count(); ++kk) {
    const long k = kk + L.k_first();
    std::fill(spec.begin(), spec.end(), cplx(0.0));
    bool any = false;
    for (long ii = 0; ii < L.freq_count(); ++ii) {
      const long i = ii + L.i_first();
      const cplx c = coeffs.at({k, i});
      if (c == 0.0)
        continue;
      spec[detail::wrap(i * b + n / 2, n)] += c;
      any = true;
    }
    if (!any)
      continue;
    // u_j = sum_bin spec[bin] e^{2 pi i t_j xi_bin}
    const auto u = detail::centred_dft(spec, 1.0, fft::Direction::Backward);
    for (long j = 0; j < n; ++j)
      out[j] += u[j] * gamma[detail::wrap(j - k * a, n)];
  }
  return out;
}

/// S f = sum_lambda <f, pi(lambda) g> pi(lambda) g.
inline SampledSignal frame_operator_apply(const SampledSignal &f,
                                          const SampledSignal &g,
                                          const Lattice &L) {
  return reconstruct(gabor_coefficients(f, g, L), g, L);
}

/// Dense N x N matrix of S (so that (S f)_j = sum_k S_jk f_k). Only entries
/// with j - k divisible by N/b are nonzero.
inline Eigen::MatrixXcd frame_matrix(const SampledSignal &g, const Lattice &L) {
  if (!(g.grid() == L.grid()))
    throw GridMismatch("window and lattice grids differ");
  const long n = static_cast<long>(L.grid().size());
  const long a = static_cast<long>(L.a());
  const long period = L.freq_count();
  const double scale = L.grid().delta() * static_cast<double>(L.freq_count());
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
  for (long j = 0; j < n; ++j)
    for (long l = detail::wrap(j, period); l < n; l += period) {
      cplx acc = 0.0;
      for (long kk = 0; kk < L.time_count(); ++kk) {
        const long shift = (kk + L.k_first()) * a;
        acc += g[detail::wrap(j - shift, n)] * std::conj(g[detail::wrap(l - shift, n)]);
      }
      S(j, l) = scale * acc;
    }
  return S;
}

struct FrameBounds {
  double c1 = 0.0;
  double c2 = 0.0;
  std::string method; // "exact-eigen" or "power-iteration"

  double ratio() const { return c2 > 0.0 ? c1 / c2 : 0.0; }
  bool is_tight() const { return c1 > 0.0 && c2 / c1 - 1.0 <= 1e-10; }
  /// Single-size verdict; a genuine failure needs a refinement trend.
  bool is_frame(double threshold = 1e-2) const { return ratio() >= threshold; }
};

namespace detail {

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration.
inline double power_max(const Eigen::MatrixXcd &A, int iters = 2000) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(A.rows()).normalized();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXcd w = A * v;
    const double nw = w.norm();
    if (nw == 0.0)
      return 0.0;
    const double next = std::real(v.dot(w));
    v = w / nw;
    if (std::abs(next - lam) <= 1e-14 * std::abs(next)) {
      lam = next;
      break;
    }
    lam = next;
  }
  return lam;
}

} // namespace detail

/// Extreme eigenvalues of S. Dense eigendecomposition for N <= 512, power
/// iteration (on S and on c2 I - S) above. c1 is clamped at 0.
inline FrameBounds frame_bounds(const SampledSignal &g, const Lattice &L) {
  if (g.norm() == 0.0)
    throw ZeroWindow("frame window has zero norm");
  const Eigen::MatrixXcd S = frame_matrix(g, L);
  FrameBounds fb;
  if (L.grid().size() <= 512) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S, Eigen::EigenvaluesOnly);
    fb.c1 = es.eigenvalues().minCoeff();
    fb.c2 = es.eigenvalues().maxCoeff();
    fb.method = "exact-eigen";
  } else {
    fb.c2 = detail::power_max(S);
    const Eigen::MatrixXcd shifted =
        fb.c2 * Eigen::MatrixXcd::Identity(S.rows(), S.cols()) - S;
    fb.c1 = fb.c2 - detail::power_max(shifted);
    fb.method = "power-iteration";
  }
  fb.c1 = std::max(fb.c1, 0.0);
  return fb;
}

struct DualWindowResult {
  SampledSignal gamma;
  double residual = 0.0; // ||S gamma - g|| / ||g||
  int iterations = 0;
};

/// gamma = S^{-1} g by conjugate gradients on the frame operator.
inline DualWindowResult dual_window(const SampledSignal &g, const Lattice &L,
                                    double tol = 1e-10, double frame_tol = 1e-8) {
  const FrameBounds fb = frame_bounds(g, L);
  if (fb.c1 <= frame_tol * fb.c2)
    throw NotAFrame("lower frame bound " + std::to_string(fb.c1) +
                    " is negligible against upper bound " + std::to_string(fb.c2));
  const long n = static_cast<long>(L.grid().size());
  auto apply = [&](const SampledSignal &f) { return frame_operator_apply(f, g, L); };

  SampledSignal x(L.grid());
  SampledSignal r = g;
  SampledSignal p = r;
  double rr = std::real(inner(r, r));
  const double target = tol * g.norm();
  int it = 0;
  const int max_it = static_cast<int>(4 * n) + 100;
  while (std::sqrt(rr) > 0.1 * target && it < max_it) {
    const SampledSignal Ap = apply(p);
    const double alpha = rr / std::real(inner(p, Ap));
    for (long j = 0; j < n; ++j) {
      x[j] += alpha * p[j];
      r[j] -= alpha * Ap[j];
    }
    const double rr_next = std::real(inner(r, r));
    for (long j = 0; j < n; ++j)
      p[j] = r[j] + (rr_next / rr) * p[j];
    rr = rr_next;
    ++it;
  }
  const double res = (apply(x) - g).norm() / g.norm();
  return {x, res, it};
}

/// c1/c2 across a refinement sequence; values below `floor` count as zero.
struct FrameTrend {
  std::vector<FrameBounds> bounds;
  bool nonincreasing = true;
  bool is_frame_trend = true;
};

inline FrameTrend frame_trend(const std::vector<FrameBounds> &seq,
                              double fail_threshold = 1e-2,
                              double floor = 1e-12) {
  FrameTrend t{seq};
  auto eff = [&](double v) { return v < floor ? 0.0 : v; };
  for (std::size_t i = 1; i < seq.size(); ++i)
    if (eff(seq[i].ratio()) > eff(seq[i - 1].ratio()))
      t.nonincreasing = false;
  const bool final_small = !seq.empty() && seq.back().ratio() < fail_threshold;
  t.is_frame_trend = !(t.nonincreasing && final_small);
  return t;
}

} // namespace tfa
