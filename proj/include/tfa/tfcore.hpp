#pragma once

// Calibrated discrete model of the continuum: sampling grids, signals,
// Fourier transform, time-frequency shifts, STFT and Wigner distribution.
//
// Conventions (d = 1, phase space R^2):
//   grid points      x_j  = (j - N/2) * delta,          j = 0..N-1
//   frequencies      xi_k = (k - N/2) / (N * delta),    k = 0..N-1
//   Fourier          f^(xi) = int f(x) e^{-2 pi i x xi} dx
//   TF shift         pi(x, xi) g(t) = e^{2 pi i t xi} g(t - x)
//   STFT             V_g f(x, xi) = <f, pi(x, xi) g>
//   Wigner           W(f, g)(x, xi) = int f(x + t/2) conj g(x - t/2) e^{-2 pi i xi t} dt
// The model is cyclic: shifts wrap around the box of length N * delta.

#include "tfa/errors.hpp"
#include "tfa/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tfa {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

namespace detail {

inline long wrap(long i, long n) {
  const long r = i % n;
  return r < 0 ? r + n : r;
}

inline double parity_sign(long i) { return (i & 1) ? -1.0 : 1.0; }

/// Integer m with x = m * step, if x lies on that lattice (relative tol 1e-9).
inline std::optional<long> lattice_steps(double x, double step) {
  const double q = x / step;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
    return std::nullopt;
  return static_cast<long>(r);
}

/// Sum of |v|^2 computed with a running scale so that huge values do not
/// overflow. Returns sqrt(weight * sum |v|^2).
inline double scaled_l2(std::span<const cplx> v, double weight) {
  double scale = 0.0;
  for (const auto &z : v)
    scale = std::max(scale, std::abs(z));
  if (scale == 0.0)
    return 0.0;
  double acc = 0.0;
  for (const auto &z : v)
    acc += std::norm(z / scale);
  return scale * std::sqrt(acc * weight);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Grid

/// Uniform 1-D sampling grid centred on the origin.
class Grid {
public:
  Grid(std::size_t n, double delta) : n_(n), delta_(delta) {
    if (n < 2 || !std::has_single_bit(n))
      throw InvalidArgument("grid size must be a power of two >= 2, got " +
                            std::to_string(n));
    if (!(delta > 0.0) || !std::isfinite(delta))
      throw InvalidArgument("grid spacing must be positive and finite");
  }

  std::size_t size() const { return n_; }
  double delta() const { return delta_; }
  double length() const { return static_cast<double>(n_) * delta_; }
  double half_width() const { return 0.5 * length(); }
  double freq_spacing() const { return 1.0 / length(); }

  double point(long j) const {
    return (static_cast<double>(j) - static_cast<double>(n_ / 2)) * delta_;
  }
  double freq(long k) const {
    return (static_cast<double>(k) - static_cast<double>(n_ / 2)) *
           freq_spacing();
  }

  /// Grid carrying the Fourier-dual sample points.
  Grid dual() const { return Grid(n_, freq_spacing()); }

  /// Index offset m with x = m * delta, or nullopt when x is off the grid.
  std::optional<long> steps(double x) const {
    return detail::lattice_steps(x, delta_);
  }

  /// Array index of an on-grid point inside the box, or nullopt.
  std::optional<std::size_t> index_of(double x) const {
    auto m = steps(x);
    if (!m)
      return std::nullopt;
    const long j = *m + static_cast<long>(n_ / 2);
    if (j < 0 || j >= static_cast<long>(n_))
      return std::nullopt;
    return static_cast<std::size_t>(j);
  }

  friend bool operator==(const Grid &a, const Grid &b) {
    return a.n_ == b.n_ &&
           std::abs(a.delta_ - b.delta_) <= 1e-14 * std::max(a.delta_, b.delta_);
  }

private:
  std::size_t n_;
  double delta_;
};

// ---------------------------------------------------------------------------
// Signals and phase-space points

struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;

  friend PhasePoint operator+(PhasePoint a, PhasePoint b) {
    return {a.x + b.x, a.xi + b.xi};
  }
  friend PhasePoint operator-(PhasePoint a, PhasePoint b) {
    return {a.x - b.x, a.xi - b.xi};
  }
  friend PhasePoint operator*(double s, PhasePoint a) {
    return {s * a.x, s * a.xi};
  }
  friend bool operator==(const PhasePoint &, const PhasePoint &) = default;

  double norm() const { return std::hypot(x, xi); }
};

/// Complex samples f(x_j) of a function on a grid.
class SampledSignal {
public:
  SampledSignal(Grid grid, std::vector<cplx> samples)
      : grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
      throw ShapeMismatch("signal has " + std::to_string(samples_.size()) +
                          " samples on a grid of " +
                          std::to_string(grid_.size()));
  }

  explicit SampledSignal(Grid grid)
      : SampledSignal(grid, std::vector<cplx>(grid.size())) {}

  template <class F> static SampledSignal from_function(Grid grid, F &&fn) {
    std::vector<cplx> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      v[j] = cplx(fn(grid.point(static_cast<long>(j))));
    return SampledSignal(grid, std::move(v));
  }

  const Grid &grid() const { return grid_; }
  std::size_t size() const { return samples_.size(); }
  std::span<const cplx> samples() const { return samples_; }
  std::span<cplx> samples() { return samples_; }
  const cplx &operator[](std::size_t j) const { return samples_[j]; }
  cplx &operator[](std::size_t j) { return samples_[j]; }

  /// L2 norm with quadrature weight delta.
  double norm() const { return detail::scaled_l2(samples_, grid_.delta()); }

  SampledSignal &operator+=(const SampledSignal &o) {
    require_same_grid(o);
    for (std::size_t j = 0; j < size(); ++j)
      samples_[j] += o.samples_[j];
    return *this;
  }
  SampledSignal &operator-=(const SampledSignal &o) {
    require_same_grid(o);
    for (std::size_t j = 0; j < size(); ++j)
      samples_[j] -= o.samples_[j];
    return *this;
  }
  SampledSignal &operator*=(cplx c) {
    for (auto &v : samples_)
      v *= c;
    return *this;
  }
  friend SampledSignal operator+(SampledSignal a, const SampledSignal &b) {
    return a += b;
  }
  friend SampledSignal operator-(SampledSignal a, const SampledSignal &b) {
    return a -= b;
  }
  friend SampledSignal operator*(cplx c, SampledSignal a) { return a *= c; }

  void require_same_grid(const SampledSignal &o) const {
    if (!(grid_ == o.grid_))
      throw GridMismatch("signals live on different grids");
  }

private:
  Grid grid_;
  std::vector<cplx> samples_;
};

/// <f, g> = delta * sum f_j conj(g_j).
inline cplx inner(const SampledSignal &f, const SampledSignal &g) {
  f.require_same_grid(g);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    acc += f[j] * std::conj(g[j]);
  return acc * f.grid().delta();
}

/// Max-abs difference between two signals on the same grid.
inline double max_abs_diff(const SampledSignal &a, const SampledSignal &b) {
  a.require_same_grid(b);
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

// ---------------------------------------------------------------------------
// Phase-space arrays

/// Two grids spanning a sampled region of phase space.
struct TFGrid {
  Grid time;
  Grid freq;

  /// Full-resolution STFT grid of a signal grid: every sample, every bin.
  static TFGrid full(const Grid &g) { return {g, g.dual()}; }
  friend bool operator==(const TFGrid &, const TFGrid &) = default;
};

/// Complex samples on a TFGrid, stored row-major with the time axis outer.
class PhaseArray {
public:
  explicit PhaseArray(TFGrid axes)
      : axes_(axes), values_(axes.time.size() * axes.freq.size()) {}
  PhaseArray(TFGrid axes, std::vector<cplx> values)
      : axes_(axes), values_(std::move(values)) {
    if (values_.size() != axes_.time.size() * axes_.freq.size())
      throw ShapeMismatch("phase array value count does not match its axes");
  }

  template <class F> static PhaseArray from_function(TFGrid axes, F &&fn) {
    PhaseArray a(axes);
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t k = 0; k < a.cols(); ++k)
        a(i, k) = cplx(fn(axes.time.point(static_cast<long>(i)),
                          axes.freq.point(static_cast<long>(k))));
    return a;
  }

  const TFGrid &axes() const { return axes_; }
  std::size_t rows() const { return axes_.time.size(); }
  std::size_t cols() const { return axes_.freq.size(); }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }

  cplx &operator()(std::size_t i, std::size_t k) { return values_[i * cols() + k]; }
  const cplx &operator()(std::size_t i, std::size_t k) const {
    return values_[i * cols() + k];
  }

  double cell_area() const { return axes_.time.delta() * axes_.freq.delta(); }

  /// L2 norm over the sampled box (overflow-safe).
  double norm() const { return detail::scaled_l2(values_, cell_area()); }

  double max_abs() const {
    double m = 0.0;
    for (const auto &v : values_)
      m = std::max(m, std::abs(v));
    return m;
  }

  void require_same_axes(const PhaseArray &o) const {
    if (!(axes_ == o.axes_))
      throw ShapeMismatch("phase arrays are sampled on different grids");
  }

private:
  TFGrid axes_;
  std::vector<cplx> values_;
};

/// A symbol a(x, xi) sampled on phase space. For Weyl quantization the time
/// axis is the doubled grid Grid(2N, delta/2) of a signal grid Grid(N, delta).
using SymbolGrid = PhaseArray;

/// Symbol axes matching a signal grid: doubled x resolution, full xi bins.
inline TFGrid symbol_axes(const Grid &g) {
  return {Grid(2 * g.size(), 0.5 * g.delta()), g.dual()};
}

/// <a, b> over a phase-space box.
inline cplx inner(const PhaseArray &a, const PhaseArray &b) {
  a.require_same_axes(b);
  cplx acc = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i)
    acc += av[i] * std::conj(bv[i]);
  return acc * a.cell_area();
}

// ---------------------------------------------------------------------------
// Fourier transform

namespace detail {

/// Centred DFT: out_k = step * sum_j in_j e^{sign 2 pi i (j - N/2)(k - N/2)/N}.
inline std::vector<cplx> centred_dft(std::span<const cplx> in, double step,
                                     fft::Direction dir) {
  const long n = static_cast<long>(in.size());
  std::vector<cplx> buf(in.begin(), in.end());
  for (long j = 1; j < n; j += 2)
    buf[j] = -buf[j];
  fft::dft(buf, dir);
  const double s = step * parity_sign(n / 2);
  for (long k = 0; k < n; ++k)
    buf[k] *= s * parity_sign(k);
  return buf;
}

} // namespace detail

/// f^(xi_k) = delta * sum_j f(x_j) e^{-2 pi i x_j xi_k}; lives on grid.dual().
inline SampledSignal fourier(const SampledSignal &f) {
  return SampledSignal(f.grid().dual(),
                       detail::centred_dft(f.samples(), f.grid().delta(),
                                           fft::Direction::Forward));
}

/// Inverse of fourier(): maps samples on a frequency grid back to time.
inline SampledSignal inverse_fourier(const SampledSignal &fh) {
  return SampledSignal(fh.grid().dual(),
                       detail::centred_dft(fh.samples(), fh.grid().delta(),
                                           fft::Direction::Backward));
}

/// Reflection f*(x) = f(-x) in the cyclic model.
inline SampledSignal reflect(const SampledSignal &f) {
  const long n = static_cast<long>(f.size());
  SampledSignal out(f.grid());
  for (long j = 0; j < n; ++j)
    out[j] = f[detail::wrap(n - j, n)];
  return out;
}

/// Band-limited (trigonometric) interpolant of f evaluated at arbitrary t.
/// The Nyquist coefficient is split evenly between +/- the Nyquist frequency
/// so that real signals interpolate to real values.
inline cplx trig_interpolate(const SampledSignal &f, const SampledSignal &fh,
                             double t) {
  const Grid &g = f.grid();
  const long n = static_cast<long>(g.size());
  cplx acc = 0.0;
  for (long k = 0; k < n; ++k) {
    const double xi = g.freq(k);
    if (k == 0) {
      acc += 0.5 * fh[0] *
             (std::exp(2.0 * pi * I * t * xi) + std::exp(-2.0 * pi * I * t * xi));
    } else {
      acc += fh[k] * std::exp(2.0 * pi * I * t * xi);
    }
  }
  return acc * g.freq_spacing();
}

// ---------------------------------------------------------------------------
// Time-frequency shifts

/// pi(Z) g(t) = e^{2 pi i t xi} g(t - x). Z.x must be a multiple of delta.
inline SampledSignal tf_shift(const SampledSignal &g, PhasePoint z) {
  const Grid &grid = g.grid();
  const auto m = grid.steps(z.x);
  if (!m)
    throw OffGridShift("time shift " + std::to_string(z.x) +
                       " is not a multiple of delta = " +
                       std::to_string(grid.delta()));
  const long n = static_cast<long>(g.size());
  SampledSignal out(grid);
  for (long j = 0; j < n; ++j) {
    const cplx mod = z.xi == 0.0 ? cplx(1.0)
                                 : std::exp(2.0 * pi * I * grid.point(j) * z.xi);
    out[j] = mod * g[detail::wrap(j - *m, n)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// STFT

namespace detail {

/// Sample stride of `axis` relative to `base` spacing; throws if not integral.
inline long axis_stride(const Grid &axis, double base, const char *what) {
  const auto s = lattice_steps(axis.delta(), base);
  if (!s || *s <= 0)
    throw GridMismatch(std::string(what) +
                       " spacing is not an integer multiple of the base spacing");
  return *s;
}

/// Bin index on a full-resolution axis of size n for point k of a coarse axis
/// whose spacing is `stride` bins; wraps cyclically.
inline long coarse_to_bin(long k, long coarse_n, long stride, long n) {
  return wrap((k - coarse_n / 2) * stride + n / 2, n);
}

} // namespace detail

/// V_g f on the TFGrid `tf`. Time points must be multiples of the signal
/// spacing, frequencies multiples of 1/(N delta). One FFT per time shift.
inline PhaseArray stft(const SampledSignal &f, const SampledSignal &g,
                       const TFGrid &tf) {
  f.require_same_grid(g);
  if (g.norm() == 0.0)
    throw ZeroWindow("STFT window has zero norm");
  const Grid &grid = f.grid();
  const long n = static_cast<long>(grid.size());
  const long pt = detail::axis_stride(tf.time, grid.delta(), "STFT time axis");
  const long qf =
      detail::axis_stride(tf.freq, grid.freq_spacing(), "STFT frequency axis");
  const long nt = static_cast<long>(tf.time.size());
  const long nf = static_cast<long>(tf.freq.size());

  PhaseArray out(tf);
  fft::Plan plan(1, grid.size(), fft::Direction::Forward);
  std::vector<cplx> buf(grid.size());
  const double head = grid.delta() * detail::parity_sign(n / 2);
  for (long m = 0; m < nt; ++m) {
    const long shift = (m - nt / 2) * pt;
    for (long j = 0; j < n; ++j)
      buf[j] = detail::parity_sign(j) * f[j] *
               std::conj(g[detail::wrap(j - shift, n)]);
    plan.execute(buf);
    for (long k = 0; k < nf; ++k) {
      const long bin = detail::coarse_to_bin(k, nf, qf, n);
      out(m, k) = head * detail::parity_sign(bin) * buf[bin];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wigner distribution

namespace detail {

/// Wigner row at doubled-grid midpoint index p (0 <= p < 2N): all N bins.
/// W(u_p, xi_l) = 2 delta sum_{j+k=p} f_j conj(g_k) e^{-2 pi i (j-k) delta xi_l}.
inline std::vector<cplx> wigner_row(const SampledSignal &f,
                                    const SampledSignal &g, long p,
                                    const fft::Plan &plan) {
  const long n = static_cast<long>(f.size());
  std::vector<cplx> buf(static_cast<std::size_t>(n), cplx(0.0));
  const long jlo = std::max(0L, p - (n - 1));
  const long jhi = std::min(n - 1, p);
  for (long j = jlo; j <= jhi; ++j) {
    const long k = p - j;
    const long d = j - k;
    buf[wrap(d, n)] += parity_sign(d) * f[j] * std::conj(g[k]);
  }
  plan.execute(buf);
  const double scale = 2.0 * f.grid().delta();
  for (auto &v : buf)
    v *= scale;
  return buf;
}

} // namespace detail

/// Cross-Wigner distribution on the doubled symbol grid symbol_axes(grid).
inline SymbolGrid wigner_symbol(const SampledSignal &f, const SampledSignal &g) {
  f.require_same_grid(g);
  const TFGrid axes = symbol_axes(f.grid());
  SymbolGrid out(axes);
  fft::Plan plan(1, f.size(), fft::Direction::Forward);
  for (std::size_t p = 0; p < out.rows(); ++p) {
    const auto row = detail::wigner_row(f, g, static_cast<long>(p), plan);
    std::copy(row.begin(), row.end(), out.values().begin() + p * out.cols());
  }
  return out;
}

/// Cross-Wigner distribution W(f, g) on `tf`. Time points must be multiples
/// of delta/2, frequencies multiples of 1/(N delta).
inline PhaseArray wigner(const SampledSignal &f, const SampledSignal &g,
                         const TFGrid &tf) {
  f.require_same_grid(g);
  const Grid &grid = f.grid();
  const long n = static_cast<long>(grid.size());
  const long pt =
      detail::axis_stride(tf.time, 0.5 * grid.delta(), "Wigner time axis");
  const long qf =
      detail::axis_stride(tf.freq, grid.freq_spacing(), "Wigner frequency axis");
  const long nt = static_cast<long>(tf.time.size());
  const long nf = static_cast<long>(tf.freq.size());

  PhaseArray out(tf);
  fft::Plan plan(1, grid.size(), fft::Direction::Forward);
  for (long m = 0; m < nt; ++m) {
    const long p = (m - nt / 2) * pt + n; // doubled-grid index
    if (p < 0 || p >= 2 * n)
      throw RangeExceeded("Wigner time point outside the sampled box");
    const auto row = detail::wigner_row(f, g, p, plan);
    for (long k = 0; k < nf; ++k)
      out(m, k) = row[detail::coarse_to_bin(k, nf, qf, n)];
  }
  return out;
}

/// max over tf of |W(f,g)(x,xi) - 2 e^{4 pi i x xi} V_{g*} f(2x, 2xi)|.
inline double wigner_stft_relation_check(const SampledSignal &f,
                                         const SampledSignal &g,
                                         const TFGrid &tf) {
  f.require_same_grid(g);
  const Grid &grid = f.grid();
  const double xmax = tf.time.half_width();
  const double ximax = tf.freq.half_width();
  if (2.0 * xmax > grid.half_width() * (1.0 + 1e-12) ||
      2.0 * ximax > grid.dual().half_width() * (1.0 + 1e-12))
    throw RangeExceeded("doubled points (2x, 2xi) leave the sampled box");
  const TFGrid doubled{Grid(tf.time.size(), 2.0 * tf.time.delta()),
                       Grid(tf.freq.size(), 2.0 * tf.freq.delta())};
  if (f.norm() == 0.0 || g.norm() == 0.0)
    return 0.0;
  const PhaseArray w = wigner(f, g, tf);
  const PhaseArray v = stft(f, reflect(g), doubled);
  double dev = 0.0;
  for (std::size_t m = 0; m < w.rows(); ++m) {
    const double x = tf.time.point(static_cast<long>(m));
    for (std::size_t k = 0; k < w.cols(); ++k) {
      const double xi = tf.freq.point(static_cast<long>(k));
      const cplx rhs = 2.0 * std::exp(4.0 * pi * I * x * xi) * v(m, k);
      dev = std::max(dev, std::abs(w(m, k) - rhs));
    }
  }
  return dev;
}

// ---------------------------------------------------------------------------
// STFT over phase space (R^2)

/// Sampling of the big STFT: window positions on a coarse sub-grid of the
/// symbol axes, frequencies on a coarse sub-grid of the dual axes.
struct BigStftSampling {
  std::size_t pos_stride_x = 1;
  std::size_t pos_stride_xi = 1;
  std::size_t freq_stride_x = 1;
  std::size_t freq_stride_xi = 1;
};

/// 4-D result V_Phi a(X, Xi), index order (X1, X2, Xi1, Xi2), row-major.
struct BigStft {
  Grid pos_x, pos_xi, freq_x, freq_xi;
  std::vector<cplx> values;

  std::size_t index(std::size_t i1, std::size_t i2, std::size_t k1,
                    std::size_t k2) const {
    return ((i1 * pos_xi.size() + i2) * freq_x.size() + k1) * freq_xi.size() +
           k2;
  }
  const cplx &operator()(std::size_t i1, std::size_t i2, std::size_t k1,
                         std::size_t k2) const {
    return values[index(i1, i2, k1, k2)];
  }
};

/// Dual axes of a phase-space grid: the frequency variable Xi of V_Phi a.
inline TFGrid dual_axes(const TFGrid &axes) {
  return {axes.time.dual(), axes.freq.dual()};
}

/// Full-frequency slice Xi -> V_Phi a(X, Xi) with the window shifted by
/// (sx, sxi) samples, i.e. X = (sx * dx, sxi * dxi). Lives on dual_axes().
class BigStftEngine {
public:
  BigStftEngine(const SymbolGrid &a, const SymbolGrid &phi)
      : a_(a), phi_(phi),
        plan_(a.rows(), a.cols(), fft::Direction::Forward) {
    a.require_same_axes(phi);
    if (phi.norm() == 0.0)
      throw ZeroWindow("big STFT window has zero norm");
  }

  PhaseArray slice(long sx, long sxi) const {
    const long nx = static_cast<long>(a_.rows());
    const long nxi = static_cast<long>(a_.cols());
    std::vector<cplx> buf(a_.values().size());
    for (long p = 0; p < nx; ++p) {
      const long ps = detail::wrap(p - sx, nx);
      for (long l = 0; l < nxi; ++l) {
        const long ls = detail::wrap(l - sxi, nxi);
        buf[p * nxi + l] = detail::parity_sign(p + l) * a_(p, l) *
                           std::conj(phi_(ps, ls));
      }
    }
    plan_.execute(buf);
    const double head = a_.cell_area() * detail::parity_sign(nx / 2 + nxi / 2);
    for (long k1 = 0; k1 < nx; ++k1)
      for (long k2 = 0; k2 < nxi; ++k2)
        buf[k1 * nxi + k2] *= head * detail::parity_sign(k1 + k2);
    return PhaseArray(dual_axes(a_.axes()), std::move(buf));
  }

  /// Slice at a phase-space position X (must be on the symbol grid).
  PhaseArray slice_at(PhasePoint x) const {
    const auto sx = a_.axes().time.steps(x.x);
    const auto sxi = a_.axes().freq.steps(x.xi);
    if (!sx || !sxi)
      throw OffGridShift("big STFT window position is not on the symbol grid");
    return slice(*sx, *sxi);
  }

  const SymbolGrid &symbol() const { return a_; }

private:
  const SymbolGrid &a_;
  const SymbolGrid &phi_;
  fft::Plan plan_;
};

/// V_Phi a over the coarse product grid described by `sampling`.
inline BigStft big_stft(const SymbolGrid &a, const SymbolGrid &phi,
                        const BigStftSampling &sampling = {}) {
  BigStftEngine engine(a, phi);
  const TFGrid &ax = a.axes();
  const TFGrid dual = dual_axes(ax);
  auto coarse = [](const Grid &g, std::size_t stride, const char *what) {
    if (stride == 0 || g.size() % stride != 0 || g.size() / stride < 2)
      throw InvalidArgument(std::string("bad big STFT stride for ") + what);
    return Grid(g.size() / stride, g.delta() * static_cast<double>(stride));
  };
  BigStft out{coarse(ax.time, sampling.pos_stride_x, "positions x"),
              coarse(ax.freq, sampling.pos_stride_xi, "positions xi"),
              coarse(dual.time, sampling.freq_stride_x, "frequencies x"),
              coarse(dual.freq, sampling.freq_stride_xi, "frequencies xi"),
              {}};
  out.values.resize(out.pos_x.size() * out.pos_xi.size() * out.freq_x.size() *
                    out.freq_xi.size());
  const long n1 = static_cast<long>(out.pos_x.size());
  const long n2 = static_cast<long>(out.pos_xi.size());
  const long m1 = static_cast<long>(out.freq_x.size());
  const long m2 = static_cast<long>(out.freq_xi.size());
  const long q1 = static_cast<long>(sampling.freq_stride_x);
  const long q2 = static_cast<long>(sampling.freq_stride_xi);
  const long nx = static_cast<long>(ax.time.size());
  const long nxi = static_cast<long>(ax.freq.size());
  for (long i1 = 0; i1 < n1; ++i1) {
    for (long i2 = 0; i2 < n2; ++i2) {
      const PhaseArray s =
          engine.slice((i1 - n1 / 2) * static_cast<long>(sampling.pos_stride_x),
                       (i2 - n2 / 2) * static_cast<long>(sampling.pos_stride_xi));
      for (long k1 = 0; k1 < m1; ++k1)
        for (long k2 = 0; k2 < m2; ++k2)
          out.values[out.index(i1, i2, k1, k2)] =
              s(detail::coarse_to_bin(k1, m1, q1, nx),
                detail::coarse_to_bin(k2, m2, q2, nxi));
    }
  }
  return out;
}

/// Xi -> sup over sampled window positions X of |V_Phi a(X, Xi)|, on the
/// dual axes. Positions use the given strides in symbol-grid samples.
inline PhaseArray big_stft_sup_over_positions(const SymbolGrid &a,
                                              const SymbolGrid &phi,
                                              std::size_t stride_x,
                                              std::size_t stride_xi) {
  BigStftEngine engine(a, phi);
  const long nx = static_cast<long>(a.rows());
  const long nxi = static_cast<long>(a.cols());
  PhaseArray sup(dual_axes(a.axes()));
  for (long sx = -nx / 2; sx < nx / 2; sx += static_cast<long>(stride_x))
    for (long sxi = -nxi / 2; sxi < nxi / 2; sxi += static_cast<long>(stride_xi)) {
      const PhaseArray s = engine.slice(sx, sxi);
      auto dst = sup.values();
      auto src = s.values();
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = std::max(dst[i].real(), std::abs(src[i]));
    }
  return sup;
}

/// sup over the sampled (X, Xi) of |V_Phi a(X, Xi)| e^{r |Xi|^{1/s}}.
inline double mod_norm(const SymbolGrid &a, const SymbolGrid &phi, double r,
                       double s, const BigStftSampling &sampling = {}) {
  if (!(s > 0.0))
    throw InvalidArgument("mod_norm requires s > 0");
  const PhaseArray sup = big_stft_sup_over_positions(
      a, phi, sampling.pos_stride_x, sampling.pos_stride_xi);
  const TFGrid &ax = sup.axes();
  double best = 0.0;
  for (std::size_t k1 = 0; k1 < sup.rows(); k1 += sampling.freq_stride_x)
    for (std::size_t k2 = 0; k2 < sup.cols(); k2 += sampling.freq_stride_xi) {
      const double v = sup(k1, k2).real();
      if (v == 0.0)
        continue;
      const double rho = std::hypot(ax.time.point(static_cast<long>(k1)),
                                    ax.freq.point(static_cast<long>(k2)));
      best = std::max(best, std::exp(std::log(v) + r * std::pow(rho, 1.0 / s)));
    }
  return best;
}

} // namespace tfa
