#pragma once

// Phase-space metrics: symplectic Fourier transform and STFT, admissibility
// scans for diagonal metrics g_X(T) = <Q_X T, T>, metric-adapted wave
// packets, and the weighted diagonalization estimate.

#include "tfa/catalog.hpp"
#include "tfa/errors.hpp"
#include "tfa/fft.hpp"
#include "tfa/tfcore.hpp"
#include "tfa/weights.hpp"
#include "tfa/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tfa {

// ---------------------------------------------------------------------------
// Symplectic Fourier transform

namespace detail {

inline void require_self_dual(const TFGrid &ax) {
  const Grid &t = ax.time;
  const Grid &f = ax.freq;
  const bool same = t.size() == f.size() && t == f;
  const double h = t.delta();
  const bool dual =
      std::abs(h * h * static_cast<double>(t.size()) - 1.0) <= 1e-12;
  if (!same || !dual)
    throw NonSquareGrid("phase-space grid must be N x N with spacing 1/sqrt(N)");
}

} // namespace detail

/// F_sigma F(X) = int e^{-2 pi i [X, Y]} F(Y) dY = F^(j X).
inline PhaseArray symplectic_fourier(const PhaseArray &F) {
  detail::require_self_dual(F.axes());
  const long n = static_cast<long>(F.rows());
  std::vector<cplx> buf(F.values().begin(), F.values().end());
  for (long p = 0; p < n; ++p)
    for (long l = 0; l < n; ++l)
      buf[p * n + l] *= detail::parity_sign(p + l);
  fft::dft2(buf, F.rows(), F.cols(), fft::Direction::Forward);
  const double head = F.cell_area() * detail::parity_sign(n); // (-1)^{n/2 + n/2}
  for (long k1 = 0; k1 < n; ++k1)
    for (long k2 = 0; k2 < n; ++k2)
      buf[k1 * n + k2] *= head * detail::parity_sign(k1 + k2);
  PhaseArray out(F.axes());
  for (long i = 0; i < n; ++i)
    for (long k = 0; k < n; ++k)
      out(i, k) = buf[k * n + detail::wrap(n - i, n)];
  return out;
}

/// Window family X -> phi_X; nullopt when no window is available at X.
using WindowFamily = std::function<std::optional<PhaseArray>(PhasePoint)>;

/// Rigid family phi_X = Phi(. - X), cyclically shifted; X must be on the grid.
inline WindowFamily rigid_family(PhaseArray phi) {
  return [phi = std::move(phi)](PhasePoint X) -> std::optional<PhaseArray> {
    const auto sx = phi.axes().time.steps(X.x);
    const auto sxi = phi.axes().freq.steps(X.xi);
    if (!sx || !sxi)
      return std::nullopt;
    const long n1 = static_cast<long>(phi.rows());
    const long n2 = static_cast<long>(phi.cols());
    PhaseArray out(phi.axes());
    for (long p = 0; p < n1; ++p)
      for (long l = 0; l < n2; ++l)
        out(p, l) = phi(detail::wrap(p - *sx, n1), detail::wrap(l - *sxi, n2));
    return out;
  };
}

/// V_phi f(X, Xi) = int f(Y) conj(phi_X(Y)) e^{-2 pi i [Xi, Y]} dY (direct sum).
inline cplx symplectic_stft(const PhaseArray &f, const WindowFamily &family,
                            PhasePoint X, PhasePoint Xi) {
  const auto phi = family ? family(X) : std::nullopt;
  if (!phi)
    throw MissingWindow("no window supplied for X = (" + std::to_string(X.x) +
                        ", " + std::to_string(X.xi) + ")");
  f.require_same_axes(*phi);
  const TFGrid &ax = f.axes();
  cplx acc = 0.0;
  for (std::size_t p = 0; p < f.rows(); ++p) {
    const double y = ax.time.point(static_cast<long>(p));
    for (std::size_t l = 0; l < f.cols(); ++l) {
      const double eta = ax.freq.point(static_cast<long>(l));
      const double pairing = symplectic_pairing(Xi, {y, eta});
      acc += f(p, l) * std::conj((*phi)(p, l)) * std::exp(-2.0 * pi * I * pairing);
    }
  }
  return acc * f.cell_area();
}

// ---------------------------------------------------------------------------
// Metrics

struct MetricSpec {
  enum class Kind { Euclidean, Split };
  std::string id = "euclidean";
  Kind kind = Kind::Euclidean;
  double rho = 0.0;   // split: h(X) = (1 + |X|^2)^{-rho}
  double scale = 1.0; // Q multiplied by this factor
  WeightParams M = WeightParams::one();

  static MetricSpec euclidean() { return {}; }
  static MetricSpec split(double rho) {
    MetricSpec m;
    m.id = "split:" + std::to_string(rho);
    m.kind = Kind::Split;
    m.rho = rho;
    return m;
  }

  /// Diagonal of Q_X.
  std::pair<double, double> Q(PhasePoint X) const {
    if (kind == Kind::Euclidean)
      return {scale, scale};
    const double h = std::pow(1.0 + X.x * X.x + X.xi * X.xi, -rho);
    return {scale * h, scale / h};
  }
  /// Diagonal of Q^sigma_X = diag(1/q2, 1/q1).
  std::pair<double, double> Qsigma(PhasePoint X) const {
    const auto [q1, q2] = Q(X);
    return {1.0 / q2, 1.0 / q1};
  }
  double g(PhasePoint X, PhasePoint T) const {
    const auto [q1, q2] = Q(X);
    return q1 * T.x * T.x + q2 * T.xi * T.xi;
  }
  double gsigma(PhasePoint X, PhasePoint T) const {
    const auto [s1, s2] = Qsigma(X);
    return s1 * T.x * T.x + s2 * T.xi * T.xi;
  }
};

/// Parse "euclidean" or "split:<rho>".
inline MetricSpec parse_metric(const std::string &id) {
  if (id == "euclidean")
    return MetricSpec::euclidean();
  if (id.rfind("split:", 0) == 0)
    return MetricSpec::split(std::stod(id.substr(6)));
  throw NotInCatalog("unknown metric '" + id + "'");
}

struct AdmissibilityReport {
  struct Slow {
    bool holds = false;
    double C0 = 1.0;
    double r0 = 1.0;
    double C0_doubled = 1.0;
  } slow_variation;
  struct Temper {
    bool holds = false;
    double C0 = 1.0;
    double N0 = 0.0;
    double N0_doubled = 0.0;
    int N_int = 0;          // ceil(N0)
    double C_int = 1.0;     // sup R / B^N_int
    double C_int_doubled = 1.0;
  } temperance;
  struct Uncertainty {
    bool holds = false;
    double worst_ratio = 0.0;
  } uncertainty;
  std::string description;
};

/// n x n uniform points on [-box, box]^2.
inline std::vector<PhasePoint> square_points(double box, std::size_t n) {
  std::vector<PhasePoint> pts;
  pts.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double u = -box + 2.0 * box * static_cast<double>(i) / static_cast<double>(n - 1);
      const double v = -box + 2.0 * box * static_cast<double>(k) / static_cast<double>(n - 1);
      pts.push_back({u, v});
    }
  return pts;
}

namespace detail {

struct ScanResult {
  double slow_C0 = 1.0;
  double temper_C0 = 1.0;
  double N0 = 0.0;
};

/// sup over pairs of R / B^N.
inline double temper_constant(const MetricSpec &spec, const std::vector<PhasePoint> &pts,
                              int N) {
  double best = 1.0;
  for (const auto &X : pts) {
    const auto [a1, a2] = spec.Q(X);
    const auto [s1, s2] = spec.Qsigma(X);
    for (const auto &Y : pts) {
      const auto [b1, b2] = spec.Q(Y);
      const PhasePoint d = Y - X;
      const double B = 1.0 + s1 * d.x * d.x + s2 * d.xi * d.xi;
      best = std::max(best, std::max(b1 / a1, b2 / a2) / std::pow(B, N));
    }
  }
  return best;
}

/// g_Y(T) <= R g_X(T) for all T with R = max_i qY_i / qX_i.
inline ScanResult metric_scan(const MetricSpec &spec,
                              const std::vector<PhasePoint> &pts, double r0) {
  std::vector<std::pair<double, double>> q(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    q[i] = spec.Q(pts[i]);
  ScanResult res;
  std::vector<std::pair<double, double>> far; // (log R, log B) with B > 2
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [a1, a2] = q[i];
    const auto [s1, s2] = spec.Qsigma(pts[i]);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto [b1, b2] = q[j];
      const double R = std::max(b1 / a1, b2 / a2);
      const PhasePoint d = pts[j] - pts[i];
      if (a1 * d.x * d.x + a2 * d.xi * d.xi <= r0 * r0)
        res.slow_C0 = std::max({res.slow_C0, R, std::max(a1 / b1, a2 / b2)});
      const double B = 1.0 + s1 * d.x * d.x + s2 * d.xi * d.xi;
      if (B <= 2.0)
        res.temper_C0 = std::max(res.temper_C0, R);
      else if (R > 1.0)
        far.emplace_back(std::log(R), std::log(B));
    }
  }
  const double lc = std::log(res.temper_C0);
  for (const auto &[lr, lb] : far)
    res.N0 = std::max(res.N0, (lr - lc) / lb);
  return res;
}

} // namespace detail

/// Empirical constants of slow variation, temperance and the uncertainty
/// principle over all ordered pairs of `points`. Slow variation holds when
/// C0 changes by < 5% after the sample box is doubled. For temperance the
/// fitted exponent N0 is rounded up to an integer N and the bound
/// R <= C (1 + g^sigma_X(X - Y))^N must keep its constant C (< 5% change)
/// on the doubled box.
inline AdmissibilityReport check_metric_admissible(const MetricSpec &spec,
                                                   const std::vector<PhasePoint> &points,
                                                   double r0 = 1.0) {
  AdmissibilityReport rep;
  std::vector<PhasePoint> doubled(points);
  for (auto &p : doubled)
    p = 2.0 * p;
  const auto base = detail::metric_scan(spec, points, r0);
  const auto wide = detail::metric_scan(spec, doubled, r0);
  rep.slow_variation.C0 = base.slow_C0;
  rep.slow_variation.r0 = r0;
  rep.slow_variation.C0_doubled = wide.slow_C0;
  rep.slow_variation.holds = std::isfinite(base.slow_C0) &&
                             wide.slow_C0 <= 1.05 * base.slow_C0;
  auto &t = rep.temperance;
  t.C0 = base.temper_C0;
  t.N0 = base.N0;
  t.N0_doubled = wide.N0;
  if (std::isfinite(base.N0)) {
    t.N_int = static_cast<int>(std::ceil(base.N0 - 1e-12));
    t.C_int = detail::temper_constant(spec, points, t.N_int);
    t.C_int_doubled = detail::temper_constant(spec, doubled, t.N_int);
    t.holds = std::isfinite(t.C_int) && t.C_int_doubled <= 1.05 * t.C_int;
  }
  double worst = 0.0;
  for (const auto &p : points) {
    const auto [q1, q2] = spec.Q(p);
    const auto [s1, s2] = spec.Qsigma(p);
    worst = std::max({worst, q1 / s1, q2 / s2});
  }
  rep.uncertainty.worst_ratio = worst;
  rep.uncertainty.holds = worst <= 1.0 + 1e-12;
  rep.description = spec.id + ", " + std::to_string(points.size()) +
                    " points, all ordered pairs, box doubled for stability";
  return rep;
}

// ---------------------------------------------------------------------------
// Wave packets

/// q1^{-1/4} chi(t / sqrt(q1)) with q1 the time component of Q at `at`,
/// shifted by pi(X). The dilated packet must keep its energy inside
/// |t| <= 3L/8 up to a fraction 1e-20.
inline SampledSignal wave_packet_at(const SampledSignal &chi, PhasePoint X,
                                    PhasePoint at, const MetricSpec &spec) {
  const double q1 = spec.Q(at).first;
  SampledSignal d = chi;
  if (q1 != 1.0) {
    const SampledSignal chih = fourier(chi);
    const double sq = std::sqrt(q1);
    const double amp = std::pow(q1, -0.25);
    const double edge = chi.grid().half_width();
    for (std::size_t j = 0; j < chi.size(); ++j) {
      const double t = chi.grid().point(static_cast<long>(j)) / sq;
      // outside the sampled box chi counts as zero, not as its periodic copy
      d[j] = std::abs(t) < edge ? amp * trig_interpolate(chi, chih, t) : cplx(0.0);
    }
  }
  const Grid &g = chi.grid();
  double total = 0.0, outside = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double e = std::norm(d[j]);
    total += e;
    if (std::abs(g.point(static_cast<long>(j))) > 0.375 * g.length())
      outside += e;
  }
  if (total > 0.0 && outside > 1e-20 * total)
    throw PacketEscapesBox("dilated packet leaves the box (energy fraction " +
                           std::to_string(outside / total) + ")");
  return tf_shift(d, X);
}

inline SampledSignal wave_packet(const SampledSignal &chi, PhasePoint X,
                                 const MetricSpec &spec) {
  return wave_packet_at(chi, X, X, spec);
}

/// sum t^2 |f|^2 / sum |f|^2 about the centre of mass; square root returned.
inline double packet_width(const SampledSignal &f) {
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double w = std::norm(f[j]);
    m0 += w;
    m1 += w * f.grid().point(static_cast<long>(j));
  }
  const double c = m1 / m0;
  double m2 = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double t = f.grid().point(static_cast<long>(j)) - c;
    m2 += std::norm(f[j]) * t * t;
  }
  return std::sqrt(m2 / m0);
}

// ---------------------------------------------------------------------------
// Diagonalization estimate

struct HmPair {
  PhasePoint X;
  PhasePoint Xi;
};

struct HmRow {
  HmPair pair;
  double value = 0.0;
};

struct HmDiagReport {
  double sup_value = 0.0; // all pairs
  double sup_half = 0.0;  // pairs inside the half box
  bool stable = false;    // sup_value <= 1.05 sup_half
  std::vector<HmRow> rows;
};

/// All ordered pairs of grid-aligned points at spacing `step` inside
/// [-radius, radius]^2.
inline std::vector<HmPair> hm_grid_pairs(const Grid &grid, double radius, double step) {
  const long sx = std::max(1L, std::lround(step / grid.delta()));
  const double hx = static_cast<double>(sx) * grid.delta();
  const long m = static_cast<long>(std::floor(radius / hx + 1e-9));
  const long mxi = static_cast<long>(std::floor(radius / step + 1e-9));
  std::vector<PhasePoint> pts;
  for (long i = -m; i <= m; ++i)
    for (long k = -mxi; k <= mxi; ++k)
      pts.push_back({static_cast<double>(i) * hx, static_cast<double>(k) * step});
  std::vector<HmPair> out;
  out.reserve(pts.size() * pts.size());
  for (const auto &a : pts)
    for (const auto &b : pts)
      out.push_back({a, b});
  return out;
}

/// M((X+Xi)/2)^{-1} (1 + g_{(X+Xi)/2}(X - Xi))^Npow |<a^w pi(X) chi_m, pi(Xi) chi_m>|
/// with chi_m the packet dilated at the midpoint.
inline HmDiagReport hm_diag_check(const SymbolGrid &a, const SampledSignal &chi,
                                  const MetricSpec &spec, unsigned Npow,
                                  const std::vector<HmPair> &pairs) {
  const Grid grid = signal_grid_of(a);
  if (!(grid == chi.grid()))
    throw ShapeMismatch("symbol layout does not match the packet grid");
  const Eigen::MatrixXcd K = weyl_kernel(a);
  const bool rigid = spec.kind == MetricSpec::Kind::Euclidean && spec.scale == 1.0;

  struct Key {
    double x, xi;
    auto operator<=>(const Key &) const = default;
  };
  std::map<Key, SampledSignal> applied;
  auto left = [&](PhasePoint X, PhasePoint mid) {
    if (!rigid)
      return kernel_apply(K, wave_packet_at(chi, X, mid, spec));
    auto it = applied.find({X.x, X.xi});
    if (it == applied.end())
      it = applied.emplace(Key{X.x, X.xi}, kernel_apply(K, tf_shift(chi, X))).first;
    return it->second;
  };

  double extent = 0.0;
  for (const auto &p : pairs)
    extent = std::max({extent, std::abs(p.X.x), std::abs(p.X.xi), std::abs(p.Xi.x),
                       std::abs(p.Xi.xi)});
  const double half = 0.5 * extent + 1e-12;

  HmDiagReport rep;
  rep.rows.reserve(pairs.size());
  for (const auto &p : pairs) {
    const PhasePoint mid = 0.5 * (p.X + p.Xi);
    const SampledSignal v = left(p.X, mid);
    const SampledSignal w = rigid ? tf_shift(chi, p.Xi) : wave_packet_at(chi, p.Xi, mid, spec);
    const double mag = std::abs(inner(v, w));
    const double grow = std::pow(1.0 + spec.g(mid, p.X - p.Xi), static_cast<double>(Npow));
    const double val = grow * mag / eval_weight(spec.M, mid);
    rep.rows.push_back({p, val});
    rep.sup_value = std::max(rep.sup_value, val);
    const bool in_half = std::max({std::abs(p.X.x), std::abs(p.X.xi), std::abs(p.Xi.x),
                                   std::abs(p.Xi.xi)}) <= half;
    if (in_half)
      rep.sup_half = std::max(rep.sup_half, val);
  }
  rep.stable = rep.sup_value <= 1.05 * rep.sup_half;
  return rep;
}

// ---------------------------------------------------------------------------
// S(M, g) seminorms

struct SeminormOptions {
  double box = 12.0;
  std::size_t n = 61;
  bool allow_fd = false; // finite differences above the analytic order
  bool force_fd = false; // finite differences for every order
};

struct SeminormReport {
  double value = 0.0;
  double value_doubled = 0.0; // same with the box doubled
  bool grows = false;
  bool used_fd = false;
};

namespace detail {

/// Central differences of order 1..3 along one axis.
inline cplx finite_difference(const SymbolEntry &e, double x, double xi, Axis ax, int order) {
  const double h = order == 1 ? 1e-5 : order == 2 ? 1e-4 : 1e-3;
  auto f = [&](double s) {
    return ax == Axis::X ? e.fn(x + s, xi) : e.fn(x, xi + s);
  };
  switch (order) {
  case 0:
    return f(0.0);
  case 1:
    return (f(h) - f(-h)) / (2.0 * h);
  case 2:
    return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
  case 3:
    return (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h);
  default:
    throw InvalidArgument("finite differences are provided up to order 3");
  }
}

inline double seminorm_scan(const SymbolEntry &e, const MetricSpec &spec, int k,
                            double box, std::size_t n, bool fd_above, bool force_fd) {
  double best = 0.0;
  for (const auto &X : square_points(box, n)) {
    const auto [q1, q2] = spec.Q(X);
    const double M = eval_weight(spec.M, X);
    for (int l = 0; l <= k; ++l)
      for (Axis ax : {Axis::X, Axis::Xi}) {
        const bool fd = force_fd || (fd_above && l > e.max_order);
        const cplx d = fd ? finite_difference(e, X.x, X.xi, ax, l)
                          : e.axis_derivative(X.x, X.xi, ax, l);
        const double q = ax == Axis::X ? q1 : q2;
        best = std::max(best, std::abs(d) / (M * std::pow(q, 0.5 * l)));
      }
  }
  return best;
}

} // namespace detail

/// sup over sampled X, l <= k and the two axis directions T of
/// |a^{(l)}(X; T, ..., T)| / (M(X) g_X(T)^{l/2}).
inline SeminormReport sg_seminorm(const SymbolEntry &e, const MetricSpec &spec, int k,
                                  const SeminormOptions &opt = {}) {
  if (k < 0 || k > 3)
    throw InvalidArgument("seminorm order must be in 0..3");
  if (k > e.max_order && !opt.allow_fd && !opt.force_fd)
    throw NotInCatalog("symbol '" + e.id + "' has analytic derivatives up to order " +
                       std::to_string(e.max_order));
  SeminormReport rep;
  rep.used_fd = opt.force_fd || k > e.max_order;
  rep.value = detail::seminorm_scan(e, spec, k, opt.box, opt.n, opt.allow_fd, opt.force_fd);
  rep.value_doubled =
      detail::seminorm_scan(e, spec, k, 2.0 * opt.box, opt.n, opt.allow_fd, opt.force_fd);
  rep.grows = rep.value_doubled > 1.05 * rep.value;
  return rep;
}

} // namespace tfa
