#pragma once

// Almost-diagonalization checks: envelopes of Gabor matrices, certified
// decay fits H(z) <= C e^{-eps |z|^{1/s}}, membership probes for G(a) o j,
// and the Gevrey-symbol => matrix-decay pipeline.

#include "tfa/amalgam.hpp"
#include "tfa/catalog.hpp"
#include "tfa/errors.hpp"
#include "tfa/frames.hpp"
#include "tfa/seqspace.hpp"
#include "tfa/tfcore.hpp"
#include "tfa/weights.hpp"
#include "tfa/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tfa {

/// H(z) on a set of difference vectors.
struct Envelope {
  std::vector<PhasePoint> z;
  std::vector<LatticeIndex> index; // difference index (may be empty)
  std::vector<double> H;

  std::size_t size() const { return H.size(); }
  void push(PhasePoint p, double h, LatticeIndex l = {}) {
    z.push_back(p);
    H.push_back(h);
    index.push_back(l);
  }
};

namespace detail {

/// Running per-difference maximum.
class EnvelopeBuilder {
public:
  explicit EnvelopeBuilder(LatticeGeometry geom) : geom_(geom) {}
  void add(LatticeIndex d, double v) {
    auto [it, fresh] = max_.try_emplace(d, v);
    if (!fresh)
      it->second = std::max(it->second, v);
  }
  Envelope build() const {
    Envelope e;
    for (const auto &[d, v] : max_)
      e.push(geom_.point(d), v, d);
    return e;
  }
  LatticeSeq sequence() const {
    LatticeSeq s(geom_);
    for (const auto &[d, v] : max_)
      s.set(d, v);
    return s;
  }

private:
  LatticeGeometry geom_;
  std::map<LatticeIndex, double> max_;
};

} // namespace detail

/// H(z) = max over lambda - mu = z (cyclically reduced) of
/// |M[lambda, mu]| / m((lambda + mu)/2).
inline Envelope envelope(const GaborMatrix &M,
                         const std::optional<WeightParams> &m = std::nullopt) {
  const auto &L = M.lattice;
  detail::EnvelopeBuilder b(L.geometry());
  const auto &idx = M.indices;
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) {
      double v = std::abs(M.entries(static_cast<long>(r), static_cast<long>(c)));
      if (m) {
        const PhasePoint mid = 0.5 * (L.point(idx[r]) + L.point(idx[c]));
        v /= eval_weight(*m, mid);
      }
      b.add(L.wrap_difference(idx[r] - idx[c]), v);
    }
  return b.build();
}

namespace detail {

/// A few ulps up, so that C e^{-eps u} still covers the point that set C.
inline double round_up(double c) { return c * (1.0 + 8.0 * std::numeric_limits<double>::epsilon()); }

} // namespace detail

struct DecayFit {
  double s = 1.0;
  double epsilon = 0.0;
  double C = 0.0;     // inflated amplitude
  double C_fit = 0.0; // least-squares amplitude
  double max_violation = 0.0;
  double r2 = 0.0;
  double slope_t = 0.0; // t statistic of the fitted slope
  std::size_t n_used = 0;
  double floor = 1e-14;
  bool certified = false;

  double bound(PhasePoint z) const {
    return C * std::exp(-epsilon * std::pow(z.norm(), 1.0 / s));
  }
};

/// Least squares of log H against |z|^{1/s} over entries above the floor,
/// then C raised just enough for the bound to cover every such entry.
/// Entries at or below the floor are numerical zero and are not fitted.
/// Certified iff epsilon > 0, max_violation <= 1 + 1e-9 and the slope is
/// significant (t >= 3), so that pure noise does not certify.
inline DecayFit fit_decay(const Envelope &H, double s, double floor = 1e-14) {
  if (!(s > 0.0))
    throw InvalidArgument("fit_decay needs s > 0");
  std::size_t nonzero = 0;
  std::vector<double> u, y;
  for (std::size_t q = 0; q < H.size(); ++q) {
    if (H.H[q] > 0.0)
      ++nonzero;
    if (H.H[q] > floor) {
      u.push_back(std::pow(H.z[q].norm(), 1.0 / s));
      y.push_back(std::log(H.H[q]));
    }
  }
  if (nonzero < 8)
    throw InsufficientData("envelope has " + std::to_string(nonzero) +
                           " nonzero values, need at least 8");
  if (u.empty())
    throw AllBelowFloor("every envelope value is below the fitting floor");
  if (u.size() < 3)
    throw InsufficientData("fewer than 3 envelope values above the floor");

  const double n = static_cast<double>(u.size());
  double mu = 0.0, my = 0.0;
  for (std::size_t q = 0; q < u.size(); ++q) {
    mu += u[q];
    my += y[q];
  }
  mu /= n;
  my /= n;
  double suu = 0.0, suy = 0.0, syy = 0.0;
  for (std::size_t q = 0; q < u.size(); ++q) {
    suu += (u[q] - mu) * (u[q] - mu);
    suy += (u[q] - mu) * (y[q] - my);
    syy += (y[q] - my) * (y[q] - my);
  }
  DecayFit fit;
  fit.s = s;
  fit.floor = floor;
  fit.n_used = u.size();
  if (suu <= 0.0)
    throw InsufficientData("all envelope points share one radius");
  const double slope = suy / suu;
  fit.epsilon = -slope;
  const double log_c = my - slope * mu;
  fit.C_fit = std::exp(log_c);
  double sse = 0.0;
  for (std::size_t q = 0; q < u.size(); ++q) {
    const double e = y[q] - (log_c + slope * u[q]);
    sse += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (u.size() > 2) {
    const double se = std::sqrt(sse / (n - 2.0) / suu);
    fit.slope_t = se > 0.0 ? std::abs(slope) / se
                           : std::numeric_limits<double>::infinity();
  }
  double need = log_c;
  for (std::size_t q = 0; q < u.size(); ++q)
    need = std::max(need, y[q] + fit.epsilon * u[q]);
  fit.C = detail::round_up(std::exp(need));
  fit.max_violation = 0.0;
  for (std::size_t q = 0; q < H.size(); ++q)
    if (H.H[q] > floor)
      fit.max_violation = std::max(fit.max_violation, H.H[q] / fit.bound(H.z[q]));
  fit.certified =
      fit.epsilon > 0.0 && fit.max_violation <= 1.0 + 1e-9 && fit.slope_t >= 3.0;
  return fit;
}

// ---------------------------------------------------------------------------
// G(a) o j membership

struct MembershipOptions {
  std::size_t stride_x = 8;  // window positions, symbol-grid samples
  std::size_t stride_xi = 8;
  CellCover cover = CellCover::unit();
  double floor = 1e-14; // relative to max G; smaller values are round-off
};

struct MembershipReport {
  double norm_value = 0.0; // ||G(a) o j||_{W} on the full box
  double norm_half = 0.0;  // same on the inner half box
  bool grows_with_box = false;
};

/// G(a)(zeta) = sup_X |V_Phi a(X, zeta)|, composed with j, on the signal
/// phase-space box: (x, xi) = (-zeta_2, zeta_1). Only the principal range
/// |zeta_1| < 1/(2 delta) is kept; outside it the discrete Wigner window
/// produces periodic images of the central part.
inline PhaseArray g_of_a_composed_j(const SymbolGrid &a, const SampledSignal &g,
                                    const MembershipOptions &opt = {}) {
  const Grid grid = signal_grid_of(a);
  if (!(grid == g.grid()))
    throw ShapeMismatch("symbol layout does not match the window grid");
  const SymbolGrid phi = wigner_symbol(g, g);
  PhaseArray sup = big_stft_sup_over_positions(a, phi, opt.stride_x, opt.stride_xi);
  const double cut = opt.floor * sup.max_abs();
  for (auto &v : sup.values())
    if (v.real() < cut)
      v = 0.0;
  const long n = static_cast<long>(grid.size());
  PhaseArray out(TFGrid::full(grid));
  for (long ix = 0; ix < n; ++ix)
    for (long ixi = 0; ixi < n; ++ixi) {
      const long k1 = ixi + n / 2;              // zeta_1 = xi on the 2N axis
      const long k2 = detail::wrap(n - ix, n);  // zeta_2 = -x
      out(static_cast<std::size_t>(ix), static_cast<std::size_t>(ixi)) =
          sup(static_cast<std::size_t>(k1), static_cast<std::size_t>(k2));
    }
  return out;
}

/// Centred sub-array covering the inner half of each axis.
inline PhaseArray inner_half(const PhaseArray &F) {
  const std::size_t r = F.rows(), c = F.cols();
  const TFGrid ax{Grid(r / 2, F.axes().time.delta()), Grid(c / 2, F.axes().freq.delta())};
  PhaseArray out(ax);
  for (std::size_t p = 0; p < r / 2; ++p)
    for (std::size_t l = 0; l < c / 2; ++l)
      out(p, l) = F(p + r / 4, l + c / 4);
  return out;
}

inline MembershipReport mtilde_membership(const SymbolGrid &a, const SampledSignal &g,
                                          double r, double s,
                                          const MembershipOptions &opt = {}) {
  if (g.norm() == 0.0)
    throw ZeroWindow("membership window has zero norm");
  const PhaseArray G = g_of_a_composed_j(a, g, opt);
  MembershipReport rep;
  const SeqNormParams p{r, s};
  rep.norm_value = wiener_norm(G, opt.cover, p);
  rep.norm_half = wiener_norm(inner_half(G), opt.cover, p);
  rep.grows_with_box = rep.norm_value > 1.05 * rep.norm_half;
  return rep;
}

// ---------------------------------------------------------------------------
// Gevrey symbol => decay of the Gabor matrix

struct EquivalenceOptions {
  bool allow_uncertified = false;
  double margin = 3.5;      // distance kept from the box edge
  double pair_step = 0.5;   // target spacing of continuous pairs
  double floor_rel = 1e-12; // envelope values below floor_rel * max are round-off
};

struct PartReport {
  std::string name;
  bool certified = false;
  DecayFit fit;
  double C_inner = 0.0; // amplitude needed on the half-radius pairs
  double norm_full = 0.0;
  double norm_inner = 0.0;
  bool stable = false;
  std::size_t pairs = 0;
  std::string note;
};

struct EquivalenceReport {
  std::string symbol_id;
  double s = 1.0;
  std::optional<GevreyInfo> gevrey;
  double radius_full = 0.0;
  double radius_inner = 0.0;
  PartReport continuous, lattice, envelope_part;
  bool certified = false;
};

namespace detail {

inline double max_of(const Envelope &e) {
  double m = 0.0;
  for (double v : e.H)
    m = std::max(m, v);
  return m;
}

/// Copy of a sequence with entries at or below `floor` removed.
inline LatticeSeq above(const LatticeSeq &a, double floor) {
  LatticeSeq out(a.geometry());
  for (const auto &[l, v] : a.values())
    if (std::abs(v) > floor)
      out.set(l, v);
  return out;
}

inline bool inside(PhasePoint p, double R) {
  return std::abs(p.x) <= R + 1e-12 && std::abs(p.xi) <= R + 1e-12;
}

/// Fit the rate on the half-radius envelope, then find the amplitude the
/// full-radius envelope needs at that rate. A symbol whose matrix entries
/// keep growing with the box needs a larger amplitude and is not stable.
inline void certify_part(PartReport &part, const Envelope &full,
                         const Envelope &inner, double s, double floor) {
  DecayFit in;
  try {
    in = fit_decay(inner, s, floor);
  } catch (const Error &e) {
    part.note = e.what();
    part.certified = false;
    return;
  }
  part.C_inner = in.C;
  DecayFit fit = in;
  double need = std::log(in.C);
  for (std::size_t q = 0; q < full.size(); ++q)
    if (full.H[q] > fit.floor)
      need = std::max(need, std::log(full.H[q]) +
                                fit.epsilon * std::pow(full.z[q].norm(), 1.0 / s));
  fit.C = round_up(std::exp(need));
  fit.max_violation = 0.0;
  for (std::size_t q = 0; q < full.size(); ++q)
    if (full.H[q] > fit.floor)
      fit.max_violation = std::max(fit.max_violation, full.H[q] / fit.bound(full.z[q]));
  fit.certified = fit.epsilon > 0.0 && fit.max_violation <= 1.0 + 1e-9 &&
                  fit.slope_t >= 3.0;
  part.fit = fit;
  part.stable = fit.C <= 1.05 * in.C;
  part.certified = fit.certified && part.stable;
}

} // namespace detail

inline EquivalenceReport verify_equivalence(const std::string &symbol_id,
                                            const SampledSignal &g, const Lattice &L,
                                            double s, const WeightParams &m,
                                            const EquivalenceOptions &opt = {}) {
  const SymbolEntry &entry = find_symbol(symbol_id);
  if (!opt.allow_uncertified) {
    if (!entry.gevrey)
      throw NotInCatalog("symbol '" + symbol_id +
                         "' has no certified Gevrey bound");
    if (entry.gevrey->s_known > s + 1e-12)
      throw NotInCatalog("symbol '" + symbol_id + "' is only certified for s >= " +
                         std::to_string(entry.gevrey->s_known));
  }
  if (!(g.grid() == L.grid()))
    throw GridMismatch("window and lattice grids differ");
  const Grid &grid = L.grid();
  const long n = static_cast<long>(grid.size());

  EquivalenceReport rep;
  rep.symbol_id = entry.id;
  rep.s = s;
  rep.gevrey = entry.gevrey;
  rep.radius_full =
      std::min(grid.half_width(), grid.dual().half_width()) - opt.margin;
  if (rep.radius_full <= 0.0)
    throw InvalidArgument("grid box too small for the edge margin");
  rep.radius_inner = 0.5 * rep.radius_full;
  const double Rf = rep.radius_full, Ri = rep.radius_inner;

  const SymbolGrid a = sample_symbol(entry, symbol_axes(grid));
  const Eigen::MatrixXcd K = weyl_kernel(a);
  auto weight = [&](PhasePoint mid) { return eval_weight(m, mid); };

  // (A) continuous grid-aligned pairs on a coarse sub-grid
  {
    PartReport &part = rep.continuous;
    part.name = "continuous";
    const long px = std::max(1L, std::lround(opt.pair_step / grid.delta()));
    const long pb = std::max(1L, std::lround(opt.pair_step / grid.freq_spacing()));
    const double hx = static_cast<double>(px) * grid.delta();
    const double hb = static_cast<double>(pb) * grid.freq_spacing();
    std::size_t nt = 2;
    while (static_cast<double>(nt) * hx < 2.0 * Rf + hx)
      nt *= 2;
    std::size_t nb = 2;
    while (static_cast<double>(nb) * hb < 2.0 * Rf + hb)
      nb *= 2;
    if (static_cast<long>(nt) * px > n || static_cast<long>(nb) * pb > n)
      throw InvalidArgument("continuous pair grid exceeds the signal box");
    const TFGrid ys{Grid(nt, hx), Grid(nb, hb)};
    const LatticeGeometry geom{hx, hb};
    detail::EnvelopeBuilder full(geom), inner(geom);
    const long mx = static_cast<long>(std::floor(Rf / hx + 1e-9));
    const long mb = static_cast<long>(std::floor(Rf / hb + 1e-9));
    for (long kx = -mx; kx <= mx; ++kx)
      for (long kb = -mb; kb <= mb; ++kb) {
        const PhasePoint X{static_cast<double>(kx) * hx, static_cast<double>(kb) * hb};
        const SampledSignal v = kernel_apply(K, tf_shift(g, X));
        const PhaseArray V = stft(v, g, ys);
        for (std::size_t iy = 0; iy < nt; ++iy)
          for (std::size_t jy = 0; jy < nb; ++jy) {
            const long ky = static_cast<long>(iy) - static_cast<long>(nt / 2);
            const long jb = static_cast<long>(jy) - static_cast<long>(nb / 2);
            const PhasePoint Y{static_cast<double>(ky) * hx, static_cast<double>(jb) * hb};
            if (!detail::inside(Y, Rf))
              continue;
            const double val = std::abs(V(iy, jy)) / weight(0.5 * (X + Y));
            const LatticeIndex d{ky - kx, jb - kb};
            full.add(d, val);
            ++part.pairs;
            if (detail::inside(X, Ri) && detail::inside(Y, Ri))
              inner.add(d, val);
          }
      }
    const Envelope Hi = inner.build();
    detail::certify_part(part, full.build(), Hi, s, opt.floor_rel * detail::max_of(Hi));
  }

  // (B) lattice pairs, (C) lattice envelope as a weighted sequence
  {
    const GaborMatrix M = gabor_matrix(a, g, L, nullptr, "window", entry.id);
    const auto &idx = M.indices;
    detail::EnvelopeBuilder full(L.geometry()), inner(L.geometry());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const PhasePoint lam = L.point(idx[r]);
      if (!detail::inside(lam, Rf))
        continue;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const PhasePoint mu = L.point(idx[c]);
        if (!detail::inside(mu, Rf))
          continue;
        const double val = std::abs(M.entries(static_cast<long>(r), static_cast<long>(c))) /
                           weight(0.5 * (lam + mu));
        full.add(idx[r] - idx[c], val);
        ++rep.lattice.pairs;
        if (detail::inside(lam, Ri) && detail::inside(mu, Ri))
          inner.add(idx[r] - idx[c], val);
      }
    }
    rep.lattice.name = "lattice";
    rep.lattice.note = "scalar Gabor frame used in place of a superframe";
    const Envelope Hf = full.build();
    const Envelope Hi = inner.build();
    const double floor = opt.floor_rel * detail::max_of(Hi);
    detail::certify_part(rep.lattice, Hf, Hi, s, floor);

    PartReport &part = rep.envelope_part;
    part.name = "envelope";
    part.pairs = rep.lattice.pairs;
    part.fit = rep.lattice.fit;
    if (part.fit.epsilon > 0.0) {
      const SeqNormParams p{0.5 * part.fit.epsilon, s};
      part.norm_full = seq_norm(detail::above(full.sequence(), floor), p);
      part.norm_inner = seq_norm(detail::above(inner.sequence(), floor), p);
      part.stable = part.norm_inner > 0.0 && part.norm_full <= 1.05 * part.norm_inner;
    }
    part.certified = part.fit.certified && part.stable;
    part.note = "H in A^s_r with r = epsilon/2";
  }

  rep.certified = rep.continuous.certified && rep.lattice.certified &&
                  rep.envelope_part.certified;
  return rep;
}

} // namespace tfa
