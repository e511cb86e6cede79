#pragma once

// Finitely supported sequences on separable lattices alpha Z x beta Z and the
// weighted sup-norms ||a||_{r,s} = sup |a_lambda| e^{r |lambda|^{1/s}}.

#include "tfa/errors.hpp"
#include "tfa/tfcore.hpp"
#include "tfa/weights.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <map>
#include <string>

namespace tfa {

struct LatticeIndex {
  long k = 0; // time index
  long i = 0; // frequency index
  friend auto operator<=>(const LatticeIndex &, const LatticeIndex &) = default;
  friend LatticeIndex operator+(LatticeIndex a, LatticeIndex b) {
    return {a.k + b.k, a.i + b.i};
  }
  friend LatticeIndex operator-(LatticeIndex a, LatticeIndex b) {
    return {a.k - b.k, a.i - b.i};
  }
  LatticeIndex operator-() const { return {-k, -i}; }
};

/// Step sizes of alpha Z x beta Z. A sequence on Z uses alpha = 1 and i = 0.
struct LatticeGeometry {
  double alpha = 1.0;
  double beta = 1.0;

  PhasePoint point(LatticeIndex l) const {
    return {static_cast<double>(l.k) * alpha, static_cast<double>(l.i) * beta};
  }
  double radius(LatticeIndex l) const { return point(l).norm(); }

  friend bool operator==(const LatticeGeometry &a, const LatticeGeometry &b) {
    auto close = [](double u, double v) {
      return std::abs(u - v) <= 1e-12 * std::max(std::abs(u), std::abs(v));
    };
    return close(a.alpha, b.alpha) && close(a.beta, b.beta);
  }
};

struct SeqNormParams {
  double r = 1.0;
  double s = 1.0;
  void validate() const {
    if (!(r > 0.0) || !(s > 0.0))
      throw InvalidArgument("sequence norm needs r > 0 and s > 0");
  }
};

class LatticeSeq {
public:
  using Map = std::map<LatticeIndex, cplx>;

  LatticeSeq() = default;
  explicit LatticeSeq(LatticeGeometry geom) : geom_(geom) {}
  LatticeSeq(LatticeGeometry geom, Map values)
      : geom_(geom), values_(std::move(values)) {}

  /// Sequence on Z given by values at consecutive indices first, first+1, ...
  static LatticeSeq on_integers(long first, const std::vector<cplx> &v) {
    LatticeSeq s(LatticeGeometry{1.0, 1.0});
    for (std::size_t j = 0; j < v.size(); ++j)
      s.set({first + static_cast<long>(j), 0}, v[j]);
    return s;
  }
  static LatticeSeq spike(LatticeGeometry geom, LatticeIndex at, cplx v = 1.0) {
    LatticeSeq s(geom);
    s.set(at, v);
    return s;
  }

  const LatticeGeometry &geometry() const { return geom_; }
  const Map &values() const { return values_; }
  std::size_t support_size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  cplx at(LatticeIndex l) const {
    auto it = values_.find(l);
    return it == values_.end() ? cplx(0.0) : it->second;
  }
  void set(LatticeIndex l, cplx v) { values_[l] = v; }
  void add(LatticeIndex l, cplx v) { values_[l] += v; }

  void require_same_lattice(const LatticeSeq &o) const {
    if (!(geom_ == o.geom_))
      throw LatticeMismatch("sequences live on different lattices");
  }

private:
  LatticeGeometry geom_;
  Map values_;
};

/// sup |a_lambda| e^{r |lambda|^{1/s}}; evaluated in log space.
inline double seq_norm(const LatticeSeq &a, const SeqNormParams &p) {
  p.validate();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto &[l, v] : a.values()) {
    const double m = std::abs(v);
    if (m == 0.0)
      continue;
    best = std::max(best, std::log(m) +
                              p.r * std::pow(a.geometry().radius(l), 1.0 / p.s));
  }
  return std::isfinite(best) ? std::exp(best) : 0.0;
}

/// sum |a_lambda|.
inline double l1_norm(const LatticeSeq &a) {
  double s = 0.0;
  for (const auto &[l, v] : a.values())
    s += std::abs(v);
  return s;
}

/// c_lambda = sum_mu a_{lambda - mu} b_mu.
inline LatticeSeq seq_convolve(const LatticeSeq &a, const LatticeSeq &b) {
  a.require_same_lattice(b);
  LatticeSeq c(a.geometry());
  for (const auto &[la, va] : a.values())
    for (const auto &[lb, vb] : b.values())
      c.add(la + lb, va * vb);
  return c;
}

/// a*_lambda = a_{-lambda}.
inline LatticeSeq involution(const LatticeSeq &a) {
  LatticeSeq out(a.geometry());
  for (const auto &[l, v] : a.values())
    out.set(-l, v);
  return out;
}

struct IndexBox {
  long kmin = 0, kmax = -1, imin = 0, imax = -1;
  bool empty() const { return kmax < kmin || imax < imin; }
  void include(LatticeIndex l) {
    if (empty()) {
      kmin = kmax = l.k;
      imin = imax = l.i;
      return;
    }
    kmin = std::min(kmin, l.k);
    kmax = std::max(kmax, l.k);
    imin = std::min(imin, l.i);
    imax = std::max(imax, l.i);
  }
};

inline IndexBox support_box(const LatticeSeq &a) {
  IndexBox b;
  for (const auto &[l, v] : a.values())
    b.include(l);
  return b;
}

/// K(r, s) = sum over the box of e^{-r |lambda|^{1/s}}.
inline double lattice_sum(const LatticeGeometry &geom, const IndexBox &box,
                          double r, double s) {
  double acc = 0.0;
  for (long k = box.kmin; k <= box.kmax; ++k)
    for (long i = box.imin; i <= box.imax; ++i)
      acc += std::exp(-r * std::pow(geom.radius({k, i}), 1.0 / s));
  return acc;
}

struct ConvolutionReport {
  double lhs = 0.0;     // ||a * b||_{c r, s}
  double rhs = 0.0;     // K ||a||_{r,s} ||b||_{r,s}
  double ratio = 0.0;   // lhs / rhs
  double c_used = 1.0;  // subconv_constant(s)
  double K_used = 0.0;  // constant entering rhs
  double K_box = 0.0;   // sum_lambda e^{-c r |lambda|^{1/s}} over the box
  double K_exact = 0.0; // sup_lambda sum_mu e^{c r|l|^p - r|l-mu|^p - r|mu|^p}
};

/// ||a * b||_{cr,s} <= K ||a||_{r,s} ||b||_{r,s}. K is the box sum for s <= 1
/// (where it dominates the exact constant); for s > 1 the box sum is not an
/// upper bound, so the exact supremum over the supports is used instead.
inline ConvolutionReport verify_convolution_inequality(const LatticeSeq &a,
                                                       const LatticeSeq &b,
                                                       const SeqNormParams &p) {
  p.validate();
  a.require_same_lattice(b);
  const auto &geom = a.geometry();
  const double pw = 1.0 / p.s;
  ConvolutionReport rep;
  rep.c_used = subconv_constant(p.s);
  const LatticeSeq c = seq_convolve(a, b);
  rep.lhs = seq_norm(c, {rep.c_used * p.r, p.s});

  IndexBox box = support_box(a);
  for (const auto &[l, v] : b.values())
    box.include(l);
  for (const auto &[l, v] : c.values())
    box.include(l);
  if (!box.empty())
    rep.K_box = lattice_sum(geom, box, rep.c_used * p.r, p.s);

  double kex = 0.0;
  for (const auto &[lc, vc] : c.values()) {
    const double grow = rep.c_used * p.r * std::pow(geom.radius(lc), pw);
    double acc = 0.0;
    for (const auto &[lb, vb] : b.values()) {
      const LatticeIndex la = lc - lb;
      if (!a.values().contains(la))
        continue;
      acc += std::exp(grow - p.r * std::pow(geom.radius(la), pw) -
                      p.r * std::pow(geom.radius(lb), pw));
    }
    kex = std::max(kex, acc);
  }
  rep.K_exact = kex;
  rep.K_used = p.s <= 1.0 ? rep.K_box : rep.K_exact;
  rep.rhs = rep.K_used * seq_norm(a, p) * seq_norm(b, p);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

} // namespace tfa
