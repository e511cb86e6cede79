#pragma once

// Weight functions m_{a,b,c,t}(x) = e^{a|x|^b} (1+|x|)^c (log(e+|x|))^t and
// empirical certification of the submultiplicative / subconvolutive /
// moderate classes over a finite box.

#include "tfa/errors.hpp"
#include "tfa/tfcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace tfa {

struct WeightParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double t = 0.0;

  /// m(x) = e^{r |x|^{1/s}}.
  static WeightParams subexponential(double r, double s) {
    if (!(s > 0.0))
      throw InvalidArgument("subexponential weight needs s > 0");
    return {r, 1.0 / s, 0.0, 0.0};
  }
  static WeightParams one() { return {}; }

  /// b is allowed above 1 so that e^{r|x|^{1/s}} with s < 1 is expressible.
  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) ||
        !std::isfinite(t))
      throw InvalidArgument("weight parameters must be finite");
    if (b < 0.0)
      throw InvalidArgument("weight exponent b must be >= 0");
  }

  bool is_one() const { return a == 0.0 && c == 0.0 && t == 0.0; }
  friend bool operator==(const WeightParams &, const WeightParams &) = default;
};

/// log m(|x|); the weight itself can overflow for large exponents.
inline double log_weight(const WeightParams &p, double norm_x) {
  const double r = std::abs(norm_x);
  double v = 0.0;
  if (p.a != 0.0)
    v += p.a * (p.b == 0.0 ? 1.0 : std::pow(r, p.b));
  if (p.c != 0.0)
    v += p.c * std::log1p(r);
  if (p.t != 0.0)
    v += p.t * std::log(std::log(std::numbers::e + r));
  return v;
}

inline double eval_weight(const WeightParams &p, double x) {
  return std::exp(log_weight(p, x));
}

/// Weight at a point of R^d, |x| the Euclidean norm.
inline double eval_weight(const WeightParams &p, std::span<const double> x) {
  double s = 0.0;
  for (double v : x)
    s += v * v;
  return std::exp(log_weight(p, std::sqrt(s)));
}

inline double eval_weight(const WeightParams &p, PhasePoint z) {
  return std::exp(log_weight(p, z.norm()));
}

/// 1 for s > 1, 2^{-1/s} for 0 < s <= 1.
inline double subconv_constant(double s) {
  if (!(s > 0.0))
    throw InvalidArgument("subconv_constant needs s > 0");
  return s > 1.0 ? 1.0 : std::pow(2.0, -1.0 / s);
}

enum class WeightClass { Submultiplicative, Subconvolutive, Moderate };

inline std::string to_string(WeightClass k) {
  switch (k) {
  case WeightClass::Submultiplicative:
    return "submultiplicative";
  case WeightClass::Subconvolutive:
    return "subconvolutive";
  case WeightClass::Moderate:
    return "moderate";
  }
  return "?";
}

struct ClassReport {
  WeightClass kind;
  bool holds = false;
  double constant = 0.0;            // best C on the base sampling
  std::vector<double> witness;      // point(s) realising C
  double constant_refined = 0.0;    // doubled sample density
  double constant_expanded = 0.0;   // doubled box
  double target_a = 0.0;            // subconvolutive: exponent on the right
};

namespace detail {

inline bool stable_within(double base, double other, double tol = 0.05) {
  if (!std::isfinite(base) || !std::isfinite(other))
    return false;
  return std::abs(other - base) <= tol * std::abs(base);
}

struct PairMax {
  double log_c = -std::numeric_limits<double>::infinity();
  double x = 0.0, y = 0.0;
};

/// max over x, y in a uniform n-point sampling of [-box, box] of
/// log m(x+y) - log v(x) - log m(y).
inline PairMax pair_scan(const WeightParams &m, const WeightParams &v,
                         double box, std::size_t n) {
  if (n < 2 || !(box > 0.0))
    throw InvalidArgument("pair scan needs n >= 2 and box > 0");
  std::vector<double> xs(n), lm(n), lv(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = -box + 2.0 * box * static_cast<double>(i) / static_cast<double>(n - 1);
    lm[i] = log_weight(m, xs[i]);
    lv[i] = log_weight(v, xs[i]);
  }
  PairMax best;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r = log_weight(m, xs[i] + xs[j]) - lv[i] - lm[j];
      if (r > best.log_c) {
        best.log_c = r;
        best.x = xs[i];
        best.y = xs[j];
      }
    }
  return best;
}

inline ClassReport pair_report(WeightClass kind, const WeightParams &m,
                               const WeightParams &v, double box,
                               std::size_t n) {
  m.validate();
  v.validate();
  const PairMax base = pair_scan(m, v, box, n);
  const PairMax fine = pair_scan(m, v, box, 2 * n - 1);
  const PairMax wide = pair_scan(m, v, 2.0 * box, 2 * n - 1);
  ClassReport rep{kind};
  rep.constant = std::exp(base.log_c);
  rep.witness = {base.x, base.y};
  rep.constant_refined = std::exp(fine.log_c);
  rep.constant_expanded = std::exp(wide.log_c);
  rep.holds = std::isfinite(rep.constant) &&
              stable_within(rep.constant, rep.constant_refined) &&
              stable_within(rep.constant, rep.constant_expanded);
  return rep;
}

} // namespace detail

/// C = max m(x+y) / (m(x) m(y)) over sampled pairs; holds when C is stable
/// under doubling both the sample density and the box.
inline ClassReport check_submultiplicative(const WeightParams &p,
                                           double box = 12.0,
                                           std::size_t n = 481) {
  return detail::pair_report(WeightClass::Submultiplicative, p, p, box, n);
}

/// C = max m(x+y) / (v(x) m(y)).
inline ClassReport check_moderate(const WeightParams &m, const WeightParams &v,
                                  double box = 12.0, std::size_t n = 481) {
  return detail::pair_report(WeightClass::Moderate, m, v, box, n);
}

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v)
    mx = std::max(mx, x);
  if (!std::isfinite(mx))
    return mx;
  double s = 0.0;
  for (double x : v)
    s += std::exp(x - mx);
  return mx + std::log(s);
}

/// delta * sum_j 1/m(x_j) over a grid.
inline double inverse_mass(const WeightParams &p, const Grid &g) {
  std::vector<double> terms(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    terms[j] = -log_weight(p, g.point(static_cast<long>(j)));
  return std::exp(log_sum_exp(terms)) * g.delta();
}

struct ConvMax {
  double log_c = -std::numeric_limits<double>::infinity();
  double x = 0.0;
};

/// max over |x| <= L/4 of log[(m^{-1} * m^{-1})(x)] + log m_target(x).
inline ConvMax subconv_scan(const WeightParams &p, const WeightParams &target,
                            const Grid &g) {
  const long n = static_cast<long>(g.size());
  std::vector<double> lm(g.size());
  for (long j = 0; j < n; ++j)
    lm[j] = log_weight(p, g.point(j));
  const double quarter = 0.25 * g.length();
  ConvMax best;
  std::vector<double> terms;
  terms.reserve(g.size());
  for (long i = 0; i < n; ++i) {
    const double x = g.point(i);
    if (std::abs(x) > quarter)
      continue;
    terms.clear();
    // x - y_k lands on the grid at index i - k + n/2
    for (long k = 0; k < n; ++k) {
      const long d = i - k + n / 2;
      if (d < 0 || d >= n)
        continue;
      terms.push_back(-lm[d] - lm[k]);
    }
    const double v =
        log_sum_exp(terms) + std::log(g.delta()) + log_weight(target, x);
    if (v > best.log_c) {
      best.log_c = v;
      best.x = x;
    }
  }
  return best;
}

} // namespace detail

/// Discrete m^{-1} * m^{-1} <= C m_target^{-1}. For e^{a|x|^b} with b >= 1
/// (i.e. e^{r|x|^{1/s}}, s <= 1) the target exponent is 2^{-b} a; otherwise
/// the target is m itself. Throws NotIntegrable when the mass of 1/m keeps
/// growing under box doubling.
inline ClassReport check_subconvolutive(const WeightParams &p, const Grid &grid) {
  p.validate();
  {
    const Grid g2(2 * grid.size(), grid.delta());
    const Grid g4(4 * grid.size(), grid.delta());
    const double s1 = detail::inverse_mass(p, grid);
    const double s2 = detail::inverse_mass(p, g2);
    const double s4 = detail::inverse_mass(p, g4);
    const double d1 = s2 - s1;
    const double d2 = s4 - s2;
    if (!std::isfinite(s4) || (d1 > 1e-300 && d2 >= 0.9 * d1))
      throw NotIntegrable("sum of 1/m keeps growing under box doubling (" +
                          std::to_string(s1) + ", " + std::to_string(s2) +
                          ", " + std::to_string(s4) + ")");
  }
  WeightParams target = p;
  const bool pure_exp = p.a > 0.0 && p.c == 0.0 && p.t == 0.0;
  if (pure_exp && p.b >= 1.0)
    target.a = std::pow(2.0, -p.b) * p.a;

  const auto base = detail::subconv_scan(p, target, grid);
  const auto fine = detail::subconv_scan(
      p, target, Grid(2 * grid.size(), 0.5 * grid.delta()));
  const auto wide =
      detail::subconv_scan(p, target, Grid(2 * grid.size(), grid.delta()));
  ClassReport rep{WeightClass::Subconvolutive};
  rep.constant = std::exp(base.log_c);
  rep.witness = {base.x};
  rep.constant_refined = std::exp(fine.log_c);
  rep.constant_expanded = std::exp(wide.log_c);
  rep.target_a = target.a;
  rep.holds = std::isfinite(rep.constant) &&
              detail::stable_within(rep.constant, rep.constant_refined) &&
              detail::stable_within(rep.constant, rep.constant_expanded);
  return rep;
}

} // namespace tfa
