#pragma once

// Closed-form windows and symbols with their analytic metadata.

#include "tfa/errors.hpp"
#include "tfa/tfcore.hpp"
#include "tfa/weights.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tfa {

// ---------------------------------------------------------------------------
// Windows

struct WindowEntry {
  std::string id;
  std::function<double(double)> fn;
  double l2_norm; // analytic L2 norm on R
  std::string description;
};

inline const std::vector<WindowEntry> &window_catalog() {
  static const std::vector<WindowEntry> entries = {
      {"gaussian",
       [](double x) { return std::pow(2.0, 0.25) * std::exp(-pi * x * x); },
       1.0, "2^{1/4} e^{-pi x^2}, unit L2 norm"},
      {"gaussian_raw", [](double x) { return std::exp(-pi * x * x); },
       std::pow(2.0, -0.25), "e^{-pi x^2}"},
      {"hermite1",
       [](double x) {
         return std::pow(2.0, 1.25) * std::sqrt(pi) * x * std::exp(-pi * x * x);
       },
       1.0, "first Hermite function, unit L2 norm"},
  };
  return entries;
}

inline const WindowEntry &find_window(const std::string &id) {
  for (const auto &w : window_catalog())
    if (w.id == id)
      return w;
  throw NotInCatalog("unknown window '" + id + "'");
}

inline SampledSignal make_window(const std::string &id, const Grid &grid) {
  return SampledSignal::from_function(grid, find_window(id).fn);
}

// ---------------------------------------------------------------------------
// Symbols

/// |d^alpha a(z)| <= m(z) C^{|alpha|} (alpha!)^s.
struct GevreyInfo {
  double s_known;
  WeightParams m;
  double C_known;
};

enum class Axis { X = 0, Xi = 1 };

struct SymbolEntry {
  std::string id;
  std::function<cplx(double, double)> fn;
  /// n-th partial derivative along one axis; nullopt above max_order.
  std::function<cplx(double, double, Axis, int)> axis_derivative;
  int max_order = 3;
  bool real = true;
  std::optional<GevreyInfo> gevrey;
  std::string description;
};

namespace detail {

/// d^n/du^n e^{-k u^2} = P_n(u) e^{-k u^2}, P_{n+1} = P_n' - 2 k u P_n.
inline double gaussian_poly(int n, double k, double u) {
  std::vector<double> p{1.0}; // coefficients in u
  for (int i = 0; i < n; ++i) {
    std::vector<double> q(p.size() + 1, 0.0);
    for (std::size_t j = 1; j < p.size(); ++j)
      q[j - 1] += static_cast<double>(j) * p[j];
    for (std::size_t j = 0; j < p.size(); ++j)
      q[j + 1] -= 2.0 * k * p[j];
    p = std::move(q);
  }
  double v = 0.0;
  for (std::size_t j = p.size(); j-- > 0;)
    v = v * u + p[j];
  return v;
}

} // namespace detail

inline const std::vector<SymbolEntry> &symbol_catalog() {
  using detail::gaussian_poly;
  static const std::vector<SymbolEntry> entries = {
      {"constant", [](double, double) { return cplx(1.0); },
       [](double, double, Axis, int n) { return cplx(n == 0 ? 1.0 : 0.0); }, 3,
       true, GevreyInfo{0.5, WeightParams::one(), 1.0}, "a = 1"},
      {"cosx", [](double x, double) { return cplx(std::cos(2.0 * pi * x)); },
       [](double x, double, Axis ax, int n) {
         if (ax == Axis::Xi)
           return cplx(n == 0 ? std::cos(2.0 * pi * x) : 0.0);
         return cplx(std::pow(2.0 * pi, n) *
                     std::cos(2.0 * pi * x + n * pi / 2.0));
       },
       3, true, GevreyInfo{1.0, WeightParams::one(), 2.0 * pi},
       "a = cos(2 pi x)"},
      {"gauss2d",
       [](double x, double xi) { return cplx(std::exp(-pi * (x * x + xi * xi))); },
       [](double x, double xi, Axis ax, int n) {
         const double u = ax == Axis::X ? x : xi;
         return cplx(gaussian_poly(n, pi, u) * std::exp(-pi * (x * x + xi * xi)));
       },
       3, true, GevreyInfo{0.5, WeightParams::one(), 2.0 * pi},
       "a = e^{-pi |z|^2}"},
      {"chirp",
       [](double x, double xi) { return std::exp(2.0 * pi * I * x * xi); },
       [](double x, double xi, Axis ax, int n) {
         const double other = ax == Axis::X ? xi : x;
         return std::pow(2.0 * pi * I * other, n) *
                std::exp(2.0 * pi * I * x * xi);
       },
       3, false, std::nullopt, "a = e^{2 pi i x xi}"},
      {"growing",
       [](double x, double xi) {
         return cplx(std::exp(0.5 * pi * (x * x + xi * xi)));
       },
       [](double x, double xi, Axis ax, int n) {
         const double u = ax == Axis::X ? x : xi;
         return cplx(gaussian_poly(n, -0.5 * pi, u) *
                     std::exp(0.5 * pi * (x * x + xi * xi)));
       },
       3, true, std::nullopt, "a = e^{(pi/2) |z|^2}, outside every class"},
      {"x", [](double x, double) { return cplx(x); },
       [](double x, double, Axis ax, int n) {
         if (n == 0)
           return cplx(x);
         return cplx(ax == Axis::X && n == 1 ? 1.0 : 0.0);
       },
       3, true, GevreyInfo{0.5, WeightParams{0.0, 0.0, 1.0, 0.0}, 1.0}, "a = x"},
      {"xi", [](double, double xi) { return cplx(xi); },
       [](double, double xi, Axis ax, int n) {
         if (n == 0)
           return cplx(xi);
         return cplx(ax == Axis::Xi && n == 1 ? 1.0 : 0.0);
       },
       3, true, GevreyInfo{0.5, WeightParams{0.0, 0.0, 1.0, 0.0}, 1.0},
       "a = xi"},
  };
  return entries;
}

inline const SymbolEntry &find_symbol(const std::string &id) {
  for (const auto &s : symbol_catalog())
    if (s.id == id)
      return s;
  // accepted alias
  if (id == "gaussian2d")
    return find_symbol("gauss2d");
  throw NotInCatalog("unknown symbol '" + id + "'");
}

/// Sample a symbol on arbitrary phase-space axes.
inline SymbolGrid sample_symbol(const SymbolEntry &e, const TFGrid &axes) {
  return SymbolGrid::from_function(axes, e.fn);
}

/// Sample a symbol on the Weyl layout of a signal grid.
inline SymbolGrid make_symbol(const std::string &id, const Grid &grid) {
  return sample_symbol(find_symbol(id), symbol_axes(grid));
}

} // namespace tfa
