// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "tfa/tfa.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace tfa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char *name, double budget_s, const std::function<Outcome()> &fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && dt > budget_s) {
    o.pass = false;
    o.detail += " (over time budget)";
  }
  if (!o.pass)
    ++failures;
  std::printf("%s %2d %-28s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name, dt,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char *f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Grid grid_for(std::size_t n) { return Grid(n, 1.0 / std::sqrt(static_cast<double>(n))); }

LatticeSeq random_seq(std::mt19937_64 &rng, long radius, int count) {
  std::uniform_int_distribution<long> idx(-radius, radius);
  std::normal_distribution<double> nd;
  LatticeSeq a(LatticeGeometry{1.0, 1.0});
  for (int n = 0; n < count; ++n)
    a.set({idx(rng), idx(rng)}, cplx(nd(rng), nd(rng)));
  return a;
}

} // namespace

int main() {
  criterion(1, "magic formula", 60, [] {
    const Grid g = grid_for(256);
    const auto pairs = random_magic_pairs(g, 100, 2024);
    double worst = 0.0;
    for (const char *id : {"gauss2d", "cosx", "chirp"})
      for (const char *w : {"gaussian", "hermite1"})
        worst = std::max(worst, magic_formula_check(make_symbol(id, g), make_window(w, g), pairs)
                                    .max_deviation);
    return Outcome{worst <= 1e-6, fmt("max deviation %.3e", worst)};
  });

  criterion(2, "frame dichotomy", 120, [] {
    struct L3 {
      std::size_t n, a, b;
    };
    auto seq = [](std::initializer_list<L3> lv) {
      std::vector<FrameBounds> out;
      for (const auto &l : lv) {
        const Grid g = grid_for(l.n);
        out.push_back(frame_bounds(make_window("gaussian", g), Lattice(g, l.a, l.b)));
      }
      return out;
    };
    const auto half = seq({{128, 8, 8}, {256, 16, 8}, {512, 16, 16}});
    const auto one = seq({{128, 8, 16}, {256, 16, 16}, {512, 16, 32}});
    double min_half = 1.0;
    for (const auto &b : half)
      min_half = std::min(min_half, b.ratio());
    const auto t = frame_trend(one);
    const bool ok = min_half >= 1e-3 && t.nonincreasing && one.back().ratio() < 1e-2 &&
                    frame_trend(half).is_frame_trend;
    return Outcome{ok, fmt("min ratio at 1/2: %.3e", min_half) +
                           fmt(", ratio at 1 (N=512): %.3e", one.back().ratio()) +
                           (t.nonincreasing ? ", nonincreasing" : ", NOT nonincreasing")};
  });

  criterion(3, "reconstruction", 0, [] {
    const Grid g = grid_for(256);
    const Lattice L(g, 16, 8);
    const auto w = make_window("gaussian", g);
    const auto d = dual_window(w, L);
    std::mt19937_64 rng(33);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const auto f = oracle::random_signal(g, rng);
      const auto back = reconstruct(gabor_coefficients(f, w, L), d.gamma, L);
      worst = std::max(worst, (back - f).norm() / f.norm());
    }
    return Outcome{worst <= 1e-8 && d.residual <= 1e-10,
                   fmt("round trip %.3e", worst) + fmt(", dual residual %.3e", d.residual)};
  });

  criterion(4, "convolution inequality", 10, [] {
    std::mt19937_64 rng(44);
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0})
      for (int t = 0; t < 200; ++t) {
        const auto a = random_seq(rng, 6, 10);
        const auto b = random_seq(rng, 6, 10);
        worst = std::max(worst, verify_convolution_inequality(a, b, {1.0, s}).ratio);
      }
    return Outcome{worst <= 1.0, fmt("max ratio %.6f", worst)};
  });

  criterion(5, "gram envelope", 30, [] {
    const Grid g = grid_for(128);
    const auto M = gabor_matrix(make_symbol("constant", g), make_window("gaussian", g),
                                Lattice(g, 8, 8));
    const auto f = fit_decay(envelope(M), 0.5);
    const double rel = std::abs(f.epsilon - pi / 2.0) / (pi / 2.0);
    const bool ok = rel <= 0.1 && f.max_violation <= 1.0;
    return Outcome{ok, fmt("epsilon %.5f", f.epsilon) + fmt(" (pi/2 %+.2f%%)", 100 * rel) +
                           fmt(", max violation %.17g", f.max_violation)};
  });

  criterion(6, "gevrey pipeline", 0, [] {
    const Grid g = grid_for(256);
    const Lattice L(g, 8, 16);
    const auto w = make_window("gaussian", g);
    std::string det;
    bool ok = true;
    for (auto [id, s] : {std::pair{"gaussian2d", 0.5}, {"cosx", 1.0}, {"constant", 0.5}}) {
      const auto r = verify_equivalence(id, w, L, s, WeightParams::one());
      const bool good = r.certified && r.lattice.fit.epsilon > 0.0 &&
                        r.continuous.fit.epsilon > 0.0;
      ok = ok && good;
      det += std::string(id) + (good ? " ok" : " FAILED") +
             fmt(" (eps %.3g), ", r.lattice.fit.epsilon);
    }
    EquivalenceOptions opt;
    opt.allow_uncertified = true;
    const auto bad = verify_equivalence("growing", w, L, 1.0, WeightParams::one(), opt);
    ok = ok && !bad.certified;
    det += bad.certified ? "growing CERTIFIED" : "growing rejected";
    return Outcome{ok, det};
  });

  criterion(7, "weak form", 0, [] {
    const Grid g = grid_for(256);
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (const auto &e : symbol_catalog()) {
      const auto a = sample_symbol(e, symbol_axes(g));
      worst = std::max(worst, weak_form_check(a, oracle::random_signal(g, rng),
                                              oracle::random_signal(g, rng)));
    }
    return Outcome{worst <= 1e-8, fmt("max deviation %.3e", worst)};
  });

  criterion(8, "wigner-stft relation", 0, [] {
    const Grid g = grid_for(256);
    const TFGrid tf{Grid(128, g.delta()), Grid(128, g.freq_spacing())};
    double worst = 0.0;
    for (const char *id : {"gaussian", "hermite1"})
      worst = std::max(worst, wigner_stft_relation_check(make_window(id, g),
                                                         make_window("gaussian", g), tf));
    return Outcome{worst <= 1e-8, fmt("max deviation %.3e", worst)};
  });

  criterion(9, "symplectic involution", 0, [] {
    const Grid g = grid_for(256);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    PhaseArray F(TFGrid{g, g});
    for (auto &v : F.values())
      v = cplx(nd(rng), nd(rng));
    const double err = oracle::max_abs_diff(symplectic_fourier(symplectic_fourier(F)), F);
    return Outcome{err <= 1e-10, fmt("max error %.3e", err)};
  });

  criterion(10, "euclidean reduction", 0, [] {
    const Grid g = grid_for(256);
    const auto chi = make_window("gaussian", g);
    const auto a = make_symbol("cosx", g);
    const auto pairs = hm_grid_pairs(g, 4.0, 0.5);
    std::string det;
    bool ok = true;
    for (unsigned N : {0u, 2u, 4u}) {
      const auto r = hm_diag_check(a, chi, MetricSpec::euclidean(), N, pairs);
      const double growth = r.sup_value / r.sup_half - 1.0;
      ok = ok && r.stable && growth < 0.05;
      det += fmt("N=%.0f", N) + fmt(" growth %.2e, ", growth);
    }
    const auto adm = check_metric_admissible(MetricSpec::euclidean(), square_points(12, 61));
    const bool exact = adm.temperance.C0 == 1.0 && adm.temperance.N0 == 0.0 &&
                       adm.uncertainty.worst_ratio == 1.0 && adm.slow_variation.C0 == 1.0;
    det += exact ? "C0=1 N0=0 ratio=1" : "admissibility constants not exact";
    return Outcome{ok && exact, det};
  });

  criterion(11, "oracle equivalence", 0, [] {
    const Grid g = grid_for(64);
    std::mt19937_64 rng(111);
    const auto f = oracle::random_signal(g, rng);
    const auto h = oracle::random_signal(g, rng);
    const auto w = make_window("gaussian", g);
    const long n = 64;

    double e_fourier = max_abs_diff(fourier(f), SampledSignal(g.dual(), oracle::fourier(f)));

    const TFGrid tf = TFGrid::full(g);
    const auto V = stft(f, w, tf);
    double e_stft = 0.0;
    for (long m = 0; m < n; ++m)
      for (long k = 0; k < n; ++k)
        e_stft = std::max(e_stft, std::abs(V(m, k) - oracle::stft_at(f, w, m - n / 2,
                                                                     tf.freq.point(k))));

    const auto W = wigner_symbol(f, h);
    double e_wigner = 0.0;
    for (long p = 0; p < 2 * n; ++p)
      for (long l = 0; l < n; ++l)
        e_wigner = std::max(e_wigner,
                            std::abs(W(p, l) - oracle::wigner_at(f, h, p, g.dual().point(l))));

    const auto a = make_symbol("gauss2d", g);
    const auto K = weyl_kernel(a);
    const double e_kernel = (K - oracle::weyl_kernel(a, g)).cwiseAbs().maxCoeff();

    const auto phi = wigner_symbol(w, w);
    BigStftEngine engine(a, phi);
    double e_big = 0.0;
    for (auto [sx, sxi] : {std::pair{0L, 0L}, {5L, -3L}, {-20L, 11L}})
      e_big = std::max(e_big, oracle::max_abs_diff(engine.slice(sx, sxi),
                                                   oracle::big_stft_slice(a, phi, sx, sxi)));

    const double worst = std::max({e_fourier, e_stft, e_wigner, e_kernel, e_big});
    return Outcome{worst <= 1e-10,
                   fmt("fourier %.1e", e_fourier) + fmt(" stft %.1e", e_stft) +
                       fmt(" wigner %.1e", e_wigner) + fmt(" weyl_kernel %.1e", e_kernel) +
                       fmt(" big_stft %.1e", e_big)};
  });

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
