#include "tfa/catalog.hpp"
#include "tfa/diag.hpp"
#include "tfa/hmetric.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tfa;

namespace {

TFGrid square(std::size_t n) {
  const Grid g(n, 1.0 / std::sqrt(static_cast<double>(n)));
  return {g, g};
}

PhaseArray random_phase(const TFGrid &ax, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  PhaseArray F(ax);
  for (auto &v : F.values())
    v = cplx(nd(rng), nd(rng));
  return F;
}

PhaseArray gauss_phase(const TFGrid &ax) {
  return PhaseArray::from_function(
      ax, [](double x, double xi) { return std::exp(-pi * (x * x + xi * xi)); });
}

} // namespace

TEST(SymplecticFourier, MatchesOracle) {
  std::mt19937_64 rng(1);
  const auto F = random_phase(square(16), rng);
  EXPECT_LE(oracle::max_abs_diff(symplectic_fourier(F), oracle::symplectic_fourier(F)), 1e-12);
}

TEST(SymplecticFourier, GaussianIsFixed) {
  const auto G = gauss_phase(square(256));
  EXPECT_LE(oracle::max_abs_diff(symplectic_fourier(G), G), 1e-12);
}

TEST(SymplecticFourier, Involution) {
  std::mt19937_64 rng(2);
  const auto F = random_phase(square(64), rng);
  EXPECT_LE(oracle::max_abs_diff(symplectic_fourier(symplectic_fourier(F)), F), 1e-10);
}

TEST(SymplecticFourier, RejectsNonSquareGrids) {
  EXPECT_THROW(symplectic_fourier(PhaseArray(TFGrid{Grid(16, 0.25), Grid(32, 0.25)})),
               NonSquareGrid);
  EXPECT_THROW(symplectic_fourier(PhaseArray(TFGrid{Grid(16, 0.5), Grid(16, 0.5)})),
               NonSquareGrid);
}

TEST(SymplecticStft, MatchesOracle) {
  std::mt19937_64 rng(3);
  const TFGrid ax = square(16);
  const auto f = random_phase(ax, rng);
  const auto phi = gauss_phase(ax);
  const auto fam = rigid_family(phi);
  const double h = ax.time.delta();
  for (auto [sx, sxi] : {std::pair{0L, 0L}, {2L, -3L}, {-5L, 1L}}) {
    const auto slice = oracle::big_stft_slice(f, phi, sx, sxi);
    const PhasePoint X{static_cast<double>(sx) * h, static_cast<double>(sxi) * h};
    for (auto [u, v] : {std::pair{0L, 0L}, {1L, 2L}, {-4L, 3L}, {7L, -8L}}) {
      const PhasePoint Xi{static_cast<double>(u) * h, static_cast<double>(v) * h};
      // [Xi, Y] = <j(Xi), Y> with j(Xi) = (Xi.xi, -Xi.x)
      const long k1 = v + 8, k2 = oracle::wrap(-u + 8, 16);
      const cplx ref = slice(static_cast<std::size_t>(k1), static_cast<std::size_t>(k2));
      EXPECT_LE(std::abs(symplectic_stft(f, fam, X, Xi) - ref), 1e-12);
    }
  }
}

TEST(SymplecticStft, NormAtOrigin) {
  const auto phi = gauss_phase(square(64));
  const double n = phi.norm();
  EXPECT_NEAR(std::abs(symplectic_stft(phi, rigid_family(phi), {0, 0}, {0, 0})), n * n, 1e-12);
}

TEST(SymplecticStft, MissingWindow) {
  const auto phi = gauss_phase(square(16));
  EXPECT_THROW(symplectic_stft(phi, WindowFamily{}, {0, 0}, {0, 0}), MissingWindow);
  EXPECT_THROW(symplectic_stft(phi, rigid_family(phi), {0.1, 0}, {0, 0}), MissingWindow);
}

TEST(Metric, ParseAndForms) {
  EXPECT_EQ(parse_metric("euclidean").kind, MetricSpec::Kind::Euclidean);
  const auto s = parse_metric("split:0.5");
  EXPECT_EQ(s.kind, MetricSpec::Kind::Split);
  EXPECT_DOUBLE_EQ(s.rho, 0.5);
  EXPECT_THROW(parse_metric("hyperbolic"), NotInCatalog);
  const PhasePoint X{3.0, 4.0};
  const auto [q1, q2] = s.Q(X);
  EXPECT_NEAR(q1, 1.0 / std::sqrt(26.0), 1e-15);
  EXPECT_NEAR(q1 * q2, 1.0, 1e-15);
  const auto [s1, s2] = s.Qsigma(X);
  EXPECT_NEAR(s1, 1.0 / q2, 1e-15);
  EXPECT_NEAR(s2, 1.0 / q1, 1e-15);
  EXPECT_NEAR(s.g(X, {1, 1}), q1 + q2, 1e-15);
}

TEST(Admissibility, EuclideanIsExact) {
  const auto rep = check_metric_admissible(MetricSpec::euclidean(), square_points(12, 61));
  EXPECT_TRUE(rep.slow_variation.holds);
  EXPECT_EQ(rep.slow_variation.C0, 1.0);
  EXPECT_TRUE(rep.temperance.holds);
  EXPECT_EQ(rep.temperance.C0, 1.0);
  EXPECT_EQ(rep.temperance.N0, 0.0);
  EXPECT_TRUE(rep.uncertainty.holds);
  EXPECT_EQ(rep.uncertainty.worst_ratio, 1.0);
}

TEST(Admissibility, SplitMetrics) {
  const auto pts = square_points(12, 61);
  const auto half = check_metric_admissible(MetricSpec::split(0.5), pts);
  EXPECT_TRUE(half.slow_variation.holds);
  EXPECT_TRUE(half.temperance.holds);
  EXPECT_TRUE(half.uncertainty.holds);
  EXPECT_GT(half.temperance.N0, 0.0);

  const auto two = check_metric_admissible(MetricSpec::split(2.0), pts);
  EXPECT_FALSE(two.temperance.holds && two.slow_variation.holds);
}

TEST(Admissibility, ScaledMetricBreaksUncertainty) {
  auto spec = MetricSpec::euclidean();
  spec.scale = 4.0;
  const auto rep = check_metric_admissible(spec, square_points(4, 9));
  EXPECT_FALSE(rep.uncertainty.holds);
  EXPECT_NEAR(rep.uncertainty.worst_ratio, 16.0, 1e-12);
}

TEST(WavePacket, EuclideanIsTfShift) {
  const Grid g(256, 1.0 / 16);
  const auto chi = make_window("gaussian", g);
  const PhasePoint X{1.0, -0.5};
  EXPECT_LE(max_abs_diff(wave_packet(chi, X, MetricSpec::euclidean()), tf_shift(chi, X)), 1e-15);
  EXPECT_LE(max_abs_diff(wave_packet(chi, {0, 0}, MetricSpec::split(0.5)), chi), 1e-15);
}

TEST(WavePacket, WidthScalesWithMetric) {
  const Grid g(256, 1.0 / 16);
  const auto chi = make_window("gaussian", g);
  auto wide = MetricSpec::euclidean();
  wide.scale = 4.0;
  const auto p1 = wave_packet(chi, {0, 0}, MetricSpec::euclidean());
  const auto p4 = wave_packet(chi, {0, 0}, wide);
  EXPECT_NEAR(packet_width(p4) / packet_width(p1), 2.0, 1e-6);
  EXPECT_NEAR(p4.norm(), chi.norm(), 1e-10);
}

TEST(WavePacket, EscapingPacketRejected) {
  const Grid g(256, 1.0 / 16);
  auto huge = MetricSpec::euclidean();
  huge.scale = 100.0;
  EXPECT_THROW(wave_packet(make_window("gaussian", g), {0, 0}, huge), PacketEscapesBox);
}

TEST(HmDiag, IdentityMatchesGramMatrix) {
  const Grid g(256, 1.0 / 16);
  const auto chi = make_window("gaussian", g);
  const Lattice L(g, 8, 8); // alpha = beta = 1/2
  for (const char *id : {"constant", "gauss2d"}) {
    const auto a = make_symbol(id, g);
    const auto M = gabor_matrix(a, chi, L);
    const auto rep = hm_diag_check(a, chi, MetricSpec::euclidean(), 0, hm_grid_pairs(g, 1.5, 0.5));
    std::size_t matched = 0;
    for (const auto &row : rep.rows) {
      const LatticeIndex mu{std::lround(row.pair.X.x / 0.5), std::lround(row.pair.X.xi / 0.5)};
      const LatticeIndex lam{std::lround(row.pair.Xi.x / 0.5), std::lround(row.pair.Xi.xi / 0.5)};
      const double ref = std::abs(M.entries(static_cast<long>(L.position(lam)),
                                            static_cast<long>(L.position(mu))));
      EXPECT_NEAR(row.value, ref, 1e-10);
      ++matched;
    }
    EXPECT_EQ(matched, 49u * 49u);
  }
}

TEST(HmDiag, StableAndUnstableSymbols) {
  const Grid g(256, 1.0 / 16);
  const auto chi = make_window("gaussian", g);
  const auto pairs = hm_grid_pairs(g, 4.0, 0.5);
  for (unsigned N : {0u, 2u, 4u}) {
    const auto rep = hm_diag_check(make_symbol("cosx", g), chi, MetricSpec::euclidean(), N, pairs);
    EXPECT_TRUE(rep.stable) << "N=" << N;
  }
  const auto bad = hm_diag_check(make_symbol("growing", g), chi, MetricSpec::euclidean(), 0, pairs);
  EXPECT_FALSE(bad.stable);
}

TEST(HmDiag, SplitMetricUsesDilatedPackets) {
  const Grid g(256, 1.0 / 16);
  const auto chi = make_window("gaussian", g);
  const auto pairs = hm_grid_pairs(g, 2.0, 1.0);
  const auto rep = hm_diag_check(make_symbol("constant", g), chi, MetricSpec::split(0.5), 0, pairs);
  for (const auto &row : rep.rows)
    if (row.pair.X.x == row.pair.Xi.x && row.pair.X.xi == row.pair.Xi.xi)
      EXPECT_NEAR(row.value, 1.0, 1e-8);
}

TEST(Seminorm, CatalogValues) {
  const auto e = MetricSpec::euclidean();
  EXPECT_NEAR(sg_seminorm(find_symbol("constant"), e, 3).value, 1.0, 1e-15);
  const auto c = sg_seminorm(find_symbol("cosx"), e, 2);
  EXPECT_NEAR(c.value, 4.0 * pi * pi, 1e-9);
  EXPECT_FALSE(c.grows);
  const auto gd = sg_seminorm(find_symbol("gauss2d"), e, 1);
  EXPECT_NEAR(gd.value, std::sqrt(2.0 * pi) * std::exp(-0.5), 1e-3);
  EXPECT_TRUE(sg_seminorm(find_symbol("growing"), e, 0).grows);
}

TEST(Seminorm, FiniteDifferencesAgree) {
  SeminormOptions fd;
  fd.force_fd = true;
  fd.box = 2.0;
  fd.n = 21;
  SeminormOptions an = fd;
  an.force_fd = false;
  for (int k = 1; k <= 3; ++k) {
    const auto a = sg_seminorm(find_symbol("gauss2d"), MetricSpec::euclidean(), k, an);
    const auto b = sg_seminorm(find_symbol("gauss2d"), MetricSpec::euclidean(), k, fd);
    EXPECT_TRUE(b.used_fd);
    EXPECT_NEAR(b.value, a.value, 1e-3 * a.value) << k;
  }
}

TEST(Seminorm, OrderLimits) {
  SymbolEntry e = find_symbol("cosx");
  e.max_order = 1;
  EXPECT_THROW(sg_seminorm(e, MetricSpec::euclidean(), 2), NotInCatalog);
  SeminormOptions opt;
  opt.allow_fd = true;
  const auto r = sg_seminorm(e, MetricSpec::euclidean(), 2, opt);
  EXPECT_TRUE(r.used_fd);
  EXPECT_NEAR(r.value, 4.0 * pi * pi, 1e-3 * 4.0 * pi * pi);
  EXPECT_THROW(sg_seminorm(e, MetricSpec::euclidean(), 4), InvalidArgument);
}
