#include <random>

#include <gtest/gtest.h>

#include "quenchotoc/analysis.hpp"

using namespace quenchotoc;

namespace {

std::pair<std::vector<long>, std::vector<double>> make_series(long n_max, auto&& fn) {
  std::vector<long> n;
  std::vector<double> v;
  for (long k = 0; k <= n_max; ++k) {
    n.push_back(k);
    v.push_back(fn(static_cast<double>(k)));
  }
  return {n, v};
}

}  // namespace

TEST(FitPowerLaw, ExactQuadratic) {
  auto [n, v] = make_series(400, [](double k) { return 1e-6 * k * k; });
  const PowerLawFit f = fit_power_law(n, v);
  EXPECT_NEAR(f.b, 2.0, 1e-9);
  EXPECT_NEAR(f.intercept, std::log(1e-6), 1e-8);
  EXPECT_EQ(f.window.n_lo, 1);
  EXPECT_EQ(f.window.n_hi, 400);  // never reaches 0.5 within the series
  EXPECT_LT(f.residual, 1e-10);
}

TEST(FitPowerLaw, WindowEndsBeforeHalfSaturation) {
  auto [n, v] = make_series(100, [](double k) { return 1e-3 * k * k; });
  const PowerLawFit f = fit_power_law(n, v);
  EXPECT_EQ(f.window.n_lo, 1);
  EXPECT_EQ(f.window.n_hi, 22);  // 1e-3 · 23² = 0.529 > 0.5
  EXPECT_NEAR(f.b, 2.0, 1e-9);
}

TEST(FitPowerLaw, RecoversSyntheticExponents) {
  for (double b : {0.5, 1.0, 2.0, 5.0, 11.0}) {
    auto [n, v] = make_series(60, [b](double k) { return 0.4 * std::pow(k / 60.0, b); });
    EXPECT_NEAR(fit_power_law(n, v).b, b, 1e-6) << b;
  }
}

TEST(FitPowerLaw, SkipsExactZerosAtTheStart) {
  auto [n, v] = make_series(50, [](double k) { return k < 2 ? 0.0 : 1e-4 * std::pow(k, 3.0); });
  const PowerLawFit f = fit_power_law(n, v);
  EXPECT_EQ(f.window.n_lo, 2);
  EXPECT_NEAR(f.b, 3.0, 1e-9);
}

TEST(FitPowerLaw, ShortRegionsAndSeriesAreErrors) {
  auto [n, v] = make_series(50, [](double k) { return 0.2 * k; });
  try {
    fit_power_law(n, v);
    FAIL() << "expected AnalysisError";
  } catch (const AnalysisError& e) {
    EXPECT_NE(std::string(e.what()).find("dynamic region too short"), std::string::npos);
  }
  auto [n9, v9] = make_series(8, [](double k) { return 1e-3 * k; });
  EXPECT_THROW(fit_power_law(n9, v9), AnalysisError);
}

TEST(FitPowerLaw, ExplicitWindow) {
  auto [n, v] = make_series(100, [](double k) { return k < 20 ? k * k : 1.0; });
  FitPolicy policy;
  policy.window = KickWindow{3, 12};
  const PowerLawFit f = fit_power_law(n, v, policy);
  EXPECT_EQ(f.window.n_lo, 3);
  EXPECT_EQ(f.window.n_hi, 12);
  EXPECT_NEAR(f.b, 2.0, 1e-12);
}

TEST(Saturation, ConstantSeries) {
  auto [n, v] = make_series(200, [](double) { return 0.8; });
  const SaturationStats s = saturation_stats(n, v, late_window(200, 0.5));
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(s.osc_ratio, 0.0);
  EXPECT_DOUBLE_EQ(s.mean, 0.8);
}

TEST(Saturation, SineAmplitude) {
  auto [n, v] = make_series(2000, [](double k) { return 1.0 + 0.5 * std::sin(0.3 * k); });
  const SaturationStats s = saturation_stats(n, v, KickWindow{1001, 2000});
  EXPECT_NEAR(s.std, 0.5 / std::sqrt(2.0), 0.01);
  EXPECT_NEAR(s.mean, 1.0, 0.01);
  EXPECT_NEAR(s.osc_ratio, s.std / s.mean, 1e-15);
}

TEST(Saturation, LateWindowCoversTheRequestedFraction) {
  EXPECT_EQ(late_window(400, 0.5).n_lo, 201);
  EXPECT_EQ(late_window(400, 0.4).n_lo, 241);
  EXPECT_EQ(late_window(400, 0.4).n_hi, 400);
  EXPECT_EQ(late_window(400, 0.4).length(), 160);
  EXPECT_THROW(late_window(400, 0.0), ParameterError);
}

TEST(Saturation, EmptyWindowIsAnError) {
  auto [n, v] = make_series(20, [](double) { return 1.0; });
  EXPECT_THROW(saturation_stats(n, v, KickWindow{30, 40}), AnalysisError);
}

TEST(IprAmplitudes, Extremes) {
  std::vector<Complex> basis(64, 0.0);
  basis[17] = 1.0;
  EXPECT_EQ(ipr_of_amplitudes(basis).xi, 1.0);
  const std::vector<Complex> two{Complex(1 / std::sqrt(2.0), 0), Complex(0, 1 / std::sqrt(2.0))};
  EXPECT_NEAR(ipr_of_amplitudes(two).xi, 2.0, 1e-14);
  for (std::size_t d : {4u, 64u, 4096u}) {
    const std::vector<Complex> flat(d, Complex(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
    const IprResult r = ipr_of_amplitudes(flat);
    EXPECT_NEAR(r.xi, static_cast<double>(d), 1e-9 * d);
    EXPECT_EQ(r.D, d);
  }
  // Powers of two make the uniform vector exact in floating point.
  EXPECT_EQ(ipr_of_amplitudes(std::vector<Complex>(64, 0.125)).xi, 64.0);
}

TEST(IprAmplitudes, BoundsAndInvariances) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  std::vector<Complex> a(50);
  for (auto& z : a) z = Complex(g(rng), g(rng));
  double n2 = 0.0;
  for (const auto& z : a) n2 += std::norm(z);
  for (auto& z : a) z /= std::sqrt(n2);
  const double xi = ipr_of_amplitudes(a).xi;
  EXPECT_GE(xi, 1.0);
  EXPECT_LE(xi, 50.0);
  auto phased = a;
  for (auto& z : phased) z *= std::polar(1.0, 0.77);
  EXPECT_NEAR(ipr_of_amplitudes(phased).xi, xi, 1e-12);
  auto shuffled = a;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_NEAR(ipr_of_amplitudes(shuffled).xi, xi, 1e-12);
}

TEST(IprAmplitudes, RejectsUnnormalizedInput) {
  EXPECT_THROW(ipr_of_amplitudes({1.0, 1.0}), AnalysisError);
  EXPECT_THROW(ipr_of_amplitudes({}), AnalysisError);
}

TEST(IprOtoc, CosineOnTheGridHasTwoComponents) {
  auto [n, v] = make_series(127, [](double k) { return 0.7 + 0.2 * std::cos(2 * kPi * 5 * k / 128); });
  IprOptions opt;
  opt.remove_mean = true;
  const IprResult r = ipr_of_otoc(n, v, opt);
  EXPECT_NEAR(r.xi, 2.0, 1e-9);
  EXPECT_EQ(r.D, 128u);
}

TEST(IprOtoc, ConstantSeries) {
  auto [n, v] = make_series(99, [](double) { return 0.9; });
  EXPECT_NEAR(ipr_of_otoc(n, v).xi, 1.0, 1e-12);
  IprOptions opt;
  opt.remove_mean = true;
  EXPECT_THROW(ipr_of_otoc(n, v, opt), AnalysisError);
}

TEST(IprOtoc, ScaleInvariantAndWindowed) {
  auto [n, v] = make_series(300, [](double k) { return 1.0 - std::exp(-k / 30) + 0.1 * std::sin(k); });
  const double xi = ipr_of_otoc(n, v).xi;
  auto scaled = v;
  for (auto& x : scaled) x *= 37.5;
  EXPECT_NEAR(ipr_of_otoc(n, scaled).xi, xi, 1e-9 * xi);
  IprOptions late;
  late.window = IprWindow::Saturation;
  const IprResult r = ipr_of_otoc(n, v, late);
  EXPECT_EQ(r.window.n_lo, 151);
  EXPECT_EQ(r.D, 150u);
  auto [short_n, short_v] = make_series(40, [](double k) { return k; });
  EXPECT_THROW(ipr_of_otoc(short_n, short_v), AnalysisError);
}

TEST(IprOtoc, DftSatisfiesParseval) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  std::vector<double> x(97);
  double ss = 0.0;
  for (auto& v : x) {
    v = g(rng);
    ss += v * v;
  }
  double fs = 0.0;
  for (const auto& z : unitary_dft(x)) fs += std::norm(z);
  EXPECT_NEAR(fs, ss, 1e-9 * ss);
}

TEST(NormalizeIprSweep, Fractions) {
  IprResult a, b;
  a.xi = 2.0;
  b.xi = 4.0;
  const auto one = normalize_ipr_sweep(std::vector<std::pair<double, IprResult>>{{0.3, a}});
  EXPECT_EQ(one.front().second, 1.0);
  const auto two = normalize_ipr_sweep(std::vector<std::pair<double, IprResult>>{{0.0, a}, {1.0, b}});
  EXPECT_EQ(two[0].second, 0.5);
  EXPECT_EQ(two[1].second, 1.0);
  EXPECT_EQ(two[1].first, 1.0);
  EXPECT_THROW(normalize_ipr_sweep(std::vector<std::pair<int, IprResult>>{}), AnalysisError);
}
