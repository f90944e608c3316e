#pragma once

// Diagnostics over an OTOC time series: early-time power-law exponent,
// late-window saturation statistics and the inverse participation ratio of the
// discrete Fourier spectrum.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quenchotoc/otoc.hpp"

namespace quenchotoc {

struct KickWindow {
  long n_lo = 0;
  long n_hi = 0;  // inclusive

  long length() const { return n_hi - n_lo + 1; }
};

struct PowerLawFit {
  double b = 0.0;
  double intercept = 0.0;  // ln C_norm at n = 1
  KickWindow window;
  double residual = 0.0;  // RMS in log space
};

struct FitPolicy {
  // The window ends before the first kick whose normalized OTOC exceeds this.
  double threshold = 0.5;
  // Values at or below this are zero up to round-off (for instance C(1) for
  // observables that commute with the transverse kick) and are skipped.
  double zero_floor = 1e-20;
  std::optional<KickWindow> window;  // explicit window instead of the rule
  std::size_t min_points = 5;
};

/// Least squares y = a + b x.
inline std::pair<double, double> fit_line(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  const auto m = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw AnalysisError("degenerate fit abscissa");
  const double b = sxy / sxx;
  return {my - b * mx, b};
}

/// Slope of ln C_norm against ln n over the pre-scrambling window.
inline PowerLawFit fit_power_law(const std::vector<long>& n, const std::vector<double>& c_norm,
                                 const FitPolicy& policy = {}) {
  if (n.size() != c_norm.size()) throw ParameterError("kick and value columns differ in length");
  if (n.size() < 10) throw AnalysisError("series too short for a fit (needs >= 10 points)");
  std::vector<double> x, y;
  KickWindow w{0, 0};
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] < 1) continue;
    if (policy.window) {
      if (n[k] < policy.window->n_lo || n[k] > policy.window->n_hi) continue;
    } else if (c_norm[k] > policy.threshold) {
      break;
    }
    if (!(c_norm[k] > policy.zero_floor)) continue;
    if (x.empty()) w.n_lo = n[k];
    w.n_hi = n[k];
    x.push_back(std::log(static_cast<double>(n[k])));
    y.push_back(std::log(c_norm[k]));
  }
  if (x.size() < policy.min_points) {
    throw AnalysisError("dynamic region too short: " + std::to_string(x.size()) + " points");
  }
  const auto [a, b] = fit_line(x, y);
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (a + b * x[k]);
    ss += r * r;
  }
  return {b, a, w, std::sqrt(ss / static_cast<double>(x.size()))};
}

inline PowerLawFit fit_power_law(const OtocSeries& s, const FitPolicy& policy = {}) {
  return fit_power_law(s.n, s.normalized(), policy);
}

struct SaturationStats {
  KickWindow window;
  double mean = 0.0;
  double std = 0.0;  // population
  double osc_ratio = 0.0;
};

/// The last `fraction` of the kicks 1..n_max, i.e. round(fraction·n_max) kicks.
inline KickWindow late_window(long n_max, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw ParameterError("window fraction must be in (0, 1]");
  const long count = std::max(1L, std::lround(fraction * static_cast<double>(n_max)));
  return {n_max - count + 1, n_max};
}

inline SaturationStats saturation_stats(const std::vector<long>& n, const std::vector<double>& v,
                                        const KickWindow& w) {
  // Deviations from the first sample in the window: exact for a flat series
  // and free of cancellation when the oscillation is small against the mean.
  std::optional<double> shift;
  double sum = 0.0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] < w.n_lo || n[k] > w.n_hi) continue;
    if (!shift) shift = v[k];
    sum += v[k] - *shift;
    ++m;
  }
  if (m == 0) throw AnalysisError("saturation window is empty");
  SaturationStats s;
  s.window = w;
  const double mean_dev = sum / static_cast<double>(m);
  s.mean = *shift + mean_dev;
  double ss = 0.0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] < w.n_lo || n[k] > w.n_hi) continue;
    const double d = (v[k] - *shift) - mean_dev;
    ss += d * d;
  }
  s.std = std::sqrt(ss / static_cast<double>(m));
  s.osc_ratio = s.mean != 0.0 ? s.std / std::abs(s.mean) : 0.0;
  if (s.std == 0.0) s.osc_ratio = 0.0;
  return s;
}

inline SaturationStats saturation_stats(const OtocSeries& s,
                                        std::optional<KickWindow> window = std::nullopt,
                                        double fraction = 0.5) {
  if (s.size() < 2) throw AnalysisError("series has no kicks");
  const KickWindow w = window ? *window : late_window(s.n.back(), fraction);
  return saturation_stats(s.n, s.normalized(), w);
}

struct IprResult {
  double xi = 1.0;
  std::size_t D = 0;
  KickWindow window;
};

inline constexpr double kAmplitudeNormTolerance = 1e-9;

/// ξ = 1 / Σ|a_j|⁴ for a normalized amplitude vector.
inline IprResult ipr_of_amplitudes(const std::vector<Complex>& a) {
  if (a.empty()) throw AnalysisError("no amplitudes");
  double n2 = 0.0, n4 = 0.0;
  for (const auto& z : a) {
    const double p = std::norm(z);
    n2 += p;
    n4 += p * p;
  }
  if (std::abs(n2 - 1.0) > kAmplitudeNormTolerance) {
    throw AnalysisError("amplitudes are not normalized (sum of squares " + std::to_string(n2) + ")");
  }
  IprResult r;
  r.xi = 1.0 / n4;
  r.D = a.size();
  r.window = {0, static_cast<long>(a.size()) - 1};
  return r;
}

/// Unitary DFT, f_k = Σ_m x_m e^{-2πikm/M} / √M.
inline std::vector<Complex> unitary_dft(const std::vector<double>& x) {
  const std::size_t m = x.size();
  std::vector<Complex> twiddle(m);
  for (std::size_t k = 0; k < m; ++k) {
    twiddle[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / static_cast<double>(m));
  }
  std::vector<Complex> f(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t k = 0; k < m; ++k) {
    Complex acc(0.0, 0.0);
    for (std::size_t j = 0; j < m; ++j) acc += x[j] * twiddle[(k * j) % m];
    f[k] = acc * scale;
  }
  return f;
}

enum class IprWindow { Full, Saturation };

struct IprOptions {
  IprWindow window = IprWindow::Full;
  bool remove_mean = false;
  std::size_t min_samples = 64;
};

inline IprResult ipr_of_otoc(const std::vector<long>& n, const std::vector<double>& c_norm,
                             const IprOptions& opt = {}) {
  if (n.empty()) throw AnalysisError("empty series");
  KickWindow w{n.front(), n.back()};
  if (opt.window == IprWindow::Saturation) w = late_window(n.back(), 0.5);
  std::vector<double> x;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] >= w.n_lo && n[k] <= w.n_hi) x.push_back(c_norm[k]);
  }
  if (x.size() < opt.min_samples) {
    throw AnalysisError("IPR window has " + std::to_string(x.size()) + " samples, needs " +
                        std::to_string(opt.min_samples));
  }
  double energy = 0.0;
  for (double v : x) energy += v * v;
  if (opt.remove_mean) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double& v : x) v -= mean;
  }
  std::vector<Complex> f = unitary_dft(x);
  double n2 = 0.0;
  for (const auto& z : f) n2 += std::norm(z);
  // A flat series leaves only rounding noise once its mean is removed.
  if (!(n2 > 1e-24 * energy)) throw AnalysisError("spectrum vanishes; IPR undefined");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& z : f) z *= inv;
  IprResult r = ipr_of_amplitudes(f);
  r.window = w;
  return r;
}

inline IprResult ipr_of_otoc(const OtocSeries& s, const IprOptions& opt = {}) {
  return ipr_of_otoc(s.n, s.normalized(), opt);
}

/// Each ξ divided by the largest in the sweep.
template <typename Key>
std::vector<std::pair<Key, double>> normalize_ipr_sweep(
    const std::vector<std::pair<Key, IprResult>>& results) {
  if (results.empty()) throw AnalysisError("empty IPR sweep");
  double best = 0.0;
  for (const auto& [key, r] : results) best = std::max(best, r.xi);
  std::vector<std::pair<Key, double>> out;
  out.reserve(results.size());
  for (const auto& [key, r] : results) out.emplace_back(key, r.xi / best);
  return out;
}

}  // namespace quenchotoc
