#pragma once

// Parameter grids: per-point runs with an on-disk cache keyed by a content
// hash of the evolution parameters, a worker pool and deterministic
// aggregation.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "quenchotoc/analysis.hpp"
#include "quenchotoc/config.hpp"
#include "quenchotoc/csv.hpp"
#include "quenchotoc/otoc.hpp"
#include "quenchotoc/spectral.hpp"

namespace quenchotoc {

/// Write-once store of OTOC series and spacing ensembles. A stored series
/// serves any request up to its length; a longer request replaces it.
class RunCache {
 public:
  RunCache() = default;
  explicit RunCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }

  static std::string otoc_key(const RunConfig& c) { return sha256_hex(c.evolution_text(true)); }
  static std::string unitary_key(const RunConfig& c) {
    return sha256_hex(c.evolution_text(false));
  }

  std::optional<OtocSeries> load_series(const RunConfig& c, long n_max) const {
    if (!enabled()) return std::nullopt;
    const auto path = dir_ / (otoc_key(c) + ".otoc");
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    OtocSeries s;
    s.spec = c.observable;
    s.n_sites = c.n_sites;
    s.C_inf = saturation_constant(c.observable.family, c.n_sites);
    while (std::getline(in, line) && static_cast<long>(s.size()) <= n_max) {
      std::istringstream row(line);
      long n = 0;
      OtocPoint p;
      char comma = 0;
      if (!(row >> n >> comma >> p.C2 >> comma >> p.C4 >> comma >> p.C)) return std::nullopt;
      s.push(n, p);
    }
    if (static_cast<long>(s.size()) < n_max + 1) return std::nullopt;
    return s;
  }

  void store_series(const RunConfig& c, const OtocSeries& s) const {
    if (!enabled()) return;
    std::ostringstream o;
    o << "n,C2,C4,C\n" << std::setprecision(17);
    for (std::size_t k = 0; k < s.size(); ++k) {
      o << s.n[k] << ',' << s.C2[k] << ',' << s.C4[k] << ',' << s.C[k] << '\n';
    }
    const std::string key = otoc_key(c);
    write_atomically(dir_ / (key + ".otoc"), o.str());
    write_atomically(dir_ / (key + ".txt"), c.evolution_text(true));
  }

  std::optional<std::vector<double>> load_spacings(const RunConfig& c, long kick) const {
    if (!enabled()) return std::nullopt;
    const auto path = dir_ / (unitary_key(c) + ".nnsd-" + std::to_string(kick));
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::ifstream in(path);
    std::vector<double> s;
    double x = 0.0;
    while (in >> x) s.push_back(x);
    return s;
  }

  void store_spacings(const RunConfig& c, long kick, const std::vector<double>& s) const {
    if (!enabled()) return;
    std::ostringstream o;
    o << std::setprecision(17);
    for (double x : s) o << x << '\n';
    const std::string key = unitary_key(c);
    write_atomically(dir_ / (key + ".nnsd-" + std::to_string(kick)), o.str());
    write_atomically(dir_ / (key + ".txt"), c.evolution_text(false));
  }

 private:
  static void write_atomically(const std::filesystem::path& path, const std::string& body) {
    static std::atomic<unsigned long> counter{0};
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(counter++);
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << body;
      if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

  std::filesystem::path dir_;
};

/// OTOC series for a configuration, from the cache when possible.
inline OtocSeries otoc_series(const RunConfig& c, const RunCache& cache = {}) {
  validate_config(c);
  const long n_max = c.resolved_n_max();
  if (auto hit = cache.load_series(c, n_max)) return *hit;
  OtocSeries s = run_otoc(c.chain(), c.quench(), c.observable, n_max, c.convention);
  cache.store_series(c, s);
  return s;
}

/// Spacing ensembles and scores at the configured kicks; only kicks missing
/// from the cache extend the sweep of cumulative products.
inline std::vector<NnsdResult> nnsd_series(const RunConfig& c, const RunCache& cache = {}) {
  validate_config(c);
  const auto& kicks = c.analysis.nnsd_kicks;
  std::vector<NnsdResult> out(kicks.size());
  std::vector<long> missing;
  for (std::size_t k = 0; k < kicks.size(); ++k) {
    if (auto hit = cache.load_spacings(c, kicks[k])) {
      out[k].kick = kicks[k];
      out[k].ensemble.kick = kicks[k];
      out[k].ensemble.spacings = std::move(*hit);
    } else {
      missing.push_back(kicks[k]);
    }
  }
  if (!missing.empty()) {
    auto fresh = nnsd_at_kicks(c.chain(), c.quench(), missing, c.analysis.nnsd);
    for (auto& r : fresh) {
      cache.store_spacings(c, r.kick, r.ensemble.spacings);
      const auto pos = std::find(kicks.begin(), kicks.end(), r.kick) - kicks.begin();
      out[static_cast<std::size_t>(pos)] = std::move(r);
    }
  }
  for (auto& r : out) r.score = score_nnsd(r.ensemble.spacings, c.analysis.nnsd);
  return out;
}

struct PointResult {
  RunConfig config;
  std::string run_key;
  std::optional<OtocSeries> series;
  std::optional<PowerLawFit> fit;
  std::optional<SaturationStats> saturation;
  std::optional<IprResult> ipr;
  std::vector<NnsdResult> nnsd;
  std::string error;                  // the point failed
  std::vector<std::string> warnings;  // an analysis was not applicable

  bool ok() const { return error.empty(); }
};

/// Evolution plus the analyses switched on in the configuration. Analyses that
/// do not apply (too short a window, ...) leave a warning, not a failure.
inline PointResult run_point(const RunConfig& c, const RunCache& cache = {}, bool with_otoc = true) {
  PointResult r;
  r.config = c;
  r.run_key = c.run_key();
  try {
    validate_config(c);
    if (with_otoc) {
      r.series = otoc_series(c, cache);
      const auto& s = *r.series;
      const auto attempt = [&](const char* what, auto&& fn) {
        try {
          fn();
        } catch (const AnalysisError& e) {
          r.warnings.push_back(std::string(what) + ": " + e.what());
        }
      };
      if (c.analysis.fit) attempt("fit", [&] { r.fit = fit_power_law(s); });
      if (c.analysis.saturation) {
        attempt("saturation", [&] {
          r.saturation = saturation_stats(s, std::nullopt, c.analysis.saturation_fraction);
        });
      }
      if (c.analysis.ipr) {
        attempt("ipr", [&] {
          r.ipr = ipr_of_otoc(s, IprOptions{c.analysis.ipr_window, c.analysis.remove_mean, 64});
        });
      }
    }
    if (!c.analysis.nnsd_kicks.empty()) r.nnsd = nnsd_series(c, cache);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

/// Orders results by parameters, independent of grid order.
inline bool parameter_less(const RunConfig& a, const RunConfig& b) {
  const auto key = [](const RunConfig& c) {
    return std::make_tuple(static_cast<int>(c.protocol), static_cast<int>(c.observable.family),
                           c.n_sites, c.tau.value, c.hx0, c.hz0, c.gamma, c.t_max.value, c.J,
                           c.observable.site_w, c.observable.site_v,
                           static_cast<int>(c.convention));
  };
  return key(a) < key(b);
}

/// Runs every point on `workers` threads; results come back sorted by
/// parameters, failures are reported per point.
inline std::vector<PointResult> run_grid(const std::vector<RunConfig>& grid, int workers,
                                         const RunCache& cache = {}, bool with_otoc = true) {
  std::vector<PointResult> results(grid.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++) {
      results[k] = run_point(grid[k], cache, with_otoc);
    }
  };
  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
  std::vector<std::thread> threads;
  for (int t = 1; t < pool; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  std::stable_sort(results.begin(), results.end(), [](const PointResult& a, const PointResult& b) {
    return parameter_less(a.config, b.config);
  });
  return results;
}

inline bool all_ok(const std::vector<PointResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.ok(); });
}

}  // namespace quenchotoc
