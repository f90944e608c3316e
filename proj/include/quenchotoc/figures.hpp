#pragma once

// Figure recipes: the parameter grid behind each figure and the aggregation
// into a CSV bundle with a manifest.

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "quenchotoc/sweep.hpp"

namespace quenchotoc {

enum class Aggregate { Growth, Saturation, Ipr, Nnsd };

/// One block of runs and the tables it feeds.
struct RecipePart {
  std::string name;
  std::vector<RunConfig> runs;
  std::vector<Aggregate> tables;
  bool with_otoc = true;
};

struct FigureRecipe {
  std::string id;
  std::string summary;
  std::vector<RecipePart> parts;

  std::size_t run_count() const {
    std::size_t n = 0;
    for (const auto& p : parts) n += p.runs.size();
    return n;
  }
};

namespace detail {

inline std::vector<double> steps(double lo, double hi, double step) {
  std::vector<double> v;
  const long count = std::lround((hi - lo) / step);
  for (long k = 0; k <= count; ++k) {
    // Round to the decimal grid so 0.30000000000000004 reads as 0.3.
    v.push_back(std::round((lo + step * static_cast<double>(k)) * 1e9) / 1e9);
  }
  return v;
}

inline const std::vector<Angle>& figure_periods() {
  static const std::vector<Angle> taus{pi_fraction(1, 16), pi_fraction(1, 6), pi_fraction(1, 4)};
  return taus;
}

inline RunConfig linear_base() {
  RunConfig c;
  c.n_sites = 12;
  c.J = 1.0;
  c.protocol = ProtocolTag::Linear;
  c.hz0 = 1.0;
  c.gamma = 0.1;
  return c;
}

inline RunConfig periodic_base(ObservableFamily family) {
  RunConfig c;
  c.n_sites = 12;
  c.J = 1.0;
  c.protocol = ProtocolTag::Periodic;
  c.hz0 = 4.0;
  c.t_max = pi_fraction(16, 1);
  c.observable.family = family;
  return c;
}

inline RecipePart periodic_sweep(const std::string& name, ObservableFamily family, double step) {
  RecipePart part{name, {}, {Aggregate::Saturation}, true};
  for (const auto& tau : figure_periods()) {
    for (double hx : steps(0.0, 1.0, step)) {
      RunConfig c = periodic_base(family);
      c.tau = tau;
      c.hx0 = hx;
      c.analysis.fit = false;
      c.analysis.ipr = false;
      part.runs.push_back(c);
    }
  }
  return part;
}

}  // namespace detail

inline const std::vector<long>& linear_nnsd_kicks() {
  static const std::vector<long> k{1, 5, 10, 20, 50, 100};
  return k;
}

inline const std::vector<long>& periodic_nnsd_kicks() {
  static const std::vector<long> k{1, 8, 16, 32, 48, 64};
  return k;
}

/// Growth-curve horizon of the figures whose captions show only the
/// pre-scrambling rise.
inline constexpr long kGrowthKicks = 200;

inline FigureRecipe figure_recipe(const std::string& id) {
  using detail::figure_periods;
  using detail::steps;
  FigureRecipe r{id, {}, {}};
  if (id == "F2") {
    r.summary = "OTOC growth, linear quench, tau in {pi/16, pi/6, pi/4}, hx0 in {0, 1}";
    RecipePart part{"growth", {}, {Aggregate::Growth}, true};
    for (const auto& tau : figure_periods()) {
      for (double hx : {0.0, 1.0}) {
        RunConfig c = detail::linear_base();
        c.tau = tau;
        c.hx0 = hx;
        c.n_max = kGrowthKicks;
        c.analysis.saturation = false;
        c.analysis.ipr = false;
        part.runs.push_back(c);
      }
    }
    r.parts.push_back(std::move(part));
  } else if (id == "F3") {
    r.summary = "saturation vs hx0 in [0, 1] step 0.1, linear quench, three periods";
    RecipePart part{"saturation", {}, {Aggregate::Saturation}, true};
    for (const auto& tau : figure_periods()) {
      for (double hx : steps(0.0, 1.0, 0.1)) {
        RunConfig c = detail::linear_base();
        c.tau = tau;
        c.hx0 = hx;
        c.analysis.fit = false;
        c.analysis.ipr = false;
        part.runs.push_back(c);
      }
    }
    r.parts.push_back(std::move(part));
  } else if (id == "F4") {
    r.summary = "saturation vs Gamma at tau = pi/4, hx0 in {0, 1}";
    RecipePart part{"saturation", {}, {Aggregate::Saturation}, true};
    for (double hx : {0.0, 1.0}) {
      for (double g : steps(0.0, 0.2, 0.05)) {
        RunConfig c = detail::linear_base();
        c.tau = pi_fraction(1, 4);
        c.hx0 = hx;
        c.gamma = g;
        c.analysis.fit = false;
        c.analysis.ipr = false;
        part.runs.push_back(c);
      }
    }
    r.parts.push_back(std::move(part));
  } else if (id == "F5") {
    r.summary = "IPR vs hx0 (Gamma = 0.1) and vs Gamma (hx0 in {0, 1}), three periods";
    RecipePart by_hx{"ipr_hx", {}, {Aggregate::Ipr}, true};
    RecipePart by_gamma{"ipr_gamma", {}, {Aggregate::Ipr}, true};
    for (const auto& tau : figure_periods()) {
      for (double hx : steps(0.0, 1.0, 0.1)) {
        RunConfig c = detail::linear_base();
        c.tau = tau;
        c.hx0 = hx;
        c.analysis.fit = false;
        c.analysis.saturation = false;
        by_hx.runs.push_back(c);
      }
      for (double hx : {0.0, 1.0}) {
        for (double g : steps(0.0, 0.2, 0.05)) {
          RunConfig c = detail::linear_base();
          c.tau = tau;
          c.hx0 = hx;
          c.gamma = g;
          c.analysis.fit = false;
          c.analysis.saturation = false;
          by_gamma.runs.push_back(c);
        }
      }
    }
    r.parts.push_back(std::move(by_hx));
    r.parts.push_back(std::move(by_gamma));
  } else if (id == "F6") {
    r.summary = "NNSD in the even sector, linear quench, tau = pi/4, hx0 in {0, 1}";
    RecipePart part{"nnsd", {}, {Aggregate::Nnsd}, false};
    for (double hx : {0.0, 1.0}) {
      RunConfig c = detail::linear_base();
      c.tau = pi_fraction(1, 4);
      c.hx0 = hx;
      c.n_max = linear_nnsd_kicks().back();
      c.analysis.nnsd_kicks = linear_nnsd_kicks();
      part.runs.push_back(c);
    }
    r.parts.push_back(std::move(part));
  } else if (id == "F7") {
    r.summary = "OTOC growth, periodic quench, t_max = 8pi, tau = pi/4, N in {8, 10, 12}";
    RecipePart part{"growth", {}, {Aggregate::Growth}, true};
    for (double hx : {0.0, 1.0}) {
      RunConfig c = detail::periodic_base(ObservableFamily::BlockX);
      c.tau = pi_fraction(1, 4);
      c.t_max = pi_fraction(8, 1);
      c.hx0 = hx;
      c.analysis.saturation = false;
      c.analysis.ipr = false;
      part.runs.push_back(c);
    }
    for (int n : {8, 10}) {
      RunConfig c = part.runs.front();
      c.n_sites = n;
      part.runs.push_back(c);
    }
    r.parts.push_back(std::move(part));
  } else if (id == "F8") {
    r.summary = "periodic quench, x-aligned observables: block and single-site saturation, NNSD";
    r.parts.push_back(detail::periodic_sweep("saturation_block_x", ObservableFamily::BlockX, 0.1));
    r.parts.push_back(
        detail::periodic_sweep("saturation_local_x", ObservableFamily::LocalPauliX, 0.1));
    RecipePart nnsd{"nnsd", {}, {Aggregate::Nnsd}, false};
    for (double hx : {0.0, 4.0}) {
      RunConfig c = detail::periodic_base(ObservableFamily::BlockX);
      c.tau = pi_fraction(1, 4);
      c.hx0 = hx;
      c.analysis.nnsd_kicks = periodic_nnsd_kicks();
      nnsd.runs.push_back(c);
    }
    r.parts.push_back(std::move(nnsd));
  } else if (id == "F9") {
    r.summary = "periodic quench, block-z observables, hx0 step 0.2";
    r.parts.push_back(detail::periodic_sweep("saturation", ObservableFamily::BlockZ, 0.2));
  } else if (id == "F10") {
    r.summary = "periodic quench, single-site z observables, hx0 step 0.1";
    r.parts.push_back(detail::periodic_sweep("saturation", ObservableFamily::LocalPauliZ, 0.1));
  } else {
    throw ConfigError("unknown figure '" + id + "' (F2 ... F10; F1 is an illustration)");
  }
  return r;
}

inline std::vector<std::string> figure_ids() {
  return {"F2", "F3", "F4", "F5", "F6", "F7", "F8", "F9", "F10"};
}

struct ManifestEntry {
  std::string run_key;
  std::filesystem::path csv_path;  // relative to the bundle directory
  std::string sha256;
};

struct FigureBundle {
  std::filesystem::path dir;
  std::vector<ManifestEntry> entries;
  std::vector<PointResult> results;
  bool ok = true;
};

namespace detail {

inline std::string file_stem(const std::string& run_key) {
  std::string s;
  for (char c : run_key) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') s += c;
    else if (c == '/') s += "_";
    else if (c == '=') s += "";
    else s += "_";
  }
  return s;
}

inline std::string period_key(const RunConfig& c) { return "tau=" + c.tau.text; }

}  // namespace detail

/// Runs the recipe and writes `<root>/<id>/` with one CSV per run and per
/// aggregate, plus manifest.csv.
inline FigureBundle write_figure_bundle(const FigureRecipe& recipe, const std::filesystem::path& root,
                                        int workers, const RunCache& cache,
                                        long n_max_override = 0,
                                        const std::function<void(const PointResult&)>& on_point = {}) {
  FigureBundle b;
  b.dir = root / recipe.id;
  std::filesystem::create_directories(b.dir);
  const auto emit = [&](const std::string& key, const std::string& rel, const CsvTable& t) {
    t.write(b.dir / rel);
    b.entries.push_back({key, rel, sha256_hex(t.text())});
  };

  for (const auto& part : recipe.parts) {
    std::vector<RunConfig> runs = part.runs;
    if (n_max_override > 0) {
      for (auto& c : runs) c.n_max = n_max_override;
    }
    auto results = run_grid(runs, workers, cache, part.with_otoc);
    if (on_point) {
      for (const auto& r : results) on_point(r);
    }
    CsvTable fits = fits_table();
    CsvTable sat = saturation_table();
    std::map<std::string, std::vector<std::pair<std::string, IprResult>>> ipr_by_period;
    bool any_fit = false, any_sat = false;
    for (const auto& r : results) {
      if (!r.ok()) {
        b.ok = false;
        continue;
      }
      const std::string stem = detail::file_stem(r.run_key);
      if (r.series) emit(r.run_key, part.name + "/otoc_" + stem + ".csv", otoc_table(*r.series));
      for (auto a : part.tables) {
        if (a == Aggregate::Growth && r.fit) {
          add_fit_row(fits, r.run_key, *r.fit);
          any_fit = true;
        } else if (a == Aggregate::Saturation && r.saturation) {
          add_saturation_row(sat, r.run_key, *r.saturation);
          any_sat = true;
        } else if (a == Aggregate::Ipr && r.ipr) {
          // One normalization per driving period.
          std::string param = detail::period_key(r.config) + ";hx0=" + format_shortest(r.config.hx0);
          if (part.name == "ipr_gamma") param += ";gamma=" + format_shortest(r.config.gamma);
          ipr_by_period[detail::period_key(r.config) +
                        (part.name == "ipr_gamma" ? ";hx0=" + format_shortest(r.config.hx0) : "")]
              .emplace_back(param, *r.ipr);
        } else if (a == Aggregate::Nnsd && !r.nnsd.empty()) {
          emit(r.run_key, part.name + "/spacings_" + stem + ".csv", spacings_table(r.nnsd));
          emit(r.run_key, part.name + "/histogram_" + stem + ".csv", histogram_table(r.nnsd));
        }
      }
    }
    b.results.insert(b.results.end(), std::make_move_iterator(results.begin()),
                     std::make_move_iterator(results.end()));
    if (any_fit) emit("all", part.name + "_fits.csv", fits);
    if (any_sat) emit("all", part.name + "_saturation.csv", sat);
    if (!ipr_by_period.empty()) {
      CsvTable all({"param", "xi", "xi_frac"});
      for (const auto& [period, rows] : ipr_by_period) {
        const auto frac = normalize_ipr_sweep(rows);
        for (std::size_t k = 0; k < rows.size(); ++k) {
          all.add_row({rows[k].first, format_number(rows[k].second.xi),
                       format_number(frac[k].second)});
        }
      }
      emit("all", part.name + ".csv", all);
    }
  }

  CsvTable manifest({"figure_id", "run_key", "csv_path", "sha256"});
  for (const auto& e : b.entries) {
    manifest.add_row({recipe.id, e.run_key, e.csv_path.generic_string(), e.sha256});
  }
  manifest.write(b.dir / "manifest.csv");
  return b;
}

}  // namespace quenchotoc
