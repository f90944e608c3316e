#pragma once

// Command-line front end: otoc, nnsd, grid and figure subcommands.
// Exit status: 0 success, 2 bad configuration or arguments, 3 numerical or
// analysis failure (including failed grid points).

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quenchotoc/figures.hpp"
#include "quenchotoc/sweep.hpp"

namespace quenchotoc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

namespace cli_detail {

// A flag that overrides `section.key` when given.
struct Override {
  std::string section;
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

struct RunFlags {
  std::string config_path;
  std::vector<std::unique_ptr<Override>> overrides;

  void add(CLI::App* app, const std::string& flag, const std::string& section,
           const std::string& key, const std::string& def, const std::string& help) {
    auto o = std::make_unique<Override>();
    o->section = section;
    o->key = key;
    o->option = app->add_option(flag, o->value, help)->default_str(def);
    overrides.push_back(std::move(o));
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_path.empty()) {
      ConfigFile f = load_config(config_path);
      if (!f.grid.empty()) throw ConfigError("[grid] is only valid for the grid subcommand");
      c = f.base;
    }
    for (const auto& o : overrides) {
      if (o->option->count() == 0) continue;
      try {
        apply_setting(c, o->section, o->key, o->value);
      } catch (const ConfigError& e) {
        throw ConfigError(o->option->get_name() + ": " + e.what());
      }
    }
    return c;
  }
};

inline void add_model_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config_path, "INI configuration file; flags override it");
  f.add(app, "--N", "evolution", "N", "12", "chain length (even)");
  f.add(app, "--J", "evolution", "J", "1", "Ising coupling");
  f.add(app, "--tau", "evolution", "tau", "pi/4", "kick period, e.g. pi/16 or 0.19");
  f.add(app, "--convention", "evolution", "convention", "UWUdag",
        "Heisenberg picture: UWUdag or UdagWU");
  f.add(app, "--protocol", "schedules", "protocol", "linear", "constant, linear or periodic");
  f.add(app, "--hx0", "schedules", "hx0", "0", "longitudinal field amplitude");
  f.add(app, "--hz0", "schedules", "hz0", "1", "transverse field amplitude (intercept)");
  f.add(app, "--gamma", "schedules", "gamma", "0.1", "slope of the linear transverse field");
  f.add(app, "--tmax", "schedules", "t_max", "16pi",
        "periodic quench duration; alpha = pi/(2 t_max)");
  f.add(app, "--nmax", "otoc", "n_max", "0",
        "kicks; 0 = t_max/tau (periodic), 1000 at tau=pi/16, else 400");
  f.add(app, "--cache-dir", "sweep", "cache_dir", "", "reuse/store runs in this directory");
}

inline void add_otoc_flags(CLI::App* app, RunFlags& f) {
  f.add(app, "--observable", "otoc", "observable", "block-x",
        "block-x, block-z, local-x or local-z");
  f.add(app, "--sites", "otoc", "sites", "1,N/2", "W and V sites for local observables");
  f.add(app, "--fit", "analysis", "fit", "true", "power-law fit of the early growth");
  f.add(app, "--saturation", "analysis", "saturation", "true", "late-window statistics");
  f.add(app, "--saturation-fraction", "analysis", "saturation_fraction", "0.5",
        "late window as a fraction of the kicks");
  f.add(app, "--ipr", "analysis", "ipr", "true", "Fourier inverse participation ratio");
  f.add(app, "--window", "analysis", "ipr_window", "full", "IPR window: full or saturation");
  f.add(app, "--remove-mean", "analysis", "remove_mean", "false", "subtract the mean before the DFT");
}

inline void add_spectral_flags(CLI::App* app, RunFlags& f) {
  f.add(app, "--kicks", "spectral", "kicks", "1,5,10,20,50,100", "kicks to analyse (from 1)");
  f.add(app, "--bins", "spectral", "bins", "25", "histogram bins on [0, s_cut]");
  f.add(app, "--s-cut", "spectral", "s_cut", "4", "histogram range");
  f.add(app, "--margin", "spectral", "margin", "0.1", "relative distance margin for a verdict");
}

inline std::string summary_number(const std::optional<double>& v) {
  return v ? format_number(*v, 6) : "nan";
}

}  // namespace cli_detail

inline int cmd_otoc(const RunConfig& c, const std::string& out_path, std::ostream& out,
                    std::ostream& err) {
  validate_config(c);
  const RunCache cache(c.cache_dir);
  PointResult r = run_point(c, cache);
  if (!r.ok()) throw NumericalError(r.error);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  otoc_table(*r.series).write(out_path);
  out << "b=" << cli_detail::summary_number(r.fit ? std::optional(r.fit->b) : std::nullopt)
      << ", osc_ratio="
      << cli_detail::summary_number(r.saturation ? std::optional(r.saturation->osc_ratio)
                                                 : std::nullopt)
      << ", xi=" << cli_detail::summary_number(r.ipr ? std::optional(r.ipr->xi) : std::nullopt)
      << "\n";
  return kExitOk;
}

inline int cmd_nnsd(RunConfig c, const std::filesystem::path& out_dir, std::ostream& out) {
  if (c.analysis.nnsd_kicks.empty()) throw ConfigError("no kicks requested");
  if (c.n_max == 0) c.n_max = std::max(c.resolved_n_max(), c.analysis.nnsd_kicks.back());
  validate_config(c);
  const RunCache cache(c.cache_dir);
  const auto results = nnsd_series(c, cache);
  spacings_table(results).write(out_dir / "nnsd_spacings.csv");
  histogram_table(results).write(out_dir / "nnsd_histogram.csv");
  for (const auto& r : results) {
    out << "kick=" << r.kick << " verdict=" << verdict_name(r.score.verdict)
        << " d_P=" << format_number(r.score.distance_poisson, 6)
        << " d_W=" << format_number(r.score.distance_wd, 6) << "\n";
  }
  return kExitOk;
}

inline int cmd_grid(const std::string& config_path, const std::filesystem::path& out_dir,
                    std::ostream& out, std::ostream& err) {
  ConfigFile f = load_config(config_path);
  const auto grid = expand_grid(f.base, f.grid);
  for (const auto& c : grid) validate_config(c);
  const RunCache cache(f.base.cache_dir);
  FigureRecipe recipe{"grid", "configured grid", {{"runs", grid, {}, true}}};
  auto& tables = recipe.parts.front().tables;
  if (f.base.analysis.fit) tables.push_back(Aggregate::Growth);
  if (f.base.analysis.saturation) tables.push_back(Aggregate::Saturation);
  if (f.base.analysis.ipr) tables.push_back(Aggregate::Ipr);
  if (!f.base.analysis.nnsd_kicks.empty()) tables.push_back(Aggregate::Nnsd);
  const auto bundle =
      write_figure_bundle(recipe, out_dir.empty() ? std::filesystem::path(f.base.output_dir) : out_dir, f.base.workers,
                          cache);
  for (const auto& r : bundle.results) {
    if (!r.ok()) err << "failed: " << r.run_key << ": " << r.error << "\n";
    for (const auto& w : r.warnings) err << "warning: " << r.run_key << ": " << w << "\n";
  }
  out << bundle.results.size() << " runs, " << bundle.entries.size() << " files in "
      << bundle.dir.string() << "\n";
  return bundle.ok ? kExitOk : kExitNumerical;
}

inline int cmd_figure(const std::string& id, const std::filesystem::path& root, int workers,
                      const std::string& cache_dir, long n_max, std::ostream& out,
                      std::ostream& err) {
  const FigureRecipe recipe = figure_recipe(id);
  const RunCache cache(cache_dir);
  const auto bundle = write_figure_bundle(recipe, root, workers, cache, n_max);
  for (const auto& r : bundle.results) {
    if (!r.ok()) err << "failed: " << r.run_key << ": " << r.error << "\n";
    for (const auto& w : r.warnings) err << "warning: " << r.run_key << ": " << w << "\n";
  }
  out << recipe.id << ": " << bundle.results.size() << " runs, " << bundle.entries.size()
      << " files in " << bundle.dir.string() << "\n";
  return bundle.ok ? kExitOk : kExitNumerical;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Out-of-time-order correlators and level statistics of quenched kicked Ising chains"};
  app.require_subcommand(1);

  cli_detail::RunFlags otoc_flags, nnsd_flags;
  std::string otoc_out = "otoc.csv";
  auto* otoc = app.add_subcommand("otoc", "OTOC series of one run, with fit, saturation and IPR");
  cli_detail::add_model_flags(otoc, otoc_flags);
  cli_detail::add_otoc_flags(otoc, otoc_flags);
  otoc->add_option("--out", otoc_out, "CSV output path")->capture_default_str();

  std::string nnsd_out = ".";
  auto* nnsd = app.add_subcommand("nnsd", "level spacings of the cumulative unitary, even sector");
  cli_detail::add_model_flags(nnsd, nnsd_flags);
  cli_detail::add_spectral_flags(nnsd, nnsd_flags);
  nnsd->add_option("--out-dir", nnsd_out, "output directory")->capture_default_str();

  std::string grid_config, grid_out;
  auto* grid = app.add_subcommand("grid", "run the [grid] of a configuration file");
  grid->add_option("--config", grid_config, "INI configuration file")->required();
  grid->add_option("--out-dir", grid_out, "output directory (default: [sweep] output_dir)");

  std::string figure_id, figure_root = "figures", figure_cache;
  int figure_workers = 1;
  long figure_nmax = 0;
  auto* figure = app.add_subcommand("figure", "CSV bundle of a figure recipe (F2 ... F10)");
  figure->add_option("id", figure_id, "figure id")->required();
  figure->add_option("--out-root", figure_root, "bundle root; writes <root>/<id>/")
      ->capture_default_str();
  figure->add_option("--workers", figure_workers, "worker threads")->capture_default_str();
  figure->add_option("--cache-dir", figure_cache, "run cache directory")->capture_default_str();
  figure->add_option("--nmax", figure_nmax, "override every run's kick count (0 = recipe)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0 and print the selected subcommand's help.
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*otoc) return cmd_otoc(otoc_flags.resolve(), otoc_out, out, err);
    if (*nnsd) return cmd_nnsd(nnsd_flags.resolve(), nnsd_out, out);
    if (*grid) return cmd_grid(grid_config, grid_out, out, err);
    if (*figure) {
      return cmd_figure(figure_id, figure_root, figure_workers, figure_cache, figure_nmax, out, err);
    }
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const AnalysisError& e) {
    err << "analysis failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace quenchotoc
