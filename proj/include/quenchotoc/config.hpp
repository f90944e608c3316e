#pragma once

// Run configuration: symbolic angles, the flat INI format with one section per
// module, grid expansion and the canonical text used for cache keys.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "quenchotoc/analysis.hpp"
#include "quenchotoc/otoc.hpp"
#include "quenchotoc/schedules.hpp"
#include "quenchotoc/spectral.hpp"

namespace quenchotoc {

/// Bad configuration input; `line` is 0 when it does not come from a file.
class ConfigError : public ParameterError {
 public:
  ConfigError(const std::string& msg, std::string file = {}, int line = 0)
      : ParameterError(file.empty() ? msg
                                    : file + ":" + std::to_string(line) + ": " + msg),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_shortest(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_real(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("not a number: '" + t + "'");
  }
  return v;
}

inline long parse_integer(std::string_view text) {
  const std::string t = trim(text);
  long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("not an integer: '" + t + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError("not a boolean: '" + t + "'");
}

/// An angle with its exact textual form: "pi/16", "3pi/4", "16pi", "-pi/2" or
/// a plain decimal.
struct Angle {
  double value = 0.0;
  std::string text = "0";

  bool operator==(const Angle& o) const { return text == o.text; }
};

inline Angle pi_fraction(long num, long den) {
  const long g = std::gcd(num, den);
  num /= g;
  den /= g;
  std::string t;
  if (num == 0) return {0.0, "0"};
  if (num == -1) t = "-pi";
  else if (num == 1) t = "pi";
  else t = std::to_string(num) + "pi";
  if (den != 1) t += "/" + std::to_string(den);
  return {kPi * static_cast<double>(num) / static_cast<double>(den), t};
}

inline Angle parse_angle(std::string_view text) {
  std::string t;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '*') t += c;
  }
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  const auto pos = t.find("pi");
  if (pos == std::string::npos) {
    const double v = parse_real(t);
    return {v, format_shortest(v)};
  }
  const std::string head = t.substr(0, pos);
  std::string tail = t.substr(pos + 2);
  long num = 1;
  if (head == "-") num = -1;
  else if (!head.empty() && head != "+") num = parse_integer(head);
  long den = 1;
  if (!tail.empty()) {
    if (tail[0] != '/') throw ConfigError("malformed angle: '" + std::string(text) + "'");
    den = parse_integer(tail.substr(1));
    if (den <= 0) throw ConfigError("angle denominator must be positive: '" + std::string(text) + "'");
  }
  return pi_fraction(num, den);
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

inline ProtocolTag parse_protocol(std::string_view text) {
  const std::string t = trim(text);
  if (t == "constant") return ProtocolTag::Constant;
  if (t == "linear") return ProtocolTag::Linear;
  if (t == "periodic") return ProtocolTag::Periodic;
  throw ConfigError("unknown protocol '" + t + "' (constant, linear, periodic)");
}

inline ObservableFamily parse_family(std::string_view text) {
  const std::string t = trim(text);
  for (auto f : {ObservableFamily::BlockX, ObservableFamily::BlockZ, ObservableFamily::LocalPauliX,
                 ObservableFamily::LocalPauliZ}) {
    if (t == family_name(f)) return f;
  }
  throw ConfigError("unknown observable '" + t + "' (block-x, block-z, local-x, local-z)");
}

inline std::string convention_name(HeisenbergConvention c) {
  return c == HeisenbergConvention::UWUdag ? "UWUdag" : "UdagWU";
}

inline HeisenbergConvention parse_convention(std::string_view text) {
  const std::string t = trim(text);
  if (t == "UWUdag") return HeisenbergConvention::UWUdag;
  if (t == "UdagWU") return HeisenbergConvention::UdagWU;
  throw ConfigError("unknown convention '" + t + "' (UWUdag, UdagWU)");
}

inline std::vector<long> parse_kicks(std::string_view text) {
  std::vector<long> k;
  for (const auto& item : split_list(text)) {
    if (item.empty()) throw ConfigError("empty entry in kick list");
    k.push_back(parse_integer(item));
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

struct AnalysisToggles {
  bool fit = true;
  bool saturation = true;
  double saturation_fraction = 0.5;
  bool ipr = true;
  IprWindow ipr_window = IprWindow::Full;
  bool remove_mean = false;
  std::vector<long> nnsd_kicks;
  NnsdOptions nnsd;
};

inline constexpr long kDefaultSaturationKicks = 400;
inline constexpr long kDefaultShortPeriodKicks = 1000;

struct RunConfig {
  int n_sites = 12;
  double J = 1.0;
  Angle tau = pi_fraction(1, 4);
  HeisenbergConvention convention = HeisenbergConvention::UWUdag;

  ProtocolTag protocol = ProtocolTag::Linear;
  double hx0 = 0.0;
  double hz0 = 1.0;
  double gamma = 0.1;
  Angle t_max = pi_fraction(16, 1);

  ObservableSpec observable;
  long n_max = 0;  // 0: protocol default

  AnalysisToggles analysis;

  std::string output_dir = ".";
  std::string cache_dir;
  int workers = 1;

  ChainParams chain() const { return {n_sites, J, tau.value}; }

  QuenchProtocol quench() const {
    switch (protocol) {
      case ProtocolTag::Constant: return QuenchProtocol::constant(hx0, hz0);
      case ProtocolTag::Linear: return QuenchProtocol::linear(hx0, hz0, gamma);
      case ProtocolTag::Periodic: return QuenchProtocol::periodic(hx0, hz0, t_max.value);
    }
    return {};
  }

  /// Periodic runs cover one quench duration t_max; the others use 400 kicks,
  /// 1000 at τ = π/16.
  long resolved_n_max() const {
    if (n_max > 0) return n_max;
    if (protocol == ProtocolTag::Periodic) {
      return std::max(1L, std::lround(t_max.value / tau.value));
    }
    return tau.text == "pi/16" ? kDefaultShortPeriodKicks : kDefaultSaturationKicks;
  }

  std::pair<int, int> sites() const { return local_sites(observable, n_sites); }

  /// Parameters that determine the evolution, in canonical text; the cache key
  /// hashes this. n_max is left out: a longer run serves every shorter one.
  std::string evolution_text(bool with_observable = true) const {
    std::ostringstream o;
    o << "N=" << n_sites << "\nJ=" << format_shortest(J) << "\ntau=" << tau.text
      << "\nprotocol=" << protocol_name(protocol) << "\nhx0=" << format_shortest(hx0)
      << "\nhz0=" << format_shortest(hz0);
    if (protocol == ProtocolTag::Linear) o << "\ngamma=" << format_shortest(gamma);
    if (protocol == ProtocolTag::Periodic) o << "\nt_max=" << t_max.text;
    if (with_observable) {
      o << "\nobservable=" << family_name(observable.family);
      if (!is_block(observable.family)) {
        const auto [w, v] = sites();
        o << "\nsites=" << w << "," << v;
      }
      o << "\nconvention=" << convention_name(convention);
    }
    o << "\n";
    return o.str();
  }

  /// Short human-readable identifier, used as the `run_key` column.
  std::string run_key() const {
    std::string k = protocol_name(protocol) + ";N=" + std::to_string(n_sites) + ";tau=" + tau.text +
                    ";hx0=" + format_shortest(hx0) + ";hz0=" + format_shortest(hz0);
    if (J != 1.0) k += ";J=" + format_shortest(J);
    if (protocol == ProtocolTag::Linear) k += ";gamma=" + format_shortest(gamma);
    if (protocol == ProtocolTag::Periodic) k += ";tmax=" + t_max.text;
    k += ";obs=" + family_name(observable.family);
    if (!is_block(observable.family)) {
      const auto [w, v] = sites();
      k += ";sites=" + std::to_string(w) + "-" + std::to_string(v);
    }
    if (convention != HeisenbergConvention::UWUdag) k += ";" + convention_name(convention);
    return k;
  }
};

inline void validate_config(const RunConfig& c) {
  if (c.n_sites < 2 || c.n_sites % 2 != 0) {
    throw ConfigError("N must be even, got " + std::to_string(c.n_sites));
  }
  if (c.n_sites > 14) throw ConfigError("N must be <= 14, got " + std::to_string(c.n_sites));
  if (!(c.tau.value > 0.0)) throw ConfigError("tau must be positive, got " + c.tau.text);
  if (c.protocol == ProtocolTag::Periodic && !(c.t_max.value > 0.0)) {
    throw ConfigError("t_max must be positive, got " + c.t_max.text);
  }
  if (c.protocol == ProtocolTag::Linear && c.gamma < 0.0) throw ConfigError("gamma must be >= 0");
  if (c.n_max < 0) throw ConfigError("n_max must be >= 1");
  if (!is_block(c.observable.family)) {
    const auto [w, v] = c.sites();
    if (w < 1 || w > c.n_sites || v < 1 || v > c.n_sites || w == v) {
      throw ConfigError("local observable sites must be two distinct sites in 1.." +
                        std::to_string(c.n_sites));
    }
  }
  const long n_max = c.resolved_n_max();
  for (long k : c.analysis.nnsd_kicks) {
    if (k < 1) throw ConfigError("kicks start at 1, got " + std::to_string(k));
    if (k > n_max) {
      throw ConfigError("kick " + std::to_string(k) + " exceeds n_max = " + std::to_string(n_max));
    }
  }
  if (!(c.analysis.saturation_fraction > 0.0) || c.analysis.saturation_fraction > 1.0) {
    throw ConfigError("saturation_fraction must be in (0, 1]");
  }
  if (c.analysis.nnsd.bins < 1) throw ConfigError("bins must be positive");
  if (!(c.analysis.nnsd.s_cut > 0.0)) throw ConfigError("s_cut must be positive");
  if (c.analysis.nnsd.margin < 0.0 || c.analysis.nnsd.margin >= 1.0) {
    throw ConfigError("margin must be in [0, 1)");
  }
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
}

/// Applies one `key = value` setting of `section`. Returns false for unknown keys.
inline bool apply_setting(RunConfig& c, const std::string& section, const std::string& key,
                          const std::string& value) {
  if (section == "evolution") {
    if (key == "N") c.n_sites = static_cast<int>(parse_integer(value));
    else if (key == "J") c.J = parse_real(value);
    else if (key == "tau") c.tau = parse_angle(value);
    else if (key == "convention") c.convention = parse_convention(value);
    else return false;
  } else if (section == "schedules") {
    if (key == "protocol") c.protocol = parse_protocol(value);
    else if (key == "hx0") c.hx0 = parse_real(value);
    else if (key == "hz0") c.hz0 = parse_real(value);
    else if (key == "gamma") c.gamma = parse_real(value);
    else if (key == "t_max") c.t_max = parse_angle(value);
    else return false;
  } else if (section == "otoc") {
    if (key == "observable") c.observable.family = parse_family(value);
    else if (key == "sites") {
      const auto items = split_list(value);
      if (items.size() != 2) throw ConfigError("sites takes two comma-separated sites");
      c.observable.site_w = static_cast<int>(parse_integer(items[0]));
      c.observable.site_v = static_cast<int>(parse_integer(items[1]));
    } else if (key == "n_max") c.n_max = parse_integer(value);
    else return false;
  } else if (section == "analysis") {
    if (key == "fit") c.analysis.fit = parse_bool(value);
    else if (key == "saturation") c.analysis.saturation = parse_bool(value);
    else if (key == "saturation_fraction") c.analysis.saturation_fraction = parse_real(value);
    else if (key == "ipr") c.analysis.ipr = parse_bool(value);
    else if (key == "ipr_window") {
      const std::string t = trim(value);
      if (t == "full") c.analysis.ipr_window = IprWindow::Full;
      else if (t == "saturation") c.analysis.ipr_window = IprWindow::Saturation;
      else throw ConfigError("ipr_window must be full or saturation");
    } else if (key == "remove_mean") c.analysis.remove_mean = parse_bool(value);
    else return false;
  } else if (section == "spectral") {
    if (key == "kicks") c.analysis.nnsd_kicks = parse_kicks(value);
    else if (key == "bins") c.analysis.nnsd.bins = static_cast<int>(parse_integer(value));
    else if (key == "s_cut") c.analysis.nnsd.s_cut = parse_real(value);
    else if (key == "margin") c.analysis.nnsd.margin = parse_real(value);
    else return false;
  } else if (section == "sweep") {
    if (key == "workers") c.workers = static_cast<int>(parse_integer(value));
    else if (key == "output_dir") c.output_dir = trim(value);
    else if (key == "cache_dir") c.cache_dir = trim(value);
    else return false;
  } else {
    return false;
  }
  return true;
}

/// One axis of a parameter grid: `section.key` takes each of `values`.
struct GridAxis {
  std::string section;
  std::string key;
  std::vector<std::string> values;
};

struct ConfigFile {
  RunConfig base;
  std::vector<GridAxis> grid;
};

namespace detail {

// Line of every "key = value" entry by (section, key), for error messages.
inline std::map<std::pair<std::string, std::string>, int> index_lines(std::istream& in) {
  std::map<std::pair<std::string, std::string>, int> lines;
  std::string raw, section;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    const std::string t = trim(raw);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) lines[{section, trim(std::string_view(t).substr(0, eq))}] = no;
  }
  return lines;
}

}  // namespace detail

/// Reads an INI file. Sections: evolution, schedules, otoc, analysis, spectral,
/// sweep, and grid, whose keys are "section.key = v1, v2, ...".
inline ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  const std::string body = text.str();

  boost::property_tree::ptree tree;
  try {
    std::istringstream s(body);
    boost::property_tree::ini_parser::read_ini(s, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.message(), path, static_cast<int>(e.line()));
  }
  std::istringstream scan(body);
  const auto lines = detail::index_lines(scan);
  const auto line_of = [&](const std::string& sec, const std::string& key) {
    const auto it = lines.find({sec, key});
    return it == lines.end() ? 0 : it->second;
  };

  ConfigFile cfg;
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw ConfigError("setting '" + section + "' outside any section", path,
                        line_of("", section));
    }
    for (const auto& [key, node] : entries) {
      const std::string value = node.get_value<std::string>();
      const int line = line_of(section, key);
      try {
        if (section == "grid") {
          const auto dot = key.find('.');
          if (dot == std::string::npos) {
            throw ConfigError("grid keys are written section.key, got '" + key + "'");
          }
          GridAxis axis{key.substr(0, dot), key.substr(dot + 1), split_list(value)};
          RunConfig probe;
          for (const auto& v : axis.values) {
            if (!apply_setting(probe, axis.section, axis.key, v)) {
              throw ConfigError("unknown grid key '" + key + "'");
            }
          }
          cfg.grid.push_back(std::move(axis));
        } else if (!apply_setting(cfg.base, section, key, value)) {
          throw ConfigError("unknown key '" + key + "' in [" + section + "]");
        }
      } catch (const ConfigError& e) {
        if (!e.file().empty()) throw;
        throw ConfigError(e.what(), path, line);
      }
    }
  }
  return cfg;
}

/// Cartesian product of the grid axes over the base configuration, first axis
/// slowest.
inline std::vector<RunConfig> expand_grid(const RunConfig& base, const std::vector<GridAxis>& grid) {
  std::vector<RunConfig> out{base};
  for (const auto& axis : grid) {
    std::vector<RunConfig> next;
    for (const auto& c : out) {
      for (const auto& v : axis.values) {
        RunConfig d = c;
        apply_setting(d, axis.section, axis.key, v);
        next.push_back(std::move(d));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace quenchotoc
