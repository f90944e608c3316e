#pragma once

// CSV emission (12 significant digits, LF endings) and SHA-256 of files for
// output manifests.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "quenchotoc/analysis.hpp"
#include "quenchotoc/otoc.hpp"
#include "quenchotoc/spectral.hpp"

namespace quenchotoc {

inline std::string format_number(double x, int digits = 12) {
  if (x == 0.0) return "0";  // also folds -0
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : cols_(header.size()) {
    add_row(header);
  }

  void add_row(const std::vector<std::string>& fields) {
    if (fields.size() != cols_) throw ParameterError("CSV row has the wrong number of fields");
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) text_ += ',';
      text_ += csv_field(fields[k]);
    }
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

  void write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text_;
  }

 private:
  std::size_t cols_;
  std::string text_;
};

inline CsvTable otoc_table(const OtocSeries& s) {
  CsvTable t({"n", "C2", "C4", "C", "C_norm"});
  for (std::size_t k = 0; k < s.size(); ++k) {
    t.add_row({std::to_string(s.n[k]), format_number(s.C2[k]), format_number(s.C4[k]),
               format_number(s.C[k]), format_number(s.normalized(k))});
  }
  return t;
}

inline CsvTable spacings_table(const std::vector<NnsdResult>& results) {
  CsvTable t({"kick", "s"});
  for (const auto& r : results) {
    for (double s : r.ensemble.spacings) t.add_row({std::to_string(r.kick), format_number(s)});
  }
  return t;
}

inline CsvTable histogram_table(const std::vector<NnsdResult>& results) {
  CsvTable t({"kick", "bin_center", "density", "P_W", "P_P"});
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.score.bins(); ++k) {
      const double c = r.score.center(k);
      t.add_row({std::to_string(r.kick), format_number(c), format_number(r.score.density[k]),
                 format_number(wigner_dyson_density(c)), format_number(poisson_density(c))});
    }
  }
  return t;
}

inline CsvTable fits_table() { return CsvTable({"run_key", "b", "n_lo", "n_hi", "residual"}); }

inline void add_fit_row(CsvTable& t, const std::string& key, const PowerLawFit& f) {
  t.add_row({key, format_number(f.b), std::to_string(f.window.n_lo), std::to_string(f.window.n_hi),
             format_number(f.residual)});
}

inline CsvTable saturation_table() { return CsvTable({"run_key", "mean", "std", "osc_ratio"}); }

inline void add_saturation_row(CsvTable& t, const std::string& key, const SaturationStats& s) {
  t.add_row({key, format_number(s.mean), format_number(s.std), format_number(s.osc_ratio)});
}

inline CsvTable ipr_table(const std::vector<std::pair<std::string, IprResult>>& results) {
  CsvTable t({"param", "xi", "xi_frac"});
  const auto frac = normalize_ipr_sweep(results);
  for (std::size_t k = 0; k < results.size(); ++k) {
    t.add_row({results[k].first, format_number(results[k].second.xi), format_number(frac[k].second)});
  }
  return t;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream o;
  for (unsigned int k = 0; k < len; ++k) {
    o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  }
  return o.str();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

inline std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

}  // namespace quenchotoc
