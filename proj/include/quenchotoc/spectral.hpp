#pragma once

// Level statistics of cumulative Floquet unitaries: reduction to the
// reflection-even sector, circular eigenphase spacings and a binned comparison
// with the Poisson and Wigner-Dyson (GOE surmise) spacing densities.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <lapacke.h>

#include "quenchotoc/core_algebra.hpp"
#include "quenchotoc/evolution.hpp"

namespace quenchotoc {

enum class Parity { Even, Odd };

/// Isometry onto one reflection sector. Column k is |a⟩ (a palindrome, even
/// sector only) or (|a⟩ ± |reverse(a)⟩)/√2 for a < reverse(a).
struct PalindromeProjector {
  int n_sites = 0;
  Parity parity = Parity::Even;
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;  // equals `first` for palindromes

  Eigen::Index dim() const { return static_cast<Eigen::Index>(first.size()); }

  DenseOperator dense() const {
    const auto full = static_cast<Eigen::Index>(hilbert_dim(n_sites));
    DenseOperator p = DenseOperator::Zero(full, dim());
    const double h = 1.0 / std::sqrt(2.0);
    const double sign = parity == Parity::Even ? 1.0 : -1.0;
    for (Eigen::Index k = 0; k < dim(); ++k) {
      const auto a = static_cast<Eigen::Index>(first[k]);
      const auto b = static_cast<Eigen::Index>(second[k]);
      if (a == b) {
        p(a, k) = 1.0;
      } else {
        p(a, k) = h;
        p(b, k) = sign * h;
      }
    }
    return p;
  }
};

inline PalindromeProjector palindrome_projector(int n_sites, Parity parity = Parity::Even) {
  require_even_chain(n_sites);
  if (n_sites > 14) throw ParameterError("N must be <= 14 for sector projection");
  PalindromeProjector p{n_sites, parity, {}, {}};
  const std::size_t full = hilbert_dim(n_sites);
  for (std::size_t a = 0; a < full; ++a) {
    const std::size_t r = reverse_sites(a, n_sites);
    if (a > r) continue;
    if (a == r && parity == Parity::Odd) continue;
    p.first.push_back(a);
    p.second.push_back(r);
  }
  return p;
}

inline constexpr double kSymmetryTolerance = 1e-8;

/// U_e = P† U P, after checking [U, R] = 0.
inline DenseOperator project_unitary(const DenseOperator& u, const PalindromeProjector& p) {
  const auto full = static_cast<Eigen::Index>(hilbert_dim(p.n_sites));
  if (u.rows() != full || u.cols() != full) {
    throw ParameterError("unitary does not act on a " + std::to_string(p.n_sites) + "-site chain");
  }
  const double defect = reflection_commutator_norm(u, p.n_sites);
  if (defect > kSymmetryTolerance) {
    throw NumericalError("symmetry violation: |[U, R]| = " + std::to_string(defect));
  }
  const double sign = p.parity == Parity::Even ? 1.0 : -1.0;
  const double h = 1.0 / std::sqrt(2.0);
  const Eigen::Index d = p.dim();
  // U P column by column, then the rows of P† (U P).
  DenseOperator up(full, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto a = static_cast<Eigen::Index>(p.first[k]);
    const auto b = static_cast<Eigen::Index>(p.second[k]);
    if (a == b) {
      up.col(k) = u.col(a);
    } else {
      up.col(k) = h * (u.col(a) + sign * u.col(b));
    }
  }
  DenseOperator ue(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto a = static_cast<Eigen::Index>(p.first[k]);
    const auto b = static_cast<Eigen::Index>(p.second[k]);
    if (a == b) {
      ue.row(k) = up.row(a);
    } else {
      ue.row(k) = h * (up.row(a) + sign * up.row(b));
    }
  }
  return ue;
}

/// Eigenvalues of a general complex matrix (LAPACK zgeev, no vectors).
inline ComplexVector eigenvalues(DenseOperator a) {
  if (a.rows() != a.cols()) throw ParameterError("eigenvalues need a square matrix");
  const auto n = static_cast<lapack_int>(a.rows());
  ComplexVector w(a.rows());
  if (n == 0) return w;
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                    n, reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalError("eigensolver failed, zgeev info = " + std::to_string(info));
  return w;
}

struct SpacingEnsemble {
  long kick = 0;
  std::vector<double> phases;    // sorted, in [0, 2π)
  std::vector<double> spacings;  // circular, mean 1

  std::size_t count() const { return spacings.size(); }
};

/// Sorted phases -> circular gaps (wrap-around included) divided by their mean.
inline std::vector<double> circular_spacings(const std::vector<double>& sorted_phases) {
  const std::size_t m = sorted_phases.size();
  if (m < 2) throw ParameterError("need at least two phases for spacings");
  std::vector<double> s(m);
  for (std::size_t k = 0; k + 1 < m; ++k) s[k] = sorted_phases[k + 1] - sorted_phases[k];
  s[m - 1] = 2.0 * kPi - sorted_phases[m - 1] + sorted_phases[0];
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(m);
  if (!(mean > 0.0)) throw NumericalError("degenerate spectrum: zero mean spacing");
  for (auto& x : s) x = std::max(0.0, x / mean);
  return s;
}

inline constexpr double kUnitarityTolerance = 1e-8;

inline SpacingEnsemble eigenphase_spacings(const DenseOperator& ue, long kick = 0,
                                           bool check_unitary = true) {
  if (check_unitary) {
    const double defect = unitarity_defect(ue);
    if (defect > kUnitarityTolerance) {
      throw NumericalError("projected operator is not unitary (defect " + std::to_string(defect) +
                           ")");
    }
  }
  const ComplexVector lambda = eigenvalues(ue);
  SpacingEnsemble e;
  e.kick = kick;
  e.phases.resize(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    double t = std::arg(lambda[k]);
    if (t < 0.0) t += 2.0 * kPi;
    if (t >= 2.0 * kPi) t -= 2.0 * kPi;
    e.phases[static_cast<std::size_t>(k)] = t;
  }
  std::sort(e.phases.begin(), e.phases.end());
  e.spacings = circular_spacings(e.phases);
  return e;
}

// Nearest-neighbour spacing densities and their distribution functions.
inline double poisson_density(double s) { return s < 0.0 ? 0.0 : std::exp(-s); }
inline double wigner_dyson_density(double s) {
  return s < 0.0 ? 0.0 : 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s);
}
inline double poisson_cdf(double s) { return s <= 0.0 ? 0.0 : -std::expm1(-s); }
inline double wigner_dyson_cdf(double s) {
  return s <= 0.0 ? 0.0 : -std::expm1(-0.25 * kPi * s * s);
}

enum class Verdict { PoissonLike, WignerDysonLike, Inconclusive };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::PoissonLike: return "PoissonLike";
    case Verdict::WignerDysonLike: return "WignerDysonLike";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct NnsdOptions {
  int bins = 25;
  double s_cut = 4.0;
  double margin = 0.10;  // relative
  std::size_t min_count = 50;
};

struct NnsdScore {
  std::vector<double> edges;    // bins + 1
  std::vector<double> density;  // over the in-range spacings, integrates to 1
  double distance_poisson = 0.0;
  double distance_wd = 0.0;
  Verdict verdict = Verdict::Inconclusive;

  std::size_t bins() const { return density.size(); }
  double center(std::size_t k) const { return 0.5 * (edges[k] + edges[k + 1]); }
};

/// Total-variation distance between the binned masses and a model restricted
/// to the same range.
inline double binned_tv_distance(const NnsdScore& h, const std::function<double(double)>& cdf) {
  const double total = cdf(h.edges.back()) - cdf(h.edges.front());
  double d = 0.0;
  for (std::size_t k = 0; k < h.bins(); ++k) {
    const double model = (cdf(h.edges[k + 1]) - cdf(h.edges[k])) / total;
    const double sample = h.density[k] * (h.edges[k + 1] - h.edges[k]);
    d += std::abs(sample - model);
  }
  return 0.5 * d;
}

inline NnsdScore score_nnsd(const std::vector<double>& spacings, const NnsdOptions& opt = {}) {
  if (opt.bins < 1) throw ParameterError("bin count must be positive");
  if (!(opt.s_cut > 0.0)) throw ParameterError("s_cut must be positive");
  if (opt.margin < 0.0 || opt.margin >= 1.0) throw ParameterError("margin must be in [0, 1)");
  NnsdScore h;
  const auto nb = static_cast<std::size_t>(opt.bins);
  const double width = opt.s_cut / static_cast<double>(nb);
  h.edges.resize(nb + 1);
  for (std::size_t k = 0; k <= nb; ++k) h.edges[k] = width * static_cast<double>(k);
  h.edges[nb] = opt.s_cut;
  std::vector<std::size_t> counts(nb, 0);
  std::size_t in_range = 0;
  for (double s : spacings) {
    if (s < 0.0 || s > opt.s_cut) continue;
    const auto k = std::min(nb - 1, static_cast<std::size_t>(s / width));
    ++counts[k];
    ++in_range;
  }
  h.density.assign(nb, 0.0);
  if (in_range > 0) {
    for (std::size_t k = 0; k < nb; ++k) {
      h.density[k] = static_cast<double>(counts[k]) / (static_cast<double>(in_range) * width);
    }
  }
  h.distance_poisson = binned_tv_distance(h, poisson_cdf);
  h.distance_wd = binned_tv_distance(h, wigner_dyson_cdf);
  if (spacings.size() < opt.min_count || in_range == 0) {
    h.verdict = Verdict::Inconclusive;
  } else if (h.distance_poisson < (1.0 - opt.margin) * h.distance_wd) {
    h.verdict = Verdict::PoissonLike;
  } else if (h.distance_wd < (1.0 - opt.margin) * h.distance_poisson) {
    h.verdict = Verdict::WignerDysonLike;
  } else {
    h.verdict = Verdict::Inconclusive;
  }
  return h;
}

inline NnsdScore score_nnsd(const SpacingEnsemble& e, const NnsdOptions& opt = {}) {
  return score_nnsd(e.spacings, opt);
}

struct NnsdResult {
  long kick = 0;
  SpacingEnsemble ensemble;
  NnsdScore score;
};

/// Per-kick hook of the cumulative sweep: (n, U(n)).
using UnitaryObserver = std::function<void(long, const DenseOperator&)>;

/// One sequential sweep U(n) = U_x(n) U(n-1); spectra at the requested kicks.
inline std::vector<NnsdResult> nnsd_at_kicks(const ChainParams& chain,
                                             const QuenchProtocol& protocol,
                                             const std::vector<long>& kicks,
                                             const NnsdOptions& opt = {},
                                             const UnitaryObserver& observe = {}) {
  validate_chain(chain);
  validate_protocol(protocol);
  if (kicks.empty()) throw ParameterError("kick list is empty");
  if (!std::is_sorted(kicks.begin(), kicks.end())) throw ParameterError("kicks must be sorted");
  if (kicks.front() < 1) throw ParameterError("kicks start at 1");
  const PalindromeProjector p = palindrome_projector(chain.n_sites);
  const auto full = static_cast<Eigen::Index>(hilbert_dim(chain.n_sites));
  DenseOperator u = DenseOperator::Identity(full, full);
  std::vector<NnsdResult> out;
  std::size_t next = 0;
  for (long n = 1; next < kicks.size(); ++n) {
    build_kick(chain, protocol, n).apply_left(u);
    if (observe) observe(n, u);
    while (next < kicks.size() && kicks[next] == n) {
      NnsdResult r;
      r.kick = n;
      r.ensemble = eigenphase_spacings(project_unitary(u, p), n);
      r.score = score_nnsd(r.ensemble, opt);
      out.push_back(std::move(r));
      ++next;
    }
  }
  return out;
}

}  // namespace quenchotoc
