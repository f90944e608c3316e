#pragma once

// Observable families and the two- and four-point correlators
//   C2(n) = Tr(W(n)² V²) / (d_A d_B),  C4(n) = Re Tr(W(n) V W(n) V) / (d_A d_B),
//   C(n)  = C2 - C4 = -Tr([W(n), V]²) / (2 d_A d_B),  d_A d_B = 2^N.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quenchotoc/core_algebra.hpp"
#include "quenchotoc/evolution.hpp"

namespace quenchotoc {

enum class ObservableFamily { BlockX, BlockZ, LocalPauliX, LocalPauliZ };

inline std::string family_name(ObservableFamily f) {
  switch (f) {
    case ObservableFamily::BlockX: return "block-x";
    case ObservableFamily::BlockZ: return "block-z";
    case ObservableFamily::LocalPauliX: return "local-x";
    case ObservableFamily::LocalPauliZ: return "local-z";
  }
  return "?";
}

inline bool is_block(ObservableFamily f) {
  return f == ObservableFamily::BlockX || f == ObservableFamily::BlockZ;
}

struct ObservableSpec {
  ObservableFamily family = ObservableFamily::BlockX;
  // Local families only; 0 means the default pair (1, N/2).
  int site_w = 0;
  int site_v = 0;
};

struct PauliTerm {
  double coef;
  PauliAxis axis;
  int site;
};

/// Real-weighted sum of single-site Pauli operators.
struct PauliSum {
  int n_sites = 0;
  std::vector<PauliTerm> terms;

  DenseOperator dense() const {
    const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites));
    DenseOperator op = DenseOperator::Zero(dim, dim);
    for (const auto& t : terms) {
      require_site(t.site, n_sites);
      const auto m = static_cast<Eigen::Index>(site_mask(t.site, n_sites));
      for (Eigen::Index c = 0; c < dim; ++c) {
        const bool down = (c & m) != 0;
        switch (t.axis) {
          case PauliAxis::X: op(c ^ m, c) += t.coef; break;
          case PauliAxis::Y: op(c ^ m, c) += Complex(0.0, down ? -t.coef : t.coef); break;
          case PauliAxis::Z: op(c, c) += down ? -t.coef : t.coef; break;
        }
      }
    }
    return op;
  }
};

inline std::pair<int, int> local_sites(const ObservableSpec& spec, int n_sites) {
  const int w = spec.site_w == 0 ? 1 : spec.site_w;
  const int v = spec.site_v == 0 ? n_sites / 2 : spec.site_v;
  return {w, v};
}

inline std::pair<PauliSum, PauliSum> observable_terms(const ObservableSpec& spec, int n_sites) {
  require_even_chain(n_sites);
  PauliSum w{n_sites, {}}, v{n_sites, {}};
  const PauliAxis axis =
      (spec.family == ObservableFamily::BlockX || spec.family == ObservableFamily::LocalPauliX)
          ? PauliAxis::X
          : PauliAxis::Z;
  if (is_block(spec.family)) {
    const double pref = 2.0 / n_sites;
    for (int l = 1; l <= n_sites / 2; ++l) w.terms.push_back({pref, axis, l});
    for (int l = n_sites / 2 + 1; l <= n_sites; ++l) v.terms.push_back({pref, axis, l});
  } else {
    const auto [sw, sv] = local_sites(spec, n_sites);
    require_site(sw, n_sites);
    require_site(sv, n_sites);
    if (sw == sv) throw ParameterError("local observables need two distinct sites");
    w.terms.push_back({1.0, axis, sw});
    v.terms.push_back({1.0, axis, sv});
  }
  return {std::move(w), std::move(v)};
}

/// (W0, V0) as dense operators.
inline std::pair<DenseOperator, DenseOperator> make_observables(const ObservableSpec& spec,
                                                                int n_sites) {
  auto [w, v] = observable_terms(spec, n_sites);
  return {w.dense(), v.dense()};
}

/// C(∞): 4/N² for the block families, 1 for single-site Pauli observables.
inline double saturation_constant(ObservableFamily family, int n_sites) {
  return is_block(family) ? 4.0 / (static_cast<double>(n_sites) * n_sites) : 1.0;
}

struct OtocPoint {
  double C2 = 0.0;
  double C4 = 0.0;
  double C = 0.0;
};

namespace detail {

inline constexpr double kImagTolerance = 1e-8;

// Sums over Y = V W:  ‖Y‖², ‖Y - Y†‖² = ‖[V, W]‖², and Tr(Y Y).
struct CorrelatorSums {
  double frob2 = 0.0;
  double commutator2 = 0.0;
  Complex trace_yy{0.0, 0.0};
};

// C is accumulated as ‖[V, W]‖² / (2d) rather than C2 - C4, so it is free of
// cancellation and exactly zero whenever V W is exactly Hermitian.
inline OtocPoint finish_point(const CorrelatorSums& s, double d) {
  if (std::abs(s.trace_yy.imag()) / d > kImagTolerance) {
    throw NumericalError("Tr(W V W V) has imaginary part " +
                         std::to_string(s.trace_yy.imag() / d) + "; W(n) lost Hermiticity");
  }
  OtocPoint p;
  p.C2 = s.frob2 / d;
  p.C = 0.5 * s.commutator2 / d;
  p.C4 = p.C2 - p.C;
  return p;
}

// dst[k] += f * src[k] over `len` complex entries, f = (fr, fi).
inline void axpy_run(double* __restrict dst, const double* __restrict src, std::size_t len,
                     double fr, double fi) {
  for (std::size_t k = 0; k < 2 * len; k += 2) {
    const double r = src[k], i = src[k + 1];
    dst[k] += fr * r - fi * i;
    dst[k + 1] += fr * i + fi * r;
  }
}

// Y = V W restricted to rows [i0, i0 + tile) and columns [j0, j0 + tile), column-major
// into out. Row i of σ_m W is row i ^ m of W, so each term is a handful of
// contiguous runs: one shifted run when m spans the tile, alternating runs of
// length m inside it.
inline void pauli_sum_tile(const DenseOperator& w, const PauliSum& v, Eigen::Index i0,
                           Eigen::Index j0, Eigen::Index tile, Complex* out) {
  const auto rows = static_cast<std::size_t>(tile);
  for (Eigen::Index j = j0; j < j0 + tile; ++j) {
    const auto* col = reinterpret_cast<const double*>(w.col(j).data());
    auto* dst = reinterpret_cast<double*>(out + (j - j0) * tile);
    std::fill(dst, dst + 2 * rows, 0.0);
    for (const auto& t : v.terms) {
      const auto m = static_cast<std::size_t>(site_mask(t.site, v.n_sites));
      const auto top = static_cast<std::size_t>(i0);
      if (m >= rows) {
        const bool down = (top & m) != 0;
        switch (t.axis) {
          case PauliAxis::X: axpy_run(dst, col + 2 * (top ^ m), rows, t.coef, 0.0); break;
          case PauliAxis::Y:
            axpy_run(dst, col + 2 * (top ^ m), rows, 0.0, down ? t.coef : -t.coef);
            break;
          case PauliAxis::Z: axpy_run(dst, col + 2 * top, rows, down ? -t.coef : t.coef, 0.0); break;
        }
        continue;
      }
      for (std::size_t base = 0; base < rows; base += 2 * m) {
        double* up = dst + 2 * base;
        double* dn = dst + 2 * (base + m);
        const double* src_up = col + 2 * (top + base);
        const double* src_dn = col + 2 * (top + base + m);
        switch (t.axis) {
          case PauliAxis::X:
            axpy_run(up, src_dn, m, t.coef, 0.0);
            axpy_run(dn, src_up, m, t.coef, 0.0);
            break;
          case PauliAxis::Y:
            axpy_run(up, src_dn, m, 0.0, -t.coef);
            axpy_run(dn, src_up, m, 0.0, t.coef);
            break;
          case PauliAxis::Z:
            axpy_run(up, src_up, m, t.coef, 0.0);
            axpy_run(dn, src_dn, m, -t.coef, 0.0);
            break;
        }
      }
    }
  }
}

// Accumulates the (I, J) / (J, I) tile pair; a holds Y[I, J], b holds Y[J, I].
inline void accumulate_tiles(const Complex* a, const Complex* b, Eigen::Index tile,
                             bool diagonal, CorrelatorSums& s) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  double frob = 0.0, comm = 0.0, tr_re = 0.0, tr_im = 0.0;
  for (Eigen::Index j = 0; j < tile; ++j) {
    for (Eigen::Index i = 0; i < tile; ++i) {
      const double yr = pa[2 * (i + j * tile)], yi = pa[2 * (i + j * tile) + 1];
      const double tr = pb[2 * (j + i * tile)], ti = pb[2 * (j + i * tile) + 1];
      frob += yr * yr + yi * yi;
      const double dr = yr - tr, di = yi + ti;
      comm += dr * dr + di * di;
      tr_re += yr * tr - yi * ti;
      tr_im += yr * ti + yi * tr;
    }
  }
  if (!diagonal) {
    for (Eigen::Index k = 0; k < 2 * tile * tile; ++k) frob += pb[k] * pb[k];
  }
  const double weight = diagonal ? 1.0 : 2.0;
  s.frob2 += frob;
  s.commutator2 += weight * comm;
  s.trace_yy += weight * Complex(tr_re, tr_im);
}

}  // namespace detail

/// Correlators for an evolved operator against a fixed Pauli-sum observable.
/// Works tile by tile so V·W(n) is never stored.
inline OtocPoint otoc_point(const DenseOperator& evolved, const PauliSum& fixed) {
  const Eigen::Index dim = evolved.rows();
  if (dim != static_cast<Eigen::Index>(hilbert_dim(fixed.n_sites)) || evolved.cols() != dim) {
    throw ParameterError("observable and evolved operator disagree on N");
  }
  const Eigen::Index tile = std::min<Eigen::Index>(64, dim);
  std::vector<Complex> a(static_cast<std::size_t>(tile * tile));
  std::vector<Complex> b(static_cast<std::size_t>(tile * tile));
  detail::CorrelatorSums sums;
  for (Eigen::Index jb = 0; jb < dim; jb += tile) {
    for (Eigen::Index ib = 0; ib <= jb; ib += tile) {
      detail::pauli_sum_tile(evolved, fixed, ib, jb, tile, a.data());
      if (ib == jb) {
        detail::accumulate_tiles(a.data(), a.data(), tile, true, sums);
      } else {
        detail::pauli_sum_tile(evolved, fixed, jb, ib, tile, b.data());
        detail::accumulate_tiles(a.data(), b.data(), tile, false, sums);
      }
    }
  }
  return detail::finish_point(sums, static_cast<double>(dim));
}

namespace detail {

// Sums over the tile pair at rows I = [ib, ib + tile), columns J = [jb, jb + tile)
// and its mirror; bt holds W[J, I] transposed so both reads run along i.
// Each (i, j) term also stands for its (j, i) partner.
inline void accumulate_diagonal_pair(const Complex* w, Eigen::Index dim, const double* v,
                                     Eigen::Index ib, Eigen::Index jb, Eigen::Index tile,
                                     const Complex* bt, CorrelatorSums& s) {
  double frob = 0.0, comm = 0.0, tr_re = 0.0, tr_im = 0.0;
  for (Eigen::Index jl = 0; jl < tile; ++jl) {
    const double vj = v[jb + jl];
    const auto* a = reinterpret_cast<const double*>(w + ib + (jb + jl) * dim);
    const auto* b = reinterpret_cast<const double*>(bt + jl * tile);
    const double* vi_run = v + ib;
    for (Eigen::Index il = 0; il < tile; ++il) {
      const double vi = vi_run[il];
      const double ar = a[2 * il], ai = a[2 * il + 1];
      const double br = b[2 * il], bi = b[2 * il + 1];
      frob += vi * vi * (ar * ar + ai * ai) + vj * vj * (br * br + bi * bi);
      // Written through differences so the term stays exactly zero for
      // W_ij = conj(W_ji), v_i = v_j even under fused multiply-add.
      const double dv = vi - vj;
      const double dr = vi * (ar - br) + dv * br;
      const double di = vi * (ai + bi) - dv * bi;
      comm += dr * dr + di * di;
      const double vv = vi * vj;
      tr_re += vv * (ar * br - ai * bi);
      tr_im += vv * (ar * bi + ai * br);
    }
  }
  s.frob2 += frob;
  s.commutator2 += 2.0 * comm;
  s.trace_yy += 2.0 * Complex(tr_re, tr_im);
}

inline void accumulate_diagonal_block(const Complex* w, Eigen::Index dim, const double* v,
                                      Eigen::Index b0, Eigen::Index tile, CorrelatorSums& s) {
  double frob = 0.0, comm = 0.0, tr_re = 0.0, tr_im = 0.0;
  for (Eigen::Index j = b0; j < b0 + tile; ++j) {
    for (Eigen::Index i = b0; i < b0 + tile; ++i) {
      const Complex y = v[i] * w[i + j * dim];
      const Complex yt = v[j] * w[j + i * dim];
      frob += std::norm(y);
      const double dv = v[i] - v[j];
      const Complex a = w[i + j * dim], b = w[j + i * dim];
      const double dr = v[i] * (a.real() - b.real()) + dv * b.real();
      const double di = v[i] * (a.imag() + b.imag()) - dv * b.imag();
      comm += dr * dr + di * di;
      tr_re += (y * yt).real();
      tr_im += (y * yt).imag();
    }
  }
  s.frob2 += frob;
  s.commutator2 += comm;
  s.trace_yy += Complex(tr_re, tr_im);
}

}  // namespace detail

/// Correlators against a fixed observable that is diagonal with entries `diag`:
/// Y_ij = v_i W_ij, so no product is formed.
inline OtocPoint otoc_point_diagonal(const DenseOperator& evolved, const RealVector& diag) {
  const Eigen::Index dim = evolved.rows();
  if (diag.size() != dim || evolved.cols() != dim) {
    throw ParameterError("observable and evolved operator disagree on N");
  }
  const Eigen::Index tile = std::min<Eigen::Index>(64, dim);
  std::vector<Complex> bt(static_cast<std::size_t>(tile * tile));
  const Complex* w = evolved.data();
  detail::CorrelatorSums sums;
  for (Eigen::Index jb = 0; jb < dim; jb += tile) {
    detail::accumulate_diagonal_block(w, dim, diag.data(), jb, tile, sums);
    for (Eigen::Index ib = 0; ib < jb; ib += tile) {
      for (Eigen::Index il = 0; il < tile; ++il) {
        const Complex* src = w + jb + (ib + il) * dim;
        for (Eigen::Index jl = 0; jl < tile; ++jl) bt[il + jl * tile] = src[jl];
      }
      detail::accumulate_diagonal_pair(w, dim, diag.data(), ib, jb, tile, bt.data(), sums);
    }
  }
  return detail::finish_point(sums, static_cast<double>(dim));
}

/// For a sum of σ^x / σ^z terms with no site carrying both: the Hadamard frame
/// (index bits of the σ^x sites) in which the sum is diagonal, and its diagonal.
inline std::optional<std::pair<std::size_t, RealVector>> diagonal_frame(const PauliSum& sum) {
  std::size_t x_bits = 0, z_bits = 0;
  for (const auto& t : sum.terms) {
    require_site(t.site, sum.n_sites);
    const std::size_t m = site_mask(t.site, sum.n_sites);
    if (t.axis == PauliAxis::Y) return std::nullopt;
    (t.axis == PauliAxis::X ? x_bits : z_bits) |= m;
  }
  if (x_bits & z_bits) return std::nullopt;
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(sum.n_sites));
  RealVector diag = RealVector::Zero(dim);
  for (const auto& t : sum.terms) {
    const std::size_t m = site_mask(t.site, sum.n_sites);
    for (Eigen::Index i = 0; i < dim; ++i) {
      diag[i] += (static_cast<std::size_t>(i) & m) ? -t.coef : t.coef;
    }
  }
  return std::make_pair(x_bits, std::move(diag));
}

/// Dense-V variant: Y = V W by a matrix product.
inline OtocPoint otoc_point(const DenseOperator& evolved, const DenseOperator& fixed) {
  if (evolved.rows() != fixed.rows()) throw ParameterError("dimension mismatch");
  const DenseOperator y = fixed * evolved;
  detail::CorrelatorSums sums;
  sums.frob2 = y.squaredNorm();
  sums.commutator2 = (y - y.adjoint()).squaredNorm();
  sums.trace_yy = (y.array() * y.transpose().array()).sum();
  return detail::finish_point(sums, static_cast<double>(y.rows()));
}

struct OtocSeries {
  ObservableSpec spec;
  int n_sites = 0;
  double C_inf = 1.0;
  std::vector<long> n;
  std::vector<double> C2, C4, C;

  std::size_t size() const { return n.size(); }
  double normalized(std::size_t k) const { return C[k] / C_inf; }
  std::vector<double> normalized() const {
    std::vector<double> out(C.size());
    for (std::size_t k = 0; k < C.size(); ++k) out[k] = C[k] / C_inf;
    return out;
  }
  void push(long kick, const OtocPoint& p) {
    n.push_back(kick);
    C2.push_back(p.C2);
    C4.push_back(p.C4);
    C.push_back(p.C);
  }
  void truncate(std::size_t len) {
    len = std::min(len, n.size());
    n.resize(len);
    C2.resize(len);
    C4.resize(len);
    C.resize(len);
  }
};

/// Evolves the observable pair for n_max kicks and records the correlators at
/// n = 0 … n_max. With U†WU the cyclic trace lets V be evolved forward instead.
template <typename Callback>
OtocSeries run_otoc(const ChainParams& chain, const QuenchProtocol& protocol,
                    const ObservableSpec& spec, long n_max,
                    HeisenbergConvention convention, Callback&& on_kick) {
  if (n_max < 1) throw ParameterError("n_max must be >= 1");
  auto [w, v] = observable_terms(spec, chain.n_sites);
  const bool evolve_w = convention == HeisenbergConvention::UWUdag;
  const PauliSum& moving = evolve_w ? w : v;
  const PauliSum& fixed = evolve_w ? v : w;

  OtocSeries series;
  series.spec = spec;
  series.n_sites = chain.n_sites;
  series.C_inf = saturation_constant(spec.family, chain.n_sites);

  // In the frame where the fixed observable is diagonal the correlators need a
  // single pass over the evolved operator; the kick costs the same there.
  const auto frame = diagonal_frame(fixed);
  EvolutionState state = start_evolution(chain, protocol, moving.dense(), false,
                                         frame ? frame->first : 0);
  const auto measure = [&] {
    return frame ? otoc_point_diagonal(state.evolved, frame->second)
                 : otoc_point(state.evolved, fixed);
  };
  series.push(0, measure());
  for (long k = 1; k <= n_max; ++k) {
    advance(state);
    series.push(k, measure());
    on_kick(k);
  }
  return series;
}

inline OtocSeries run_otoc(const ChainParams& chain, const QuenchProtocol& protocol,
                           const ObservableSpec& spec, long n_max,
                           HeisenbergConvention convention = HeisenbergConvention::UWUdag) {
  return run_otoc(chain, protocol, spec, n_max, convention, [](long) {});
}

}  // namespace quenchotoc
