#pragma once

// Pauli operators, site-reversal symmetry and in-place application of the
// single-site / nearest-neighbour gates that make up one kick.
//
// Indexing: basis state b has bit (N - l) holding the spin of site l, so site 1
// is the most significant bit. A "slot" below is one basis index; kernels can
// act on vectors (stride 1) or on whole column-major matrices from the right
// (stride = rows), where a slot is then an entire column.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "quenchotoc/types.hpp"

namespace quenchotoc {

enum class PauliAxis { X, Y, Z };

inline char axis_name(PauliAxis a) {
  switch (a) {
    case PauliAxis::X: return 'x';
    case PauliAxis::Y: return 'y';
    case PauliAxis::Z: return 'z';
  }
  return '?';
}

inline void require_site(int site, int n_sites) {
  if (n_sites < 1 || n_sites > 20) {
    throw ParameterError("chain length must be in [1, 20], got " + std::to_string(n_sites));
  }
  if (site < 1 || site > n_sites) {
    throw ParameterError("site " + std::to_string(site) + " outside 1.." +
                         std::to_string(n_sites));
  }
}

inline void require_even_chain(int n_sites) {
  if (n_sites < 2 || n_sites % 2 != 0) {
    throw ParameterError("N must be even, got " + std::to_string(n_sites));
  }
}

/// I ⊗ … ⊗ σ^axis ⊗ … ⊗ I with the Pauli matrix on `site`.
inline DenseOperator pauli_on_site(PauliAxis axis, int site, int n_sites) {
  require_site(site, n_sites);
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites));
  const auto mask = static_cast<Eigen::Index>(site_mask(site, n_sites));
  DenseOperator op = DenseOperator::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const bool down = (col & mask) != 0;
    switch (axis) {
      case PauliAxis::X: op(col ^ mask, col) = 1.0; break;
      case PauliAxis::Y: op(col ^ mask, col) = down ? Complex(0, -1) : Complex(0, 1); break;
      case PauliAxis::Z: op(col, col) = down ? -1.0 : 1.0; break;
    }
  }
  return op;
}

/// Maps the bit string (b1 … bN) to (bN … b1).
inline std::size_t reverse_sites(std::size_t index, int n_sites) {
  std::size_t out = 0;
  for (int k = 0; k < n_sites; ++k) {
    out = (out << 1) | ((index >> k) & 1U);
  }
  return out;
}

inline DenseOperator reflection_operator(int n_sites) {
  require_even_chain(n_sites);
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites));
  DenseOperator r = DenseOperator::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    r(static_cast<Eigen::Index>(reverse_sites(static_cast<std::size_t>(b), n_sites)), b) = 1.0;
  }
  return r;
}

/// max |[A, R]| computed through the permutation, without forming R.
inline double reflection_commutator_norm(const DenseOperator& a, int n_sites) {
  const auto dim = a.rows();
  if (dim != static_cast<Eigen::Index>(hilbert_dim(n_sites)) || a.cols() != dim) {
    throw ParameterError("operator does not act on a " + std::to_string(n_sites) + "-site chain");
  }
  std::vector<Eigen::Index> rev(static_cast<std::size_t>(dim));
  for (Eigen::Index b = 0; b < dim; ++b) {
    rev[b] = static_cast<Eigen::Index>(reverse_sites(static_cast<std::size_t>(b), n_sites));
  }
  double worst = 0.0;
  // (R A R)_{ij} = A_{r(i) r(j)}; [A, R] = 0  <=>  A = R A R.
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex* col = a.col(j).data();
    const Complex* mirror = a.col(rev[j]).data();
    for (Eigen::Index i = 0; i < dim; ++i) {
      worst = std::max(worst, std::norm(col[i] - mirror[rev[i]]));
    }
  }
  return std::sqrt(worst);
}

// Dense generators on an open chain; used for reference constructions.
inline DenseOperator ising_xx(int n_sites) {
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites));
  DenseOperator h = DenseOperator::Zero(dim, dim);
  for (int l = 1; l < n_sites; ++l) {
    const auto m = static_cast<Eigen::Index>(site_mask(l, n_sites) | site_mask(l + 1, n_sites));
    for (Eigen::Index c = 0; c < dim; ++c) h(c ^ m, c) += 1.0;
  }
  return h;
}

inline DenseOperator field_sum(PauliAxis axis, int n_sites) {
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites));
  DenseOperator h = DenseOperator::Zero(dim, dim);
  for (int l = 1; l <= n_sites; ++l) h += pauli_on_site(axis, l, n_sites);
  return h;
}

enum class GateKind { DiagonalZ, XBond, XField };

/// exp(-i·angle·P) with P = σ^z_site, σ^x_site σ^x_site+1, or σ^x_site.
struct GateLayer {
  GateKind kind = GateKind::XField;
  int site = 1;  // for XBond: the left site of the bond
  double angle = 0.0;
};

enum class Side { Left, RightConjugate };

namespace detail {

// a <- c a - i s b,  b <- c b - i s a   over `len` complex entries.
inline void rotate_runs(Complex* a, Complex* b, std::size_t len, double c, double s) {
  double* __restrict pa = reinterpret_cast<double*>(a);
  double* __restrict pb = reinterpret_cast<double*>(b);
  for (std::size_t k = 0; k < 2 * len; k += 2) {
    const double ar = pa[k], ai = pa[k + 1];
    const double br = pb[k], bi = pb[k + 1];
    pa[k] = c * ar + s * bi;
    pa[k + 1] = c * ai - s * br;
    pb[k] = c * br + s * ai;
    pb[k + 1] = c * bi - s * ar;
  }
}

inline void scale_run(Complex* a, std::size_t len, Complex phase) {
  auto* p = reinterpret_cast<double*>(a);
  const double pr = phase.real(), pi = phase.imag();
  for (std::size_t k = 0; k < 2 * len; k += 2) {
    const double r = p[k], i = p[k + 1];
    p[k] = r * pr - i * pi;
    p[k + 1] = r * pi + i * pr;
  }
}

}  // namespace detail

// The kernels below treat `data` as 2^N slots of `stride` contiguous entries.

inline void apply_xfield(Complex* data, int n_sites, int site, double angle,
                         std::size_t stride = 1) {
  const std::size_t dim = hilbert_dim(n_sites);
  const std::size_t m = site_mask(site, n_sites);
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t base = 0; base < dim; base += 2 * m) {
    detail::rotate_runs(data + base * stride, data + (base + m) * stride, m * stride, c, s);
  }
}

inline void apply_xbond(Complex* data, int n_sites, int bond, double angle,
                        std::size_t stride = 1) {
  const std::size_t dim = hilbert_dim(n_sites);
  const std::size_t hi = site_mask(bond, n_sites);
  const std::size_t lo = site_mask(bond + 1, n_sites);
  const double c = std::cos(angle), s = std::sin(angle);
  // Partner of slot k is k ^ (hi | lo): two contiguous run pairs per block.
  for (std::size_t base = 0; base < dim; base += 2 * hi) {
    Complex* a = data + base * stride;
    Complex* b = data + (base + hi) * stride;
    detail::rotate_runs(a, b + lo * stride, lo * stride, c, s);
    detail::rotate_runs(a + lo * stride, b, lo * stride, c, s);
  }
}

inline void apply_diagonal_z(Complex* data, int n_sites, int site, double angle,
                             std::size_t stride = 1) {
  const std::size_t dim = hilbert_dim(n_sites);
  const std::size_t m = site_mask(site, n_sites);
  const Complex up = std::polar(1.0, -angle);
  const Complex down = std::polar(1.0, angle);
  for (std::size_t base = 0; base < dim; base += 2 * m) {
    detail::scale_run(data + base * stride, m * stride, up);
    detail::scale_run(data + (base + m) * stride, m * stride, down);
  }
}

inline void validate_layer(const GateLayer& layer, int n_sites) {
  require_site(layer.site, n_sites);
  if (layer.kind == GateKind::XBond && layer.site >= n_sites) {
    throw ParameterError("bond index " + std::to_string(layer.site) +
                         " exceeds N-1 on an open chain");
  }
}

/// Applies the layer to a state vector of length 2^N.
inline void apply_layer_to_vector(std::span<Complex> v, const GateLayer& layer, int n_sites) {
  switch (layer.kind) {
    case GateKind::DiagonalZ: apply_diagonal_z(v.data(), n_sites, layer.site, layer.angle); break;
    case GateKind::XBond: apply_xbond(v.data(), n_sites, layer.site, layer.angle); break;
    case GateKind::XField: apply_xfield(v.data(), n_sites, layer.site, layer.angle); break;
  }
}

/// In place: op <- G op (Left) or op <- op G† (RightConjugate).
inline void apply_gate_layer_inplace(DenseOperator& op, const GateLayer& layer, Side side) {
  if (op.rows() != op.cols()) throw ParameterError("operator must be square");
  const int n = sites_of_dim(op.rows());
  validate_layer(layer, n);
  if (side == Side::Left) {
    for (Eigen::Index col = 0; col < op.cols(); ++col) {
      apply_layer_to_vector(std::span<Complex>(op.col(col).data(), op.rows()), layer, n);
    }
    return;
  }
  // Every generator is real symmetric, so op G† acts on the column index
  // exactly like G with the opposite angle.
  const auto stride = static_cast<std::size_t>(op.rows());
  switch (layer.kind) {
    case GateKind::DiagonalZ: apply_diagonal_z(op.data(), n, layer.site, -layer.angle, stride); break;
    case GateKind::XBond: apply_xbond(op.data(), n, layer.site, -layer.angle, stride); break;
    case GateKind::XField: apply_xfield(op.data(), n, layer.site, -layer.angle, stride); break;
  }
}

inline DenseOperator apply_gate_layer(DenseOperator op, const GateLayer& layer, Side side) {
  apply_gate_layer_inplace(op, layer, side);
  return op;
}

/// Unnormalised Walsh-Hadamard transform on the index bits set in `bits`
/// (H = [[1, 1], [1, -1]] on each selected bit), in place. bits = dim - 1 is the
/// full transform H^{⊗N}.
inline void walsh_hadamard(Complex* v, std::size_t dim, std::size_t bits) {
  double* p = reinterpret_cast<double*>(v);
  const std::size_t len = 2 * dim;
  bits &= dim - 1;
  std::size_t h = 1;
  if ((bits & 3U) == 3U) {
    for (std::size_t g = 0; g < len; g += 8) {
      double* q = p + g;
      for (int c = 0; c < 2; ++c) {
        const double x0 = q[c], x1 = q[2 + c], x2 = q[4 + c], x3 = q[6 + c];
        const double s0 = x0 + x1, s1 = x0 - x1, s2 = x2 + x3, s3 = x2 - x3;
        q[c] = s0 + s2;
        q[2 + c] = s1 + s3;
        q[4 + c] = s0 - s2;
        q[6 + c] = s1 - s3;
      }
    }
    h = 4;
  }
  // Adjacent selected bits are fused into one radix-4 sweep.
  while (h < dim) {
    if (!(bits & h)) {
      h *= 2;
      continue;
    }
    const std::size_t run = 2 * h;
    if ((bits & (2 * h)) && 4 * h <= dim) {
      for (std::size_t base = 0; base < len; base += 4 * run) {
        double* __restrict a = p + base;
        double* __restrict b = a + run;
        double* __restrict c = b + run;
        double* __restrict d = c + run;
        for (std::size_t k = 0; k < run; ++k) {
          const double x0 = a[k], x1 = b[k], x2 = c[k], x3 = d[k];
          const double s0 = x0 + x1, s1 = x0 - x1, s2 = x2 + x3, s3 = x2 - x3;
          a[k] = s0 + s2;
          b[k] = s1 + s3;
          c[k] = s0 - s2;
          d[k] = s1 - s3;
        }
      }
      h *= 4;
    } else {
      for (std::size_t base = 0; base < len; base += 2 * run) {
        double* __restrict a = p + base;
        double* __restrict b = a + run;
        for (std::size_t k = 0; k < run; ++k) {
          const double x = a[k], y = b[k];
          a[k] = x + y;
          b[k] = x - y;
        }
      }
      h *= 2;
    }
  }
}

inline void walsh_hadamard(Complex* v, std::size_t dim) { walsh_hadamard(v, dim, dim - 1); }

/// v[i] *= phase[i]
inline void multiply_elementwise(Complex* v, const Complex* phase, std::size_t dim) {
  double* __restrict p = reinterpret_cast<double*>(v);
  const double* __restrict q = reinterpret_cast<const double*>(phase);
  for (std::size_t i = 0; i < dim; ++i) {
    const double r = p[2 * i], im = p[2 * i + 1], a = q[2 * i], b = q[2 * i + 1];
    p[2 * i] = r * a - im * b;
    p[2 * i + 1] = r * b + im * a;
  }
}

/// A <- A†, blocked, for square column-major matrices.
inline void adjoint_in_place(DenseOperator& a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) throw ParameterError("adjoint_in_place needs a square matrix");
  constexpr Eigen::Index kBlock = 32;
  Complex* d = a.data();
  for (Eigen::Index jb = 0; jb < n; jb += kBlock) {
    const Eigen::Index je = std::min(n, jb + kBlock);
    for (Eigen::Index ib = 0; ib <= jb; ib += kBlock) {
      const Eigen::Index ie = std::min(n, ib + kBlock);
      for (Eigen::Index j = jb; j < je; ++j) {
        const Eigen::Index i_end = (ib == jb) ? j : ie;
        for (Eigen::Index i = ib; i < i_end; ++i) {
          Complex& upper = d[i + j * n];
          Complex& lower = d[j + i * n];
          const Complex tmp = upper;
          upper = std::conj(lower);
          lower = std::conj(tmp);
        }
        if (ib == jb) d[j + j * n] = std::conj(d[j + j * n]);
      }
    }
  }
}

}  // namespace quenchotoc
