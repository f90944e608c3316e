#pragma once

// Floquet kicks as ordered gate layers, cumulative time-ordered products and
// Heisenberg evolution of observables.

#include <bit>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quenchotoc/core_algebra.hpp"
#include "quenchotoc/schedules.hpp"

namespace quenchotoc {

struct ChainParams {
  int n_sites = 12;
  double J = 1.0;
  double tau = kPi / 4.0;
};

inline void validate_chain(const ChainParams& c) {
  if (c.n_sites < 1 || c.n_sites > 14) {
    throw ParameterError("N must be in [1, 14], got " + std::to_string(c.n_sites));
  }
  if (!(c.tau > 0.0)) throw ParameterError("kick period tau must be positive");
  if (!std::isfinite(c.J)) throw ParameterError("J must be finite");
}

/// W(n) = U W U† (main text) or W(n) = U† W U (appendix form).
enum class HeisenbergConvention { UWUdag, UdagWU };

/// One kick U(n) = exp(-iθ_J H_xx - iθ_x H_x) · exp(-iθ_z H_z); layers are listed
/// in the order they act on a state (the z layers first).
///
/// Two equivalent routes apply it: `apply_layered` runs the gate layers one by
/// one; `apply` uses that every x-type factor is diagonal in the x basis, so the
/// whole exp(-iθ_J H_xx - iθ_x H_x) becomes H^{⊗N} · diag · H^{⊗N} / 2^N.
class FloquetStep {
 public:
  FloquetStep(int n_sites, long kick, KickFields fields)
      : n_sites_(n_sites), kick_(kick), fields_(fields) {
    layers_.reserve(static_cast<std::size_t>(3 * n_sites));
    for (int l = 1; l <= n_sites; ++l) layers_.push_back({GateKind::DiagonalZ, l, fields.theta_z});
    for (int l = 1; l < n_sites; ++l) layers_.push_back({GateKind::XBond, l, fields.theta_J});
    for (int l = 1; l <= n_sites; ++l) layers_.push_back({GateKind::XField, l, fields.theta_x});

    const std::size_t dim = hilbert_dim(n_sites);
    z_phase_.resize(dim);
    x_phase_.resize(dim);
    const double scale = 1.0 / static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      double z_sum = 0.0, field = 0.0, bonds = 0.0;
      for (int l = 1; l <= n_sites; ++l) {
        const double s = z_eigenvalue(i, l, n_sites);
        z_sum += s;
        field += s;
        if (l < n_sites) bonds += s * z_eigenvalue(i, l + 1, n_sites);
      }
      z_phase_[i] = std::polar(1.0, -fields.theta_z * z_sum);
      x_phase_[i] = std::polar(scale, -(fields.theta_J * bonds + fields.theta_x * field));
    }
  }

  int n_sites() const { return n_sites_; }
  long kick() const { return kick_; }
  const KickFields& fields() const { return fields_; }
  const std::vector<GateLayer>& layers() const { return layers_; }

  /// v <- U v.
  void apply(std::span<Complex> v) const { apply_in_frame(v, 0); }

  /// v <- G U G v, with G the normalised Hadamard on the index bits `frame`.
  /// H^{⊗N} = H_frame H_rest, so the outer factors collapse to partial transforms
  /// and the cost equals that of U itself.
  void apply_in_frame(std::span<Complex> v, std::size_t frame) const {
    const std::size_t dim = hilbert_dim(n_sites_);
    if (v.size() != dim) throw ParameterError("state length does not match the chain");
    frame &= dim - 1;
    if (frame != 0) walsh_hadamard(v.data(), dim, frame);
    multiply_elementwise(v.data(), z_phase_.data(), dim);
    walsh_hadamard(v.data(), dim);
    multiply_elementwise(v.data(), x_phase_.data(), dim);
    walsh_hadamard(v.data(), dim, (dim - 1) & ~frame);
  }

  /// v <- U v through the individual gate layers.
  void apply_layered(std::span<Complex> v) const {
    for (const auto& layer : layers_) apply_layer_to_vector(v, layer, n_sites_);
  }

  /// op <- U op, column by column.
  void apply_left(DenseOperator& op, std::size_t frame = 0) const {
    check_dim(op);
    for (Eigen::Index c = 0; c < op.cols(); ++c) {
      apply_in_frame(std::span<Complex>(op.col(c).data(), static_cast<std::size_t>(op.rows())),
                     frame);
    }
  }

  /// op <- op U†, layer by layer on the column index.
  void apply_right_dagger(DenseOperator& op) const {
    check_dim(op);
    for (const auto& layer : layers_) apply_gate_layer_inplace(op, layer, Side::RightConjugate);
  }

  /// op <- U op U† for Hermitian op: (U op)† = op U† lets both sides reuse the
  /// column kernel, with one in-place adjoint in between.
  void conjugate_hermitian(DenseOperator& op, std::size_t frame = 0) const {
    apply_left(op, frame);
    adjoint_in_place(op);
    apply_left(op, frame);
  }

  /// op <- U op U† for arbitrary op, as (U (U op)†)†.
  void conjugate(DenseOperator& op, std::size_t frame = 0) const {
    conjugate_hermitian(op, frame);
    adjoint_in_place(op);
  }

  /// Dense U, built by applying the layers one at a time to the identity.
  DenseOperator dense() const {
    const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites_));
    DenseOperator u = DenseOperator::Identity(dim, dim);
    for (const auto& layer : layers_) apply_gate_layer_inplace(u, layer, Side::Left);
    return u;
  }

 private:
  void check_dim(const DenseOperator& op) const {
    const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites_));
    if (op.rows() != dim) {
      throw ParameterError("operator dimension " + std::to_string(op.rows()) +
                           " does not match a " + std::to_string(n_sites_) + "-site chain");
    }
  }

  int n_sites_;
  long kick_;
  KickFields fields_;
  std::vector<GateLayer> layers_;
  std::vector<Complex> z_phase_;
  std::vector<Complex> x_phase_;
};

inline FloquetStep build_kick(const ChainParams& chain, const QuenchProtocol& protocol, long n) {
  validate_chain(chain);
  if (n < 1) throw ParameterError("kicks are numbered from 1");
  return FloquetStep(chain.n_sites, n, fields_at_kick(protocol, chain.J, chain.tau, n));
}

/// U(n) = U_x(n) ⋯ U_x(1), kick 1 rightmost; U(0) = I.
inline DenseOperator cumulative_unitary(const ChainParams& chain, const QuenchProtocol& protocol,
                                        long n) {
  validate_chain(chain);
  if (n < 0) throw ParameterError("kick count must be >= 0");
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(chain.n_sites));
  DenseOperator u = DenseOperator::Identity(dim, dim);
  for (long k = 1; k <= n; ++k) build_kick(chain, protocol, k).apply_left(u);
  return u;
}

/// op <- G op G with G the normalised Hadamard on the index bits `frame`;
/// G is real, symmetric and its own inverse.
inline void hadamard_frame_change(DenseOperator& op, std::size_t frame) {
  const auto dim = static_cast<std::size_t>(op.rows());
  frame &= dim - 1;
  if (frame == 0) return;
  const auto column_pass = [&] {
    for (Eigen::Index c = 0; c < op.cols(); ++c) walsh_hadamard(op.col(c).data(), dim, frame);
  };
  column_pass();
  adjoint_in_place(op);
  column_pass();
  adjoint_in_place(op);
  op /= static_cast<double>(std::size_t{1} << std::popcount(frame));
}

/// Heisenberg-evolved operator after n kicks plus, optionally, the cumulative
/// unitary. The evolved operator is always advanced as X <- U_x(n+1) X U_x(n+1)†.
/// It is stored as G X G in a Hadamard frame on the index bits `frame` (0 for
/// the computational basis); `lab_operator` undoes the change.
struct EvolutionState {
  ChainParams chain;
  QuenchProtocol protocol;
  long n = 0;
  DenseOperator evolved;
  std::optional<DenseOperator> cumulative;
  double reference_norm = 0.0;
  bool hermitian = true;
  std::size_t frame = 0;

  static constexpr long kDriftCheckInterval = 50;
  static constexpr double kDriftTolerance = 1e-8;
};

inline EvolutionState start_evolution(const ChainParams& chain, const QuenchProtocol& protocol,
                                      DenseOperator initial, bool track_unitary = false,
                                      std::size_t frame = 0) {
  validate_chain(chain);
  validate_protocol(protocol);
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(chain.n_sites));
  if (initial.rows() != dim || initial.cols() != dim) {
    throw ParameterError("initial operator has the wrong dimension");
  }
  frame &= static_cast<std::size_t>(dim - 1);
  EvolutionState s{chain, protocol, 0, std::move(initial), std::nullopt, 0.0, true, frame};
  s.reference_norm = s.evolved.norm();
  s.hermitian = hermiticity_defect(s.evolved) <= 1e-12 * std::max(1.0, max_norm(s.evolved));
  hadamard_frame_change(s.evolved, frame);
  if (track_unitary) s.cumulative = DenseOperator::Identity(dim, dim);
  return s;
}

inline DenseOperator lab_operator(const EvolutionState& s) {
  DenseOperator op = s.evolved;
  hadamard_frame_change(op, s.frame);
  return op;
}

inline void check_norm_drift(const EvolutionState& s) {
  const double norm = s.evolved.norm();
  const double scale = std::max(s.reference_norm, 1e-300);
  if (std::abs(norm - s.reference_norm) > EvolutionState::kDriftTolerance * scale) {
    throw NumericalError("Frobenius norm drifted from " + std::to_string(s.reference_norm) +
                         " to " + std::to_string(norm) + " at kick " + std::to_string(s.n));
  }
}

/// One kick forward.
inline void advance(EvolutionState& s) {
  const FloquetStep step = build_kick(s.chain, s.protocol, s.n + 1);
  if (s.hermitian) {
    step.conjugate_hermitian(s.evolved, s.frame);
  } else {
    step.conjugate(s.evolved, s.frame);
  }
  if (s.cumulative) step.apply_left(*s.cumulative);
  ++s.n;
  if (s.n % EvolutionState::kDriftCheckInterval == 0) check_norm_drift(s);
}

}  // namespace quenchotoc
