#pragma once

// Field amplitudes of the three quench protocols, reduced to the per-kick
// rotation angles that enter the Floquet map.

#include <cmath>
#include <string>

#include "quenchotoc/types.hpp"

namespace quenchotoc {

enum class ProtocolTag { Constant, Linear, Periodic };

inline std::string protocol_name(ProtocolTag t) {
  switch (t) {
    case ProtocolTag::Constant: return "constant";
    case ProtocolTag::Linear: return "linear";
    case ProtocolTag::Periodic: return "periodic";
  }
  return "?";
}

struct QuenchProtocol {
  ProtocolTag tag = ProtocolTag::Linear;
  double hx0 = 0.0;    // longitudinal amplitude
  double hz0 = 1.0;    // transverse amplitude
  double gamma = 0.0;  // linear slope of h_z(t)
  double alpha = 0.0;  // angular frequency, periodic only
  double t_max = 0.0;  // evolution duration, periodic only

  static QuenchProtocol constant(double hx0, double hz0) {
    return {ProtocolTag::Constant, hx0, hz0, 0.0, 0.0, 0.0};
  }
  static QuenchProtocol linear(double hx0, double hz0, double gamma) {
    return {ProtocolTag::Linear, hx0, hz0, gamma, 0.0, 0.0};
  }
  /// h_x = hx0 sin(αt), h_z = hz0 cos(αt) with α = π / (2 t_max).
  static QuenchProtocol periodic(double hx0, double hz0, double t_max = 16.0 * kPi) {
    return {ProtocolTag::Periodic, hx0, hz0, 0.0, kPi / (2.0 * t_max), t_max};
  }
};

/// Rotation angles of kick n: exp(-i θ_J Σσ^xσ^x - i θ_x Σσ^x) · exp(-i θ_z Σσ^z).
struct KickFields {
  double theta_z = 0.0;
  double theta_x = 0.0;
  double theta_J = 0.0;

  bool operator==(const KickFields&) const = default;
};

inline void validate_protocol(const QuenchProtocol& p) {
  if (!std::isfinite(p.hx0) || !std::isfinite(p.hz0) || !std::isfinite(p.gamma)) {
    throw ParameterError("field amplitudes must be finite");
  }
  if (p.tag == ProtocolTag::Constant && p.gamma != 0.0) {
    throw ParameterError("constant protocol has no slope");
  }
  if (p.tag == ProtocolTag::Linear && p.gamma < 0.0) {
    throw ParameterError("linear slope Gamma must be >= 0");
  }
  if (p.tag == ProtocolTag::Periodic) {
    if (!(p.alpha > 0.0)) throw ParameterError("periodic protocol needs alpha > 0");
    if (!(p.t_max > 0.0)) throw ParameterError("periodic protocol needs t_max > 0");
  }
}

/// Kick n acts at t = nτ; the longitudinal weight of the periodic protocol is the
/// integral of h_x over [nτ, (n+1)τ]. n = 0 is accepted as a boundary evaluation.
inline KickFields fields_at_kick(const QuenchProtocol& p, double J, double tau, long n) {
  if (!(tau > 0.0)) throw ParameterError("kick period tau must be positive");
  if (n < 0) throw ParameterError("kick index must be >= 0");
  validate_protocol(p);
  const double t = static_cast<double>(n) * tau;
  KickFields f;
  f.theta_J = tau * J;
  switch (p.tag) {
    case ProtocolTag::Constant:
      f.theta_z = tau * p.hz0;
      f.theta_x = tau * p.hx0;
      break;
    case ProtocolTag::Linear:
      f.theta_z = tau * (p.hz0 + p.gamma * t);
      f.theta_x = tau * p.hx0;
      break;
    case ProtocolTag::Periodic:
      f.theta_z = tau * p.hz0 * std::cos(p.alpha * t);
      f.theta_x = (p.hx0 / p.alpha) * (std::cos(p.alpha * t) - std::cos(p.alpha * (t + tau)));
      break;
  }
  return f;
}

}  // namespace quenchotoc
