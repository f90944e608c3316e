#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace quenchotoc {

using Complex = std::complex<double>;

/// Dense operator on the 2^N dimensional chain Hilbert space, column-major.
/// Basis ordering: computational z basis, site 1 is the most significant bit.
using DenseOperator = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Raised for inconsistent inputs (bad sites, odd N where even is needed, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical invariant is broken (norm drift, lost symmetry,
/// non-real traces, eigensolver failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a series does not support the requested analysis (window too
/// short, empty, non-normalised amplitudes).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846264338327950288;

inline std::size_t hilbert_dim(int n_sites) { return std::size_t{1} << n_sites; }

/// Bit mask of `site` (1-based) for an N-site chain; site 1 is the MSB.
inline std::size_t site_mask(int site, int n_sites) {
  return std::size_t{1} << (n_sites - site);
}

/// +1 for spin up (bit clear), -1 for spin down (bit set): the σ^z eigenvalue.
inline double z_eigenvalue(std::size_t basis_index, int site, int n_sites) {
  return (basis_index & site_mask(site, n_sites)) ? -1.0 : 1.0;
}

inline int sites_of_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) {
    throw ParameterError("operator dimension " + std::to_string(dim) +
                         " is not a power of two");
  }
  return n;
}

inline double max_norm(const DenseOperator& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// max |U U† - I|
inline double unitarity_defect(const DenseOperator& u) {
  DenseOperator p = u * u.adjoint();
  p.diagonal().array() -= 1.0;
  return max_norm(p);
}

/// max |A - A†|
inline double hermiticity_defect(const DenseOperator& a) {
  return max_norm(a - a.adjoint());
}

}  // namespace quenchotoc
