// Shared numeric types, tolerances and the error hierarchy.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace povmlab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A single subsystem label. Braced lists never deduce this, so they pick
/// the vector-of-labels overloads.
template <class S>
concept LabelLike = std::convertible_to<const S&, std::string>;

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double unitary = 1e-10;
inline constexpr double norm = 1e-12;
inline constexpr double trace = 1e-10;
inline constexpr double positivity = 1e-9;
inline constexpr double schmidt_rank = 1e-12;
inline constexpr double same_reduced_state = 1e-8;
inline constexpr double probability_sum = 1e-10;
inline constexpr double confusion_sum = 1e-12;
inline constexpr double ensemble_weights = 1e-12;
}  // namespace tol

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A subsystem label is missing, duplicated or otherwise malformed.
class LabelError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An operation's mathematical precondition does not hold for its input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDevice : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class NotMaximal : public Error {
 public:
  using Error::Error;
};

class CertaintyViolated : public Error {
 public:
  using Error::Error;
};

/// Largest entry modulus, the ‖·‖∞ used by every matrix tolerance check here.
inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const ComplexMatrix& m, double eps = tol::hermitian) {
  return m.rows() == m.cols() && hermiticity_error(m) <= eps;
}

inline double unitarity_error(const ComplexMatrix& u) {
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols()));
}

inline bool is_unitary(const ComplexMatrix& u, double eps = tol::unitary) {
  return u.rows() == u.cols() && unitarity_error(u) <= eps;
}

/// Eigenvalues (ascending) of the Hermitian part of m.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Multiplies v by a unit phase so its first entry with modulus above
/// `threshold` becomes real and positive.
inline void fix_phase(Eigen::Ref<ComplexVector> v, double threshold = 1e-12) {
  for (Index i = 0; i < v.size(); ++i) {
    const double r = std::abs(v[i]);
    if (r > threshold) {
      v *= std::conj(v[i]) / r;
      v[i] = Complex(r, 0.0);
      return;
    }
  }
}

/// Extends the orthonormal columns of `seed` to a full orthonormal basis of
/// C^dim. Missing vectors come from modified Gram-Schmidt over the canonical
/// basis vectors in index order; the seed columns are re-orthonormalised in
/// place first so that slightly non-orthogonal input still yields a unitary.
inline ComplexMatrix complete_basis(const ComplexMatrix& seed, Index dim) {
  ComplexMatrix basis(dim, dim);
  Index filled = 0;
  auto try_add = [&](ComplexVector v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < filled; ++j) {
        v -= basis.col(j).dot(v) * basis.col(j);
      }
    }
    const double n = v.norm();
    if (n < 1e-6) return false;
    basis.col(filled++) = v / n;
    return true;
  };
  for (Index j = 0; j < seed.cols() && filled < dim; ++j) {
    if (!try_add(seed.col(j))) {
      throw PreconditionError("complete_basis: seed vectors are linearly dependent");
    }
  }
  for (Index e = 0; e < dim && filled < dim; ++e) {
    try_add(ComplexVector::Unit(dim, e));
  }
  return basis;
}

}  // namespace povmlab
