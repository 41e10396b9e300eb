// Pure states and density matrices over labelled composite spaces.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/space.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace povmlab {

class PureState {
 public:
  /// Throws if the amplitude count does not match the shape or the norm is
  /// off by more than tol::norm.
  PureState(SpaceShape shape, ComplexVector amplitudes)
      : shape_(std::move(shape)), amps_(std::move(amplitudes)) {
    if (amps_.size() != shape_.total_dim()) {
      throw DimensionMismatch("amplitude count " + std::to_string(amps_.size()) +
                              " does not match space dimension " + std::to_string(shape_.total_dim()));
    }
    const double n = amps_.norm();
    if (std::abs(n - 1.0) > tol::norm) {
      std::ostringstream os;
      os << "state vector is not normalised (norm " << n << ")";
      throw PreconditionError(os.str());
    }
  }

  static PureState normalized(SpaceShape shape, ComplexVector amplitudes) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw PreconditionError("cannot normalise the zero vector");
    return PureState(std::move(shape), amplitudes / n);
  }

  static PureState basis(SpaceShape shape, Index index) {
    ComplexVector v = ComplexVector::Zero(shape.total_dim());
    v[index] = 1.0;
    return PureState(std::move(shape), std::move(v));
  }

  const SpaceShape& shape() const { return shape_; }
  const ComplexVector& amplitudes() const { return amps_; }
  Index dim() const { return amps_.size(); }

 private:
  SpaceShape shape_;
  ComplexVector amps_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity at the module tolerances.
  DensityMatrix(SpaceShape shape, ComplexMatrix matrix) : shape_(std::move(shape)), m_(std::move(matrix)) {
    const Index d = shape_.total_dim();
    if (m_.rows() != d || m_.cols() != d) {
      throw DimensionMismatch("density matrix size does not match space dimension " + std::to_string(d));
    }
    if (!is_hermitian(m_)) throw PreconditionError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - Complex(1.0)) > tol::trace) {
      throw PreconditionError("density matrix trace differs from 1");
    }
    if (hermitian_eigenvalues(m_).minCoeff() < -tol::positivity) {
      throw PreconditionError("density matrix has a negative eigenvalue");
    }
  }

  static DensityMatrix from_pure(const PureState& s) {
    return DensityMatrix(s.shape(), s.amplitudes() * s.amplitudes().adjoint());
  }

  const SpaceShape& shape() const { return shape_; }
  const ComplexMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

  double purity() const { return (m_ * m_).trace().real(); }

 private:
  SpaceShape shape_;
  ComplexMatrix m_;
};

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline PureState tensor(const PureState& a, const PureState& b) {
  SpaceShape shape = a.shape().concat(b.shape());
  return PureState::normalized(std::move(shape), kron(a.amplitudes(), b.amplitudes()));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  SpaceShape shape = a.shape().concat(b.shape());
  return DensityMatrix(std::move(shape), kron(a.matrix(), b.matrix()));
}

/// Reorders the tensor factors of a state; `order` names every label once.
inline PureState permute(const PureState& s, const std::vector<std::string>& order) {
  const auto src = permutation_map(s.shape(), order);
  ComplexVector v(s.dim());
  for (Index i = 0; i < s.dim(); ++i) v[i] = s.amplitudes()[src[static_cast<std::size_t>(i)]];
  return PureState(s.shape().select(order), std::move(v));
}

/// Amplitudes reshaped to a (dim(rows) x dim(rest)) matrix, `rows` taken in
/// the order given and the remaining labels in shape order.
inline ComplexMatrix amplitude_matrix(const PureState& s, const std::vector<std::string>& rows) {
  std::vector<std::string> order = rows;
  const auto rest = s.shape().complement(rows);
  order.insert(order.end(), rest.begin(), rest.end());
  const auto src = permutation_map(s.shape(), order);
  Index dr = 1;
  for (const auto& l : rows) dr *= s.shape().dim_of(l);
  const Index dc = s.dim() / dr;
  ComplexMatrix m(dr, dc);
  for (Index i = 0; i < dr; ++i) {
    for (Index j = 0; j < dc; ++j) m(i, j) = s.amplitudes()[src[static_cast<std::size_t>(i * dc + j)]];
  }
  return m;
}

/// Partial trace over every subsystem not in `keep`. The result's factors
/// follow the order of `keep`.
inline DensityMatrix reduced_density(const PureState& s, const std::vector<std::string>& keep) {
  const ComplexMatrix m = amplitude_matrix(s, keep);
  ComplexMatrix rho = m * m.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  return DensityMatrix(s.shape().select(keep), std::move(rho));
}

inline DensityMatrix reduced_density(const DensityMatrix& r, const std::vector<std::string>& keep) {
  std::vector<std::string> order = keep;
  const auto rest = r.shape().complement(keep);
  order.insert(order.end(), rest.begin(), rest.end());
  const auto src = permutation_map(r.shape(), order);
  SpaceShape kept = r.shape().select(keep);
  const Index dk = kept.total_dim();
  const Index dr = r.dim() / dk;
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Index i = 0; i < dk; ++i) {
    for (Index j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (Index e = 0; e < dr; ++e) {
        acc += r.matrix()(src[static_cast<std::size_t>(i * dr + e)], src[static_cast<std::size_t>(j * dr + e)]);
      }
      out(i, j) = acc;
    }
  }
  return DensityMatrix(std::move(kept), std::move(out));
}

template <LabelLike S>
inline DensityMatrix reduced_density(const PureState& s, const S& keep) {
  return reduced_density(s, std::vector<std::string>{std::string(keep)});
}

/// Applies `op` to the group of subsystems `labels` (in that order, op's
/// dimension is the product of theirs). Factor order of the result is
/// unchanged.
inline PureState apply(const PureState& s, const std::vector<std::string>& labels, const ComplexMatrix& op) {
  const ComplexMatrix m = amplitude_matrix(s, labels);
  if (op.rows() != m.rows() || op.cols() != m.rows()) {
    throw DimensionMismatch("operator dimension does not match the addressed subsystems");
  }
  const ComplexMatrix out = op * m;
  std::vector<std::string> order = labels;
  const auto rest = s.shape().complement(labels);
  order.insert(order.end(), rest.begin(), rest.end());
  const auto src = permutation_map(s.shape(), order);
  ComplexVector v(s.dim());
  const Index dc = m.cols();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < dc; ++j) v[src[static_cast<std::size_t>(i * dc + j)]] = out(i, j);
  }
  return PureState::normalized(s.shape(), std::move(v));
}

/// |⟨a|b⟩|, the phase-insensitive comparison used for all state equality.
inline double fidelity(const PureState& a, const PureState& b) {
  if (a.shape() != b.shape()) throw DimensionMismatch("fidelity: states live on different spaces");
  return std::abs(a.amplitudes().dot(b.amplitudes()));
}

/// Canonical purification Σ_i √w_i |v_i⟩|i⟩ of rho on rho's space plus an
/// environment `env_label` of dimension dim(rho).
inline PureState purify(const DensityMatrix& rho, const std::string& env_label) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho.matrix() + rho.matrix().adjoint()));
  const Index d = rho.dim();
  ComplexVector v = ComplexVector::Zero(d * d);
  for (Index i = 0; i < d; ++i) {
    const double w = std::max(es.eigenvalues()[i], 0.0);
    for (Index a = 0; a < d; ++a) v[a * d + i] = std::sqrt(w) * es.eigenvectors()(a, i);
  }
  return PureState::normalized(rho.shape().concat(SpaceShape{{env_label, d}}), std::move(v));
}

}  // namespace povmlab
