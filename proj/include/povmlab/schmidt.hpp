// Schmidt decomposition and the environment unitary that maps one
// purification of a reduced state onto another.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/state.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace povmlab {

/// Σ_n c_n |φ_n⟩|χ_n⟩ with c_n descending. Columns of `left` are the |φ_n⟩
/// (dim A), columns of `right` the |χ_n⟩ (dim B); there are min(dA, dB)
/// terms. For zero coefficients the right vectors are an arbitrary
/// deterministic orthonormal completion.
struct SchmidtForm {
  RealVector coefficients;
  ComplexMatrix left;
  ComplexMatrix right;
  SpaceShape left_shape;
  SpaceShape right_shape;

  Index rank(double threshold = tol::schmidt_rank) const {
    return static_cast<Index>((coefficients.array() > threshold).count());
  }

  /// Σ_n c_n φ_n ⊗ χ_n on left_shape ⊗ right_shape.
  ComplexVector recombine() const {
    const Index da = left.rows();
    const Index db = right.rows();
    ComplexVector v = ComplexVector::Zero(da * db);
    for (Index n = 0; n < coefficients.size(); ++n) {
      for (Index a = 0; a < da; ++a) v.segment(a * db, db) += coefficients[n] * left(a, n) * right.col(n);
    }
    return v;
  }
};

namespace detail {

// Eigenbasis of ρ_A = M M†, descending eigenvalue order, phase-fixed.
inline ComplexMatrix left_schmidt_basis(const ComplexMatrix& m) {
  ComplexMatrix rho = m * m.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  const Index d = rho.rows();
  ComplexMatrix phi(d, d);
  for (Index n = 0; n < d; ++n) {
    phi.col(n) = es.eigenvectors().col(d - 1 - n);
    fix_phase(phi.col(n));
  }
  return phi;
}

}  // namespace detail

/// Decomposes `s` across the cut `left_labels` | everything else.
///
/// The left vectors come from the eigendecomposition of the reduced state on
/// the left factor. Coefficients are the norms c_n = ‖(⟨φ_n| ⊗ I)Ψ‖ rather
/// than square roots of eigenvalues, which keeps small coefficients accurate
/// to machine precision.
inline SchmidtForm schmidt_decompose(const PureState& s, const std::vector<std::string>& left_labels) {
  const ComplexMatrix m = amplitude_matrix(s, left_labels);
  const Index da = m.rows();
  const Index db = m.cols();
  const Index r = std::min(da, db);

  const ComplexMatrix phi = detail::left_schmidt_basis(m);
  // Row n of proj holds the unnormalised χ_n components: (φ_n† M).
  const ComplexMatrix proj = phi.adjoint() * m;
  RealVector norms(da);
  for (Index n = 0; n < da; ++n) norms[n] = proj.row(n).norm();

  std::vector<Index> order(static_cast<std::size_t>(da));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return norms[x] > norms[y]; });

  SchmidtForm out;
  out.left_shape = s.shape().select(left_labels);
  out.right_shape = s.shape().select(s.shape().complement(left_labels));
  out.coefficients.resize(r);
  out.left.resize(da, r);
  ComplexMatrix chi(db, 0);
  Index support = 0;
  for (Index n = 0; n < r; ++n) {
    const Index k = order[static_cast<std::size_t>(n)];
    out.coefficients[n] = norms[k];
    out.left.col(n) = phi.col(k);
    if (norms[k] > tol::schmidt_rank) ++support;
  }
  chi.resize(db, support);
  for (Index n = 0; n < support; ++n) {
    const Index k = order[static_cast<std::size_t>(n)];
    chi.col(n) = proj.row(k).transpose() / norms[k];
  }
  const ComplexMatrix full = complete_basis(chi, db);
  out.right = full.leftCols(r);
  for (Index n = support; n < r; ++n) out.coefficients[n] = 0.0;
  return out;
}

template <LabelLike S>
inline SchmidtForm schmidt_decompose(const PureState& s, const S& left_label) {
  return schmidt_decompose(s, std::vector<std::string>{std::string(left_label)});
}

/// Unitary U on the complement of `left_labels` with (I ⊗ U)|Ψ′⟩ = |Ψ⟩ up
/// to global phase, given that both states have the same reduced state on
/// the left factor.
///
/// Ψ supplies c_n, |φ_n⟩, |χ_n⟩. An independent decomposition of Ψ′
/// supplies (c̃_n, |φ̃_n⟩, |χ̃_n⟩), and the matching environment vectors are
/// |χ′_m⟩ = Σ_n ⟨φ_m|φ̃_n⟩ |χ̃_n⟩, which holds for any eigenbasis choice
/// inside degenerate blocks. U maps χ′_m → χ_m on the Schmidt support and
/// the Gram-Schmidt completions of both sets onto each other elsewhere.
///
/// Rectangular cuts (dA ≠ dB) use the same construction with the sum over
/// the min(dA, dB) Schmidt terms of Ψ′.
inline ComplexMatrix environment_unitary(const PureState& psi, const PureState& psi_prime,
                                         const std::vector<std::string>& left_labels) {
  if (psi.shape() != psi_prime.shape()) {
    throw DimensionMismatch("environment_unitary: states live on different spaces");
  }
  const DensityMatrix rho = reduced_density(psi, left_labels);
  const DensityMatrix rho_prime = reduced_density(psi_prime, left_labels);
  const double diff = max_abs(rho.matrix() - rho_prime.matrix());
  if (diff > tol::same_reduced_state) {
    throw PreconditionError("environment_unitary: reduced states differ by " + std::to_string(diff));
  }

  const SchmidtForm target = schmidt_decompose(psi, left_labels);
  const SchmidtForm source = schmidt_decompose(psi_prime, left_labels);
  const Index db = target.right.rows();
  const Index support = target.rank();

  const ComplexMatrix overlaps = target.left.adjoint() * source.left;  // ⟨φ_m|φ̃_n⟩
  const ComplexMatrix chi_prime = source.right * overlaps.transpose();  // column m = χ′_m

  const ComplexMatrix from = complete_basis(chi_prime.leftCols(support), db);
  const ComplexMatrix to = complete_basis(target.right.leftCols(support), db);
  return to * from.adjoint();
}

template <LabelLike S>
inline ComplexMatrix environment_unitary(const PureState& psi, const PureState& psi_prime, const S& left_label) {
  return environment_unitary(psi, psi_prime, std::vector<std::string>{std::string(left_label)});
}

}  // namespace povmlab
