// Outcome-indexed effect operators and their structural checks.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/state.hpp"

#include <algorithm>
#include <vector>

namespace povmlab {

struct Povm {
  Index dim = 0;
  std::vector<ComplexMatrix> operators;

  std::size_t outcomes() const { return operators.size(); }

  /// Tr(A^(k) ρ) for every k.
  std::vector<double> probabilities(const ComplexMatrix& rho) const {
    std::vector<double> p;
    p.reserve(operators.size());
    for (const auto& a : operators) p.push_back((a * rho).trace().real());
    return p;
  }
  std::vector<double> probabilities(const DensityMatrix& rho) const { return probabilities(rho.matrix()); }
};

struct PovmStatus {
  double hermiticity = 0.0;    // max over k of max|A - A†|
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double completeness = 0.0;   // ‖Σ_k A^(k) - I‖∞

  bool valid(double herm_tol = tol::hermitian, double eig_tol = 1e-9, double complete_tol = 1e-9) const {
    return hermiticity <= herm_tol && min_eigenvalue >= -eig_tol && max_eigenvalue <= 1.0 + eig_tol &&
           completeness <= complete_tol;
  }
};

inline PovmStatus check_povm(const Povm& povm) {
  PovmStatus st;
  st.min_eigenvalue = 1.0;
  st.max_eigenvalue = 0.0;
  ComplexMatrix sum = ComplexMatrix::Zero(povm.dim, povm.dim);
  for (const auto& a : povm.operators) {
    st.hermiticity = std::max(st.hermiticity, hermiticity_error(a));
    const RealVector ev = hermitian_eigenvalues(a);
    st.min_eigenvalue = std::min(st.min_eigenvalue, ev.minCoeff());
    st.max_eigenvalue = std::max(st.max_eigenvalue, ev.maxCoeff());
    sum += a;
  }
  st.completeness = max_abs(sum - ComplexMatrix::Identity(povm.dim, povm.dim));
  return st;
}

/// Largest entrywise distance between two POVMs with the same outcome count.
inline double povm_distance(const Povm& a, const Povm& b) {
  if (a.dim != b.dim || a.outcomes() != b.outcomes()) {
    throw DimensionMismatch("povm_distance: POVMs have different shapes");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < a.outcomes(); ++k) d = std::max(d, max_abs(a.operators[k] - b.operators[k]));
  return d;
}

}  // namespace povmlab
