// Seeded Haar-random states and unitaries.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/rng.hpp"
#include "povmlab/state.hpp"

#include <cstdint>

namespace povmlab {

inline ComplexVector gaussian_vector(Index n, CounterRng& rng) {
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v[i] = Complex(re, im);
  }
  return v;
}

/// Haar-random pure state: normalised complex Gaussian amplitudes.
inline PureState random_pure(const SpaceShape& shape, std::uint64_t seed) {
  CounterRng rng(seed, 0x5157A7E);
  return PureState::normalized(shape, gaussian_vector(shape.total_dim(), rng));
}

/// Haar-random unitary: QR of a Ginibre matrix with R's diagonal phases
/// folded back into Q.
inline ComplexMatrix random_unitary(Index dim, std::uint64_t seed) {
  if (dim < 1) throw DimensionMismatch("random_unitary: dim must be >= 1");
  CounterRng rng(seed, 0x0417A7);
  ComplexMatrix g(dim, dim);
  for (Index j = 0; j < dim; ++j) g.col(j) = gaussian_vector(dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

/// Random density matrix of the given rank (trace of a Ginibre product).
inline DensityMatrix random_density(const SpaceShape& shape, Index rank, std::uint64_t seed) {
  CounterRng rng(seed, 0xDE75);
  const Index d = shape.total_dim();
  ComplexMatrix g(d, rank);
  for (Index j = 0; j < rank; ++j) g.col(j) = gaussian_vector(d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());
  return DensityMatrix(shape, rho);
}

/// A purification of rho on rho's space followed by `env` (total env
/// dimension must be at least rank(rho)), with a random unitary twist on the
/// environment so different seeds give different purifications.
inline PureState random_purification(const DensityMatrix& rho, const SpaceShape& env, std::uint64_t seed) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho.matrix() + rho.matrix().adjoint()));
  const Index d = rho.dim();
  const Index de = env.total_dim();
  Index rank = 0;
  for (Index i = 0; i < d; ++i) rank += es.eigenvalues()[i] > tol::schmidt_rank ? 1 : 0;
  if (de < rank) throw DimensionMismatch("environment too small to purify this density matrix");
  const ComplexMatrix v = random_unitary(de, seed);
  ComplexVector amps = ComplexVector::Zero(d * de);
  Index col = 0;
  for (Index i = d; i-- > 0;) {
    const double w = es.eigenvalues()[i];
    if (w <= tol::schmidt_rank) continue;
    for (Index a = 0; a < d; ++a) {
      for (Index e = 0; e < de; ++e) amps[a * de + e] += std::sqrt(w) * es.eigenvectors()(a, i) * v(e, col);
    }
    ++col;
  }
  return PureState::normalized(rho.shape().concat(env), std::move(amps));
}

}  // namespace povmlab
