#include "povmlab/random.hpp"
#include "povmlab/schmidt.hpp"
#include "povmlab/state.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace povmlab;

namespace {

PureState ket(std::initializer_list<Complex> amps, SpaceShape shape) {
  ComplexVector v(static_cast<Index>(amps.size()));
  Index i = 0;
  for (auto a : amps) v[i++] = a;
  return PureState::normalized(std::move(shape), v);
}

// Partial trace by explicit multi-index enumeration, independent of the
// permutation/reshape route used by the library.
ComplexMatrix brute_partial_trace(const PureState& s, const std::vector<std::size_t>& keep_pos) {
  const auto& parts = s.shape().parts();
  const std::size_t n = parts.size();
  std::vector<Index> dims(n);
  for (std::size_t i = 0; i < n; ++i) dims[i] = parts[i].dim;
  auto digits_of = [&](Index flat) {
    std::vector<Index> d(n);
    for (std::size_t i = n; i-- > 0;) {
      d[i] = flat % dims[i];
      flat /= dims[i];
    }
    return d;
  };
  Index dk = 1;
  for (auto p : keep_pos) dk *= dims[p];
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Index x = 0; x < s.dim(); ++x) {
    for (Index y = 0; y < s.dim(); ++y) {
      const auto dx = digits_of(x);
      const auto dy = digits_of(y);
      bool traced_equal = true;
      for (std::size_t i = 0; i < n; ++i) {
        const bool kept = std::find(keep_pos.begin(), keep_pos.end(), i) != keep_pos.end();
        if (!kept && dx[i] != dy[i]) traced_equal = false;
      }
      if (!traced_equal) continue;
      Index ix = 0, iy = 0;
      for (auto p : keep_pos) {
        ix = ix * dims[p] + dx[p];
        iy = iy * dims[p] + dy[p];
      }
      out(ix, iy) += s.amplitudes()[x] * std::conj(s.amplitudes()[y]);
    }
  }
  return out;
}

}  // namespace

TEST(Tensor, BasisProduct) {
  const auto z = PureState::basis(SpaceShape{{"A", 2}}, 0);
  const auto w = PureState::basis(SpaceShape{{"B", 2}}, 0);
  const auto t = tensor(z, w);
  ASSERT_EQ(t.dim(), 4);
  EXPECT_EQ(t.amplitudes()[0], Complex(1.0));
  EXPECT_EQ(t.amplitudes().tail(3).norm(), 0.0);
  EXPECT_EQ(t.shape().labels(), (std::vector<std::string>{"A", "B"}));
}

TEST(Tensor, LabelCollisionThrows) {
  const auto z = PureState::basis(SpaceShape{{"A", 2}}, 0);
  EXPECT_THROW(tensor(z, z), LabelError);
}

TEST(Tensor, RandomNormIsOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = random_pure(SpaceShape{{"A", 2}}, seed);
    const auto b = random_pure(SpaceShape{{"B", 3}}, seed + 100);
    EXPECT_NEAR(tensor(a, b).amplitudes().norm(), 1.0, 1e-12);
  }
}

TEST(Tensor, FourParticleJoint) {
  const auto psi0 = random_pure(SpaceShape{{"A", 2}, {"B", 2}}, 7);
  ComplexVector phi(4);
  phi << std::sqrt(0.7), 0.0, 0.0, std::sqrt(0.3);
  const auto joint = tensor(psi0, PureState(SpaceShape{{"alpha", 2}, {"beta", 2}}, phi));
  EXPECT_EQ(joint.shape().labels(), (std::vector<std::string>{"A", "B", "alpha", "beta"}));
  EXPECT_NEAR(std::abs(joint.amplitudes()[0] - psi0.amplitudes()[0] * std::sqrt(0.7)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(joint.amplitudes()[15] - psi0.amplitudes()[3] * std::sqrt(0.3)), 0.0, 1e-15);
}

TEST(Tensor, DensityKronecker) {
  const auto a = random_density(SpaceShape{{"A", 2}}, 2, 1);
  const auto b = random_density(SpaceShape{{"B", 3}}, 2, 2);
  const auto t = tensor(a, b);
  EXPECT_NEAR(max_abs(reduced_density(t, {"A"}).matrix() - a.matrix()), 0.0, 1e-14);
  EXPECT_NEAR(max_abs(reduced_density(t, {"B"}).matrix() - b.matrix()), 0.0, 1e-14);
}

TEST(ReducedDensity, ProductState) {
  const auto s = ket({0.0, 1.0, 0.0, 0.0}, SpaceShape{{"A", 2}, {"B", 2}});  // |0>|1>
  const auto rho = reduced_density(s, "A");
  ComplexMatrix expect = ComplexMatrix::Zero(2, 2);
  expect(0, 0) = 1.0;
  EXPECT_LE(max_abs(rho.matrix() - expect), 1e-15);
}

TEST(ReducedDensity, PhiLambdaIsDiagonal) {
  for (double lam : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
    const auto s = ket({std::sqrt(1 - lam), 0.0, 0.0, std::sqrt(lam)}, SpaceShape{{"alpha", 2}, {"beta", 2}});
    const auto rho = reduced_density(s, "alpha");
    EXPECT_NEAR(rho.matrix()(0, 0).real(), 1 - lam, 1e-15);
    EXPECT_NEAR(rho.matrix()(1, 1).real(), lam, 1e-15);
    EXPECT_NEAR(std::abs(rho.matrix()(0, 1)), 0.0, 1e-15);
  }
}

TEST(ReducedDensity, SingletIsMaximallyMixed) {
  const double h = 1.0 / std::sqrt(2.0);
  const auto singlet = ket({0.0, h, -h, 0.0}, SpaceShape{{"A", 2}, {"B", 2}});
  EXPECT_LE(max_abs(reduced_density(singlet, "A").matrix() - 0.5 * ComplexMatrix::Identity(2, 2)), 1e-15);
  EXPECT_LE(max_abs(reduced_density(singlet, "B").matrix() - 0.5 * ComplexMatrix::Identity(2, 2)), 1e-15);
}

TEST(ReducedDensity, UnknownLabelThrows) {
  const auto s = random_pure(SpaceShape{{"A", 2}, {"B", 2}}, 3);
  EXPECT_THROW(reduced_density(s, "Z"), LabelError);
}

TEST(ReducedDensity, MatchesBruteForceOracle) {
  const SpaceShape shape{{"A", 2}, {"B", 3}, {"C", 2}};
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto s = random_pure(shape, seed);
    EXPECT_LE(max_abs(reduced_density(s, {"B"}).matrix() - brute_partial_trace(s, {1})), 1e-14);
    EXPECT_LE(max_abs(reduced_density(s, {"A", "C"}).matrix() - brute_partial_trace(s, {0, 2})), 1e-14);
    EXPECT_LE(max_abs(reduced_density(s, {"C", "A"}).matrix() - brute_partial_trace(s, {2, 0})), 1e-14);
    // Density-matrix route agrees with the pure-state route.
    const auto full = DensityMatrix::from_pure(s);
    EXPECT_LE(max_abs(reduced_density(full, {"C", "A"}).matrix() - reduced_density(s, {"C", "A"}).matrix()), 1e-14);
  }
}

TEST(ReducedDensity, ValidDensityMatrices) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Index da = 2 + static_cast<Index>(seed % 4);
    const Index db = 1 + static_cast<Index>((seed / 4) % 5);
    const auto s = random_pure(SpaceShape{{"A", da}, {"B", db}}, seed);
    const auto rho = reduced_density(s, "A");
    EXPECT_LE(hermiticity_error(rho.matrix()), 1e-10);
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-10);
    EXPECT_GE(hermitian_eigenvalues(rho.matrix()).minCoeff(), -1e-9);
  }
}

TEST(PermuteApply, ApplyMatchesExplicitKronecker) {
  const auto s = random_pure(SpaceShape{{"A", 2}, {"B", 3}, {"C", 2}}, 11);
  const auto u = random_unitary(3, 5);
  const ComplexMatrix full = kron(kron(ComplexMatrix::Identity(2, 2), u), ComplexMatrix::Identity(2, 2));
  const auto applied = apply(s, {"B"}, u);
  EXPECT_LE((applied.amplitudes() - full * s.amplitudes()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PermuteApply, PermuteRoundTrip) {
  const auto s = random_pure(SpaceShape{{"A", 2}, {"B", 3}, {"C", 4}}, 2);
  const auto p = permute(s, {"C", "A", "B"});
  EXPECT_EQ(p.shape().labels(), (std::vector<std::string>{"C", "A", "B"}));
  const auto back = permute(p, {"A", "B", "C"});
  EXPECT_LE((back.amplitudes() - s.amplitudes()).cwiseAbs().maxCoeff(), 0.0);
  // Amplitude of |a=1, b=2, c=3> lands at index (c, a, b).
  EXPECT_EQ(p.amplitudes()[3 * 6 + 1 * 3 + 2], s.amplitudes()[1 * 12 + 2 * 4 + 3]);
}

TEST(Schmidt, ProductState) {
  const auto s = PureState::basis(SpaceShape{{"A", 2}, {"B", 2}}, 0);
  const auto f = schmidt_decompose(s, "A");
  EXPECT_NEAR(f.coefficients[0], 1.0, 1e-15);
  EXPECT_NEAR(f.coefficients[1], 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.left(0, 0) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.right(0, 0) - Complex(1.0)), 0.0, 1e-15);
}

TEST(Schmidt, PhiLambdaCoefficients) {
  for (double lam : {0.0, 0.1, 0.3, 0.5}) {
    const auto s = ket({std::sqrt(1 - lam), 0.0, 0.0, std::sqrt(lam)}, SpaceShape{{"alpha", 2}, {"beta", 2}});
    const auto f = schmidt_decompose(s, "alpha");
    EXPECT_NEAR(f.coefficients[0], std::sqrt(1 - lam), 1e-12);
    EXPECT_NEAR(f.coefficients[1], std::sqrt(lam), 1e-12);
  }
}

TEST(Schmidt, CoefficientsMatchSvdOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = random_pure(SpaceShape{{"A", 3}, {"B", 4}}, seed);
    ComplexMatrix m(3, 4);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 4; ++j) m(i, j) = s.amplitudes()[i * 4 + j];
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto f = schmidt_decompose(s, "A");
    for (Index n = 0; n < 3; ++n) EXPECT_NEAR(f.coefficients[n], svd.singularValues()[n], 1e-10);
  }
}

TEST(Schmidt, RoundTripAndOrthonormality) {
  int count = 0;
  for (Index da = 2; da <= 5; ++da) {
    for (Index db = 2; db <= 5; ++db) {
      for (int rep = 0; rep < 63; ++rep, ++count) {
        const auto s = random_pure(SpaceShape{{"A", da}, {"B", db}}, static_cast<std::uint64_t>(count) * 7919);
        const auto f = schmidt_decompose(s, "A");
        const Index r = std::min(da, db);
        EXPECT_LE((f.recombine() - s.amplitudes()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(f.coefficients.squaredNorm(), 1.0, 1e-10);
        EXPECT_LE(max_abs(f.left.adjoint() * f.left - ComplexMatrix::Identity(r, r)), 1e-10);
        EXPECT_LE(max_abs(f.right.adjoint() * f.right - ComplexMatrix::Identity(r, r)), 1e-10);
        for (Index n = 1; n < r; ++n) EXPECT_GE(f.coefficients[n - 1], f.coefficients[n]);
        // c_n² are the eigenvalues of the reduced state.
        const RealVector ev = hermitian_eigenvalues(reduced_density(s, "A").matrix()).reverse();
        for (Index n = 0; n < r; ++n) EXPECT_NEAR(f.coefficients[n] * f.coefficients[n], ev[n], 1e-9);
      }
    }
  }
  EXPECT_GE(count, 1000);
}

TEST(Schmidt, PhaseConvention) {
  const auto s = random_pure(SpaceShape{{"A", 3}, {"B", 3}}, 42);
  const auto f = schmidt_decompose(s, "A");
  for (Index n = 0; n < 3; ++n) {
    Index first = 0;
    while (std::abs(f.left(first, n)) <= 1e-12) ++first;
    EXPECT_GT(f.left(first, n).real(), 0.0);
    EXPECT_EQ(f.left(first, n).imag(), 0.0);
  }
}

TEST(EnvironmentUnitary, IdentityWhenStatesEqual) {
  const auto s = random_pure(SpaceShape{{"A", 3}, {"B", 3}}, 9);
  const auto u = environment_unitary(s, s, "A");
  EXPECT_LE(max_abs(u - ComplexMatrix::Identity(3, 3)), 1e-12);
}

TEST(EnvironmentUnitary, BellPairsGiveBitFlip) {
  const double h = 1.0 / std::sqrt(2.0);
  const SpaceShape shape{{"A", 2}, {"B", 2}};
  const auto psi = ket({h, 0.0, 0.0, h}, shape);
  const auto psi_prime = ket({0.0, h, h, 0.0}, shape);
  const auto u = environment_unitary(psi, psi_prime, "A");
  ComplexMatrix x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  EXPECT_LE(max_abs(u - x), 1e-12);
}

TEST(EnvironmentUnitary, RecoversKnownTwist) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index da = 2 + static_cast<Index>(seed % 3);
    const Index db = 2 + static_cast<Index>((seed / 3) % 3);
    const auto psi = random_pure(SpaceShape{{"A", da}, {"B", db}}, seed);
    const auto v = random_unitary(db, seed + 1000);
    const auto psi_prime = apply(psi, {"B"}, v.adjoint());
    const auto u = environment_unitary(psi, psi_prime, "A");
    EXPECT_LE(unitarity_error(u), 1e-10);
    EXPECT_GE(fidelity(apply(psi_prime, {"B"}, u), psi), 1.0 - 1e-9);
  }
}

TEST(EnvironmentUnitary, DegenerateAndRankDeficient) {
  const SpaceShape a{{"A", 4}};
  // Degenerate spectrum (1/2, 1/4, 1/4, 0) and rank one.
  ComplexMatrix deg = ComplexMatrix::Zero(4, 4);
  deg(0, 0) = 0.5;
  deg(1, 1) = 0.25;
  deg(2, 2) = 0.25;
  const auto rot = random_unitary(4, 77);
  const DensityMatrix rhos[] = {DensityMatrix(a, rot * deg * rot.adjoint()), random_density(a, 1, 5),
                                DensityMatrix(a, 0.25 * ComplexMatrix::Identity(4, 4))};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto& rho : rhos) {
      const SpaceShape env{{"B", 4}};
      const auto psi = random_purification(rho, env, seed);
      const auto psi_prime = random_purification(rho, env, seed + 500);
      const auto u = environment_unitary(psi, psi_prime, "A");
      EXPECT_LE(unitarity_error(u), 1e-10);
      EXPECT_GE(fidelity(apply(psi_prime, {"B"}, u), psi), 1.0 - 1e-9);
    }
  }
}

TEST(EnvironmentUnitary, RectangularCut) {
  // dim A = 2, environment of dimension 5 made of two factors.
  const auto rho = random_density(SpaceShape{{"A", 2}}, 2, 3);
  const SpaceShape env{{"B", 5}};
  const auto psi = random_purification(rho, env, 1);
  const auto psi_prime = random_purification(rho, env, 2);
  const auto u = environment_unitary(psi, psi_prime, "A");
  EXPECT_GE(fidelity(apply(psi_prime, {"B"}, u), psi), 1.0 - 1e-9);
}

TEST(EnvironmentUnitary, DifferentReducedStatesRejected) {
  const auto psi = random_pure(SpaceShape{{"A", 2}, {"B", 2}}, 1);
  const auto other = random_pure(SpaceShape{{"A", 2}, {"B", 2}}, 2);
  EXPECT_THROW(environment_unitary(psi, other, "A"), PreconditionError);
}

TEST(Random, Deterministic) {
  const SpaceShape shape{{"A", 3}, {"B", 2}};
  EXPECT_EQ(random_pure(shape, 123).amplitudes(), random_pure(shape, 123).amplitudes());
  EXPECT_NE(random_pure(shape, 123).amplitudes(), random_pure(shape, 124).amplitudes());
  EXPECT_EQ(random_unitary(4, 9), random_unitary(4, 9));
}

TEST(Random, UnitaryIsUnitary) {
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_LE(unitarity_error(random_unitary(4, s)), 1e-10);
}

TEST(Random, HaarAverageOfBasisOverlap) {
  const SpaceShape shape{{"A", 2}};
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += std::norm(random_pure(shape, static_cast<std::uint64_t>(i)).amplitudes()[0]);
  EXPECT_NEAR(acc / n, 0.5, 0.01);
}

TEST(Purify, CanonicalPurificationReproducesState) {
  const auto rho = random_density(SpaceShape{{"A", 3}}, 2, 8);
  const auto p = purify(rho, "E");
  EXPECT_LE(max_abs(reduced_density(p, "A").matrix() - rho.matrix()), 1e-12);
}
