// Detector tomography: recover the effect operators of a black-box device
// from outcome probabilities on a fixed family of probe states.
//
// Probe family for dimension N (N² probes, all rank one):
//   |n⟩                     for n = 0..N-1
//   (|m⟩ + |n⟩)/√2          for m < n
//   (|m⟩ + i|n⟩)/√2         for m < n
//
// Because each outcome probability F is affine in ρ, the partial
// derivatives with respect to Re ρ_mn and Im ρ_mn are fixed by two-point
// evaluations, giving
//   A_nn    = F(|n⟩⟨n|)
//   Re A_mn = F(ρ⁺_mn) − ½(A_mm + A_nn)
//   Im A_mn = ½(A_mm + A_nn) − F(ρ^i_mn)
// with A_nm = conj(A_mn). The Im sign follows from ρ^i_mn having
// Im ρ_mn = −½; tests pin it against the Kraus construction.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/devices.hpp"
#include "povmlab/mode.hpp"
#include "povmlab/povm.hpp"
#include "povmlab/random.hpp"
#include "povmlab/state.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace povmlab {

inline const std::string kProbeLabel = "A";

enum class ProbeKind { Diagonal, RealPair, ImagPair };

struct Probe {
  std::string label;
  ProbeKind kind;
  Index m;
  Index n;
  PureState state;

  DensityMatrix density() const { return DensityMatrix::from_pure(state); }
};

struct ProbeFamily {
  Index dim = 0;
  std::vector<Probe> probes;
};

inline ProbeFamily standard_probes(Index dim) {
  if (dim < 1) throw DimensionMismatch("standard_probes: dimension must be >= 1");
  const SpaceShape shape{{kProbeLabel, dim}};
  const double h = 1.0 / std::sqrt(2.0);
  ProbeFamily fam;
  fam.dim = dim;
  for (Index n = 0; n < dim; ++n) {
    fam.probes.push_back({"|" + std::to_string(n) + ">", ProbeKind::Diagonal, n, n, PureState::basis(shape, n)});
  }
  for (Index m = 0; m < dim; ++m) {
    for (Index n = m + 1; n < dim; ++n) {
      ComplexVector plus = ComplexVector::Zero(dim);
      plus[m] = h;
      plus[n] = h;
      ComplexVector imag = ComplexVector::Zero(dim);
      imag[m] = h;
      imag[n] = Complex(0.0, h);
      const std::string tag = std::to_string(m) + "," + std::to_string(n);
      fam.probes.push_back({"+(" + tag + ")", ProbeKind::RealPair, m, n, PureState::normalized(shape, plus)});
      fam.probes.push_back({"+i(" + tag + ")", ProbeKind::ImagPair, m, n, PureState::normalized(shape, imag)});
    }
  }
  return fam;
}

struct TomographyResult {
  Povm povm;
  /// evaluations[i][k]: outcome-k probability (or frequency) on probe i.
  std::vector<std::vector<double>> evaluations;
  double completeness_residual = 0.0;
  /// Allowed completeness residual: 1e-9 exact, 5σ sampled.
  double completeness_bound = 0.0;
  bool flagged = false;
};

/// Assembles effect operators from per-probe outcome probabilities laid out
/// as in standard_probes(dim).
inline Povm assemble_povm(const ProbeFamily& fam, const std::vector<std::vector<double>>& evals) {
  const std::size_t outcomes = evals.front().size();
  Povm povm;
  povm.dim = fam.dim;
  povm.operators.assign(outcomes, ComplexMatrix::Zero(fam.dim, fam.dim));
  for (std::size_t k = 0; k < outcomes; ++k) {
    ComplexMatrix& a = povm.operators[k];
    for (std::size_t i = 0; i < fam.probes.size(); ++i) {
      const Probe& p = fam.probes[i];
      if (p.kind == ProbeKind::Diagonal) a(p.m, p.m) = evals[i][k];
    }
    for (std::size_t i = 0; i < fam.probes.size(); ++i) {
      const Probe& p = fam.probes[i];
      const double mean_diag = 0.5 * (a(p.m, p.m).real() + a(p.n, p.n).real());
      if (p.kind == ProbeKind::RealPair) {
        a(p.m, p.n) += Complex(evals[i][k] - mean_diag, 0.0);
      } else if (p.kind == ProbeKind::ImagPair) {
        a(p.m, p.n) += Complex(0.0, mean_diag - evals[i][k]);
      }
    }
    for (Index m = 0; m < fam.dim; ++m) {
      for (Index n = m + 1; n < fam.dim; ++n) a(n, m) = std::conj(a(m, n));
    }
  }
  return povm;
}

inline TomographyResult reconstruct(const BlackBoxDevice& dev, const Mode& mode = Exact{}) {
  const ProbeFamily fam = standard_probes(dev.system_dim());
  TomographyResult out;
  for (std::size_t i = 0; i < fam.probes.size(); ++i) {
    const PureState& probe = fam.probes[i].state;
    if (const auto* s = std::get_if<Sampled>(&mode)) {
      out.evaluations.push_back(sample_frequencies(dev, probe, kProbeLabel, s->shots, s->seed, i));
    } else {
      out.evaluations.push_back(measure_prob(dev, probe, kProbeLabel));
    }
  }
  out.povm = assemble_povm(fam, out.evaluations);
  out.completeness_residual = check_povm(out.povm).completeness;
  if (const auto* s = std::get_if<Sampled>(&mode)) {
    // An off-diagonal entry mixes three frequencies with weights (1, ½, ½).
    out.completeness_bound = 5.0 * std::sqrt(1.5 * 0.25 / static_cast<double>(s->shots));
  } else {
    out.completeness_bound = 1e-9;
  }
  out.flagged = out.completeness_residual > out.completeness_bound;
  return out;
}

struct ConsistencyReport {
  std::size_t trials = 0;
  double max_residual = 0.0;
  double tolerance = 1e-8;
  bool pass = false;
};

/// Compares the device on held-out random joint states against the trace
/// rule Tr(A^(k) ρ_A). The measured subsystem sits between random-sized
/// environments on either side.
inline ConsistencyReport consistency_check(const BlackBoxDevice& dev, const Povm& povm, std::size_t trials,
                                           std::uint64_t seed, double tolerance = 1e-8) {
  if (povm.dim != dev.system_dim()) throw DimensionMismatch("consistency_check: POVM dimension differs from device");
  if (static_cast<Index>(povm.outcomes()) != dev.outcome_count()) {
    throw DimensionMismatch("consistency_check: POVM outcome count differs from device");
  }
  ConsistencyReport rep;
  rep.trials = trials;
  rep.tolerance = tolerance;
  CounterRng dims(seed, 0xC0C0);
  for (std::size_t t = 0; t < trials; ++t) {
    const Index left = 1 + static_cast<Index>(dims() % 2);
    const Index right = 1 + static_cast<Index>(dims() % 4);
    const SpaceShape shape{{"L", left}, {kProbeLabel, dev.system_dim()}, {"R", right}};
    const PureState joint = random_pure(shape, splitmix64(seed ^ (0xABCDULL + t)));
    const auto p = measure_prob(dev, joint, kProbeLabel);
    const auto q = povm.probabilities(reduced_density(joint, kProbeLabel));
    for (std::size_t k = 0; k < p.size(); ++k) rep.max_residual = std::max(rep.max_residual, std::abs(p[k] - q[k]));
  }
  rep.pass = rep.max_residual <= tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Affine functionals of a density matrix.

/// F(ρ) = a + Σ_{n<N-1} b_n ρ_nn + Σ_{m<n} (c_mn Re ρ_mn + d_mn Im ρ_mn).
/// c and d are stored in the strict upper triangle of N x N matrices.
struct LinearFunctionalCoefficients {
  Index dim = 0;
  double a = 0.0;
  RealVector b;
  Eigen::MatrixXd c;
  Eigen::MatrixXd d;
  double residual = 0.0;  // max |fit - sample| over the input
  bool nonlinear = false;
};

/// Coefficients of ρ ↦ Tr(Aρ): a = A_NN, b_n = A_nn − A_NN, c = 2 Re A_mn,
/// d = 2 Im A_mn.
inline LinearFunctionalCoefficients coefficients_from_operator(const ComplexMatrix& op) {
  const Index n = op.rows();
  LinearFunctionalCoefficients f;
  f.dim = n;
  f.a = op(n - 1, n - 1).real();
  f.b = RealVector::Zero(n - 1);
  for (Index i = 0; i + 1 < n; ++i) f.b[i] = op(i, i).real() - f.a;
  f.c = Eigen::MatrixXd::Zero(n, n);
  f.d = Eigen::MatrixXd::Zero(n, n);
  for (Index m = 0; m < n; ++m) {
    for (Index k = m + 1; k < n; ++k) {
      f.c(m, k) = 2.0 * op(m, k).real();
      f.d(m, k) = 2.0 * op(m, k).imag();
    }
  }
  return f;
}

/// Hermitian operator with Tr(Aρ) = F(ρ): A_NN = a, A_nn = b_n + a,
/// A_mn = (c_mn + i d_mn)/2.
inline ComplexMatrix operator_from_coefficients(const LinearFunctionalCoefficients& f) {
  const Index n = f.dim;
  ComplexMatrix op = ComplexMatrix::Zero(n, n);
  op(n - 1, n - 1) = f.a;
  for (Index i = 0; i + 1 < n; ++i) op(i, i) = f.b[i] + f.a;
  for (Index m = 0; m < n; ++m) {
    for (Index k = m + 1; k < n; ++k) {
      op(m, k) = Complex(0.5 * f.c(m, k), 0.5 * f.d(m, k));
      op(k, m) = std::conj(op(m, k));
    }
  }
  return op;
}

namespace detail {

inline RealVector affine_features(const ComplexMatrix& rho) {
  const Index n = rho.rows();
  RealVector x(n * n);
  Index c = 0;
  x[c++] = 1.0;
  for (Index i = 0; i + 1 < n; ++i) x[c++] = rho(i, i).real();
  for (Index m = 0; m < n; ++m) {
    for (Index k = m + 1; k < n; ++k) x[c++] = rho(m, k).real();
  }
  for (Index m = 0; m < n; ++m) {
    for (Index k = m + 1; k < n; ++k) x[c++] = rho(m, k).imag();
  }
  return x;
}

}  // namespace detail

/// Least-squares fit of the affine form over (ρ, value) samples. Needs N²
/// affinely independent samples; a max residual above `nonlinear_tol` marks
/// the data as not coming from any affine functional.
inline LinearFunctionalCoefficients linear_form_fit(const std::vector<std::pair<DensityMatrix, double>>& samples,
                                                    double nonlinear_tol = 1e-6) {
  if (samples.empty()) throw RankDeficient("linear_form_fit: no samples");
  const Index n = samples.front().first.dim();
  const Index p = n * n;
  if (static_cast<Index>(samples.size()) < p) throw RankDeficient("linear_form_fit: fewer than N^2 samples");
  Eigen::MatrixXd x(static_cast<Index>(samples.size()), p);
  RealVector y(static_cast<Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].first.dim() != n) throw DimensionMismatch("linear_form_fit: samples of mixed dimension");
    x.row(static_cast<Index>(i)) = detail::affine_features(samples[i].first.matrix()).transpose();
    y[static_cast<Index>(i)] = samples[i].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw RankDeficient("linear_form_fit: samples do not affinely span the state space");
  const RealVector beta = qr.solve(y);

  LinearFunctionalCoefficients f;
  f.dim = n;
  Index c = 0;
  f.a = beta[c++];
  f.b.resize(n - 1);
  for (Index i = 0; i + 1 < n; ++i) f.b[i] = beta[c++];
  f.c = Eigen::MatrixXd::Zero(n, n);
  f.d = Eigen::MatrixXd::Zero(n, n);
  for (Index m = 0; m < n; ++m) {
    for (Index k = m + 1; k < n; ++k) f.c(m, k) = beta[c++];
  }
  for (Index m = 0; m < n; ++m) {
    for (Index k = m + 1; k < n; ++k) f.d(m, k) = beta[c++];
  }
  f.residual = (x * beta - y).cwiseAbs().maxCoeff();
  f.nonlinear = f.residual > nonlinear_tol;
  return f;
}

}  // namespace povmlab
