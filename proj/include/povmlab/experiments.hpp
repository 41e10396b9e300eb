// Thought-experiment protocols run against black-box devices.
//
//   fig1      purification swap: Ψ, (I⊗U)Ψ′ and Ψ′ give the same statistics
//   fig2      controlled gate G fed by √(1−λ)|00⟩ + √λ|11⟩, with and without
//             reading the spectator qubit β first
//   fig3      different environments, with bystander particles and a swap
//   ensemble  probabilistic mixtures against the reconstructed trace rule
//
// Exact mode compares closed-form probabilities at fixed tolerances. Sampled
// mode simulates shots from counter-based streams and compares frequencies
// at five standard errors (two-sided), reported as z-scores.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/devices.hpp"
#include "povmlab/mode.hpp"
#include "povmlab/report.hpp"
#include "povmlab/schmidt.hpp"
#include "povmlab/state.hpp"
#include "povmlab/tomography.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace povmlab {

inline constexpr double kSigmaBound = 5.0;
inline const std::string kAlpha = "alpha";
inline const std::string kBeta = "beta";

namespace detail {

inline void compare_exact(ExperimentReport& r, std::string name, const std::vector<double>& a,
                          const std::vector<double>& b, double tolerance) {
  r.check(std::move(name), max_abs_diff(a, b), tolerance, diff(a, b));
}

// Two independent frequency vectors with na and nb shots.
inline void compare_frequencies(ExperimentReport& r, std::string name, const std::vector<double>& fa, double na,
                                const std::vector<double>& fb, double nb) {
  std::vector<double> sigma(fa.size());
  for (std::size_t k = 0; k < fa.size(); ++k) {
    const double p = 0.5 * (fa[k] + fb[k]);
    sigma[k] = std::sqrt(p * (1.0 - p) * (1.0 / na + 1.0 / nb));
  }
  r.check(std::move(name) + " (z-score)", max_zscore(diff(fa, fb), sigma), kSigmaBound, diff(fa, fb));
}

// Frequencies against known probabilities.
inline void compare_to_probabilities(ExperimentReport& r, std::string name, const std::vector<double>& f, double n,
                                     const std::vector<double>& p) {
  std::vector<double> sigma(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) sigma[k] = std::sqrt(std::max(p[k] * (1.0 - p[k]), 0.0) / n);
  r.check(std::move(name) + " (z-score)", max_zscore(diff(f, p), sigma), kSigmaBound, diff(f, p));
}

inline std::vector<std::string> env_labels(const PureState& s, const std::string& target) {
  return s.shape().complement({target});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Figure 1: same reduced state, same statistics.

struct Fig1Setup {
  BlackBoxDevice device;
  PureState psi;
  PureState psi_prime;
  std::string target = "A";
  bool apply_u = true;
};

inline ExperimentReport run_fig1(const Fig1Setup& s, const Mode& mode = Exact{}) {
  ExperimentReport r;
  r.name = "fig1";
  const auto env = detail::env_labels(s.psi, s.target);
  const ComplexMatrix u = environment_unitary(s.psi, s.psi_prime, {s.target});
  const PureState swapped = apply(s.psi_prime, env, u);
  r.check("environment unitary restores psi (1 - fidelity)", 1.0 - fidelity(swapped, s.psi), 1e-9);

  const bool exact = is_exact(mode);
  std::vector<double> pa, pb, pc;
  double n = 0.0;
  if (exact) {
    pa = measure_prob(s.device, s.psi, s.target);
    pb = measure_prob(s.device, swapped, s.target);
    pc = measure_prob(s.device, s.psi_prime, s.target);
  } else {
    const auto& smp = std::get<Sampled>(mode);
    n = static_cast<double>(smp.shots);
    pa = sample_frequencies(s.device, s.psi, s.target, smp.shots, smp.seed, 0);
    pb = sample_frequencies(s.device, swapped, s.target, smp.shots, smp.seed, 1);
    pc = sample_frequencies(s.device, s.psi_prime, s.target, smp.shots, smp.seed, 2);
  }
  r.record("P(a) psi", pa);
  if (s.apply_u) r.record("P(b) U psi'", pb);
  r.record("P(c) psi'", pc);

  if (exact) {
    constexpr double tol = 1e-9;
    if (s.apply_u) detail::compare_exact(r, "P(a) = P(b)", pa, pb, tol);
    detail::compare_exact(r, "P(a) = P(c)", pa, pc, tol);
    if (s.apply_u) detail::compare_exact(r, "P(b) = P(c)", pb, pc, tol);
  } else {
    if (s.apply_u) detail::compare_frequencies(r, "P(a) = P(b)", pa, n, pb, n);
    detail::compare_frequencies(r, "P(a) = P(c)", pa, n, pc, n);
    if (s.apply_u) detail::compare_frequencies(r, "P(b) = P(c)", pb, n, pc, n);
  }
  r.record("max residual", {std::max(max_abs_diff(pa, pc), s.apply_u ? max_abs_diff(pb, pc) : 0.0)});
  return r;
}

// ---------------------------------------------------------------------------
// Figure 2: linearity of F and a_λ.

inline PureState make_phi_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw PreconditionError("phi_lambda: lambda must lie in [0, 1]");
  ComplexVector v = ComplexVector::Zero(4);
  v[0] = std::sqrt(1.0 - lambda);
  v[3] = std::sqrt(lambda);
  return PureState::normalized(SpaceShape{{kAlpha, 2}, {kBeta, 2}}, std::move(v));
}

/// Controlled gate on (psi's factors) ⊗ α: identity when α = |0⟩, W when
/// α = |1⟩, where W|Ψ₀⟩ = |Ψ₁⟩ and W maps the Gram-Schmidt completion of Ψ₀
/// over canonical vectors onto that of Ψ₁.
inline ComplexMatrix make_gate_g(const PureState& psi0, const PureState& psi1) {
  if (psi0.shape() != psi1.shape()) throw DimensionMismatch("make_gate_g: states live on different spaces");
  const Index d = psi0.dim();
  const ComplexMatrix b0 = complete_basis(psi0.amplitudes(), d);
  const ComplexMatrix b1 = complete_basis(psi1.amplitudes(), d);
  const ComplexMatrix w = b1 * b0.adjoint();
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2);
  ComplexMatrix p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  return kron(ComplexMatrix::Identity(d, d), p0) + kron(w, p1);
}

struct Fig2Setup {
  BlackBoxDevice device;
  PureState psi0;
  PureState psi1;
  double lambda = 0.5;
  std::string target = "A";
  ComplexMatrix gate;

  Fig2Setup(BlackBoxDevice dev, PureState p0, PureState p1, double lam, std::string tgt = "A")
      : device(std::move(dev)), psi0(std::move(p0)), psi1(std::move(p1)), lambda(lam), target(std::move(tgt)),
        gate(make_gate_g(psi0, psi1)) {}
};

inline ExperimentReport run_fig2(const Fig2Setup& s, const Mode& mode = Exact{}) {
  ExperimentReport r;
  r.name = "fig2";
  std::vector<std::string> gate_labels = s.psi0.shape().labels();
  gate_labels.push_back(kAlpha);

  // Gate invariants: unitary, and the two controlled branches.
  r.check("gate G unitarity", unitarity_error(s.gate), 1e-10);
  const PureState zero = PureState::basis(SpaceShape{{kAlpha, 2}}, 0);
  const PureState one = PureState::basis(SpaceShape{{kAlpha, 2}}, 1);
  r.check("G |psi0>|0> = |psi0>|0>",
          (s.gate * tensor(s.psi0, zero).amplitudes() - tensor(s.psi0, zero).amplitudes()).cwiseAbs().maxCoeff(),
          1e-10);
  r.check("G |psi0>|1> = |psi1>|1>",
          (s.gate * tensor(s.psi0, one).amplitudes() - tensor(s.psi1, one).amplitudes()).cwiseAbs().maxCoeff(), 1e-10);

  const double lam = s.lambda;
  const PureState joint = tensor(s.psi0, make_phi_lambda(lam));
  const PureState after = apply(joint, gate_labels, s.gate);

  const DensityMatrix rho0 = reduced_density(s.psi0, s.target);
  const DensityMatrix rho1 = reduced_density(s.psi1, s.target);
  const DensityMatrix mixture(rho0.shape(), (1.0 - lam) * rho0.matrix() + lam * rho1.matrix());
  const DensityMatrix rho_after = reduced_density(after, s.target);
  r.check("reduced state after G = (1-lambda) rho0 + lambda rho1", max_abs(rho_after.matrix() - mixture.matrix()),
          1e-10);

  // Variant b: the meter reads β before G; each branch is the renormalised
  // β = x component. β is the last factor of `joint`, so its value is the
  // parity of the flat index.
  double p_mu[2];
  std::vector<PureState> branch;
  for (Index x = 0; x < 2; ++x) {
    ComplexVector v = joint.amplitudes();
    for (Index i = 0; i < v.size(); ++i) {
      if (i % 2 != x) v[i] = 0.0;
    }
    p_mu[x] = v.squaredNorm();
    branch.push_back(p_mu[x] > 1e-15 ? apply(PureState::normalized(joint.shape(), v), gate_labels, s.gate) : after);
  }
  const bool has0 = p_mu[0] > 1e-15;
  const bool has1 = p_mu[1] > 1e-15;

  if (is_exact(mode)) {
    const auto pa = measure_prob(s.device, after, s.target);
    const auto f0 = measure_prob(s.device, s.psi0, s.target);
    const auto f1 = measure_prob(s.device, s.psi1, s.target);
    const auto fmix = measure_prob(s.device, purify(mixture, s.target + "_purifier"), s.target);
    r.record("p(M) variant a", pa);
    r.record("F(rho0)", f0);
    r.record("F(rho1)", f1);
    r.record("p(mu)", {p_mu[0], p_mu[1]});
    r.record("a_lambda", {p_mu[1]});

    detail::compare_exact(r, "p(M) variant a = F((1-lambda) rho0 + lambda rho1)", pa, fmix, 1e-10);
    r.check("a_lambda = lambda", std::abs(p_mu[1] - lam), 1e-12, {p_mu[1]});

    std::vector<double> recombined(pa.size(), 0.0);
    if (has0) {
      const auto c0 = measure_prob(s.device, branch[0], s.target);
      r.record("p(M | mu:0)", c0);
      detail::compare_exact(r, "p(M | mu:0) = F(rho0)", c0, f0, 1e-10);
      for (std::size_t k = 0; k < pa.size(); ++k) recombined[k] += p_mu[0] * c0[k];
    }
    if (has1) {
      const auto c1 = measure_prob(s.device, branch[1], s.target);
      r.record("p(M | mu:1)", c1);
      detail::compare_exact(r, "p(M | mu:1) = F(rho1)", c1, f1, 1e-10);
      for (std::size_t k = 0; k < pa.size(); ++k) recombined[k] += p_mu[1] * c1[k];
    }
    detail::compare_exact(r, "total probability", pa, recombined, 1e-9);

    std::vector<double> lin(pa.size());
    for (std::size_t k = 0; k < pa.size(); ++k) lin[k] = (1.0 - lam) * f0[k] + lam * f1[k];
    detail::compare_exact(r, "linearity F((1-lambda) rho0 + lambda rho1)", fmix, lin, 1e-9);
    return r;
  }

  const auto& smp = std::get<Sampled>(mode);
  const double n = static_cast<double>(smp.shots);
  const auto fa = sample_frequencies(s.device, after, s.target, smp.shots, smp.seed, 0);
  const auto f0 = sample_frequencies(s.device, s.psi0, s.target, smp.shots, smp.seed, 2);
  const auto f1 = sample_frequencies(s.device, s.psi1, s.target, smp.shots, smp.seed, 3);

  // Variant b, shot by shot: meter μ first, then M on the collapsed branch.
  const OutcomeSampler m0(s.device, branch[0], s.target);
  const OutcomeSampler m1(s.device, branch[1], s.target);
  const CounterRng rng(smp.seed, 1);
  const std::size_t k_out = m0.outcomes();
  std::uint64_t mu_counts[2] = {0, 0};
  std::vector<std::uint64_t> cond[2] = {std::vector<std::uint64_t>(k_out, 0), std::vector<std::uint64_t>(k_out, 0)};
  std::vector<std::uint64_t> total(k_out, 0);
  for (std::uint64_t i = 0; i < smp.shots; ++i) {
    const int x = rng.uniform_at(3 * i) < p_mu[1] ? 1 : 0;
    const std::size_t k = (x ? m1 : m0).draw(rng.uniform_at(3 * i + 1), rng.uniform_at(3 * i + 2));
    ++mu_counts[x];
    ++cond[x][k];
    ++total[k];
  }
  const double a_hat = static_cast<double>(mu_counts[1]) / n;
  const auto fb = frequencies(total);
  r.record("p(M) variant a", fa);
  r.record("p(M) variant b", fb);
  r.record("F(rho0)", f0);
  r.record("F(rho1)", f1);
  r.record("p(mu)", {1.0 - a_hat, a_hat});
  r.record("a_lambda", {a_hat});

  const double sig = binomial_sigma(lam, smp.shots);
  r.check("a_lambda = lambda (z-score)", sig > 0.0 ? std::abs(a_hat - lam) / sig : (a_hat == lam ? 0.0 : 1e9),
          kSigmaBound, {a_hat});
  detail::compare_frequencies(r, "total probability", fa, n, fb, n);
  if (has0 && mu_counts[0] > 0) {
    const auto c0 = frequencies(cond[0]);
    r.record("p(M | mu:0)", c0);
    detail::compare_frequencies(r, "p(M | mu:0) = F(rho0)", c0, static_cast<double>(mu_counts[0]), f0, n);
  }
  if (has1 && mu_counts[1] > 0) {
    const auto c1 = frequencies(cond[1]);
    r.record("p(M | mu:1)", c1);
    detail::compare_frequencies(r, "p(M | mu:1) = F(rho1)", c1, static_cast<double>(mu_counts[1]), f1, n);
  }
  std::vector<double> lin(fa.size()), sigma(fa.size());
  for (std::size_t k = 0; k < fa.size(); ++k) {
    lin[k] = (1.0 - lam) * f0[k] + lam * f1[k];
    const double v = fa[k] * (1.0 - fa[k]) + (1.0 - lam) * (1.0 - lam) * f0[k] * (1.0 - f0[k]) +
                     lam * lam * f1[k] * (1.0 - f1[k]);
    sigma[k] = std::sqrt(v / n);
  }
  r.check("linearity F((1-lambda) rho0 + lambda rho1) (z-score)", max_zscore(diff(fa, lin), sigma), kSigmaBound,
          diff(fa, lin));
  return r;
}

// ---------------------------------------------------------------------------
// Figure 3: different environments.

enum class Fig3Variant { A, B, C, D };

struct Fig3Setup {
  BlackBoxDevice device;
  PureState psi;          // over target ⊗ B ⊗ C
  PureState psi_prime;    // over target ⊗ B ⊗ C′
  PureState bystander_c;        // C alone
  PureState bystander_c_prime;  // C′ alone
  std::string target = "A";
};

/// Joint state just before the measurement in one variant. Variants c and d
/// share the factor order of c; d reaches it by swapping C and C′.
inline PureState fig3_joint(const Fig3Setup& s, Fig3Variant v) {
  switch (v) {
    case Fig3Variant::A:
      return s.psi;
    case Fig3Variant::B:
      return s.psi_prime;
    case Fig3Variant::C:
      return tensor(s.psi, s.bystander_c_prime);
    case Fig3Variant::D: {
      const PureState prepared = tensor(s.psi_prime, s.bystander_c);
      return permute(prepared, tensor(s.psi, s.bystander_c_prime).shape().labels());
    }
  }
  throw Error("unknown fig3 variant");
}

inline ExperimentReport run_fig3(const Fig3Setup& s, const Mode& mode = Exact{}) {
  ExperimentReport r;
  r.name = "fig3";
  const Fig3Variant variants[] = {Fig3Variant::A, Fig3Variant::B, Fig3Variant::C, Fig3Variant::D};
  const char* names[] = {"a", "b", "c", "d"};
  std::vector<std::vector<double>> p;
  for (std::size_t i = 0; i < 4; ++i) {
    const PureState joint = fig3_joint(s, variants[i]);
    if (const auto* smp = std::get_if<Sampled>(&mode)) {
      p.push_back(sample_frequencies(s.device, joint, s.target, smp->shots, smp->seed, i));
    } else {
      p.push_back(measure_prob(s.device, joint, s.target));
    }
    r.record(std::string("P(") + names[i] + ")", p.back());
  }
  const double rho_gap = max_abs(reduced_density(s.psi, s.target).matrix() -
                                 reduced_density(s.psi_prime, s.target).matrix());
  r.record("max |rho_a - rho_b|", {rho_gap});
  const bool same_rho = rho_gap <= tol::same_reduced_state;

  auto compare = [&](const char* label, std::size_t i, std::size_t j) {
    if (const auto* smp = std::get_if<Sampled>(&mode)) {
      const double n = static_cast<double>(smp->shots);
      detail::compare_frequencies(r, label, p[i], n, p[j], n);
    } else {
      detail::compare_exact(r, label, p[i], p[j], 1e-10);
    }
  };
  compare("P_a = P_c", 0, 2);
  compare("P_b = P_d", 1, 3);
  if (same_rho) {
    compare("P_a = P_b", 0, 1);
    compare("P_c = P_d", 2, 3);
  } else {
    r.notes.push_back("reduced states of A differ; cross-environment comparison not applicable");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Mixtures.

inline ExperimentReport run_ensemble(const BlackBoxDevice& dev, const EnsembleSource& src, const std::string& target,
                                     const Mode& mode = Exact{}) {
  ExperimentReport r;
  r.name = "ensemble";
  const Povm povm = reconstruct(dev, Exact{}).povm;
  const auto predicted = povm.probabilities(src.reduced(target));
  r.record("Tr(A rho_ensemble)", predicted);
  if (is_exact(mode)) {
    const auto p = ensemble_prob(dev, src, target);
    r.record("sum_l p_l P(S_l)", p);
    detail::compare_exact(r, "ensemble probabilities = Tr(A rho)", p, predicted, 1e-9);
    return r;
  }
  const auto& smp = std::get<Sampled>(mode);
  std::vector<OutcomeSampler> samplers;
  std::vector<double> weights;
  for (const auto& m : src.members()) {
    samplers.emplace_back(dev, m.state, target);
    weights.push_back(m.weight);
  }
  const CounterRng rng(smp.seed, 0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(dev.outcome_count()), 0);
  for (std::uint64_t i = 0; i < smp.shots; ++i) {
    const std::size_t l = detail::categorical(weights, rng.uniform_at(3 * i));
    ++counts[samplers[l].draw(rng.uniform_at(3 * i + 1), rng.uniform_at(3 * i + 2))];
  }
  const auto f = frequencies(counts);
  r.record("sampled frequencies", f);
  detail::compare_to_probabilities(r, "ensemble frequencies = Tr(A rho)", f, static_cast<double>(smp.shots),
                                   predicted);
  return r;
}

}  // namespace povmlab
