// Executable checks of the two analytic arguments: the functional-equation
// route to a_λ = λ, and the extraction of the Born rule from a maximal POVM.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/experiments.hpp"
#include "povmlab/povm.hpp"
#include "povmlab/random.hpp"
#include "povmlab/report.hpp"
#include "povmlab/state.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace povmlab {

/// λ ↦ a_λ on [0, 1], with an optional standard error per point (zero for
/// exact oracles).
struct ALambdaOracle {
  std::function<double(double)> value;
  std::function<double(double)> sigma = [](double) { return 0.0; };
};

/// a_λ = p(μ:1) read off the fig2 protocol for a fixed device and state pair.
/// Requires F(ρ₀) ≠ F(ρ₁) for some outcome: with a constant F the
/// functional equation carries no information about a_λ.
inline ALambdaOracle fig2_oracle(const BlackBoxDevice& device, const PureState& psi0, const PureState& psi1,
                                 const std::string& target, const Mode& mode) {
  const double gap =
      max_abs_diff(measure_prob(device, psi0, target), measure_prob(device, psi1, target));
  if (gap <= 1e-6) {
    throw PreconditionError("fig2 oracle: F(rho0) = F(rho1) for every outcome; a_lambda is not identifiable");
  }
  ALambdaOracle o;
  o.value = [=](double lambda) {
    const Fig2Setup setup(device, psi0, psi1, lambda, target);
    const auto rep = run_fig2(setup, mode);
    return rep.find_data("a_lambda")->values.front();
  };
  if (const auto* s = std::get_if<Sampled>(&mode)) {
    const auto shots = s->shots;
    o.sigma = [shots](double lambda) { return binomial_sigma(lambda, shots); };
  }
  return o;
}

struct AppendixDOptions {
  int q_max = 8;
  double tol = 1e-10;
  int coarse_depth = 3;        // dyadic grid for the two-point identities
  int irrational_count = 20;
};

namespace detail {

class MemoOracle {
 public:
  explicit MemoOracle(const ALambdaOracle& o) : o_(o) {}
  double operator()(double x) {
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    return cache_[x] = o_.value(x);
  }
  double sigma(double x) const { return o_.sigma(x); }

 private:
  const ALambdaOracle& o_;
  std::map<double, double> cache_;
};

inline std::vector<double> dyadic_grid(int depth) {
  std::vector<double> g;
  const double denom = std::ldexp(1.0, depth);
  for (long p = 0; p <= static_cast<long>(denom); ++p) g.push_back(static_cast<double>(p) / denom);
  return g;
}

// Fractional parts of j·(√5−1)/2: irrational points spread over (0, 1).
inline std::vector<double> irrational_grid(int count) {
  std::vector<double> g;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int j = 1; j <= count; ++j) {
    const double x = j * phi;
    g.push_back(x - std::floor(x));
  }
  return g;
}

}  // namespace detail

/// Runs the functional-equation argument step by step against an oracle.
///
/// Checks, each within `tol` plus five combined standard errors:
///   bounds and endpoints   0 ≤ a ≤ 1, a_0 = 0, a_1 = 1
///   symmetry               a_λ + a_{1−λ} = 1
///   midpoint               a_{(x+y)/2} = (a_x + a_y)/2
///   multiplicativity       a_{xy} = a_x a_y
///   monotonicity           x ≤ y ⇒ a_x ≤ a_y
///   dyadic recursion       a_{p/2^q} equals the value obtained from a_0,
///                          a_{1/2} = ½, a_1 by repeated midpoints, q ≤ q_max
///   dyadic sandwich        λ_q ≤ a_λ ≤ 1 − (1−λ)_q at irrationals, where
///                          λ_q = ⌊2^q λ⌋ / 2^q
///   conclusion             a_λ = λ at every evaluated point
/// With a nonzero sigma the measured value is the worst residual divided by
/// its allowance, so the tolerance is 1.
inline ExperimentReport check_appendix_d(const ALambdaOracle& oracle, const AppendixDOptions& opt = {}) {
  ExperimentReport r;
  r.name = "appendix_d";
  detail::MemoOracle a(oracle);
  bool noisy = false;

  struct Acc {
    double worst = 0.0;       // raw residual
    double worst_ratio = 0.0; // residual / allowance
  };
  auto note = [&](Acc& acc, double resid, double combined_sigma) {
    if (combined_sigma > 0.0) noisy = true;
    acc.worst = std::max(acc.worst, resid);
    acc.worst_ratio = std::max(acc.worst_ratio, resid / (opt.tol + kSigmaBound * combined_sigma));
  };
  auto emit = [&](const std::string& name, const Acc& acc) {
    if (noisy) {
      r.check(name + " (residual / allowance)", acc.worst_ratio, 1.0, {acc.worst});
    } else {
      r.check(name, acc.worst, opt.tol, {acc.worst});
    }
  };
  auto hyp = [](double x, double y) { return std::sqrt(x * x + y * y); };

  const auto fine = detail::dyadic_grid(opt.q_max);
  const auto coarse = detail::dyadic_grid(std::min(opt.coarse_depth, opt.q_max));
  const auto irr = detail::irrational_grid(opt.irrational_count);

  {
    Acc acc;
    for (double x : fine) {
      const double v = a(x);
      note(acc, std::max({0.0, -v, v - 1.0}), a.sigma(x));
    }
    for (double x : irr) {
      const double v = a(x);
      note(acc, std::max({0.0, -v, v - 1.0}), a.sigma(x));
    }
    note(acc, std::abs(a(0.0)), a.sigma(0.0));
    note(acc, std::abs(a(1.0) - 1.0), a.sigma(1.0));
    emit("bounds 0 <= a <= 1, a_0 = 0, a_1 = 1", acc);
  }
  {
    Acc acc;
    auto sym = [&](double x) { note(acc, std::abs(a(x) + a(1.0 - x) - 1.0), hyp(a.sigma(x), a.sigma(1.0 - x))); };
    for (double x : fine) sym(x);
    for (double x : irr) sym(x);
    emit("symmetry a_x + a_(1-x) = 1", acc);
  }
  {
    Acc mid, mul;
    for (double x : coarse) {
      for (double y : coarse) {
        const double m = 0.5 * (x + y);
        note(mid, std::abs(a(m) - 0.5 * (a(x) + a(y))), hyp(a.sigma(m), 0.5 * hyp(a.sigma(x), a.sigma(y))));
        const double p = x * y;
        note(mul, std::abs(a(p) - a(x) * a(y)), hyp(a.sigma(p), hyp(a(y) * a.sigma(x), a(x) * a.sigma(y))));
      }
    }
    emit("midpoint a_((x+y)/2) = (a_x + a_y)/2", mid);
    emit("multiplicativity a_(xy) = a_x a_y", mul);
  }
  {
    Acc acc;
    std::map<double, bool> pts;
    for (double x : fine) pts[x] = true;
    for (double x : irr) pts[x] = true;
    double prev = -1.0;
    for (const auto& [x, unused] : pts) {
      if (prev >= 0.0) note(acc, std::max(0.0, a(prev) - a(x)), hyp(a.sigma(prev), a.sigma(x)));
      prev = x;
    }
    emit("monotonicity", acc);
  }
  {
    // Repeated midpoints from a_0 = 0, a_(1/2) = 1/2, a_1 = 1.
    std::map<double, double> rec{{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}};
    for (int q = 2; q <= opt.q_max; ++q) {
      const double denom = std::ldexp(1.0, q);
      for (long p = 1; p < static_cast<long>(denom); p += 2) {
        const double lo = static_cast<double>(p - 1) / denom;
        const double hi = static_cast<double>(p + 1) / denom;
        rec[static_cast<double>(p) / denom] = 0.5 * (rec.at(lo) + rec.at(hi));
      }
    }
    Acc acc;
    for (const auto& [x, v] : rec) note(acc, std::abs(a(x) - v), a.sigma(x));
    if (rec.count(0.375)) r.record("a_(3/8) by midpoint recursion", {rec.at(0.375)});
    emit("dyadic recursion a_(p/2^q)", acc);
  }
  {
    Acc acc;
    const double denom = std::ldexp(1.0, opt.q_max);
    for (double x : irr) {
      const double lower = std::floor(denom * x) / denom;
      const double upper = 1.0 - std::floor(denom * (1.0 - x)) / denom;
      const double v = a(x);
      note(acc, std::max({0.0, lower - v, v - upper}), a.sigma(x));
    }
    emit("dyadic sandwich at irrationals", acc);
  }
  {
    Acc acc;
    for (double x : fine) note(acc, std::abs(a(x) - x), a.sigma(x));
    for (double x : irr) note(acc, std::abs(a(x) - x), a.sigma(x));
    emit("conclusion a_lambda = lambda", acc);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Born rule from a maximal POVM.

struct BornExtract {
  /// Column k is |φ_k⟩, phase-normalised.
  ComplexMatrix phis;
  bool is_projective = false;
  std::vector<double> projector_deviation;  // max|A^(k) − |φ_k⟩⟨φ_k||
  std::vector<int> unit_multiplicity;       // eigenvalues of A^(k) within tol of 1
  std::vector<double> certainty_purity;     // Tr ρ_k² of the certainty states
  double gram_deviation = 0.0;              // max|Φ†Φ − I|
  double basis_completeness = 0.0;          // max|Σ|φ_k⟩⟨φ_k| − I|
  double born_residual = 0.0;               // max|Tr(A^(k)ψψ†) − |⟨φ_k|ψ⟩|²|
  std::vector<std::string> notes;

  std::vector<double> probabilities(const ComplexVector& psi) const {
    std::vector<double> p;
    for (Index k = 0; k < phis.cols(); ++k) p.push_back(std::norm(phis.col(k).dot(psi)));
    return p;
  }
};

/// For each outcome, the pure state maximising its probability (top
/// eigenvector of A^(k)) and that probability.
inline std::vector<std::pair<DensityMatrix, double>> certainty_candidates(const Povm& povm) {
  std::vector<std::pair<DensityMatrix, double>> out;
  const SpaceShape shape{{"A", povm.dim}};
  for (const auto& a : povm.operators) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()));
    const ComplexVector v = es.eigenvectors().col(povm.dim - 1);
    out.emplace_back(DensityMatrix::from_pure(PureState::normalized(shape, v)), es.eigenvalues()[povm.dim - 1]);
  }
  return out;
}

/// `tol` sets the certainty window (p ≥ 1 − tol), the unit-eigenvalue window
/// and the projector/Gram thresholds behind is_projective. Reconstructions
/// from sampled data need a statistical allowance here.
inline BornExtract extract_born(const Povm& povm, const std::vector<DensityMatrix>& certainty_states,
                                std::size_t test_states = 100, std::uint64_t seed = 0, double tol = 1e-8) {
  const Index n = povm.dim;
  if (static_cast<Index>(povm.outcomes()) != n) {
    throw NotMaximal("extract_born: " + std::to_string(povm.outcomes()) + " outcomes on a " + std::to_string(n) +
                     "-dimensional space is not a maximal measurement");
  }
  if (static_cast<Index>(certainty_states.size()) != n) {
    throw PreconditionError("extract_born: need one certainty state per outcome");
  }
  BornExtract out;
  out.phis.resize(n, n);
  bool degenerate = false;
  for (Index k = 0; k < n; ++k) {
    const auto& a = povm.operators[static_cast<std::size_t>(k)];
    const double pk = (a * certainty_states[static_cast<std::size_t>(k)].matrix()).trace().real();
    if (pk < 1.0 - tol) {
      throw CertaintyViolated("extract_born: certainty state " + std::to_string(k) + " yields its outcome with p = " +
                              std::to_string(pk));
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()));
    int mult = 0;
    for (Index i = 0; i < n; ++i) mult += std::abs(es.eigenvalues()[i] - 1.0) <= tol ? 1 : 0;
    if (mult == 0) throw CertaintyViolated("extract_born: A^(" + std::to_string(k) + ") has no unit eigenvalue");
    if (mult > 1) {
      degenerate = true;
      out.notes.push_back("A^(" + std::to_string(k) + ") has a degenerate unit eigenvalue; input inconsistent with a maximal measurement");
    }
    out.unit_multiplicity.push_back(mult);
    ComplexVector phi = es.eigenvectors().col(n - 1);
    fix_phase(phi);
    out.phis.col(k) = phi;
    out.projector_deviation.push_back(max_abs(a - phi * phi.adjoint()));
    out.certainty_purity.push_back(certainty_states[static_cast<std::size_t>(k)].purity());
  }
  out.gram_deviation = max_abs(out.phis.adjoint() * out.phis - ComplexMatrix::Identity(n, n));
  out.basis_completeness = max_abs(out.phis * out.phis.adjoint() - ComplexMatrix::Identity(n, n));

  const SpaceShape shape{{"A", n}};
  for (std::size_t t = 0; t < test_states; ++t) {
    const PureState psi = random_pure(shape, splitmix64(seed + 0xB0B + t));
    const auto q = out.probabilities(psi.amplitudes());
    const auto p = povm.probabilities(DensityMatrix::from_pure(psi));
    out.born_residual = std::max(out.born_residual, max_abs_diff(p, q));
  }
  double worst_projector = 0.0;
  for (double d : out.projector_deviation) worst_projector = std::max(worst_projector, d);
  out.is_projective = !degenerate && out.gram_deviation <= tol && worst_projector <= tol;
  return out;
}

}  // namespace povmlab
