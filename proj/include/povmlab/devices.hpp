// Black-box measurement devices and state sources.
//
// A device is handed the whole joint state plus the label of the subsystem
// it measures. The quantum mechanisms only ever couple to that subsystem;
// that their statistics depend on the rest of the state solely through the
// reduced density matrix is checked by the test suites, not built in. The
// adversarial mechanism deliberately breaks this.
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/povm.hpp"
#include "povmlab/random.hpp"
#include "povmlab/rng.hpp"
#include "povmlab/state.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace povmlab {

/// Ideal measurement in an orthonormal basis; column k of `basis` is |φ_k⟩.
struct ProjectiveSpec {
  ComplexMatrix basis;

  explicit ProjectiveSpec(ComplexMatrix b) : basis(std::move(b)) {
    if (basis.rows() < 1 || !is_unitary(basis)) {
      throw PreconditionError("projective device: basis vectors are not orthonormal");
    }
  }
  static ProjectiveSpec computational(Index dim) { return ProjectiveSpec(ComplexMatrix::Identity(dim, dim)); }
};

/// System couples to an ancilla prepared in `ancilla_state` through the
/// unitary `interaction` on system ⊗ ancilla (system factor first); the
/// ancilla is then read out in the basis given by the columns of `readout`.
struct IndirectSpec {
  Index system_dim;
  ComplexVector ancilla_state;
  ComplexMatrix interaction;
  ComplexMatrix readout;

  IndirectSpec(Index n, ComplexVector e, ComplexMatrix v, ComplexMatrix r)
      : system_dim(n), ancilla_state(std::move(e)), interaction(std::move(v)), readout(std::move(r)) {
    const Index d = ancilla_state.size();
    if (n < 1 || d < 1) throw DimensionMismatch("indirect device: dimensions must be >= 1");
    if (std::abs(ancilla_state.norm() - 1.0) > tol::norm) {
      throw PreconditionError("indirect device: ancilla state is not normalised");
    }
    if (interaction.rows() != n * d || !is_unitary(interaction)) {
      throw PreconditionError("indirect device: interaction is not a unitary on system x ancilla");
    }
    if (readout.rows() != d || !is_unitary(readout)) {
      throw PreconditionError("indirect device: readout basis is not orthonormal");
    }
  }

  Index ancilla_dim() const { return ancilla_state.size(); }

  /// M_k = (I ⊗ ⟨r_k|) V (I ⊗ |e⟩), one N x N matrix per readout outcome.
  std::vector<ComplexMatrix> kraus_operators() const {
    const Index n = system_dim;
    const Index d = ancilla_dim();
    std::vector<ComplexMatrix> out;
    for (Index k = 0; k < d; ++k) {
      ComplexMatrix m = ComplexMatrix::Zero(n, n);
      for (Index so = 0; so < n; ++so) {
        for (Index si = 0; si < n; ++si) {
          Complex acc = 0.0;
          for (Index ao = 0; ao < d; ++ao) {
            for (Index ai = 0; ai < d; ++ai) {
              acc += std::conj(readout(ao, k)) * interaction(so * d + ao, si * d + ai) * ancilla_state[ai];
            }
          }
          m(so, si) = acc;
        }
      }
      out.push_back(std::move(m));
    }
    return out;
  }
};

/// Projective measurement whose result is reported through a noisy channel.
/// confusion(k, j) = P(report j | true outcome k); rows sum to one.
struct NoisySpec {
  ProjectiveSpec inner;
  Eigen::MatrixXd confusion;

  NoisySpec(ProjectiveSpec p, Eigen::MatrixXd c) : inner(std::move(p)), confusion(std::move(c)) {
    if (confusion.rows() != inner.basis.cols() || confusion.cols() < 1) {
      throw DimensionMismatch("noisy device: confusion matrix needs one row per true outcome");
    }
    if (confusion.minCoeff() < 0.0) throw PreconditionError("noisy device: negative confusion entry");
    for (Index k = 0; k < confusion.rows(); ++k) {
      if (std::abs(confusion.row(k).sum() - 1.0) > tol::confusion_sum) {
        throw PreconditionError("noisy device: confusion row " + std::to_string(k) + " does not sum to 1");
      }
    }
  }
};

/// Negative control: P(0) = |⟨0…0|Ψ⟩|² on the full joint state, the rest
/// spread evenly over the other outcomes. Not a function of the reduced
/// state, hence not describable by any POVM.
struct AdversarialSpec {
  Index system_dim;
  Index outcomes;

  AdversarialSpec(Index n, Index k = 2) : system_dim(n), outcomes(k) {
    if (n < 1 || k < 1) throw DimensionMismatch("adversarial device: dimensions must be >= 1");
  }
};

using Mechanism = std::variant<ProjectiveSpec, IndirectSpec, NoisySpec, AdversarialSpec>;

class BlackBoxDevice {
 public:
  explicit BlackBoxDevice(Mechanism m) : mech_(std::move(m)) {}

  Index system_dim() const {
    return std::visit(
        [](const auto& s) -> Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ProjectiveSpec>) return s.basis.rows();
          else if constexpr (std::is_same_v<T, NoisySpec>) return s.inner.basis.rows();
          else return s.system_dim;
        },
        mech_);
  }

  Index outcome_count() const {
    return std::visit(
        [](const auto& s) -> Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ProjectiveSpec>) return s.basis.cols();
          else if constexpr (std::is_same_v<T, IndirectSpec>) return s.ancilla_dim();
          else if constexpr (std::is_same_v<T, NoisySpec>) return s.confusion.cols();
          else return s.outcomes;
        },
        mech_);
  }

  std::string kind() const {
    static const char* names[] = {"projective", "indirect", "noisy", "adversarial"};
    return names[mech_.index()];
  }

  bool is_quantum() const { return !std::holds_alternative<AdversarialSpec>(mech_); }

  const Mechanism& mechanism() const { return mech_; }

 private:
  Mechanism mech_;
};

namespace detail {

inline void require_target(const BlackBoxDevice& dev, const PureState& joint, const std::string& target) {
  const Index d = joint.shape().dim_of(target);
  if (d != dev.system_dim()) {
    throw DimensionMismatch("device measures a " + std::to_string(dev.system_dim()) +
                            "-dimensional system but subsystem '" + target + "' has dimension " +
                            std::to_string(d));
  }
}

inline std::vector<double> projective_probs(const ProjectiveSpec& s, const ComplexMatrix& t) {
  const ComplexMatrix proj = s.basis.adjoint() * t;
  std::vector<double> p(static_cast<std::size_t>(proj.rows()));
  for (Index k = 0; k < proj.rows(); ++k) p[static_cast<std::size_t>(k)] = proj.row(k).squaredNorm();
  return p;
}

inline std::vector<double> indirect_probs(const IndirectSpec& s, const ComplexMatrix& t) {
  const Index n = s.system_dim;
  const Index d = s.ancilla_dim();
  const Index rest = t.cols();
  ComplexMatrix x(n * d, rest);
  for (Index si = 0; si < n; ++si) {
    for (Index a = 0; a < d; ++a) x.row(si * d + a) = t.row(si) * s.ancilla_state[a];
  }
  const ComplexMatrix y = s.interaction * x;
  std::vector<double> p(static_cast<std::size_t>(d), 0.0);
  for (Index k = 0; k < d; ++k) {
    double acc = 0.0;
    for (Index so = 0; so < n; ++so) {
      const auto block = y.middleRows(so * d, d);
      acc += (s.readout.col(k).adjoint() * block).squaredNorm();
    }
    p[static_cast<std::size_t>(k)] = acc;
  }
  return p;
}

inline std::vector<double> confuse(const Eigen::MatrixXd& c, const std::vector<double>& q) {
  std::vector<double> p(static_cast<std::size_t>(c.cols()), 0.0);
  for (Index k = 0; k < c.rows(); ++k) {
    for (Index j = 0; j < c.cols(); ++j) p[static_cast<std::size_t>(j)] += c(k, j) * q[static_cast<std::size_t>(k)];
  }
  return p;
}

inline std::vector<double> adversarial_probs(const AdversarialSpec& s, const PureState& joint) {
  const double p0 = std::norm(joint.amplitudes()[0]);
  std::vector<double> p(static_cast<std::size_t>(s.outcomes), 0.0);
  if (s.outcomes == 1) {
    p[0] = 1.0;
    return p;
  }
  p[0] = p0;
  for (Index k = 1; k < s.outcomes; ++k) p[static_cast<std::size_t>(k)] = (1.0 - p0) / static_cast<double>(s.outcomes - 1);
  return p;
}

/// Index of the bucket containing u under cumulative weights p.
inline std::size_t categorical(const std::vector<double>& p, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return k;
  }
  return p.size() - 1;
}

}  // namespace detail

/// Exact outcome probabilities of `dev` measuring subsystem `target` of `joint`.
inline std::vector<double> measure_prob(const BlackBoxDevice& dev, const PureState& joint, const std::string& target) {
  detail::require_target(dev, joint, target);
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AdversarialSpec>) {
          return detail::adversarial_probs(s, joint);
        } else {
          const ComplexMatrix t = amplitude_matrix(joint, {target});
          if constexpr (std::is_same_v<T, ProjectiveSpec>) return detail::projective_probs(s, t);
          else if constexpr (std::is_same_v<T, IndirectSpec>) return detail::indirect_probs(s, t);
          else return detail::confuse(s.confusion, detail::projective_probs(s.inner, t));
        }
      },
      dev.mechanism());
}

/// Draws per-outcome sampling tables: the first-stage distribution and, for
/// noisy devices, the confusion rows used in the second stage.
class OutcomeSampler {
 public:
  OutcomeSampler(const BlackBoxDevice& dev, const PureState& joint, const std::string& target) {
    detail::require_target(dev, joint, target);
    if (const auto* noisy = std::get_if<NoisySpec>(&dev.mechanism())) {
      first_ = detail::projective_probs(noisy->inner, amplitude_matrix(joint, {target}));
      for (Index k = 0; k < noisy->confusion.rows(); ++k) {
        std::vector<double> row(static_cast<std::size_t>(noisy->confusion.cols()));
        for (Index j = 0; j < noisy->confusion.cols(); ++j) row[static_cast<std::size_t>(j)] = noisy->confusion(k, j);
        rows_.push_back(std::move(row));
      }
    } else {
      first_ = measure_prob(dev, joint, target);
    }
    outcomes_ = static_cast<std::size_t>(dev.outcome_count());
  }

  /// Outcome of one shot given two independent uniforms.
  std::size_t draw(double u1, double u2) const {
    const std::size_t k = detail::categorical(first_, u1);
    return rows_.empty() ? k : detail::categorical(rows_[k], u2);
  }

  std::size_t outcomes() const { return outcomes_; }

 private:
  std::vector<double> first_;
  std::vector<std::vector<double>> rows_;
  std::size_t outcomes_ = 0;
};

/// One shot. Noisy devices sample the true outcome, then the reported one.
inline std::size_t measure_sample(const BlackBoxDevice& dev, const PureState& joint, const std::string& target,
                                  CounterRng& rng) {
  const OutcomeSampler sampler(dev, joint, target);
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return sampler.draw(u1, u2);
}

/// Outcome counts over `shots` shots; shot i consumes positions 2i and 2i+1
/// of the (seed, stream) counter stream.
inline std::vector<std::uint64_t> sample_counts(const BlackBoxDevice& dev, const PureState& joint,
                                                const std::string& target, std::uint64_t shots, std::uint64_t seed,
                                                std::uint64_t stream) {
  const OutcomeSampler sampler(dev, joint, target);
  const CounterRng rng(seed, stream);
  std::vector<std::uint64_t> counts(sampler.outcomes(), 0);
  for (std::uint64_t i = 0; i < shots; ++i) ++counts[sampler.draw(rng.uniform_at(2 * i), rng.uniform_at(2 * i + 1))];
  return counts;
}

inline std::vector<double> frequencies(const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  std::vector<double> f;
  for (auto c : counts) f.push_back(static_cast<double>(c) / static_cast<double>(total));
  return f;
}

inline std::vector<double> sample_frequencies(const BlackBoxDevice& dev, const PureState& joint,
                                              const std::string& target, std::uint64_t shots, std::uint64_t seed,
                                              std::uint64_t stream) {
  return frequencies(sample_counts(dev, joint, target, shots, seed, stream));
}

/// POVM built from the device internals; the independent oracle for tomography.
inline Povm kraus_povm(const BlackBoxDevice& dev) {
  Povm out;
  out.dim = dev.system_dim();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AdversarialSpec>) {
          throw UnsupportedDevice("kraus_povm: the adversarial device has no POVM");
        } else if constexpr (std::is_same_v<T, ProjectiveSpec>) {
          for (Index k = 0; k < s.basis.cols(); ++k) out.operators.push_back(s.basis.col(k) * s.basis.col(k).adjoint());
        } else if constexpr (std::is_same_v<T, IndirectSpec>) {
          for (const auto& m : s.kraus_operators()) out.operators.push_back(m.adjoint() * m);
        } else {
          for (Index j = 0; j < s.confusion.cols(); ++j) {
            ComplexMatrix a = ComplexMatrix::Zero(out.dim, out.dim);
            for (Index k = 0; k < s.confusion.rows(); ++k) {
              a += s.confusion(k, j) * (s.inner.basis.col(k) * s.inner.basis.col(k).adjoint());
            }
            out.operators.push_back(std::move(a));
          }
        }
      },
      dev.mechanism());
  return out;
}

// ---------------------------------------------------------------------------
// Random device factories.

inline BlackBoxDevice random_projective(Index n, std::uint64_t seed) {
  return BlackBoxDevice(ProjectiveSpec(random_unitary(n, seed)));
}

inline BlackBoxDevice random_indirect(Index n, Index ancilla_dim, std::uint64_t seed) {
  CounterRng rng(seed, 0x1D1);
  ComplexVector e = gaussian_vector(ancilla_dim, rng);
  e.normalize();
  return BlackBoxDevice(IndirectSpec(n, e, random_unitary(n * ancilla_dim, splitmix64(seed + 1)),
                                     random_unitary(ancilla_dim, splitmix64(seed + 2))));
}

inline BlackBoxDevice random_noisy(Index n, Index reported, std::uint64_t seed) {
  CounterRng rng(seed, 0x0015E);
  Eigen::MatrixXd c(n, reported);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < reported; ++j) c(k, j) = rng.uniform();
    c.row(k) /= c.row(k).sum();
  }
  return BlackBoxDevice(NoisySpec(ProjectiveSpec(random_unitary(n, splitmix64(seed + 3))), c));
}

// ---------------------------------------------------------------------------
// Ensembles.

struct EnsembleMember {
  double weight;
  PureState state;
};

/// Probabilistic mixture of pure states sharing one space.
class EnsembleSource {
 public:
  explicit EnsembleSource(std::vector<EnsembleMember> members) : members_(std::move(members)) {
    if (members_.empty()) throw PreconditionError("ensemble: no members");
    double total = 0.0;
    for (const auto& m : members_) {
      if (!(m.weight > 0.0)) throw PreconditionError("ensemble: weights must be positive");
      if (m.state.shape() != members_.front().state.shape()) {
        throw DimensionMismatch("ensemble: members live on different spaces");
      }
      total += m.weight;
    }
    if (std::abs(total - 1.0) > tol::ensemble_weights) throw PreconditionError("ensemble: weights do not sum to 1");
  }

  const std::vector<EnsembleMember>& members() const { return members_; }
  const SpaceShape& shape() const { return members_.front().state.shape(); }

  /// Σ_l p_l ρ_l on the `target` subsystem.
  DensityMatrix reduced(const std::string& target) const {
    ComplexMatrix acc;
    for (const auto& m : members_) {
      const auto r = reduced_density(m.state, target);
      if (acc.size() == 0) acc = ComplexMatrix::Zero(r.dim(), r.dim());
      acc += m.weight * r.matrix();
    }
    return DensityMatrix(shape().select({target}), acc);
  }

 private:
  std::vector<EnsembleMember> members_;
};

/// Law of total probability over the ensemble members.
inline std::vector<double> ensemble_prob(const BlackBoxDevice& dev, const EnsembleSource& src,
                                         const std::string& target) {
  std::vector<double> p(static_cast<std::size_t>(dev.outcome_count()), 0.0);
  for (const auto& m : src.members()) {
    const auto q = measure_prob(dev, m.state, target);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += m.weight * q[k];
  }
  return p;
}

}  // namespace povmlab
