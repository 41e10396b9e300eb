#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

namespace povmlab {

/// Probabilities evaluated in closed form.
struct Exact {};

/// Probabilities estimated from `shots` simulated runs of a seeded stream.
struct Sampled {
  std::uint64_t shots = 1'000'000;
  std::uint64_t seed = 0;
};

using Mode = std::variant<Exact, Sampled>;

inline bool is_exact(const Mode& m) { return std::holds_alternative<Exact>(m); }

inline std::string mode_name(const Mode& m) { return is_exact(m) ? "exact" : "sampled"; }

/// Binomial standard error of a frequency with true probability p.
inline double binomial_sigma(double p, std::uint64_t shots) {
  const double v = p * (1.0 - p);
  return std::sqrt((v > 0.0 ? v : 0.0) / static_cast<double>(shots));
}

}  // namespace povmlab
