// Check/verdict bookkeeping shared by experiments, tomography and analysis.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace povmlab {

/// One pass/fail entry: `measured` is a residual (or z-score, see name)
/// that passes when it does not exceed `tolerance`.
struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<double> values;
};

/// Named data without a verdict (probability vectors, estimates).
struct Measurement {
  std::string name;
  std::vector<double> values;
};

struct ExperimentReport {
  std::string name;
  std::vector<Measurement> data;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  Check& check(std::string check_name, double measured, double tolerance, std::vector<double> values = {}) {
    const bool ok = std::isfinite(measured) && measured <= tolerance;
    checks.push_back({std::move(check_name), measured, tolerance, ok, std::move(values)});
    return checks.back();
  }

  void record(std::string data_name, std::vector<double> values) {
    data.push_back({std::move(data_name), std::move(values)});
  }

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  const Check* find(const std::string& check_name) const {
    for (const auto& c : checks) {
      if (c.name == check_name) return &c;
    }
    return nullptr;
  }

  const Measurement* find_data(const std::string& data_name) const {
    for (const auto& d : data) {
      if (d.name == data_name) return &d;
    }
    return nullptr;
  }
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return d;
}

/// Largest |d_k| / σ_k. A nonzero deviation with σ = 0 scores as 1e9.
inline double max_zscore(const std::vector<double>& d, const std::vector<double>& sigma) {
  double z = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double a = std::abs(d[k]);
    if (sigma[k] > 0.0) {
      z = std::max(z, a / sigma[k]);
    } else if (a > 1e-12) {
      z = std::max(z, 1e9);
    }
  }
  return z;
}

}  // namespace povmlab
