// JSON interchange: device specs, POVM files, experiment configs, reports.
//
// Complex numbers are [re, im]; a bare number is read as a real value.
// Matrices are arrays of rows. Floats are written in the shortest form
// that parses back to the same double.
//
// Device spec:
//   {"kind": "projective", "dim": N, "basis": [φ_0, ..., φ_{N-1}]}
//   {"kind": "indirect", "dim": N, "ancilla_dim": d, "ancilla_state": e,
//    "interaction": (N·d)x(N·d) rows, system factor first,
//    "readout": [r_0, ..., r_{d-1}]}
//   {"kind": "noisy", "dim": N, "basis": [...], "confusion": N rows of K reals}
//   {"kind": "adversarial", "dim": N, "outcomes": K}
// "basis" is optional (computational basis). Vectors are arrays of complex.
//
// POVM file: {"dim": N, "operators": [N x N matrix, ...]}
//
// State spec (experiment configs):
//   {"preset": "singlet", "labels": ["A", "B"]}
//   {"preset": "phi_lambda", "lambda": x, "labels": ["alpha", "beta"]}
//   {"preset": "random", "subsystems": [...], "seed": s}
//   {"subsystems": [{"label": "A", "dim": 2}, ...], "amplitudes": [...]}
#pragma once

#include "povmlab/core.hpp"
#include "povmlab/devices.hpp"
#include "povmlab/experiments.hpp"
#include "povmlab/povm.hpp"
#include "povmlab/random.hpp"
#include "povmlab/report.hpp"
#include "povmlab/state.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace povmlab::io {

using json = nlohmann::ordered_json;

/// Malformed input file; the message names the file and field.
class SpecError : public Error {
 public:
  using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw SpecError(where + ": " + what);
}

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where, "missing field \"" + key + "\"");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

inline Index positive_int(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 1) fail(where, "expected a positive integer");
  return static_cast<Index>(j.get<long long>());
}

}  // namespace detail

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    detail::fail(where, "expected a complex number [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v[i]));
  return out;
}

inline ComplexVector vector_from_json(const json& j, const std::string& where, Index expect = -1) {
  if (!j.is_array()) detail::fail(where, "expected an array of complex numbers");
  if (expect >= 0 && static_cast<Index>(j.size()) != expect) {
    detail::fail(where, "expected " + std::to_string(expect) + " entries, got " + std::to_string(j.size()));
  }
  ComplexVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = complex_from_json(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

inline json matrix_to_json(const ComplexMatrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

inline ComplexMatrix matrix_from_json(const json& j, const std::string& where, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    detail::fail(where, "expected " + std::to_string(rows) + " rows");
  }
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    m.row(r) = vector_from_json(j[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]", cols).transpose();
  }
  return m;
}

/// Columns of the result are the listed vectors.
inline ComplexMatrix columns_from_json(const json& j, const std::string& where, Index count, Index dim) {
  return matrix_from_json(j, where, count, dim).transpose();
}

// ---------------------------------------------------------------------------
// Files.

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError(path.string() + ": cannot write file");
  out << text;
}

// ---------------------------------------------------------------------------
// Devices.

inline json device_to_json(const BlackBoxDevice& dev) {
  json j;
  j["kind"] = dev.kind();
  j["dim"] = dev.system_dim();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ProjectiveSpec>) {
          j["basis"] = matrix_to_json(s.basis.transpose());
        } else if constexpr (std::is_same_v<T, IndirectSpec>) {
          j["ancilla_dim"] = s.ancilla_dim();
          j["ancilla_state"] = vector_to_json(s.ancilla_state);
          j["interaction"] = matrix_to_json(s.interaction);
          j["readout"] = matrix_to_json(s.readout.transpose());
        } else if constexpr (std::is_same_v<T, NoisySpec>) {
          j["basis"] = matrix_to_json(s.inner.basis.transpose());
          json rows = json::array();
          for (Index k = 0; k < s.confusion.rows(); ++k) {
            json row = json::array();
            for (Index c = 0; c < s.confusion.cols(); ++c) row.push_back(s.confusion(k, c));
            rows.push_back(row);
          }
          j["confusion"] = rows;
        } else {
          j["outcomes"] = s.outcomes;
        }
      },
      dev.mechanism());
  return j;
}

inline BlackBoxDevice device_from_json(const json& j, const std::string& where) {
  const std::string kind = [&] {
    const json& k = detail::field(j, "kind", where);
    if (!k.is_string()) detail::fail(where + ".kind", "expected a string");
    return k.get<std::string>();
  }();
  const Index n = detail::positive_int(detail::field(j, "dim", where), where + ".dim");
  auto basis = [&]() {
    if (!j.contains("basis")) return ProjectiveSpec::computational(n);
    return ProjectiveSpec(columns_from_json(j.at("basis"), where + ".basis", n, n));
  };
  try {
    if (kind == "projective") return BlackBoxDevice(basis());
    if (kind == "indirect") {
      const Index d = detail::positive_int(detail::field(j, "ancilla_dim", where), where + ".ancilla_dim");
      return BlackBoxDevice(IndirectSpec(
          n, vector_from_json(detail::field(j, "ancilla_state", where), where + ".ancilla_state", d),
          matrix_from_json(detail::field(j, "interaction", where), where + ".interaction", n * d, n * d),
          columns_from_json(detail::field(j, "readout", where), where + ".readout", d, d)));
    }
    if (kind == "noisy") {
      const json& c = detail::field(j, "confusion", where);
      if (!c.is_array() || static_cast<Index>(c.size()) != n || !c[0].is_array() || c[0].empty()) {
        detail::fail(where + ".confusion", "expected " + std::to_string(n) + " non-empty rows");
      }
      Eigen::MatrixXd m(n, static_cast<Index>(c[0].size()));
      for (Index r = 0; r < n; ++r) {
        const json& row = c[static_cast<std::size_t>(r)];
        const std::string at = where + ".confusion[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<Index>(row.size()) != m.cols()) detail::fail(at, "ragged row");
        for (Index k = 0; k < m.cols(); ++k) m(r, k) = detail::number(row[static_cast<std::size_t>(k)], at);
      }
      return BlackBoxDevice(NoisySpec(basis(), m));
    }
    if (kind == "adversarial") {
      const Index k = j.contains("outcomes") ? detail::positive_int(j.at("outcomes"), where + ".outcomes") : 2;
      return BlackBoxDevice(AdversarialSpec(n, k));
    }
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    detail::fail(where, e.what());
  }
  detail::fail(where + ".kind", "unknown device kind \"" + kind + "\"");
}

inline BlackBoxDevice load_device(const std::filesystem::path& path) {
  return device_from_json(read_json(path), path.string());
}

// ---------------------------------------------------------------------------
// POVMs.

inline json povm_to_json(const Povm& povm) {
  json j;
  j["dim"] = povm.dim;
  json ops = json::array();
  for (const auto& a : povm.operators) ops.push_back(matrix_to_json(a));
  j["operators"] = ops;
  return j;
}

inline Povm povm_from_json(const json& j, const std::string& where) {
  Povm p;
  p.dim = detail::positive_int(detail::field(j, "dim", where), where + ".dim");
  const json& ops = detail::field(j, "operators", where);
  if (!ops.is_array() || ops.empty()) detail::fail(where + ".operators", "expected a non-empty array");
  for (std::size_t k = 0; k < ops.size(); ++k) {
    p.operators.push_back(matrix_from_json(ops[k], where + ".operators[" + std::to_string(k) + "]", p.dim, p.dim));
  }
  return p;
}

inline Povm load_povm(const std::filesystem::path& path) { return povm_from_json(read_json(path), path.string()); }

// ---------------------------------------------------------------------------
// States.

inline SpaceShape shape_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) detail::fail(where, "expected a non-empty array of subsystems");
  std::vector<Subsystem> parts;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& lab = detail::field(j[i], "label", at);
    if (!lab.is_string()) detail::fail(at + ".label", "expected a string");
    parts.push_back({lab.get<std::string>(), detail::positive_int(detail::field(j[i], "dim", at), at + ".dim")});
  }
  try {
    return SpaceShape(std::move(parts));
  } catch (const Error& e) {
    detail::fail(where, e.what());
  }
}

inline std::pair<std::string, std::string> two_labels(const json& j, const std::string& where, std::string a,
                                                      std::string b) {
  if (!j.contains("labels")) return {a, b};
  const json& l = j.at("labels");
  if (!l.is_array() || l.size() != 2 || !l[0].is_string() || !l[1].is_string()) {
    detail::fail(where + ".labels", "expected two strings");
  }
  return {l[0].get<std::string>(), l[1].get<std::string>()};
}

inline PureState state_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) detail::fail(where, "expected a state object");
  try {
    if (j.contains("preset")) {
      const std::string preset = j.at("preset").is_string() ? j.at("preset").get<std::string>() : "";
      if (preset == "singlet") {
        const auto [a, b] = two_labels(j, where, "A", "B");
        ComplexVector v = ComplexVector::Zero(4);
        v[1] = 1.0;
        v[2] = -1.0;
        return PureState::normalized(SpaceShape{{a, 2}, {b, 2}}, v);
      }
      if (preset == "phi_lambda") {
        const double lam = detail::number(detail::field(j, "lambda", where), where + ".lambda");
        const auto [a, b] = two_labels(j, where, kAlpha, kBeta);
        const PureState phi = make_phi_lambda(lam);
        return PureState(SpaceShape{{a, 2}, {b, 2}}, phi.amplitudes());
      }
      if (preset == "random") {
        const SpaceShape shape = shape_from_json(detail::field(j, "subsystems", where), where + ".subsystems");
        const json& s = detail::field(j, "seed", where);
        if (!s.is_number_unsigned()) detail::fail(where + ".seed", "expected an unsigned integer");
        return random_pure(shape, s.get<std::uint64_t>());
      }
      detail::fail(where + ".preset", "unknown preset");
    }
    const SpaceShape shape = shape_from_json(detail::field(j, "subsystems", where), where + ".subsystems");
    return PureState(shape, vector_from_json(detail::field(j, "amplitudes", where), where + ".amplitudes",
                                             shape.total_dim()));
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    detail::fail(where, e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports.

inline json report_to_json(const ExperimentReport& r) {
  json j;
  j["name"] = r.name;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json e;
    e["name"] = c.name;
    e["measured"] = c.measured;
    e["tolerance"] = c.tolerance;
    e["values"] = c.values;
    e["verdict"] = c.pass ? "PASS" : "FAIL";
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  json data = json::object();
  for (const auto& d : r.data) data[d.name] = d.values;
  j["data"] = std::move(data);
  j["notes"] = r.notes;
  j["verdict"] = r.pass() ? "PASS" : "FAIL";
  return j;
}

}  // namespace povmlab::io
