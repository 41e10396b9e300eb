// Command-line front end. Kept in a header so tests can drive it in-process.
//
//   povmlab experiment fig1|fig2|fig3|ensemble [flags]
//   povmlab tomography [flags]
//   povmlab certify [flags]
//
// Flags: --exact | --shots N, --seed S, --dim N, --lambda X (repeatable),
//        --device PATH, --config PATH, --output PATH.
//
// Experiment config (all fields optional):
//   {"experiment": "fig2", "device": "dev.json" or {...inline spec...},
//    "dim": 3, "target": "A", "lambda": [0.25, 0.5], "mode": "exact",
//    "shots": 1000000, "seed": 0,
//    "states": {"psi": ..., "psi_prime": ..., "psi0": ..., "psi1": ...,
//               "bystander_c": ..., "bystander_c_prime": ...,
//               "members": [{"weight": 0.5, "state": ...}, ...]}}
// A device path is resolved relative to the config file. Flags win over the
// config. Exit status: 0 PASS, 1 FAIL, 2 usage or spec error.
#pragma once

#include "povmlab/analysis.hpp"
#include "povmlab/experiments.hpp"
#include "povmlab/io.hpp"
#include "povmlab/tomography.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef POVMLAB_VERSION
#define POVMLAB_VERSION "0.0.0"
#endif

namespace povmlab::cli {

using io::json;

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

inline const std::string kPremiseNote =
    "premise: the state vector determines all outcome statistics (no hidden variables); "
    "this holds for the simulated quantum devices and is not tested in general";

struct RunConfig {
  std::string command;
  std::string experiment;
  std::string device_path;
  std::string config_path;
  std::string output_path;
  bool exact = false;
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  std::optional<Index> dim;
  std::vector<double> lambdas;
  std::string echo;
};

/// Everything a command needs after flags and config file are merged.
struct Context {
  RunConfig run;
  json config = json::object();
  std::string config_where = "config";
  BlackBoxDevice device{ProjectiveSpec::computational(2)};
  Mode mode = Exact{};
  std::uint64_t seed = 0;
  std::string target = "A";
  std::vector<double> lambdas;

  Index dim() const { return device.system_dim(); }

  std::optional<PureState> state(const std::string& name) const {
    if (!config.contains("states")) return std::nullopt;
    const json& s = config.at("states");
    if (!s.is_object() || !s.contains(name)) return std::nullopt;
    return io::state_from_json(s.at(name), config_where + ".states." + name);
  }
};

namespace detail {

inline Context resolve(const RunConfig& run) {
  Context ctx;
  ctx.run = run;
  std::filesystem::path base;
  if (!run.config_path.empty()) {
    ctx.config = io::read_json(run.config_path);
    ctx.config_where = run.config_path;
    if (!ctx.config.is_object()) throw io::SpecError(run.config_path + ": expected a JSON object");
    base = std::filesystem::path(run.config_path).parent_path();
  }
  const json& cfg = ctx.config;
  const std::string& where = ctx.config_where;

  if (cfg.contains("experiment") && !run.experiment.empty() && cfg.at("experiment") != run.experiment) {
    throw io::SpecError(where + ".experiment: config is for \"" + cfg.at("experiment").dump() +
                        "\", command asks for \"" + run.experiment + "\"");
  }

  std::optional<Index> dim = run.dim;
  if (!dim && cfg.contains("dim")) dim = io::detail::positive_int(cfg.at("dim"), where + ".dim");

  if (!run.device_path.empty()) {
    ctx.device = io::load_device(run.device_path);
  } else if (cfg.contains("device")) {
    const json& d = cfg.at("device");
    if (d.is_string()) {
      ctx.device = io::load_device(base / d.get<std::string>());
    } else {
      ctx.device = io::device_from_json(d, where + ".device");
    }
  } else {
    ctx.device = BlackBoxDevice(ProjectiveSpec::computational(dim.value_or(2)));
  }
  if (dim && *dim != ctx.device.system_dim()) {
    throw DimensionMismatch("--dim " + std::to_string(*dim) + " differs from the device dimension " +
                            std::to_string(ctx.device.system_dim()));
  }

  if (run.seed) {
    ctx.seed = *run.seed;
  } else if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_unsigned()) throw io::SpecError(where + ".seed: expected an unsigned integer");
    ctx.seed = cfg.at("seed").get<std::uint64_t>();
  }

  std::optional<std::uint64_t> cfg_shots;
  if (cfg.contains("shots")) {
    if (!cfg.at("shots").is_number_unsigned()) throw io::SpecError(where + ".shots: expected an unsigned integer");
    cfg_shots = cfg.at("shots").get<std::uint64_t>();
  }
  std::string cfg_mode = "exact";
  if (cfg.contains("mode")) {
    const json& m = cfg.at("mode");
    if (!m.is_string() || (m != "exact" && m != "sampled")) {
      throw io::SpecError(where + ".mode: expected \"exact\" or \"sampled\"");
    }
    cfg_mode = m.get<std::string>();
  }
  if (run.exact) {
    ctx.mode = Exact{};
  } else if (run.shots) {
    ctx.mode = Sampled{*run.shots, ctx.seed};
  } else if (cfg_mode == "sampled") {
    ctx.mode = Sampled{cfg_shots.value_or(1000000), ctx.seed};
  }
  if (const auto* s = std::get_if<Sampled>(&ctx.mode); s && s->shots < 1) {
    throw io::SpecError("shots must be at least 1");
  }

  ctx.lambdas = run.lambdas;
  if (ctx.lambdas.empty() && cfg.contains("lambda")) {
    const json& l = cfg.at("lambda");
    if (l.is_number()) {
      ctx.lambdas.push_back(l.get<double>());
    } else if (l.is_array()) {
      for (std::size_t i = 0; i < l.size(); ++i) {
        ctx.lambdas.push_back(io::detail::number(l[i], where + ".lambda[" + std::to_string(i) + "]"));
      }
    } else {
      throw io::SpecError(where + ".lambda: expected a number or an array of numbers");
    }
  }
  for (double x : ctx.lambdas) {
    if (!(x >= 0.0 && x <= 1.0)) throw io::SpecError("lambda " + std::to_string(x) + " is outside [0, 1]");
  }

  if (cfg.contains("target")) {
    if (!cfg.at("target").is_string()) throw io::SpecError(where + ".target: expected a string");
    ctx.target = cfg.at("target").get<std::string>();
  }
  return ctx;
}

inline json run_json(const ExperimentReport& r, const json& params = json::object()) {
  json j = io::report_to_json(r);
  if (r.checks.empty()) j["verdict"] = "SKIPPED";
  if (params.empty()) return j;
  json out;
  out["name"] = j["name"];
  out["parameters"] = params;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "name") out[it.key()] = it.value();
  }
  return out;
}

// Σ|n,n⟩/√N and Σ|n,n+1 mod N⟩/√N: distinct purifications of I/N.
inline PureState diagonal_pair(Index n, const std::string& target, bool shifted) {
  ComplexVector v = ComplexVector::Zero(n * n);
  for (Index k = 0; k < n; ++k) v[k * n + (shifted ? (k + 1) % n : k)] = 1.0;
  return PureState::normalized(SpaceShape{{target, n}, {"B", n}}, v);
}

inline std::uint64_t state_seed(std::uint64_t k) { return splitmix64(0x57A7E5EEDULL + k); }

inline std::pair<PureState, PureState> fig2_states(const Context& ctx) {
  const SpaceShape shape{{ctx.target, ctx.dim()}, {"B", ctx.dim()}};
  return {ctx.state("psi0").value_or(random_pure(shape, state_seed(0))),
          ctx.state("psi1").value_or(random_pure(shape, state_seed(1)))};
}

inline std::vector<double> dyadic_lambdas() {
  std::vector<double> out;
  for (int p = 0; p <= 16; ++p) out.push_back(p / 16.0);
  return out;
}

struct Outcome {
  std::vector<json> runs;
  std::vector<std::string> notes;
  json extra = json::object();
  bool pass = true;
};

inline void add(Outcome& o, const ExperimentReport& r, const json& params = json::object()) {
  o.runs.push_back(run_json(r, params));
  if (!r.checks.empty() && !r.pass()) o.pass = false;
}

inline Outcome cmd_fig1(const Context& ctx) {
  Fig1Setup s{ctx.device, ctx.state("psi").value_or(diagonal_pair(ctx.dim(), ctx.target, false)),
              ctx.state("psi_prime").value_or(diagonal_pair(ctx.dim(), ctx.target, true)), ctx.target};
  if (ctx.config.contains("apply_u")) s.apply_u = ctx.config.at("apply_u").get<bool>();
  Outcome o;
  add(o, run_fig1(s, ctx.mode));
  return o;
}

inline Outcome cmd_fig2(const Context& ctx) {
  const auto [psi0, psi1] = fig2_states(ctx);
  Outcome o;
  for (double lam : ctx.lambdas.empty() ? dyadic_lambdas() : ctx.lambdas) {
    json params;
    params["lambda"] = lam;
    add(o, run_fig2(Fig2Setup(ctx.device, psi0, psi1, lam, ctx.target), ctx.mode), params);
  }
  return o;
}

inline Outcome cmd_fig3(const Context& ctx) {
  const Index n = ctx.dim();
  const auto psi = ctx.state("psi").value_or(random_pure(SpaceShape{{ctx.target, n}, {"B", 2}, {"C", 2}}, state_seed(2)));
  std::optional<PureState> psi_prime = ctx.state("psi_prime");
  if (!psi_prime) {
    psi_prime = random_purification(reduced_density(psi, ctx.target), SpaceShape{{"B", 2}, {"C'", 3}}, state_seed(3));
  }
  Fig3Setup s{ctx.device, psi, *psi_prime,
              ctx.state("bystander_c").value_or(random_pure(SpaceShape{{"C", 2}}, state_seed(4))),
              ctx.state("bystander_c_prime").value_or(random_pure(SpaceShape{{"C'", 3}}, state_seed(5))),
              ctx.target};
  Outcome o;
  add(o, run_fig3(s, ctx.mode));
  return o;
}

inline Outcome cmd_ensemble(const Context& ctx) {
  std::vector<EnsembleMember> members;
  const json* list = nullptr;
  if (ctx.config.contains("states") && ctx.config.at("states").contains("members")) {
    list = &ctx.config.at("states").at("members");
  }
  if (list) {
    if (!list->is_array()) throw io::SpecError(ctx.config_where + ".states.members: expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string at = ctx.config_where + ".states.members[" + std::to_string(i) + "]";
      members.push_back({io::detail::number(io::detail::field((*list)[i], "weight", at), at + ".weight"),
                         io::state_from_json(io::detail::field((*list)[i], "state", at), at + ".state")});
    }
  } else {
    const SpaceShape shape{{ctx.target, ctx.dim()}, {"B", 2}};
    const double w[] = {0.2, 0.3, 0.5};
    for (std::uint64_t l = 0; l < 3; ++l) members.push_back({w[l], random_pure(shape, state_seed(10 + l))});
  }
  Outcome o;
  add(o, run_ensemble(ctx.device, EnsembleSource(std::move(members)), ctx.target, ctx.mode));
  return o;
}

/// Tomography stage shared by `tomography` and `certify`. Sampled-mode
/// allowances scale the per-entry 5σ bound by N (operator norm of an
/// N x N error matrix).
struct TomographyStage {
  TomographyResult result;
  ExperimentReport invariants;
  ExperimentReport consistency;
  double entry_bound = 1e-9;
};

inline TomographyStage tomography_stage(const Context& ctx) {
  TomographyStage t;
  t.result = reconstruct(ctx.device, ctx.mode);
  const bool exact = is_exact(ctx.mode);
  const double n = static_cast<double>(ctx.dim());
  t.entry_bound = t.result.completeness_bound;
  const PovmStatus st = check_povm(t.result.povm);

  ExperimentReport& r = t.invariants;
  r.name = "tomography";
  r.check("hermiticity max|A - A^dagger|", st.hermiticity, tol::hermitian);
  r.check("positivity max(0, -min eigenvalue)", std::max(0.0, -st.min_eigenvalue), exact ? 1e-9 : n * t.entry_bound);
  r.check("completeness max|sum A - I|", t.result.completeness_residual, t.result.completeness_bound);
  if (ctx.device.is_quantum()) {
    r.check("reconstruction vs device internals max|A - A_kraus|", povm_distance(t.result.povm, kraus_povm(ctx.device)),
            exact ? 1e-9 : t.entry_bound);
  }
  r.record("min eigenvalue", {st.min_eigenvalue});
  r.record("max eigenvalue", {st.max_eigenvalue});
  if (t.result.flagged) r.notes.push_back("completeness residual exceeds the statistical bound");
  if (!exact) r.notes.push_back("sampled mode: allowances are 5 standard errors per entry, times N for operator norms");

  const auto rep = consistency_check(ctx.device, t.result.povm, 100, ctx.seed, exact ? 1e-8 : n * t.entry_bound);
  ExperimentReport& c = t.consistency;
  c.name = "consistency";
  c.check("held-out joint states max|P - Tr(A rho)|", rep.max_residual, rep.tolerance);
  c.record("trials", {static_cast<double>(rep.trials)});
  return t;
}

inline Outcome cmd_tomography(const Context& ctx) {
  const auto t = tomography_stage(ctx);
  Outcome o;
  add(o, t.invariants);
  add(o, t.consistency);
  o.extra["povm"] = io::povm_to_json(t.result.povm);
  if (!ctx.run.output_path.empty()) io::write_file(ctx.run.output_path, io::dump(io::povm_to_json(t.result.povm)));
  return o;
}

inline Outcome cmd_certify(const Context& ctx) {
  const auto t = tomography_stage(ctx);
  Outcome o;
  add(o, t.invariants);
  if (!o.pass) {
    o.notes.push_back("stopped after the tomography stage");
    return o;
  }
  add(o, t.consistency);
  if (!o.pass) {
    o.notes.push_back("stopped after the consistency stage: the device is not described by a POVM");
    return o;
  }

  const bool exact = is_exact(ctx.mode);
  const double born_tol = exact ? 1e-8 : static_cast<double>(ctx.dim()) * t.entry_bound;
  ExperimentReport born;
  born.name = "born";
  const Povm& povm = t.result.povm;
  const auto candidates = certainty_candidates(povm);
  bool certain = static_cast<Index>(povm.outcomes()) == povm.dim;
  for (const auto& c : candidates) certain = certain && c.second >= 1.0 - born_tol;
  if (!certain) {
    born.notes.push_back("not maximal-certainty: " + std::to_string(povm.outcomes()) + " outcomes on dimension " +
                         std::to_string(povm.dim) + ", or some outcome cannot be certain; Born extraction skipped");
  } else {
    std::vector<DensityMatrix> states;
    for (const auto& c : candidates) states.push_back(c.first);
    const auto b = extract_born(povm, states, 100, ctx.seed, born_tol);
    double proj = 0.0;
    for (double d : b.projector_deviation) proj = std::max(proj, d);
    born.check("Gram deviation max|Phi^dagger Phi - I|", b.gram_deviation, born_tol);
    born.check("projector deviation max|A - |phi><phi||", proj, born_tol);
    born.check("Born rule max|Tr(A psi) - |<phi|psi>|^2|", b.born_residual, exact ? 1e-9 : born_tol);
    for (const auto& note : b.notes) born.notes.push_back(note);
  }
  add(o, born);

  ExperimentReport skipped;
  skipped.name = "appendix_d";
  try {
    const auto [psi0, psi1] = fig2_states(ctx);
    AppendixDOptions opt;
    if (!exact) {
      opt.q_max = 4;
      opt.irrational_count = 8;
    }
    add(o, check_appendix_d(fig2_oracle(ctx.device, psi0, psi1, ctx.target, ctx.mode), opt));
  } catch (const PreconditionError& e) {
    skipped.notes.push_back(e.what());
    add(o, skipped);
  }
  return o;
}

}  // namespace detail

inline json make_report(const Context& ctx, const detail::Outcome& o) {
  json j;
  j["tool"] = "povmlab";
  j["version"] = POVMLAB_VERSION;
  j["command"] = ctx.run.echo;
  j["device"] = ctx.device.kind();
  j["mode"] = mode_name(ctx.mode);
  if (const auto* s = std::get_if<Sampled>(&ctx.mode)) {
    j["shots"] = s->shots;
  } else {
    j["shots"] = nullptr;
  }
  j["seed"] = ctx.seed;
  for (auto it = o.extra.begin(); it != o.extra.end(); ++it) j[it.key()] = it.value();
  j["runs"] = o.runs;
  j["notes"] = o.notes;
  bool any_check = false;
  for (const auto& r : o.runs) any_check = any_check || !r.at("checks").empty();
  j["verdict"] = o.pass && any_check ? "PASS" : "FAIL";
  return j;
}

/// Parses argv and runs one command. Reports go to `out` (or --output),
/// diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"povmlab: black-box measurement devices, tomography and the Born rule", "povmlab"};
  app.set_version_flag("--version", std::string(POVMLAB_VERSION));
  app.require_subcommand(1);
  RunConfig run;

  auto common = [&run](CLI::App* sub) {
    auto* exact = sub->add_flag("--exact", run.exact, "exact probabilities (default)");
    auto* shots = sub->add_option("--shots", run.shots, "sampled mode with N shots")->check(CLI::PositiveNumber);
    exact->excludes(shots);
    sub->add_option("--seed", run.seed, "RNG seed (default 0)");
    sub->add_option("--dim", run.dim, "system dimension of the default device")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", run.lambdas, "mixing weight, repeatable")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--device", run.device_path, "device spec JSON")->check(CLI::ExistingFile);
    sub->add_option("--config", run.config_path, "experiment config JSON")->check(CLI::ExistingFile);
    sub->add_option("--output", run.output_path, "report file (tomography: POVM file)");
  };
  auto* exp = app.add_subcommand("experiment", "run a thought experiment");
  exp->add_option("name", run.experiment, "fig1 | fig2 | fig3 | ensemble")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "ensemble"}));
  common(exp);
  auto* tomo = app.add_subcommand("tomography", "reconstruct the POVM of a device");
  common(tomo);
  auto* cert = app.add_subcommand("certify", "tomography, consistency, Born extraction, a_lambda = lambda");
  common(cert);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  run.command = app.get_subcommands().front()->get_name();
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--output") {
      ++i;
      continue;
    }
    if (a.rfind("--output=", 0) == 0) continue;
    run.echo += (run.echo.empty() ? "" : " ") + a;
  }

  try {
    const Context ctx = detail::resolve(run);
    err << "povmlab: " << run.command << (run.experiment.empty() ? "" : " " + run.experiment) << " on "
        << ctx.device.kind() << " device (N = " << ctx.dim() << "), " << mode_name(ctx.mode) << " mode\n";
    detail::Outcome o;
    if (run.command == "experiment") {
      if (run.experiment == "fig1") o = detail::cmd_fig1(ctx);
      if (run.experiment == "fig2") o = detail::cmd_fig2(ctx);
      if (run.experiment == "fig3") o = detail::cmd_fig3(ctx);
      if (run.experiment == "ensemble") o = detail::cmd_ensemble(ctx);
      o.notes.push_back(kPremiseNote);
    } else if (run.command == "tomography") {
      o = detail::cmd_tomography(ctx);
    } else {
      o = detail::cmd_certify(ctx);
    }
    const json report = make_report(ctx, o);
    const std::string text = io::dump(report);
    if (run.command != "tomography" && !run.output_path.empty()) {
      io::write_file(run.output_path, text);
    } else {
      out << text;
    }
    const bool pass = report.at("verdict") == "PASS";
    err << "povmlab: verdict " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kExitPass : kExitFail;
  } catch (const Error& e) {
    err << "povmlab: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "povmlab: error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace povmlab::cli
