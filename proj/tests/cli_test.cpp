#include "povmlab/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace povmlab;
using io::json;

namespace {

const std::filesystem::path& workdir() {
  static const auto dir = [] {
    auto d = std::filesystem::temp_directory_path() / "povmlab_cli_test";
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_device(const std::string& name, const BlackBoxDevice& dev) {
  const auto path = workdir() / name;
  io::write_file(path, io::dump(io::device_to_json(dev)));
  return path.string();
}

struct Result {
  int code;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "povmlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(POVMLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const json* find_check(const json& run, const std::string& prefix) {
  for (const auto& c : run.at("checks")) {
    if (c.at("name").get<std::string>().rfind(prefix, 0) == 0) return &c;
  }
  return nullptr;
}

}  // namespace

TEST(Cli, Fig2QuarterLambdaIsExact) {
  const auto r = run({"experiment", "fig2", "--lambda", "0.25", "--exact"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = r.report();
  ASSERT_EQ(rep["runs"].size(), 1u);
  EXPECT_EQ(rep["runs"][0]["data"]["a_lambda"][0].get<double>(), 0.25);
  EXPECT_EQ(rep["runs"][0]["parameters"]["lambda"].get<double>(), 0.25);
  EXPECT_EQ(rep["verdict"], "PASS");
  EXPECT_EQ(rep["command"], "experiment fig2 --lambda 0.25 --exact");
  EXPECT_EQ(rep["seed"], 0);
  EXPECT_EQ(rep["tool"], "povmlab");
  EXPECT_FALSE(rep["version"].get<std::string>().empty());
}

TEST(Cli, Fig2DefaultGridHasSeventeenPoints) {
  const auto r = run({"experiment", "fig2", "--dim", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = r.report();
  ASSERT_EQ(rep["runs"].size(), 17u);
  for (int p = 0; p <= 16; ++p) {
    EXPECT_NEAR(rep["runs"][p]["data"]["a_lambda"][0].get<double>(), p / 16.0, 1e-12);
  }
}

TEST(Cli, Fig1SameStatePassesTrivially) {
  const auto dev = write_device("hadamard.json", random_projective(2, 1));
  const auto cfg = workdir() / "fig1_same.json";
  json c;
  c["experiment"] = "fig1";
  c["device"] = "hadamard.json";
  c["states"]["psi"] = json::parse(R"({"preset": "singlet"})");
  c["states"]["psi_prime"] = json::parse(R"({"preset": "singlet"})");
  io::write_file(cfg, c.dump());
  const auto r = run({"experiment", "fig1", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.report()["runs"][0]["data"]["max residual"][0].get<double>(), 1e-15);
}

TEST(Cli, Fig1AdversarialFails) {
  const auto dev = write_device("adversarial.json", BlackBoxDevice(AdversarialSpec(2)));
  const auto r = run({"experiment", "fig1", "--device", dev});
  EXPECT_EQ(r.code, 1);
  const json rep = r.report();
  EXPECT_EQ(rep["verdict"], "FAIL");
  EXPECT_GE(rep["runs"][0]["data"]["max residual"][0].get<double>(), 0.1);
}

TEST(Cli, ExperimentsCarryPremiseNote) {
  const auto r = run({"experiment", "fig3", "--dim", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = r.report();
  ASSERT_FALSE(rep["notes"].empty());
  EXPECT_NE(rep["notes"][0].get<std::string>().find("hidden variables"), std::string::npos);
}

TEST(Cli, EnsembleFromConfig) {
  const auto cfg = workdir() / "ensemble.json";
  json c;
  c["device"] = io::device_to_json(random_noisy(2, 3, 5));
  c["states"]["members"] = json::array();
  c["states"]["members"].push_back({{"weight", 0.4}, {"state", json::parse(R"({"preset": "singlet"})")}});
  c["states"]["members"].push_back(
      {{"weight", 0.6},
       {"state", json::parse(R"({"preset": "random", "seed": 9,
                                  "subsystems": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}]})")}});
  io::write_file(cfg, c.dump());
  const auto r = run({"experiment", "ensemble", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report()["runs"][0]["name"], "ensemble");
}

TEST(Cli, TomographyComputationalBasis) {
  const auto povm_path = (workdir() / "comp.povm.json").string();
  const auto r = run({"tomography", "--dim", "2", "--output", povm_path});
  ASSERT_EQ(r.code, 0) << r.err;
  const Povm povm = io::load_povm(povm_path);
  ASSERT_EQ(povm.outcomes(), 2u);
  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  // Off-diagonals pick up rounding from (1/√2)² = 0.5000000000000001.
  EXPECT_LE(max_abs(povm.operators[0] - p0), 1e-15);
  EXPECT_LE(max_abs(povm.operators[1] - p1), 1e-15);
  // The command echo leaves out the output path.
  EXPECT_EQ(r.report()["command"], "tomography --dim 2");
}

TEST(Cli, TomographyIndirectMatchesKraus) {
  const auto dev = random_indirect(3, 2, 4);
  const auto path = write_device("indirect.json", dev);
  const auto povm_path = (workdir() / "indirect.povm.json").string();
  const auto r = run({"tomography", "--device", path, "--exact", "--output", povm_path});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = r.report();
  const json* c = find_check(rep["runs"][0], "reconstruction vs device internals");
  ASSERT_NE(c, nullptr);
  EXPECT_LE(c->at("measured").get<double>(), 1e-9);
  EXPECT_EQ(c->at("tolerance").get<double>(), 1e-9);
  EXPECT_LE(povm_distance(io::load_povm(povm_path), kraus_povm(dev)), 1e-9);
  // The POVM file reloads to the operators embedded in the report.
  EXPECT_LE(povm_distance(io::load_povm(povm_path), io::povm_from_json(rep["povm"], "report")), 1e-15);
}

TEST(Cli, SampledTomographyIsByteIdentical) {
  const auto path = write_device("noisy.json", random_noisy(2, 2, 6));
  const auto a = run({"tomography", "--device", path, "--shots", "1000000", "--seed", "42"});
  const auto b = run({"tomography", "--device", path, "--shots", "1000000", "--seed", "42"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.report()["mode"], "sampled");
  EXPECT_EQ(a.report()["shots"], 1000000);
  EXPECT_EQ(a.report()["seed"], 42);
  const auto c = run({"tomography", "--device", path, "--shots", "1000000", "--seed", "43"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, CertifyRotatedProjective) {
  const auto path = write_device("rotated.json", random_projective(3, 8));
  const auto r = run({"certify", "--device", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = r.report();
  std::vector<std::string> stages;
  for (const auto& s : rep["runs"]) {
    stages.push_back(s["name"]);
    EXPECT_EQ(s["verdict"], "PASS") << s["name"];
  }
  EXPECT_EQ(stages, (std::vector<std::string>{"tomography", "consistency", "born", "appendix_d"}));
}

TEST(Cli, CertifyNoisyPassesWithNote) {
  const auto path = write_device("noisy3.json", random_noisy(3, 3, 2));
  const auto r = run({"certify", "--device", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = r.report();
  EXPECT_EQ(rep["verdict"], "PASS");
  const json& born = rep["runs"][2];
  EXPECT_EQ(born["name"], "born");
  EXPECT_EQ(born["verdict"], "SKIPPED");
  EXPECT_NE(born["notes"][0].get<std::string>().find("not maximal-certainty"), std::string::npos);
}

TEST(Cli, CertifyAdversarialFailsAtConsistency) {
  const auto path = write_device("adversarial3.json", BlackBoxDevice(AdversarialSpec(3)));
  const auto r = run({"certify", "--device", path});
  EXPECT_EQ(r.code, 1);
  const json rep = r.report();
  ASSERT_EQ(rep["runs"].size(), 2u);
  EXPECT_EQ(rep["runs"][0]["verdict"], "PASS");
  EXPECT_EQ(rep["runs"][1]["name"], "consistency");
  EXPECT_EQ(rep["runs"][1]["verdict"], "FAIL");
}

TEST(Cli, OutputFileMatchesStdout) {
  const auto file = workdir() / "fig3.report.json";
  const auto to_stdout = run({"experiment", "fig3", "--shots", "20000", "--seed", "5"});
  const auto to_file = run({"experiment", "fig3", "--shots", "20000", "--seed", "5", "--output", file.string()});
  EXPECT_EQ(to_file.out, "");
  EXPECT_EQ(slurp(file), to_stdout.out);
}

TEST(Cli, UsageAndSpecErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"experiment", "fig9"}).code, 2);
  EXPECT_EQ(run({"experiment", "fig1", "--exact", "--shots", "10"}).code, 2);
  EXPECT_EQ(run({"experiment", "fig2", "--lambda", "1.5"}).code, 2);
  EXPECT_EQ(run({"tomography", "--shots", "0"}).code, 2);
  EXPECT_EQ(run({"tomography", "--device", (workdir() / "missing.json").string()}).code, 2);
  const auto bad = workdir() / "bad_device.json";
  io::write_file(bad, R"({"kind": "noisy", "dim": 2, "confusion": [[1.0, 0.5], [0.0, 1.0]]})");
  const auto r = run({"certify", "--device", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad_device.json"), std::string::npos) << r.err;
  const auto dev = write_device("dim3.json", random_projective(3, 1));
  EXPECT_EQ(run({"tomography", "--device", dev, "--dim", "2"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("experiment"), std::string::npos);
}

TEST(Binary, ExitStatusContract) {
  const auto adversarial = write_device("bin_adversarial.json", BlackBoxDevice(AdversarialSpec(2)));
  EXPECT_EQ(run_binary("experiment fig2 --lambda 0.25 --exact"), 0);
  EXPECT_EQ(run_binary("experiment fig1 --device " + adversarial), 1);
  EXPECT_EQ(run_binary("experiment nonsense"), 2);
}

TEST(Binary, ReportsAreByteIdentical) {
  const auto a = workdir() / "bin_a.json";
  const auto b = workdir() / "bin_b.json";
  const std::string args = "experiment fig2 --lambda 0.375 --shots 100000 --seed 9 --output ";
  ASSERT_EQ(run_binary(args + a.string()), 0);
  ASSERT_EQ(run_binary(args + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}
