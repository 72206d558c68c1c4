#include <catch2/catch.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qds/cli/config.hpp"
#include "qds/cli/run.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qds_cli_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

Run run_qds(const std::string& args) {
  const fs::path log = scratch("log.txt");
  const std::string cmd = std::string(QDS_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string config(const std::string& name) { return std::string(QDS_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("verdict on the damped oscillator is conservative") {
  const fs::path out = scratch("damped");
  const Run r = run_qds("verdict --config " + config("damped_verdict.json") + " --out " + out.string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  const json cert = load(out / "certificate.json");
  CHECK(cert["verdict"] == "conservative-consistent");
  CHECK(cert["N_ladder"].size() == 3);
  const json manifest = load(out / "manifest.json");
  CHECK(manifest["pipeline"] == "verdict");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["model_hashes"].size() == 3);
  CHECK(slurp(out / "trace.csv").rfind(qds::cli::kCsvHeader, 0) == 0);
}

TEST_CASE("verdict on the pump is non-conservative") {
  const fs::path out = scratch("pump");
  const Run r = run_qds("verdict --config " + config("pump_verdict.json") + " --out " + out.string() + " --jobs 3");
  INFO(r.output);
  REQUIRE(r.code == 0);
  CHECK(load(out / "certificate.json")["verdict"] == "non-conservative-consistent");
}

TEST_CASE("bound pipeline passes on the Lorentzian weight") {
  const fs::path out = scratch("bound");
  const Run r = run_qds("bound --config " + config("lorentzian_bound.json") + " --out " + out.string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  const json cert = load(out / "certificate.json");
  CHECK(cert["verdict"] == "pass");
  CHECK(cert["margins"].size() == cert["eps_grid"].size());
}

TEST_CASE("check and fit pipelines on the heavy-ion model") {
  const fs::path c = scratch("check"), f = scratch("fit");
  Run r = run_qds("check --config " + config("heavy_ion_check.json") + " --out " + c.string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  CHECK(load(c / "certificate.json")["cells"].size() == 2);
  r = run_qds("fit --config " + config("heavy_ion_fit.json") + " --out " + f.string());
  REQUIRE(r.code == 0);
  const json cert = load(f / "certificate.json");
  for (const auto& cell : cert["cells"]) CHECK(cell["feasible"].get<bool>());
}

TEST_CASE("missing lambda is a config error naming the field") {
  const Run r = run_qds("verdict --config " + config("missing_lambda.json") + " --out " + scratch("bad").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("lambda") != std::string::npos);
  CHECK(r.output.find("missing_lambda.json:") != std::string::npos);
}

TEST_CASE("unreadable config and bad arguments exit with 2") {
  CHECK(run_qds("verdict --config /nonexistent/qds.json").code == 2);
  CHECK(run_qds("verdict").code == 2);
  CHECK(run_qds("frobnicate").code == 2);
}

TEST_CASE("summary") {
  const fs::path empty = scratch("empty");
  fs::create_directories(empty);
  CHECK(run_qds("summary " + empty.string()).code == 2);

  const fs::path root = scratch("summary");
  REQUIRE(run_qds("verdict --config " + config("damped_verdict.json") + " --out " + (root / "a").string()).code == 0);
  const Run one = run_qds("summary " + root.string());
  INFO(one.output);
  REQUIRE(one.code == 0);
  CHECK(one.output.find("run a ") != std::string::npos);
  CHECK(one.output.find("conservative-consistent") != std::string::npos);
  CHECK(one.output.find("extrapolated") != std::string::npos);

  fs::remove(root / "a" / "manifest.json");
  CHECK(run_qds("summary " + root.string()).code == 2);
}

TEST_CASE("artifacts do not depend on the worker count") {
  const fs::path a = scratch("det1"), b = scratch("det4"), s1 = scratch("sim1"), s2 = scratch("sim2");
  REQUIRE(run_qds("verdict --config " + config("pump_verdict.json") + " --out " + a.string()).code == 0);
  REQUIRE(run_qds("verdict --config " + config("pump_verdict.json") + " --out " + b.string() + " --jobs 4").code == 0);
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(slurp(a / "certificate.json") == slurp(b / "certificate.json"));

  REQUIRE(run_qds("simulate --config " + config("pump_simulate.json") + " --out " + s1.string()).code == 0);
  REQUIRE(run_qds("simulate --config " + config("pump_simulate.json") + " --out " + s2.string() + " --jobs 2").code == 0);
  CHECK(slurp(s1 / "trace.csv") == slurp(s2 / "trace.csv"));
}

TEST_CASE("model JSON round trip") {
  using namespace qds::cli;
  for (const char* text : {R"({"type":"heavy_ion","w":1.5,"alpha":-1.2,"nu":2,"N":24,"buffer":3})",
                           R"({"type":"damped_oscillator","gamma":0.7,"omega":0.25,"N":12})",
                           R"({"type":"quadratic_pump","N":32})"}) {
    const json j = model_to_json(model_from_json(json::parse(text)));
    CHECK(model_to_json(model_from_json(j)) == j);
  }
}

TEST_CASE("config hash is stable FNV-1a") {
  CHECK(qds::cli::config_hash("") == "cbf29ce484222325");
  CHECK(qds::cli::config_hash("a") == "af63dc4c8601ec8c");
}
