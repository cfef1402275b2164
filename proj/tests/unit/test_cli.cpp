#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "g2f/cli.hpp"

using g2f::cli::run;
using g2f::cli::run_to_string;
using json = nlohmann::json;

namespace {

int exit_of(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  return run(args, out, err);
}

}  // namespace

TEST_CASE("verify algebra passes and echoes the command") {
  int code = -1;
  const auto text = run_to_string({"verify", "algebra", "--seed", "7", "--samples", "200"}, &code);
  CHECK(code == 0);
  const auto j = json::parse(text);
  CHECK(j["schemaVersion"] == 1);
  CHECK(j["command"] == "g2f verify algebra --seed 7 --samples 200");
  CHECK(j["seed"] == 7);
  CHECK(j["toleranceProfile"] == "strict");
  CHECK(j["pass"] == true);
  CHECK_FALSE(j.contains("wallTimeSeconds"));
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("paperRef"));
    CHECK_FALSE(c["paperRef"].get<std::string>().empty());
    CHECK(c["pass"] == true);
  }
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
  const std::vector<std::vector<std::string>> commands = {
      {"scan", "anisotropic", "--seed", "11", "--samples", "2000"},
      {"verify", "fueter", "--seed", "3", "--samples", "100"},
      {"energy", "--seed", "5", "--samples", "3", "--grid", "4", "--amplitude", "0.1"},
      {"fm", "sweep", "--seed", "2"},
  };
  for (const auto& args : commands) {
    const auto a = run_to_string(args);
    const auto b = run_to_string(args);
    auto single = args;
    single.insert(single.end(), {"--threads", "1"});
    CHECK(!a.empty());
    CHECK(a == b);
    CHECK(a == run_to_string(single));
  }
}

TEST_CASE("heisenberg model with homology") {
  int code = -1;
  const auto j = json::parse(run_to_string({"model", "heisenberg", "--B", "2,0,0;0,2,0;0,0,-4", "--homology"}, &code));
  CHECK(code == 0);
  CHECK(j["data"]["flags"]["dOmega"] == 0.0);
  CHECK(j["data"]["flags"]["dTheta"] == 0.0);
  CHECK(j["data"]["H1"]["group"] == "Z^4 + Z/2 + Z/2 + Z/4");
  CHECK(j["data"]["H1"]["torsionOrder"] == 16);
  CHECK(j["seed"].is_null());
}

TEST_CASE("exit codes") {
  CHECK(exit_of({}) == 2);
  CHECK(exit_of({"bogus"}) == 2);
  CHECK(exit_of({"verify", "nothing", "--seed", "1"}) == 2);
  CHECK(exit_of({"verify", "algebra"}) == 2);
  CHECK(exit_of({"verify", "algebra", "--seed", "1", "--frob"}) == 2);
  CHECK(exit_of({"model", "product-flat", "--homology"}) == 2);
  CHECK(exit_of({"model", "heisenberg", "--B", "1,2"}) == 2);
  CHECK(exit_of({"--help"}) == 0);
  // Odd entries: valid syntax, no lattice.
  CHECK(exit_of({"model", "heisenberg", "--B", "1,0,0;0,2,0;0,0,-4", "--homology"}) == 1);
  // An impossible tolerance is a check failure.
  CHECK(exit_of({"verify", "pde", "--seed", "1", "--samples", "2", "--tol", "0"}) == 1);
}

TEST_CASE("csv sweep and --out") {
  const auto csv = run_to_string({"fm", "sweep", "--seed", "2", "--points", "5", "--format", "csv"});
  std::istringstream s(csv);
  std::string line;
  std::getline(s, line);
  CHECK(line == "r,rawResidual,normalizedResidual");
  int rows = 0;
  while (std::getline(s, line)) ++rows;
  CHECK(rows == 5);

  const std::string path = "g2f_cli_test_out.json";
  int code = -1;
  const auto direct = run_to_string({"solve", "affine", "--a2", "1,0,-1,0", "--a3", "0,2,0,1"}, &code);
  CHECK(code == 0);
  CHECK(run_to_string({"solve", "affine", "--a2", "1,0,-1,0", "--a3", "0,2,0,1", "--out", path}).empty());
  std::ifstream f(path, std::ios::binary);
  std::stringstream file;
  file << f.rdbuf();
  CHECK(file.str() == direct);
  std::remove(path.c_str());
}

TEST_CASE("timing is opt-in") {
  const auto j = json::parse(run_to_string({"solve", "su2", "--seed", "4", "--samples", "5", "--timing"}));
  CHECK(j.contains("wallTimeSeconds"));
  CHECK(j["command"] == "g2f solve su2 --seed 4 --samples 5");
}

TEST_CASE("fast profile loosens tolerances and sample counts") {
  const auto j = json::parse(run_to_string({"verify", "splitting", "--seed", "3", "--profile", "fast"}));
  CHECK(j["toleranceProfile"] == "fast");
  CHECK(j["data"]["samples"] == 100);
  for (const auto& c : j["checks"])
    if (c["kind"] == "residual" && c["name"] != "ve of the unit-row plane is (1, 1/2, -1/8, 1/16)")
      CHECK(c["tolerance"].get<double>() >= 1e-8);
}
