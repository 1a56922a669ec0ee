#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rdnet/cli.hpp"

using namespace rdnet;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rdnet");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rdnet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("solve prints the welfare line and writes JSON") {
  const auto r = run({"solve", "--n", "4", "--theta-low", "1"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("welfare 0.52480726") != std::string::npos);

  const auto dir = scratch("solve");
  std::ofstream(dir / "inst.json") << R"({"alpha": 2, "c_bar": 1, "phi": 3.52, "thetas": [1, 1, 1, 1]})";
  const auto f = run({"solve", "--instance", (dir / "inst.json").string(), "--network", "complete", "--out",
                      dir.string()});
  CHECK(f.code == kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "equilibrium.json"));
  CHECK(j["welfare"].get<double>() == doctest::Approx(0.52480726).epsilon(1e-8));
  CHECK(j["efforts"].size() == 4);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  std::ofstream(dir / "bad.json") << "{not json";
  CHECK(run({"solve", "--instance", (dir / "bad.json").string()}).code == kExitValidation);
  CHECK(run({"solve", "--phi", "0.01"}).code == kExitSolver);
  CHECK(run({"solve", "--network", "ring"}).code == kExitValidation);
  CHECK(run({"solve", "--rho", "0.3"}).code == kExitValidation);
  CHECK(run({"solve", "--bogus"}).code == kExitValidation);
  CHECK(run({}).code == kExitValidation);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"stability", "enumerate", "--n", "9", "--rho", "1"}).code == kExitTooLarge);
  CHECK(run({"experiment", "figX"}).code == kExitUnknownExperiment);
  const auto e = run({"solve", "--phi", "0.01"});
  CHECK(e.err.find("NonPositiveEffort") != std::string::npos);
  CHECK(e.err.find('\n') == e.err.size() - 1);
  fs::remove_all(dir);
}

TEST_CASE("stability subcommands") {
  const auto c = run({"stability", "check"});
  CHECK(c.code == kExitOk);
  CHECK(nlohmann::json::parse(c.out.substr(0, c.out.rfind('}') + 1))["stable"] == true);

  const auto dir = scratch("stab");
  const auto e = run({"stability", "enumerate", "--n", "5", "--rho", "0.4", "--theta-low", "0.5", "--out",
                      dir.string()});
  CHECK(e.code == kExitOk);
  std::ifstream is(dir / "enumeration.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "network_id,edge_list,stable,n_blocking");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 1024);

  const auto r = run({"stability", "region", "--structure", "complete", "--n", "4", "--theta-grid", "0.1:0.9:9",
                      "--phi-grid", "3.52:35.2:5", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  const auto csv = slurp(dir / "region.csv");
  CHECK(csv.rfind("theta,phi,stable\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 9 * 5);
  fs::remove_all(dir);
}

TEST_CASE("experiment output is identical across reruns and thread counts") {
  const auto a = scratch("exp_a"), b = scratch("exp_b");
  const std::vector<std::string> common{"experiment", "fig4", "--seed", "7", "--theta-grid", "0.1,0.3,0.5"};
  auto with = [&](const fs::path& dir, const std::string& threads) {
    auto args = common;
    args.insert(args.end(), {"--out", dir.string(), "--threads", threads});
    return run(args).code;
  };
  CHECK(with(a, "1") == kExitOk);
  CHECK(with(b, "3") == kExitOk);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    ++files;
  }
  CHECK(files == 4);
  const auto m = nlohmann::json::parse(slurp(a / "fig4_manifest.json"));
  CHECK(m["base_seed"] == 7);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("seed resolution: flag over environment over default") {
  const auto dir = scratch("seed");
  auto seed_of = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"experiment", "figA1", "--theta-grid", "0.5", "--out", dir.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(run(args).code == kExitOk);
    return nlohmann::json::parse(slurp(dir / "figA1_manifest.json"))["base_seed"].get<std::uint64_t>();
  };
  unsetenv("RDNET_SEED");
  CHECK(seed_of({}) == 42);
  setenv("RDNET_SEED", "99", 1);
  CHECK(seed_of({}) == 99);
  CHECK(seed_of({"--seed", "5"}) == 5);
  setenv("RDNET_SEED", "abc", 1);
  CHECK(run({"experiment", "figA1", "--out", dir.string()}).code == kExitValidation);
  unsetenv("RDNET_SEED");
  fs::remove_all(dir);
}
