#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = APLA_CLI_PATH;
const std::string kGames = APLA_GAMES_DIR;
const std::string kConfigs = APLA_CONFIGS_DIR;

struct CommandResult {
  int exit_code;
  std::string output;
};

int counter = 0;

fs::path fresh_dir() {
  fs::path dir = fs::temp_directory_path() /
                 ("apla_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

CommandResult run_cli(const std::string& args) {
  const fs::path out = fresh_dir() / "stdout.txt";
  const std::string cmd = kCli + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  int code = -1;
  if (WIFEXITED(status)) code = WEXITSTATUS(status);
  return {code, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string second_line(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  std::getline(ss, line);
  return line;
}

}  // namespace

TEST_CASE("classify accepts the stag hunt") {
  const fs::path dir = fresh_dir();
  const auto r =
      run_cli("classify --game " + kGames + "/stag_hunt.json --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("coordination: yes") != std::string::npos);
  const json doc = json::parse(slurp(dir / "classification.json"));
  CHECK(doc["coordination"] == true);
  CHECK(doc["nash"].size() == 2);
  CHECK(doc["nash"][0]["label"] == "(A,A)");
  CHECK(doc["nash"][1]["label"] == "(B,B)");
  CHECK(doc["payoff_dominant"].size() == 1);
  CHECK(doc["payoff_dominant"][0]["label"] == "(A,A)");
  CHECK(doc["positive_utility"]["ok"] == true);
}

TEST_CASE("classify rejects the constant game with a condition-b witness") {
  const fs::path dir = fresh_dir();
  const auto r =
      run_cli("classify --game " + kGames + "/constant.json --out " + dir.string());
  CHECK(r.exit_code == 1);
  const json doc = json::parse(slurp(dir / "classification.json"));
  CHECK(doc["coordination"] == false);
  CHECK(doc["condition_b"]["ok"] == false);
  CHECK(!doc["condition_b"]["violation"].is_null());
  CHECK(doc["condition_b"]["violation"]["label"] == "(A,A)");
}

TEST_CASE("classify reports parse failures with exit 2") {
  const fs::path dir = fresh_dir();
  const fs::path bad = dir / "truncated.json";
  std::ofstream(bad) << "{\"players\": 2, \"actions\": [2, 2], \"uti";
  const auto r = run_cli("classify --game " + bad.string() + " --out " + dir.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("input error") != std::string::npos);

  const auto missing = run_cli("classify --game /no/such/game.json --out " + dir.string());
  CHECK(missing.exit_code == 2);
}

TEST_CASE("usage errors exit with 2") {
  const auto r = run_cli("simulate");
  CHECK(r.exit_code == 2);
  const auto unknown = run_cli("frobnicate --game x");
  CHECK(unknown.exit_code == 2);
}

TEST_CASE("simulate writes config-stamped artifacts and is byte reproducible") {
  const fs::path dir1 = fresh_dir(), dir2 = fresh_dir();
  const std::string base = "simulate --game " + kGames +
                           "/stag_hunt.json --horizon 50000 --lambda 0.02 "
                           "--epsilon 0.001 --nu 0.01 --h 0.1";
  const auto r1 = run_cli(base + " --seed 7 --out " + dir1.string());
  const auto r2 = run_cli(base + " --seed 7 --out " + dir2.string());
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  for (const char* name : {"trajectory.csv", "occupation.csv", "summary.json"}) {
    const std::string a = slurp(dir1 / name), b = slurp(dir2 / name);
    CHECK(a == b);
    CHECK(!a.empty());
  }
  // a different seed must actually change the artifacts
  const fs::path dir3 = fresh_dir();
  const auto r3 = run_cli(base + " --seed 8 --out " + dir3.string());
  CHECK(r3.exit_code == 0);
  CHECK(slurp(dir1 / "trajectory.csv") != slurp(dir3 / "trajectory.csv"));

  const std::string traj = slurp(dir1 / "trajectory.csv");
  CHECK(traj.rfind("# config = {", 0) == 0);
  CHECK(second_line(traj) == "t,action_1,action_2,x_1_1,x_1_2,x_2_1,x_2_2,rho_1,rho_2");
  const std::string occ = slurp(dir1 / "occupation.csv");
  CHECK(second_line(occ) == "state_label,occupation,play_frequency");
  CHECK(occ.find("\"(A,A)\"") != std::string::npos);
  CHECK(occ.find("\"elsewhere\"") != std::string::npos);

  const json summary = json::parse(slurp(dir1 / "summary.json"));
  CHECK(summary["config"]["seed"] == 7);
  CHECK(summary["config"]["lambda"] == 0.02);
  CHECK(summary.contains("dominant_state"));
  CHECK(summary.contains("occupation"));
  CHECK(summary["step_size_check"].contains("ok"));
}

TEST_CASE("simulate honors config files with flag overrides winning") {
  const fs::path dir = fresh_dir();
  const fs::path cfg = dir / "run.toml";
  std::ofstream(cfg) << "[sim]\nepsilon = 0.001\nnu = 0.01\nlambda = 0.04\nh = 0.2\n"
                        "horizon = 20000\nseed = 19\n";
  const auto r = run_cli("simulate --game " + kGames + "/stag_hunt.json --config " +
                         cfg.string() + " --lambda 0.01 --out " + dir.string());
  CHECK(r.exit_code == 0);
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["config"]["lambda"] == 0.01);    // flag beats file
  CHECK(summary["config"]["epsilon"] == 0.001);  // file beats default
  CHECK(summary["config"]["seed"] == 19);
}

TEST_CASE("shipped configs parse and resolve") {
  const fs::path dir = fresh_dir();
  const auto r = run_cli("simulate --game " + kGames + "/stag_hunt.json --config " +
                         kConfigs + "/apla.toml --horizon 20000 --out " + dir.string());
  CHECK(r.exit_code == 0);
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["config"]["epsilon"] == 0.0001);
  CHECK(summary["config"]["nu"] == 0.001);
  CHECK(summary["config"]["lambda"] == 0.01);
  CHECK(summary["config"]["h"] == 0.01);
  CHECK(summary["config"]["horizon"] == 20000);  // flag override

  const fs::path dir2 = fresh_dir();
  const auto r2 = run_cli("simulate --game " + kGames + "/stag_hunt.json --config " +
                          kConfigs + "/pla.toml --horizon 20000 --out " + dir2.string());
  CHECK(r2.exit_code == 0);
  const json s2 = json::parse(slurp(dir2 / "summary.json"));
  CHECK(s2["config"]["h"] == 1.0);
}

TEST_CASE("simulate refuses non-coordination games unless forced") {
  const fs::path dir = fresh_dir();
  const std::string base = "simulate --game " + kGames +
                           "/constant.json --horizon 5000 --epsilon 0.001 --nu 0.01";
  const auto refused = run_cli(base + " --out " + dir.string());
  CHECK(refused.exit_code == 1);
  const auto forced = run_cli(base + " --force --out " + dir.string());
  CHECK(forced.exit_code == 0);
}

TEST_CASE("strict mode turns a failed admissibility check into an error") {
  const fs::path dir = fresh_dir();
  const fs::path game = dir / "spread.json";
  std::ofstream(game) << R"({"players": 2, "actions": [2, 2], "utilities":
      [[[0.1, 0.1], [50, 50]], [[50, 50], [100, 100]]]})";
  const std::string base = "simulate --game " + game.string() +
                           " --horizon 1000 --epsilon 0.005 --nu 0.005 --delta 0.01 --force";
  const auto lax = run_cli(base + " --out " + dir.string());
  CHECK(lax.exit_code == 0);
  CHECK(lax.output.find("warning") != std::string::npos);
  const auto strict = run_cli(base + " --strict --out " + dir.string());
  CHECK(strict.exit_code == 2);
}

TEST_CASE("sweep needs a grid and writes the exact header") {
  const fs::path dir = fresh_dir();
  const auto missing = run_cli("sweep --game " + kGames + "/stag_hunt.json --out " +
                               dir.string());
  CHECK(missing.exit_code == 2);

  const auto r = run_cli("sweep --game " + kGames +
                         "/stag_hunt.json --lambdas 0.05 0.01 --hs 0.5 --replicates 2 "
                         "--horizon 4000 --epsilon 0.001 --nu 0.01 --out " +
                         dir.string());
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("# config = {", 0) == 0);
  CHECK(second_line(csv) == "lambda,h,replicate,state_label,occupation");
  // 2 lambdas x 1 h x 2 replicates x (4 states + elsewhere) data rows
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 20);
  CHECK(r.output.find("payoff-dominant occupation") != std::string::npos);
}

TEST_CASE("sweep reads grids from the config file") {
  const fs::path dir = fresh_dir();
  const fs::path cfg = dir / "sweep.toml";
  std::ofstream(cfg) << "[sim]\nepsilon = 0.001\nnu = 0.01\nhorizon = 4000\nseed = 2\n"
                        "[sweep]\nlambdas = [0.05, 0.01]\nhs = [0.5]\nreplicates = 2\n";
  const auto r = run_cli("sweep --game " + kGames + "/stag_hunt.json --config " +
                         cfg.string() + " --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "sweep.csv"));
}

TEST_CASE("chain writes a full report and cross-validates an occupation file") {
  const fs::path dir = fresh_dir();
  const std::string params =
      " --epsilon 0.05 --nu 0.4 --lambda 0.01 --h 0.01 --delta 0.05";
  const auto sim = run_cli("simulate --game " + kGames + "/stag_hunt.json" + params +
                           " --horizon 400000 --seed 11 --out " + dir.string());
  REQUIRE(sim.exit_code == 0);

  const auto r = run_cli("chain --game " + kGames + "/stag_hunt.json" + params +
                         " --episodes 2000 --seed 3 --occupation " +
                         (dir / "occupation.csv").string() + " --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("pi:") != std::string::npos);
  CHECK(r.output.find("cross-validation max-abs discrepancy") != std::string::npos);
  const json doc = json::parse(slurp(dir / "chain.json"));
  CHECK(doc["states"].size() == 2);
  CHECK(doc["matrix"].size() == 2);
  CHECK(doc["pi"].size() == 2);
  CHECK(doc["episodes"] == 2000);
  CHECK(doc.contains("residual"));
  CHECK(doc.contains("escapes"));
  CHECK(doc["config"]["epsilon"] == 0.05);
  CHECK(doc["cross_validation"]["max_abs_discrepancy"].get<double>() < 0.15);
}

TEST_CASE("chain on a single-equilibrium game returns a point mass") {
  const fs::path dir = fresh_dir();
  const auto r = run_cli("chain --game " + kGames +
                         "/single_nash.json --epsilon 0.05 --nu 0.4 --lambda 0.01 "
                         "--h 0.5 --episodes 200 --out " +
                         dir.string());
  CHECK(r.exit_code == 0);
  const json doc = json::parse(slurp(dir / "chain.json"));
  CHECK(doc["pi"] == json::array({1.0}));
  CHECK(doc["matrix"] == json::array({json::array({1.0})}));
}

TEST_CASE("chain refuses non-coordination input") {
  const fs::path dir = fresh_dir();
  const auto r = run_cli("chain --game " + kGames + "/constant.json --out " + dir.string());
  CHECK(r.exit_code == 1);
}

TEST_CASE("unresolved rows exit with 3 and report escapes") {
  const fs::path dir = fresh_dir();
  // tiny neighborhoods plus constant trembles: no episode can resolve
  const auto r = run_cli("chain --game " + kGames +
                         "/stag_hunt.json --epsilon 0.05 --nu 0.4 --lambda 0.9 --h 0.5 "
                         "--delta 1e-12 --episodes 4 --episode-cap 5 --seed 6 --out " +
                         dir.string());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("estimation failed") != std::string::npos);
  CHECK(r.output.find("escaped") != std::string::npos);
}
