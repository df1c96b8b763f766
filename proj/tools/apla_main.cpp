// Command-line front end: classify / simulate / sweep / chain with CSV and
// JSON artifacts. Exit codes: 0 success (classify: coordination game),
// 1 classification negative, 2 input or usage error, 3 estimation failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "apla/chain.hpp"
#include "apla/dynamics.hpp"
#include "apla/game.hpp"
#include "apla/parallel.hpp"
#include "apla/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Minimal key = value config reader ([section] headers, numbers, booleans and
// [a, b, c] lists). CLI flags override file values.
class ConfigFile {
 public:
  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw apla::ParseError("cannot open config file: " + path);
    ConfigFile cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw apla::ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw apla::ParseError(path + ":" + std::to_string(lineno) + ": empty key or value");
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_double(const std::string& key) const {
    return parse_double(raw(key), key);
  }
  std::int64_t get_int(const std::string& key) const {
    try {
      return std::stoll(raw(key));
    } catch (const std::exception&) {
      throw apla::ParseError("config key " + key + " is not an integer: " + raw(key));
    }
  }
  std::uint64_t get_uint(const std::string& key) const {
    try {
      return std::stoull(raw(key));
    } catch (const std::exception&) {
      throw apla::ParseError("config key " + key + " is not an unsigned integer: " + raw(key));
    }
  }
  std::vector<double> get_double_list(const std::string& key) const {
    std::string v = raw(key);
    if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(parse_double(item, key));
    }
    if (out.empty()) throw apla::ParseError("config key " + key + " lists no values");
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static double parse_double(const std::string& v, const std::string& key) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw apla::ParseError("config key " + key + " is not a number: " + v);
    }
  }
  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw apla::ParseError("missing config key: " + key);
    return it->second;
  }

  std::map<std::string, std::string> values_;
};

// Shortest round-trip decimal text for CSV cells.
std::string num(double x) { return json(x).dump(); }

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct CommonArgs {
  std::string game_path;
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  bool strict = false;
  bool force = false;
  double tol = 0.0;
  // optional CLI overrides of SimConfig fields
  std::optional<double> epsilon, nu, lambda, h, delta, burnin, noise;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> horizon;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool needs_sim) {
  cmd->set_help_flag("--help", "print help");  // keep --h free for the satisfaction floor
  cmd->add_option("--game", args.game_path, "game file (JSON)")->required();
  cmd->add_option("--config", args.config_path, "key = value config file with a [sim] section");
  cmd->add_option("--out", args.out_dir, "output directory (default: .)");
  cmd->add_option("--threads", args.threads, "worker threads (default: available cores)");
  cmd->add_option("--tol", args.tol, "payoff comparison tolerance for classification");
  if (needs_sim) {
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--horizon", args.horizon, "number of steps");
    cmd->add_option("--lambda", args.lambda, "tremble probability");
    cmd->add_option("--h", args.h, "satisfaction floor in (0,1]");
    cmd->add_option("--epsilon", args.epsilon, "strategy step size");
    cmd->add_option("--nu", args.nu, "aspiration step size");
    cmd->add_option("--delta", args.delta, "neighborhood radius");
    cmd->add_option("--burnin", args.burnin, "burn-in fraction of the horizon");
    cmd->add_option("--noise", args.noise, "additive payoff noise amplitude");
    cmd->add_flag("--strict", args.strict, "treat a failed step-size check as an error");
    cmd->add_flag("--force", args.force, "simulate even if classification fails");
  }
}

apla::SimConfig resolve_sim_config(const CommonArgs& args,
                                   const std::optional<ConfigFile>& file) {
  apla::SimConfig cfg;
  if (file) {
    const ConfigFile& f = *file;
    if (f.has("sim.epsilon")) cfg.epsilon = f.get_double("sim.epsilon");
    if (f.has("sim.nu")) cfg.nu = f.get_double("sim.nu");
    if (f.has("sim.lambda")) cfg.lambda = f.get_double("sim.lambda");
    if (f.has("sim.h")) cfg.h = f.get_double("sim.h");
    if (f.has("sim.horizon")) cfg.horizon = f.get_int("sim.horizon");
    if (f.has("sim.seed")) cfg.seed = f.get_uint("sim.seed");
    if (f.has("sim.delta")) cfg.delta = f.get_double("sim.delta");
    if (f.has("sim.burnin_fraction")) cfg.burnin_fraction = f.get_double("sim.burnin_fraction");
    if (f.has("sim.noise")) cfg.noise = f.get_double("sim.noise");
    if (f.has("sim.trajectory_points"))
      cfg.trajectory_points = f.get_int("sim.trajectory_points");
  }
  if (args.epsilon) cfg.epsilon = *args.epsilon;
  if (args.nu) cfg.nu = *args.nu;
  if (args.lambda) cfg.lambda = *args.lambda;
  if (args.h) cfg.h = *args.h;
  if (args.horizon) cfg.horizon = *args.horizon;
  if (args.seed) cfg.seed = *args.seed;
  if (args.delta) cfg.delta = *args.delta;
  if (args.burnin) cfg.burnin_fraction = *args.burnin;
  if (args.noise) cfg.noise = *args.noise;
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw apla::Error("cannot write " + path.string());
  out << content;
}

json config_echo(const apla::SimConfig& cfg, const std::string& game_path) {
  json doc = json::parse(apla::config_json(cfg));
  doc["game"] = game_path;
  return doc;
}

std::string config_comment(const json& echo) { return "# config = " + echo.dump() + "\n"; }

// ---------------------------------------------------------------------------

int cmd_classify(const CommonArgs& args) {
  const apla::Game game = apla::Game::load(args.game_path);
  apla::CoordinationOptions opts;
  opts.tol = args.tol;
  const apla::GameClassReport report = apla::check_coordination(game, opts);

  if (!report.is_positive_utility)
    std::cerr << "warning: game violates the positive-utility property at "
              << game.profile_label(*report.positivity_violation) << "\n";

  json doc = json::parse(report.to_json_string(game));
  doc["command"] = "classify";
  doc["game"] = args.game_path;
  fs::create_directories(args.out_dir);
  write_file(fs::path(args.out_dir) / "classification.json", doc.dump(2) + "\n");

  std::cout << "coordination: " << (report.is_coordination ? "yes" : "no") << "\n";
  std::cout << "nash:";
  for (const auto& p : report.nash_set) std::cout << " " << game.profile_label(p);
  std::cout << "\npayoff-dominant:";
  for (const auto& p : report.payoff_dominant_set) std::cout << " " << game.profile_label(p);
  std::cout << "\n";
  if (!report.condition_a_ok)
    std::cout << "condition (a) fails first at "
              << game.profile_label(*report.condition_a_violation) << "\n";
  if (!report.condition_b_ok)
    std::cout << "condition (b) fails first at "
              << game.profile_label(*report.condition_b_violation) << "\n";
  return report.is_coordination ? 0 : 1;
}

void write_trajectory_csv(const fs::path& path, const apla::Game& game,
                          const apla::Trajectory& traj, const json& echo) {
  std::ostringstream out;
  out << config_comment(echo);
  out << "t";
  for (int i = 1; i <= game.players(); ++i) out << ",action_" << i;
  for (int i = 1; i <= game.players(); ++i)
    for (int a = 1; a <= game.num_actions(i - 1); ++a) out << ",x_" << i << "_" << a;
  for (int i = 1; i <= game.players(); ++i) out << ",rho_" << i;
  out << "\n";
  for (const auto& s : traj.samples) {
    out << s.t;
    for (int v : s.action) out << "," << v;
    for (const auto& x : s.strategies)
      for (double v : x) out << "," << num(v);
    for (double v : s.aspirations) out << "," << num(v);
    out << "\n";
  }
  write_file(path, out.str());
}

void write_occupation_csv(const fs::path& path, const apla::Game& game,
                          const apla::OccupationStats& occ, const json& echo) {
  std::ostringstream out;
  out << config_comment(echo);
  out << "state_label,occupation,play_frequency\n";
  for (std::size_t k = 0; k < occ.states.size(); ++k)
    out << csv_quote(occ.states[k].label(game)) << "," << num(occ.fractions[k]) << ","
        << num(occ.action_frequencies[k]) << "\n";
  out << csv_quote("elsewhere") << "," << num(occ.elsewhere) << ",\n";
  write_file(path, out.str());
}

int cmd_simulate(const CommonArgs& args, const apla::SimConfig& cfg) {
  const apla::Game game = apla::Game::load(args.game_path);
  apla::CoordinationOptions copts;
  copts.tol = args.tol;
  const apla::GameClassReport report = apla::check_coordination(game, copts);
  if (!report.is_coordination && !args.force) {
    std::cerr << "not a coordination game (use --force to simulate anyway)\n";
    return 1;
  }

  const apla::RunResult result = apla::run(game, cfg, std::nullopt, args.strict);
  if (!result.step_size_check.ok || result.step_size_check_failed_to_evaluate)
    std::cerr << "warning: step-size admissibility check "
              << (result.step_size_check_failed_to_evaluate ? "could not be evaluated"
                                                            : "failed")
              << "\n";

  const json echo = config_echo(cfg, args.game_path);
  fs::create_directories(args.out_dir);
  write_trajectory_csv(fs::path(args.out_dir) / "trajectory.csv", game, result.trajectory, echo);
  write_occupation_csv(fs::path(args.out_dir) / "occupation.csv", game, result.occupation, echo);

  const apla::OccupationStats& occ = result.occupation;
  const int dom = occ.dominant_index();
  json summary;
  summary["command"] = "simulate";
  summary["game"] = args.game_path;
  summary["config"] = echo;
  summary["seed"] = cfg.seed;
  summary["dominant_state"] = occ.states[dom].label(game);
  summary["dominant_profile"] = occ.states[dom].profile;
  summary["dominant_occupation"] = occ.fractions[dom];
  summary["coordination"] = report.is_coordination;
  json occ_map = json::object();
  for (std::size_t k = 0; k < occ.states.size(); ++k)
    occ_map[occ.states[k].label(game)] = occ.fractions[k];
  occ_map["elsewhere"] = occ.elsewhere;
  summary["occupation"] = occ_map;
  if (!report.payoff_dominant_set.empty()) {
    summary["payoff_dominant_occupation"] =
        occ.fraction_of(game, report.payoff_dominant_set);
    json pd = json::array();
    for (const auto& p : report.payoff_dominant_set) pd.push_back(game.profile_label(p));
    summary["payoff_dominant_set"] = pd;
  }
  summary["window"] = {occ.window_begin, occ.window_end};
  summary["step_size_check"] = {{"ok", result.step_size_check.ok},
                                {"lhs", result.step_size_check.lhs},
                                {"rhs", result.step_size_check.rhs},
                                {"evaluated", !result.step_size_check_failed_to_evaluate}};
  write_file(fs::path(args.out_dir) / "summary.json", summary.dump(2) + "\n");

  std::cout << "dominant state: " << occ.states[dom].label(game) << " (occupation "
            << num(occ.fractions[dom]) << ")\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args, const apla::SimConfig& base,
              const std::vector<double>& lambdas, const std::vector<double>& hs,
              int replicates) {
  if (lambdas.empty() || hs.empty()) {
    std::cerr << "sweep needs nonempty --lambdas and --hs grids\n";
    return 2;
  }
  const apla::Game game = apla::Game::load(args.game_path);
  const apla::SweepResult result =
      apla::sweep(game, base, lambdas, hs, replicates, args.threads);

  json echo = config_echo(base, args.game_path);
  echo["lambdas"] = lambdas;
  echo["hs"] = hs;
  echo["replicates"] = replicates;

  std::ostringstream out;
  out << config_comment(echo);
  out << "lambda,h,replicate,state_label,occupation\n";
  for (const auto& cell : result.cells) {
    for (std::size_t k = 0; k < result.states.size(); ++k)
      out << num(cell.lambda) << "," << num(cell.h) << "," << cell.replicate << ","
          << csv_quote(result.states[k].label(game)) << "," << num(cell.fractions[k]) << "\n";
    out << num(cell.lambda) << "," << num(cell.h) << "," << cell.replicate << ","
        << csv_quote("elsewhere") << "," << num(cell.elsewhere) << "\n";
  }
  fs::create_directories(args.out_dir);
  write_file(fs::path(args.out_dir) / "sweep.csv", out.str());

  std::cout << "payoff-dominant occupation (mean +- stddev over " << replicates
            << " replicates)\n";
  for (const auto& agg : result.aggregates)
    std::cout << "  lambda=" << num(agg.lambda) << " h=" << num(agg.h) << "  "
              << num(agg.mean) << " +- " << num(agg.stddev) << "\n";
  return 0;
}

std::vector<std::pair<std::string, double>> read_occupation_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw apla::ParseError("cannot open occupation file: " + path);
  std::vector<std::pair<std::string, double>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;  // state_label,occupation[,...]
      continue;
    }
    std::string label;
    std::size_t pos = 0;
    if (line.front() == '"') {
      pos = 1;
      while (pos < line.size()) {
        if (line[pos] == '"') {
          if (pos + 1 < line.size() && line[pos + 1] == '"') {
            label += '"';
            pos += 2;
            continue;
          }
          ++pos;
          break;
        }
        label += line[pos++];
      }
      if (pos >= line.size() || line[pos] != ',')
        throw apla::ParseError(path + ": malformed quoted row: " + line);
      ++pos;
    } else {
      pos = line.find(',');
      if (pos == std::string::npos) throw apla::ParseError(path + ": malformed row: " + line);
      label = line.substr(0, pos);
      ++pos;
    }
    const std::string rest = line.substr(pos);
    const auto comma = rest.find(',');
    const std::string value = comma == std::string::npos ? rest : rest.substr(0, comma);
    rows.emplace_back(label, std::stod(value));
  }
  if (rows.empty()) throw apla::ParseError(path + ": no occupation rows");
  return rows;
}

int cmd_chain(const CommonArgs& args, const apla::SimConfig& cfg, std::int64_t episodes,
              std::int64_t episode_cap, double lambda_q, const std::string& occupation_path) {
  const apla::Game game = apla::Game::load(args.game_path);
  apla::CoordinationOptions copts;
  copts.tol = args.tol;
  const apla::GameClassReport report = apla::check_coordination(game, copts);
  if (!report.is_coordination) {
    std::cerr << "not a coordination game; transition estimation refused\n";
    return 1;
  }

  apla::ChainOptions opts;
  opts.episodes = episodes;
  opts.episode_cap = episode_cap;
  opts.lambda_q = lambda_q;
  opts.threads = args.threads;

  apla::EmpiricalChain chain;
  try {
    chain = apla::estimate_phat(game, cfg, opts);
  } catch (const apla::EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return 3;
  }
  const apla::StationaryResult stationary = apla::stationary_distribution(chain);

  json doc = json::parse(apla::chain_report_json(game, chain, stationary, cfg));
  doc["command"] = "chain";
  doc["game"] = args.game_path;

  std::cout << "pi:";
  for (std::size_t s = 0; s < chain.states.size(); ++s)
    std::cout << " " << chain.states[s].label(game) << "=" << num(stationary.pi[s]);
  std::cout << "\nescapes:";
  for (std::size_t s = 0; s < chain.states.size(); ++s)
    std::cout << " " << chain.escapes[s] << "/" << chain.episodes;
  std::cout << "\n";
  if (!stationary.irreducible)
    std::cerr << "warning: estimated chain is reducible; pi is the uniform-start convention\n";

  if (!occupation_path.empty()) {
    const auto rows = read_occupation_csv(occupation_path);
    apla::OccupationStats occ;
    occ.states = apla::all_pure_states(game);
    occ.fractions.assign(game.num_profiles(), 0.0);
    for (const auto& [label, value] : rows) {
      if (label == "elsewhere") {
        occ.elsewhere = value;
        continue;
      }
      bool matched = false;
      for (std::size_t k = 0; k < occ.states.size(); ++k)
        if (occ.states[k].label(game) == label) {
          occ.fractions[k] = value;
          matched = true;
          break;
        }
      if (!matched)
        throw apla::ParseError("occupation row does not name a pure state: " + label);
    }
    const apla::CrossValidation cv = apla::cross_validate(game, chain, stationary, occ);
    doc["cross_validation"] = {{"occupation", cv.occupation},
                               {"pi", cv.pi},
                               {"max_abs_discrepancy", cv.max_abs_discrepancy},
                               {"occupation_file", occupation_path}};
    std::cout << "cross-validation max-abs discrepancy: " << num(cv.max_abs_discrepancy)
              << "\n";
  }

  fs::create_directories(args.out_dir);
  write_file(fs::path(args.out_dir) / "chain.json", doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aspiration-based perturbed learning automata on strategic-form games"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  CommonArgs cls_args, sim_args, swp_args, chn_args;
  auto* cls = app.add_subcommand("classify", "classify a game file");
  add_common_options(cls, cls_args, false);

  auto* sim = app.add_subcommand("simulate", "run one long-horizon trajectory");
  add_common_options(sim, sim_args, true);

  auto* swp = app.add_subcommand("sweep", "grid of runs over (lambda, h)");
  add_common_options(swp, swp_args, true);
  std::vector<double> cli_lambdas, cli_hs;
  int cli_replicates = -1;
  swp->add_option("--lambdas", cli_lambdas, "lambda grid values");
  swp->add_option("--hs", cli_hs, "h grid values");
  swp->add_option("--replicates", cli_replicates, "replicates per cell");

  auto* chn = app.add_subcommand("chain", "estimate the equilibrium transition matrix");
  add_common_options(chn, chn_args, true);
  std::int64_t cli_episodes = -1, cli_episode_cap = -1;
  double cli_lambda_q = -1.0;
  std::string occupation_path;
  chn->add_option("--episodes", cli_episodes, "episodes per source state");
  chn->add_option("--episode-cap", cli_episode_cap, "max steps per episode (0 = auto)");
  chn->add_option("--lambda-q", cli_lambda_q, "tremble rate of the multi-tremble kick");
  chn->add_option("--occupation", occupation_path,
                  "occupation.csv to cross-validate pi against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cls) return cmd_classify(cls_args);

    if (*sim) {
      std::optional<ConfigFile> file;
      if (!sim_args.config_path.empty()) file = ConfigFile::load(sim_args.config_path);
      return cmd_simulate(sim_args, resolve_sim_config(sim_args, file));
    }

    if (*swp) {
      std::optional<ConfigFile> file;
      if (!swp_args.config_path.empty()) file = ConfigFile::load(swp_args.config_path);
      const apla::SimConfig base = resolve_sim_config(swp_args, file);
      std::vector<double> lambdas = cli_lambdas, hs = cli_hs;
      int replicates = cli_replicates;
      if (file) {
        if (lambdas.empty() && file->has("sweep.lambdas"))
          lambdas = file->get_double_list("sweep.lambdas");
        if (hs.empty() && file->has("sweep.hs")) hs = file->get_double_list("sweep.hs");
        if (replicates < 0 && file->has("sweep.replicates"))
          replicates = static_cast<int>(file->get_int("sweep.replicates"));
      }
      if (replicates < 0) replicates = 1;
      return cmd_sweep(swp_args, base, lambdas, hs, replicates);
    }

    if (*chn) {
      std::optional<ConfigFile> file;
      if (!chn_args.config_path.empty()) file = ConfigFile::load(chn_args.config_path);
      const apla::SimConfig cfg = resolve_sim_config(chn_args, file);
      std::int64_t episodes = cli_episodes, episode_cap = cli_episode_cap;
      double lambda_q = cli_lambda_q;
      if (file) {
        if (episodes < 0 && file->has("chain.episodes")) episodes = file->get_int("chain.episodes");
        if (episode_cap < 0 && file->has("chain.episode_cap"))
          episode_cap = file->get_int("chain.episode_cap");
        if (lambda_q < 0.0 && file->has("chain.lambda_q"))
          lambda_q = file->get_double("chain.lambda_q");
      }
      if (episodes < 0) episodes = 10000;
      if (episode_cap < 0) episode_cap = 0;
      if (lambda_q < 0.0) lambda_q = 0.1;
      return cmd_chain(chn_args, cfg, episodes, episode_cap, lambda_q, occupation_path);
    }
  } catch (const apla::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const apla::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const apla::EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return 3;
  } catch (const apla::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
