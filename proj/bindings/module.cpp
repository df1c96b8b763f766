#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "apla/chain.hpp"
#include "apla/dynamics.hpp"
#include "apla/game.hpp"
#include "apla/simulate.hpp"

namespace py = pybind11;
using namespace apla;

namespace {

py::dict occupation_dict(const Game& game, const OccupationStats& occ) {
  py::dict out;
  for (std::size_t k = 0; k < occ.states.size(); ++k)
    out[py::cast(occ.states[k].label(game))] = occ.fractions[k];
  out["elsewhere"] = occ.elsewhere;
  return out;
}

}  // namespace

PYBIND11_MODULE(apla, m) {
  m.doc() = "aspiration-based perturbed learning automata on finite strategic-form games";

  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<InvalidProfileError>(m, "InvalidProfileError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<PositiveUtilityError>(m, "PositiveUtilityError");
  py::register_exception<EstimationError>(m, "EstimationError");
  py::register_exception<SolverError>(m, "SolverError");

  py::class_<Game>(m, "Game")
      .def(py::init<std::vector<int>, std::vector<double>,
                    std::vector<std::vector<std::string>>>(),
           py::arg("actions"), py::arg("payoffs"),
           py::arg("action_labels") = std::vector<std::vector<std::string>>{})
      .def_property_readonly("players", &Game::players)
      .def_property_readonly("actions", &Game::action_counts)
      .def("utility", py::overload_cast<const JointAction&>(&Game::utility, py::const_),
           py::arg("profile"))
      .def("utility_of",
           py::overload_cast<const JointAction&, int>(&Game::utility, py::const_),
           py::arg("profile"), py::arg("player"))
      .def("label", &Game::profile_label, py::arg("profile"))
      .def("to_json", &Game::to_json_string, py::arg("indent") = 2)
      .def_static("from_json", &Game::from_json_string, py::arg("text"))
      .def("__repr__", [](const Game& g) {
        return "<apla.Game players=" + std::to_string(g.players()) + ">";
      });

  m.def("load_game", &Game::load, py::arg("path"));
  m.def("best_response", &best_response, py::arg("game"), py::arg("player"),
        py::arg("profile"), py::arg("tol") = 0.0);
  m.def("pure_nash_equilibria", &pure_nash_equilibria, py::arg("game"), py::arg("tol") = 0.0);
  m.def(
      "payoff_dominant_states",
      [](const Game& g, double tol) { return payoff_dominant_states(g, tol); },
      py::arg("game"), py::arg("tol") = 0.0);

  py::class_<GameClassReport>(m, "GameClassReport")
      .def_readonly("is_positive_utility", &GameClassReport::is_positive_utility)
      .def_readonly("is_coordination", &GameClassReport::is_coordination)
      .def_readonly("condition_a_ok", &GameClassReport::condition_a_ok)
      .def_readonly("condition_b_ok", &GameClassReport::condition_b_ok)
      .def_readonly("nash_set", &GameClassReport::nash_set)
      .def_readonly("payoff_dominant_set", &GameClassReport::payoff_dominant_set)
      .def("to_json", &GameClassReport::to_json_string, py::arg("game"),
           py::arg("indent") = 2);

  m.def(
      "classify",
      [](const Game& g, double tol, bool require_distinct) {
        CoordinationOptions opts;
        opts.tol = tol;
        opts.require_distinct_best_response = require_distinct;
        return check_coordination(g, opts);
      },
      py::arg("game"), py::arg("tol") = 0.0, py::arg("require_distinct_best_response") = true);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init([](double epsilon, double nu, double lambda, double h,
                       std::int64_t horizon, std::uint64_t seed, double delta,
                       double burnin_fraction, double noise) {
             SimConfig cfg;
             cfg.epsilon = epsilon;
             cfg.nu = nu;
             cfg.lambda = lambda;
             cfg.h = h;
             cfg.horizon = horizon;
             cfg.seed = seed;
             cfg.delta = delta;
             cfg.burnin_fraction = burnin_fraction;
             cfg.noise = noise;
             return cfg;
           }),
           py::arg("epsilon") = 1e-4, py::arg("nu") = 1e-3, py::arg("lambda") = 0.01,
           py::arg("h") = 0.01, py::arg("horizon") = 2'000'000, py::arg("seed") = 1,
           py::arg("delta") = 0.05, py::arg("burnin_fraction") = 0.5, py::arg("noise") = 0.0)
      .def_readwrite("epsilon", &SimConfig::epsilon)
      .def_readwrite("nu", &SimConfig::nu)
      .def_readwrite("lambda_", &SimConfig::lambda)
      .def_readwrite("h", &SimConfig::h)
      .def_readwrite("horizon", &SimConfig::horizon)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("delta", &SimConfig::delta)
      .def_readwrite("burnin_fraction", &SimConfig::burnin_fraction)
      .def_readwrite("noise", &SimConfig::noise);

  m.def("phi", &phi, py::arg("y"), py::arg("h"));
  m.def(
      "validate_step_sizes",
      [](const Game& g, double epsilon, double nu, double delta) {
        const auto c = validate_step_sizes(g, epsilon, nu, delta);
        return py::make_tuple(c.ok, c.lhs, c.rhs);
      },
      py::arg("game"), py::arg("epsilon"), py::arg("nu"), py::arg("delta"));

  py::class_<OccupationStats>(m, "OccupationStats")
      .def_readonly("fractions", &OccupationStats::fractions)
      .def_readonly("elsewhere", &OccupationStats::elsewhere)
      .def_readonly("action_frequencies", &OccupationStats::action_frequencies)
      .def_readonly("window_begin", &OccupationStats::window_begin)
      .def_readonly("window_end", &OccupationStats::window_end);

  m.def(
      "run",
      [](const Game& game, const SimConfig& cfg, bool strict) {
        const RunResult rr = run(game, cfg, std::nullopt, strict);
        py::dict out;
        out["occupation"] = occupation_dict(game, rr.occupation);
        const int dom = rr.occupation.dominant_index();
        out["dominant_state"] = rr.occupation.states[dom].label(game);
        out["dominant_profile"] = rr.occupation.states[dom].profile;
        out["dominant_occupation"] = rr.occupation.fractions[dom];
        out["step_size_ok"] = rr.step_size_check.ok;
        py::list traj;
        for (const auto& s : rr.trajectory.samples) {
          py::dict row;
          row["t"] = s.t;
          row["action"] = s.action;
          row["strategies"] = s.strategies;
          row["aspirations"] = s.aspirations;
          traj.append(row);
        }
        out["trajectory"] = traj;
        return out;
      },
      py::arg("game"), py::arg("config"), py::arg("strict") = false);

  m.def(
      "sweep",
      [](const Game& game, const SimConfig& base, const std::vector<double>& lambdas,
         const std::vector<double>& hs, int replicates, int threads) {
        const SweepResult sw = sweep(game, base, lambdas, hs, replicates, threads);
        py::list rows;
        for (const auto& agg : sw.aggregates) {
          py::dict row;
          row["lambda"] = agg.lambda;
          row["h"] = agg.h;
          row["mean"] = agg.mean;
          row["stddev"] = agg.stddev;
          rows.append(row);
        }
        return rows;
      },
      py::arg("game"), py::arg("base"), py::arg("lambdas"), py::arg("hs"),
      py::arg("replicates") = 1, py::arg("threads") = 0);

  m.def(
      "estimate_phat",
      [](const Game& game, const SimConfig& cfg, std::int64_t episodes,
         std::int64_t episode_cap, double lambda_q, int threads) {
        ChainOptions opts;
        opts.episodes = episodes;
        opts.episode_cap = episode_cap;
        opts.lambda_q = lambda_q;
        opts.threads = threads;
        const EmpiricalChain chain = estimate_phat(game, cfg, opts);
        const StationaryResult pi = stationary_distribution(chain);
        py::dict out;
        py::list states;
        for (const auto& s : chain.states) states.append(s.label(game));
        out["states"] = states;
        out["matrix"] = chain.matrix;
        out["counts"] = chain.counts;
        out["escapes"] = chain.escapes;
        out["pi"] = pi.pi;
        out["residual"] = pi.residual;
        out["irreducible"] = pi.irreducible;
        out["episode_cap"] = chain.episode_cap;
        return out;
      },
      py::arg("game"), py::arg("config"), py::arg("episodes") = 10000,
      py::arg("episode_cap") = 0, py::arg("lambda_q") = 0.1, py::arg("threads") = 0);

  m.def(
      "stationary_distribution",
      [](const std::vector<std::vector<double>>& matrix, double tol) {
        const StationaryResult r = stationary_distribution(matrix, tol);
        py::dict out;
        out["pi"] = r.pi;
        out["residual"] = r.residual;
        out["iterations"] = r.iterations;
        out["irreducible"] = r.irreducible;
        return out;
      },
      py::arg("matrix"), py::arg("tol") = 1e-12);
}
