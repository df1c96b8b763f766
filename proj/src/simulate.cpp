#include "apla/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "apla/parallel.hpp"

namespace apla {

std::vector<PureStrategyState> all_pure_states(const Game& game) {
  std::vector<PureStrategyState> out;
  out.reserve(game.num_profiles());
  for (std::int64_t k = 0; k < game.num_profiles(); ++k) out.push_back({game.profile_at(k)});
  return out;
}

std::vector<PureStrategyState> nash_pure_states(const Game& game, double tol) {
  std::vector<PureStrategyState> out;
  for (auto& p : pure_nash_equilibria(game, tol)) out.push_back({std::move(p)});
  return out;
}

namespace {

// Squared distances of (x, rho) to the vertex profile of `profile`.
inline void vertex_distances(const SystemState& state, const Game& game,
                             const JointAction& profile, double& x_sq, double& rho_sq) {
  x_sq = 0.0;
  rho_sq = 0.0;
  for (int i = 0; i < game.players(); ++i) {
    const auto& x = state.agents[i].strategy;
    for (int a = 0; a < game.num_actions(i); ++a) {
      const double target = (a == profile[i]) ? 1.0 : 0.0;
      const double d = x[a] - target;
      x_sq += d * d;
    }
    const double dr = state.agents[i].aspiration - game.utility(profile, i);
    rho_sq += dr * dr;
  }
}

}  // namespace

bool in_neighborhood(const SystemState& state, const PureStrategyState& target, const Game& game,
                     double delta) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (state.joint_action() != target.profile) return false;
  double x_sq = 0.0, rho_sq = 0.0;
  vertex_distances(state, game, target.profile, x_sq, rho_sq);
  return x_sq < delta * delta && rho_sq < delta * delta;
}

int OccupationStats::dominant_index() const {
  return static_cast<int>(std::max_element(fractions.begin(), fractions.end()) -
                          fractions.begin());
}

double OccupationStats::fraction_of(const Game& game, const JointAction& profile) const {
  return fractions[game.profile_index(profile)];
}

double OccupationStats::fraction_of(const Game& game,
                                    const std::vector<JointAction>& profiles) const {
  double sum = 0.0;
  for (const auto& p : profiles) sum += fraction_of(game, p);
  return sum;
}

RunResult run(const Game& game, const SimConfig& config, std::optional<SystemState> init,
              bool strict_step_sizes) {
  config.validate(game);
  if (config.horizon == 0) throw ConfigError("horizon = 0 yields empty occupation stats");
  const auto positivity = check_positive_utility(game);
  if (!positivity.ok)
    throw PositiveUtilityError("game has a non-positive payoff at " +
                               game.profile_label(*positivity.violation));

  RunResult result;
  try {
    result.step_size_check = validate_step_sizes(game, config.epsilon, config.nu, config.delta);
  } catch (const ConfigError&) {
    if (strict_step_sizes) throw;
    result.step_size_check_failed_to_evaluate = true;
  }
  if (strict_step_sizes && !result.step_size_check.ok)
    throw ConfigError("step-size admissibility failed: lhs=" +
                      std::to_string(result.step_size_check.lhs) +
                      " > rhs=" + std::to_string(result.step_size_check.rhs));

  Rng rng(config.seed);
  SystemState state;
  if (init) {
    state = std::move(*init);
    validate_state(state, game, config.noise);
    state.time = 0;
  } else {
    state = initial_state(game, config, rng);
  }

  OccupationStats& occ = result.occupation;
  occ.states = all_pure_states(game);
  const std::int64_t burnin =
      static_cast<std::int64_t>(config.horizon * config.burnin_fraction);
  occ.window_begin = burnin + 1;
  occ.window_end = config.horizon;
  occ.total_steps = config.horizon;
  const std::int64_t window = config.horizon - burnin;
  std::vector<std::int64_t> state_counts(game.num_profiles(), 0);
  std::vector<std::int64_t> action_counts(game.num_profiles(), 0);
  std::int64_t elsewhere = 0;

  Trajectory& traj = result.trajectory;
  traj.stride = std::max<std::int64_t>(1, config.horizon / config.trajectory_points);
  auto record = [&](std::int64_t t) {
    TrajectorySample s;
    s.t = t;
    s.action = state.joint_action();
    s.strategies.reserve(state.agents.size());
    for (const auto& agent : state.agents) s.strategies.push_back(agent.strategy);
    for (const auto& agent : state.agents) s.aspirations.push_back(agent.aspiration);
    traj.samples.push_back(std::move(s));
  };
  record(0);

  const double delta_sq = config.delta * config.delta;
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    step_in_place(state, game, config, rng);
    if (t > burnin) {
      const std::int64_t k = game.profile_index(state.joint_action());
      ++action_counts[k];
      double x_sq = 0.0, rho_sq = 0.0;
      vertex_distances(state, game, occ.states[k].profile, x_sq, rho_sq);
      if (x_sq < delta_sq && rho_sq < delta_sq)
        ++state_counts[k];
      else
        ++elsewhere;
    }
    if (t % traj.stride == 0 || t == config.horizon) record(t);
  }

  occ.fractions.resize(game.num_profiles());
  occ.action_frequencies.resize(game.num_profiles());
  for (std::int64_t k = 0; k < game.num_profiles(); ++k) {
    occ.fractions[k] = static_cast<double>(state_counts[k]) / static_cast<double>(window);
    occ.action_frequencies[k] =
        static_cast<double>(action_counts[k]) / static_cast<double>(window);
  }
  occ.elsewhere = static_cast<double>(elsewhere) / static_cast<double>(window);
  result.final_state = std::move(state);
  return result;
}

SweepResult sweep(const Game& game, const SimConfig& base, const std::vector<double>& lambdas,
                  const std::vector<double>& hs, int replicates, int threads,
                  bool derive_seeds) {
  if (lambdas.empty() || hs.empty()) throw ConfigError("sweep grid must be nonempty");
  if (replicates < 1) throw ConfigError("sweep needs at least one replicate");

  SweepResult result;
  result.states = all_pure_states(game);
  result.payoff_dominant_set = payoff_dominant_states(game);
  result.replicates = replicates;
  const std::int64_t n_cells = static_cast<std::int64_t>(lambdas.size()) *
                               static_cast<std::int64_t>(hs.size()) * replicates;
  result.cells.resize(n_cells);

  parallel_for(n_cells, threads, [&](std::int64_t task) {
    const int r = static_cast<int>(task % replicates);
    const std::int64_t cell = task / replicates;
    const int hi = static_cast<int>(cell % hs.size());
    const int li = static_cast<int>(cell / hs.size());
    SimConfig config = base;
    config.lambda = lambdas[li];
    config.h = hs[hi];
    config.seed = derive_seeds ? derive_seed(base.seed, cell, r) : base.seed;
    const RunResult rr = run(game, config);
    SweepCellResult& out = result.cells[task];
    out.lambda = config.lambda;
    out.h = config.h;
    out.replicate = r;
    out.seed = config.seed;
    out.fractions = rr.occupation.fractions;
    out.elsewhere = rr.occupation.elsewhere;
    out.dominant_occupation = rr.occupation.fraction_of(game, result.payoff_dominant_set);
  });

  for (std::size_t li = 0; li < lambdas.size(); ++li)
    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      const std::int64_t base_idx =
          (static_cast<std::int64_t>(li) * hs.size() + hi) * replicates;
      double mean = 0.0;
      for (int r = 0; r < replicates; ++r) mean += result.cells[base_idx + r].dominant_occupation;
      mean /= replicates;
      double var = 0.0;
      for (int r = 0; r < replicates; ++r) {
        const double d = result.cells[base_idx + r].dominant_occupation - mean;
        var += d * d;
      }
      const double stddev = replicates > 1 ? std::sqrt(var / (replicates - 1)) : 0.0;
      result.aggregates.push_back({lambdas[li], hs[hi], mean, stddev});
    }
  return result;
}

}  // namespace apla
