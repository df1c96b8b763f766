#include "apla/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace apla {

void SimConfig::validate() const {
  if (!(epsilon > 0.0) || epsilon >= 1.0) throw ConfigError("epsilon must be in (0,1)");
  if (!(nu > 0.0) || nu >= 1.0) throw ConfigError("nu must be in (0,1)");
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0,1]");
  if (!(h > 0.0) || h > 1.0) throw ConfigError("h must be in (0,1]");
  if (horizon < 0) throw ConfigError("horizon must be nonnegative");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (burnin_fraction < 0.0 || burnin_fraction >= 1.0)
    throw ConfigError("burnin_fraction must be in [0,1)");
  if (noise < 0.0) throw ConfigError("noise amplitude must be nonnegative");
  if (trajectory_points < 2) throw ConfigError("trajectory_points must be at least 2");
}

void SimConfig::validate(const Game& game) const {
  validate();
  for (std::int64_t k = 0; k < game.num_profiles(); ++k)
    for (int i = 0; i < game.players(); ++i)
      if (epsilon * game.utility_flat(k, i) >= 1.0)
        throw ConfigError("epsilon * u_i(a) must stay below 1 (profile " +
                          game.profile_label(game.profile_at(k)) + ")");
  if (!initial_strategies.empty()) {
    if (static_cast<int>(initial_strategies.size()) != game.players())
      throw ConfigError("initial_strategies must have one vector per player");
    for (int i = 0; i < game.players(); ++i) {
      const auto& x = initial_strategies[i];
      if (static_cast<int>(x.size()) != game.num_actions(i))
        throw ConfigError("initial strategy length mismatch for player " + std::to_string(i));
      double sum = 0.0;
      for (double v : x) {
        if (v < 0.0) throw ConfigError("initial strategies must be nonnegative");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("initial strategy of player " + std::to_string(i) + " must sum to 1");
    }
  }
}

double phi(double y, double h) {
  if (h <= 0.0) throw ConfigError("phi needs h > 0");
  if (y >= 0.0) return 1.0;
  return std::max(h, 1.0 + y / h);
}

int sample_action(const AgentState& agent, double lambda, Rng& rng) {
  const bool tremble = rng.uniform01() < lambda;
  if (tremble) return rng.uniform_index(static_cast<int>(agent.strategy.size()));
  return rng.categorical(agent.strategy);
}

std::vector<double> strategy_update(const AgentState& agent, int chosen, double payoff,
                                    double epsilon, double h) {
  if (payoff <= 0.0)
    throw PositiveUtilityError("strategy update received payoff " + std::to_string(payoff) +
                               " <= 0");
  std::vector<double> x = agent.strategy;
  const double gain = epsilon * payoff * phi(payoff - agent.aspiration, h);
  double sum = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double target = (static_cast<int>(a) == chosen) ? 1.0 : 0.0;
    x[a] += gain * (target - x[a]);
    sum += x[a];
  }
  for (double& v : x) v /= sum;  // keep exactly on the simplex over long runs
  return x;
}

double aspiration_update(const AgentState& agent, double payoff, double nu) {
  return agent.aspiration + nu * (payoff - agent.aspiration);
}

namespace {

// Payoff measurement with the optional bounded noise hook. Noise draws are
// consumed only when the hook is active so noiseless runs keep their streams.
inline double measure_payoff(const Game& game, std::int64_t profile_idx, int player,
                             const SimConfig& config, Rng& rng) {
  double u = game.utility_flat(profile_idx, player);
  if (config.noise > 0.0) {
    u += config.noise * (2.0 * rng.uniform01() - 1.0);
    u = std::max(u, 1e-12);
  }
  return u;
}

inline void apply_updates(SystemState& state, const Game& game, const SimConfig& config,
                          Rng& rng) {
  const std::int64_t idx = game.profile_index(state.joint_action());
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    AgentState& agent = state.agents[i];
    const double payoff = measure_payoff(game, idx, static_cast<int>(i), config, rng);
    if (payoff <= 0.0)
      throw PositiveUtilityError("payoff " + std::to_string(payoff) + " <= 0 for player " +
                                 std::to_string(i) + " at " +
                                 game.profile_label(state.joint_action()));
    const double gain = config.epsilon * payoff * phi(payoff - agent.aspiration, config.h);
    double sum = 0.0;
    for (std::size_t a = 0; a < agent.strategy.size(); ++a) {
      const double target = (static_cast<int>(a) == agent.action) ? 1.0 : 0.0;
      agent.strategy[a] += gain * (target - agent.strategy[a]);
      sum += agent.strategy[a];
    }
    for (double& v : agent.strategy) v /= sum;
    agent.aspiration += config.nu * (payoff - agent.aspiration);
  }
  ++state.time;
}

}  // namespace

void step_in_place(SystemState& state, const Game& game, const SimConfig& config, Rng& rng) {
  for (auto& agent : state.agents) agent.action = sample_action(agent, config.lambda, rng);
  apply_updates(state, game, config, rng);
}

void step_with_trembles(SystemState& state, const Game& game, const SimConfig& config,
                        std::span<const std::uint8_t> trembles, Rng& rng) {
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    AgentState& agent = state.agents[i];
    if (trembles[i])
      agent.action = rng.uniform_index(static_cast<int>(agent.strategy.size()));
    else
      agent.action = rng.categorical(agent.strategy);
  }
  apply_updates(state, game, config, rng);
}

SystemState step(const SystemState& state, const Game& game, const SimConfig& config, Rng& rng) {
  SystemState next = state;
  step_in_place(next, game, config, rng);
  return next;
}

StepSizeCheck validate_step_sizes(const Game& game, double epsilon, double nu, double delta) {
  if (!(epsilon > 0.0) || epsilon >= 1.0) throw ConfigError("epsilon must be in (0,1)");
  if (!(nu > 0.0) || nu >= 1.0) throw ConfigError("nu must be in (0,1)");
  const double range = game.max_utility() - game.min_utility();
  if (!(range > 0.0)) throw ConfigError("utility range is zero; admissibility is undefined");
  if (!(delta > 0.0) || delta >= range)
    throw ConfigError("delta must lie in (0, u_max - u_min)");
  StepSizeCheck check;
  check.lhs = std::log(delta / range) / std::log(1.0 - nu);
  check.rhs = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < game.num_profiles(); ++k)
    for (int i = 0; i < game.players(); ++i) {
      const double u = game.utility_flat(k, i);
      if (u <= 0.0) throw ConfigError("admissibility needs strictly positive utilities");
      const double scaled = 1.0 - epsilon * u;
      if (scaled <= 0.0)
        throw ConfigError("epsilon * u_i(a) >= 1 at " + game.profile_label(game.profile_at(k)));
      check.rhs = std::min(check.rhs, std::log(delta) / std::log(scaled));
    }
  check.ok = check.lhs <= check.rhs;
  return check;
}

SystemState initial_state(const Game& game, const SimConfig& config, Rng& rng) {
  SystemState state;
  state.agents.resize(game.players());
  for (int i = 0; i < game.players(); ++i) {
    if (!config.initial_strategies.empty())
      state.agents[i].strategy = config.initial_strategies[i];
    else
      state.agents[i].strategy.assign(game.num_actions(i), 1.0 / game.num_actions(i));
  }
  for (auto& agent : state.agents) agent.action = rng.categorical(agent.strategy);
  const JointAction a0 = state.joint_action();
  for (int i = 0; i < game.players(); ++i) state.agents[i].aspiration = game.utility(a0, i);
  return state;
}

SystemState vertex_state(const Game& game, const JointAction& profile) {
  game.check_profile(profile);
  SystemState state;
  state.agents.resize(game.players());
  for (int i = 0; i < game.players(); ++i) {
    state.agents[i].strategy.assign(game.num_actions(i), 0.0);
    state.agents[i].strategy[profile[i]] = 1.0;
    state.agents[i].action = profile[i];
    state.agents[i].aspiration = game.utility(profile, i);
  }
  return state;
}

void validate_state(const SystemState& state, const Game& game, double aspiration_slack) {
  if (static_cast<int>(state.agents.size()) != game.players())
    throw ConfigError("state has wrong number of agents");
  for (int i = 0; i < game.players(); ++i) {
    const AgentState& agent = state.agents[i];
    if (static_cast<int>(agent.strategy.size()) != game.num_actions(i))
      throw ConfigError("strategy length mismatch for player " + std::to_string(i));
    double sum = 0.0;
    for (double v : agent.strategy) {
      if (v < -1e-12) throw ConfigError("negative strategy entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("strategy off the simplex");
    if (agent.action < 0 || agent.action >= game.num_actions(i))
      throw ConfigError("agent action out of range");
    if (agent.aspiration < game.min_utility() - aspiration_slack - 1e-9 ||
        agent.aspiration > game.max_utility() + aspiration_slack + 1e-9)
      throw ConfigError("aspiration of player " + std::to_string(i) +
                        " lies outside the payoff bracket");
  }
}

}  // namespace apla
