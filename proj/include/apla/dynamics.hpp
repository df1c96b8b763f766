#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "apla/game.hpp"
#include "apla/rng.hpp"

namespace apla {

// One learning automaton: mixed strategy on the action simplex, aspiration
// level (discounted running payoff average) and the action currently played.
struct AgentState {
  std::vector<double> strategy;
  double aspiration = 0.0;
  int action = 0;
};

struct SystemState {
  std::vector<AgentState> agents;
  std::int64_t time = 0;

  JointAction joint_action() const {
    JointAction a(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) a[i] = agents[i].action;
    return a;
  }
};

struct SimConfig {
  double epsilon = 1e-4;  // strategy step size
  double nu = 1e-3;       // aspiration step size
  double lambda = 0.01;   // tremble probability
  double h = 0.01;        // satisfaction floor in (0,1]; h = 1 disables aspiration damping
  std::int64_t horizon = 2'000'000;
  std::uint64_t seed = 1;
  double delta = 0.05;  // neighborhood radius for occupation tracking

  // Fraction of the horizon discarded before occupation is measured.
  double burnin_fraction = 0.5;
  // Amplitude of additive uniform payoff noise in [-noise, noise]; payoffs are
  // clamped below at a tiny positive floor so positivity survives. 0 = off.
  double noise = 0.0;
  // Number of trajectory samples kept per run.
  std::int64_t trajectory_points = 2000;
  // Per-agent initial strategies; empty = uniform.
  std::vector<std::vector<double>> initial_strategies;

  // Throws ConfigError on out-of-range parameters; with a game also enforces
  // epsilon * u_i(a) < 1 for every payoff.
  void validate() const;
  void validate(const Game& game) const;
};

// Satisfaction multiplier: 1 for y >= 0, max(h, 1 + y/h) below aspiration.
// Always within [h, 1].
double phi(double y, double h);

// Draws the next action: categorical from the strategy with probability
// 1 - lambda, uniform otherwise. Consumes exactly two draws.
int sample_action(const AgentState& agent, double lambda, Rng& rng);

// Reinforcement step toward the chosen vertex, damped by the satisfaction of
// payoff relative to the agent's current aspiration. Result is renormalized
// onto the simplex. Throws PositiveUtilityError when payoff <= 0.
std::vector<double> strategy_update(const AgentState& agent, int chosen, double payoff,
                                    double epsilon, double h);

// (1 - nu) * aspiration + nu * payoff.
double aspiration_update(const AgentState& agent, double payoff, double nu);

// One synchronous step for all agents: sample actions, measure payoffs at the
// new joint action, update strategies against the old aspirations, then update
// aspirations. Pure: the input state is untouched.
SystemState step(const SystemState& state, const Game& game, const SimConfig& config, Rng& rng);

// In-place variant used by the long-horizon loops.
void step_in_place(SystemState& state, const Game& game, const SimConfig& config, Rng& rng);

// Like step_in_place but with the tremble pattern fixed by the caller
// (trembles[i] != 0 forces a uniform draw for agent i). Used by the
// conditioned processes in the chain estimator.
void step_with_trembles(SystemState& state, const Game& game, const SimConfig& config,
                        std::span<const std::uint8_t> trembles, Rng& rng);

struct StepSizeCheck {
  bool ok = false;
  double lhs = 0.0;  // steps the slowest aspiration needs to close the payoff range to delta
  double rhs = 0.0;  // steps the fastest strategy needs to reach a delta-vertex neighborhood
};

// Admissibility of (epsilon, nu): the aspiration must settle faster than the
// strategy locks in, i.e. log(delta/(u_max-u_min))/log(1-nu) <= min over
// players and profiles of log(delta)/log(1 - epsilon*u_i(a)).
StepSizeCheck validate_step_sizes(const Game& game, double epsilon, double nu, double delta);

// Default start: uniform (or configured) strategies, initial joint action
// drawn from them, aspirations set to the realized payoffs.
SystemState initial_state(const Game& game, const SimConfig& config, Rng& rng);

// Exact vertex state for a joint action: unit-mass strategies and aspirations
// equal to the profile's payoffs.
SystemState vertex_state(const Game& game, const JointAction& profile);

// aspiration_slack widens the payoff bracket allowed for aspirations (used by
// runs with the noise hook active).
void validate_state(const SystemState& state, const Game& game, double aspiration_slack = 0.0);

}  // namespace apla
