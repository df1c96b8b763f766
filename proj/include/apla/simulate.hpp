#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apla/dynamics.hpp"
#include "apla/game.hpp"

namespace apla {

// A joint action together with the vertex strategies and utility-valued
// aspirations it induces (the induced pieces are derived, not stored).
struct PureStrategyState {
  JointAction profile;

  SystemState state(const Game& game) const { return vertex_state(game, profile); }
  std::string label(const Game& game) const { return game.profile_label(profile); }
};

// Every pure strategy state, lexicographic in the joint action.
std::vector<PureStrategyState> all_pure_states(const Game& game);
// The pure Nash equilibrium states, same order.
std::vector<PureStrategyState> nash_pure_states(const Game& game, double tol = 0.0);

// True iff the joint action matches and both the strategy profile and the
// aspiration profile lie within Euclidean distance delta of the target vertex.
bool in_neighborhood(const SystemState& state, const PureStrategyState& target, const Game& game,
                     double delta);

struct OccupationStats {
  std::vector<PureStrategyState> states;  // all pure states, lexicographic
  std::vector<double> fractions;          // neighborhood visit share per state
  double elsewhere = 0.0;                 // share outside every neighborhood
  std::vector<double> action_frequencies; // play share per joint action (flat profile index)
  std::int64_t window_begin = 0;          // first measured step (inclusive)
  std::int64_t window_end = 0;            // last measured step (inclusive)
  std::int64_t total_steps = 0;

  int dominant_index() const;
  double fraction_of(const Game& game, const JointAction& profile) const;
  // Total fraction over a set of profiles (e.g. the payoff-dominant set).
  double fraction_of(const Game& game, const std::vector<JointAction>& profiles) const;
};

struct TrajectorySample {
  std::int64_t t = 0;
  JointAction action;
  std::vector<std::vector<double>> strategies;
  std::vector<double> aspirations;
};

struct Trajectory {
  std::int64_t stride = 1;
  std::vector<TrajectorySample> samples;  // t = 0, stride, 2*stride, ..., horizon
};

struct RunResult {
  OccupationStats occupation;
  Trajectory trajectory;
  SystemState final_state;
  StepSizeCheck step_size_check;
  bool step_size_check_failed_to_evaluate = false;
};

// Runs `horizon` steps from `init` (default: initial_state drawn from the
// config seed) and accumulates neighborhood occupation over the window that
// survives burn-in. Deterministic given (game, config, init). With
// strict_step_sizes the admissibility check must pass; otherwise a failed or
// unevaluable check is only reported in the result.
RunResult run(const Game& game, const SimConfig& config,
              std::optional<SystemState> init = std::nullopt, bool strict_step_sizes = false);

struct SweepCellResult {
  double lambda = 0.0;
  double h = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::vector<double> fractions;  // per pure state, same order as SweepResult::states
  double elsewhere = 0.0;
  double dominant_occupation = 0.0;  // total mass on the payoff-dominant set
};

struct SweepAggregate {
  double lambda = 0.0;
  double h = 0.0;
  double mean = 0.0;    // mean payoff-dominant occupation over replicates
  double stddev = 0.0;  // sample standard deviation
};

struct SweepResult {
  std::vector<PureStrategyState> states;
  std::vector<JointAction> payoff_dominant_set;
  int replicates = 0;
  std::vector<SweepCellResult> cells;       // lambda-major, then h, then replicate
  std::vector<SweepAggregate> aggregates;   // per (lambda, h)
};

// Monte-Carlo grid over (lambda, h) with `replicates` runs per cell, executed
// concurrently. Per-run seeds derive from base.seed, the cell index and the
// replicate index unless derive_seeds is false (then every run reuses
// base.seed). Aggregation order is fixed, so results are reproducible for any
// thread count.
SweepResult sweep(const Game& game, const SimConfig& base, const std::vector<double>& lambdas,
                  const std::vector<double>& hs, int replicates, int threads = 0,
                  bool derive_seeds = true);

}  // namespace apla
