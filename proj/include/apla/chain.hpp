#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apla/dynamics.hpp"
#include "apla/game.hpp"
#include "apla/simulate.hpp"

namespace apla {

struct ChainOptions {
  std::int64_t episodes = 10000;  // per source state
  std::int64_t episode_cap = 0;   // max follow-up steps; 0 = 10x the admissibility rhs
  double lambda_q = 0.1;          // reference tremble rate for the multi-tremble kick
  int threads = 0;                // 0 = hardware concurrency
};

// Empirical finite-state chain over the pure Nash equilibrium states.
struct EmpiricalChain {
  std::vector<PureStrategyState> states;        // lexicographic joint-action order
  std::vector<std::vector<double>> matrix;      // row-normalized over resolved episodes
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::int64_t> escapes;            // per row: episodes that hit the cap
  std::int64_t episodes = 0;
  std::int64_t episode_cap = 0;
};

struct StationaryResult {
  std::vector<double> pi;
  double residual = 0.0;  // ||pi - pi P||_inf on the original matrix
  std::int64_t iterations = 0;
  bool irreducible = true;  // false means pi is a convention (uniform start), not unique
};

struct CrossValidation {
  std::vector<double> pi;
  std::vector<double> occupation;  // occupation renormalized over the Nash neighborhoods
  double max_abs_discrepancy = 0.0;
};

// i.i.d. Bernoulli(lambda_q) tremble flags conditioned on >= 2 agents
// trembling, drawn by rejection.
std::vector<std::uint8_t> sample_multi_tremble_pattern(int n, double lambda_q, Rng& rng);

// One multi-tremble transition out of a pure strategy state: a subset of >= 2
// agents trembles (sample_multi_tremble_pattern), the rest draw from their
// vertex strategies, and the full strategy/aspiration update is applied once.
SystemState sample_q_kick(const PureStrategyState& source, const Game& game,
                          const SimConfig& config, Rng& rng, double lambda_q = 0.1);

// Estimates the transition matrix between pure Nash equilibrium states: from
// each source state, kick with sample_q_kick and follow the at-most-one-
// tremble process until some Nash delta-neighborhood (config.delta) is
// entered or the cap is hit. Rows are normalized over resolved episodes;
// episodes that never re-enter are reported per row as escapes. Throws
// EstimationError if the game is not a coordination game or a row resolves
// zero episodes.
EmpiricalChain estimate_phat(const Game& game, const SimConfig& config,
                             const ChainOptions& options = {});

// Stationary vector of a row-stochastic matrix by damped power iteration from
// the uniform vector. On a reducible matrix the result depends on the start
// and is flagged via irreducible = false. Throws SolverError when the
// residual does not reach tol within max_iterations.
StationaryResult stationary_distribution(const std::vector<std::vector<double>>& matrix,
                                         double tol = 1e-12,
                                         std::int64_t max_iterations = 1'000'000);
StationaryResult stationary_distribution(const EmpiricalChain& chain, double tol = 1e-12,
                                         std::int64_t max_iterations = 1'000'000);

// Compares pi against the run occupation renormalized over the Nash
// neighborhoods. Both inputs must come from the same game and (epsilon, nu, h).
CrossValidation cross_validate(const Game& game, const EmpiricalChain& chain,
                               const StationaryResult& stationary,
                               const OccupationStats& occupation);

// JSON report with states, matrix, pi, residual, escapes, episodes and the
// resolved config (matrix rows in lexicographic joint-action order).
std::string chain_report_json(const Game& game, const EmpiricalChain& chain,
                              const StationaryResult& stationary, const SimConfig& config,
                              int indent = 2);

// Resolved-config serialization shared by the report writers.
std::string config_json(const SimConfig& config, int indent = -1);

}  // namespace apla
