#include "apla/chain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "apla/parallel.hpp"
#include "json.hpp"

namespace apla {

using nlohmann::json;

std::vector<std::uint8_t> sample_multi_tremble_pattern(int n, double lambda_q, Rng& rng) {
  if (!(lambda_q > 0.0) || lambda_q >= 1.0) throw ConfigError("lambda_q must be in (0,1)");
  std::vector<std::uint8_t> pattern(n, 0);
  while (true) {
    int count = 0;
    for (int i = 0; i < n; ++i) {
      pattern[i] = rng.uniform01() < lambda_q ? 1 : 0;
      count += pattern[i];
    }
    if (count >= 2) return pattern;
  }
}

namespace {

// Tremble pattern of the at-most-one-tremble process at rate lambda: none with
// weight (1-lambda)^n, exactly agent i with weight lambda (1-lambda)^(n-1).
void le1_tremble_pattern(int n, double lambda, Rng& rng, std::vector<std::uint8_t>& pattern) {
  std::fill(pattern.begin(), pattern.end(), 0);
  if (lambda <= 0.0) return;
  const double w_none = std::pow(1.0 - lambda, n);
  const double w_one = lambda * std::pow(1.0 - lambda, n - 1);
  const double total = w_none + n * w_one;
  const double u = rng.uniform01() * total;
  if (u < w_none) return;
  int who = static_cast<int>((u - w_none) / w_one);
  if (who >= n) who = n - 1;
  pattern[who] = 1;
}

}  // namespace

SystemState sample_q_kick(const PureStrategyState& source, const Game& game,
                          const SimConfig& config, Rng& rng, double lambda_q) {
  SystemState state = source.state(game);
  const auto pattern = sample_multi_tremble_pattern(game.players(), lambda_q, rng);
  step_with_trembles(state, game, config, pattern, rng);
  return state;
}

EmpiricalChain estimate_phat(const Game& game, const SimConfig& config,
                             const ChainOptions& options) {
  config.validate(game);
  if (options.episodes < 1) throw ConfigError("episodes must be at least 1");
  const GameClassReport klass = check_coordination(game);
  if (!klass.is_coordination)
    throw EstimationError(
        "transition estimation requires a coordination game; classification failed" +
        std::string(klass.nash_set.empty() ? " (no pure Nash equilibrium)" : ""));

  EmpiricalChain chain;
  chain.states = nash_pure_states(game);
  const int S = static_cast<int>(chain.states.size());
  chain.episodes = options.episodes;
  chain.episode_cap = options.episode_cap;
  if (chain.episode_cap <= 0) {
    const auto check = validate_step_sizes(game, config.epsilon, config.nu, config.delta);
    chain.episode_cap = 10 * static_cast<std::int64_t>(std::ceil(check.rhs));
  }

  // flat profile index -> row index, -1 for non-Nash profiles
  std::vector<int> nash_row(game.num_profiles(), -1);
  for (int s = 0; s < S; ++s) nash_row[game.profile_index(chain.states[s].profile)] = s;

  std::vector<std::atomic<std::int64_t>> tally(static_cast<std::size_t>(S) * S);
  std::vector<std::atomic<std::int64_t>> escape_tally(S);
  for (auto& a : tally) a.store(0);
  for (auto& a : escape_tally) a.store(0);

  const std::int64_t n_tasks = static_cast<std::int64_t>(S) * options.episodes;
  parallel_for(n_tasks, options.threads, [&](std::int64_t task) {
    const int row = static_cast<int>(task / options.episodes);
    const std::int64_t episode = task % options.episodes;
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(row), episode));
    SystemState state = sample_q_kick(chain.states[row], game, config, rng, options.lambda_q);
    std::vector<std::uint8_t> pattern(game.players(), 0);
    int hit = -1;
    for (std::int64_t t = 0; t <= chain.episode_cap; ++t) {
      const std::int64_t k = game.profile_index(state.joint_action());
      const int target = nash_row[k];
      if (target >= 0 && in_neighborhood(state, chain.states[target], game, config.delta)) {
        hit = target;
        break;
      }
      if (t == chain.episode_cap) break;
      le1_tremble_pattern(game.players(), config.lambda, rng, pattern);
      step_with_trembles(state, game, config, pattern, rng);
    }
    if (hit >= 0)
      tally[static_cast<std::size_t>(row) * S + hit].fetch_add(1, std::memory_order_relaxed);
    else
      escape_tally[row].fetch_add(1, std::memory_order_relaxed);
  });

  chain.counts.assign(S, std::vector<std::int64_t>(S, 0));
  chain.matrix.assign(S, std::vector<double>(S, 0.0));
  chain.escapes.assign(S, 0);
  for (int r = 0; r < S; ++r) {
    chain.escapes[r] = escape_tally[r].load();
    std::int64_t resolved = 0;
    for (int c = 0; c < S; ++c) {
      chain.counts[r][c] = tally[static_cast<std::size_t>(r) * S + c].load();
      resolved += chain.counts[r][c];
    }
    if (resolved == 0)
      throw EstimationError("row " + chain.states[r].label(game) + " resolved zero of " +
                            std::to_string(options.episodes) + " episodes (all escaped)");
    for (int c = 0; c < S; ++c)
      chain.matrix[r][c] = static_cast<double>(chain.counts[r][c]) / resolved;
  }
  return chain;
}

namespace {

bool is_irreducible(const std::vector<std::vector<double>>& m) {
  const int S = static_cast<int>(m.size());
  std::vector<std::vector<char>> reach(S, std::vector<char>(S, 0));
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) reach[i][j] = (i == j || m[i][j] > 0.0) ? 1 : 0;
  for (int k = 0; k < S; ++k)
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < S; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j)
      if (!reach[i][j]) return false;
  return true;
}

}  // namespace

StationaryResult stationary_distribution(const std::vector<std::vector<double>>& matrix,
                                         double tol, std::int64_t max_iterations) {
  const int S = static_cast<int>(matrix.size());
  if (S == 0) throw ConfigError("empty transition matrix");
  for (int r = 0; r < S; ++r) {
    if (static_cast<int>(matrix[r].size()) != S) throw ConfigError("matrix is not square");
    double sum = 0.0;
    for (double v : matrix[r]) {
      if (v < 0.0) throw ConfigError("matrix has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("matrix row " + std::to_string(r) + " sums to " + std::to_string(sum));
  }

  StationaryResult result;
  result.irreducible = is_irreducible(matrix);
  std::vector<double> pi(S, 1.0 / S), next(S, 0.0);
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int r = 0; r < S; ++r)
      for (int c = 0; c < S; ++c) out[c] += v[r] * matrix[r][c];
  };
  double residual = std::numeric_limits<double>::infinity();
  std::int64_t it = 0;
  for (; it < max_iterations; ++it) {
    apply(pi, next);
    residual = 0.0;
    for (int c = 0; c < S; ++c) residual = std::max(residual, std::abs(next[c] - pi[c]));
    if (residual <= tol) break;
    // half-lazy update keeps periodic chains convergent without moving pi
    double sum = 0.0;
    for (int c = 0; c < S; ++c) {
      pi[c] = 0.5 * pi[c] + 0.5 * next[c];
      sum += pi[c];
    }
    for (double& v : pi) v /= sum;
  }
  if (residual > tol)
    throw SolverError("stationary solver stalled at residual " + std::to_string(residual) +
                      " after " + std::to_string(it) + " iterations");
  result.pi = pi;
  result.residual = residual;
  result.iterations = it;
  return result;
}

StationaryResult stationary_distribution(const EmpiricalChain& chain, double tol,
                                         std::int64_t max_iterations) {
  return stationary_distribution(chain.matrix, tol, max_iterations);
}

CrossValidation cross_validate(const Game& game, const EmpiricalChain& chain,
                               const StationaryResult& stationary,
                               const OccupationStats& occupation) {
  CrossValidation cv;
  cv.pi = stationary.pi;
  cv.occupation.resize(chain.states.size());
  double total = 0.0;
  for (std::size_t s = 0; s < chain.states.size(); ++s) {
    cv.occupation[s] = occupation.fraction_of(game, chain.states[s].profile);
    total += cv.occupation[s];
  }
  if (total <= 0.0)
    throw EstimationError("occupation places no mass on any Nash neighborhood");
  for (double& v : cv.occupation) v /= total;
  cv.max_abs_discrepancy = 0.0;
  for (std::size_t s = 0; s < chain.states.size(); ++s)
    cv.max_abs_discrepancy = std::max(cv.max_abs_discrepancy,
                                      std::abs(cv.pi[s] - cv.occupation[s]));
  return cv;
}

std::string config_json(const SimConfig& config, int indent) {
  json doc;
  doc["epsilon"] = config.epsilon;
  doc["nu"] = config.nu;
  doc["lambda"] = config.lambda;
  doc["h"] = config.h;
  doc["horizon"] = config.horizon;
  doc["seed"] = config.seed;
  doc["delta"] = config.delta;
  doc["burnin_fraction"] = config.burnin_fraction;
  doc["noise"] = config.noise;
  doc["trajectory_points"] = config.trajectory_points;
  return doc.dump(indent);
}

std::string chain_report_json(const Game& game, const EmpiricalChain& chain,
                              const StationaryResult& stationary, const SimConfig& config,
                              int indent) {
  json doc;
  doc["states"] = json::array();
  for (const auto& s : chain.states) doc["states"].push_back(s.label(game));
  doc["profiles"] = json::array();
  for (const auto& s : chain.states) doc["profiles"].push_back(s.profile);
  doc["matrix"] = chain.matrix;
  doc["counts"] = chain.counts;
  doc["pi"] = stationary.pi;
  doc["residual"] = stationary.residual;
  doc["iterations"] = stationary.iterations;
  doc["irreducible"] = stationary.irreducible;
  doc["escapes"] = chain.escapes;
  doc["episodes"] = chain.episodes;
  doc["episode_cap"] = chain.episode_cap;
  doc["config"] = json::parse(config_json(config));
  return doc.dump(indent);
}

}  // namespace apla
