#include "apla/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace apla {

using nlohmann::json;

Game::Game(std::vector<int> action_counts, std::vector<double> payoffs,
           std::vector<std::vector<std::string>> action_labels)
    : n_(static_cast<int>(action_counts.size())),
      action_counts_(std::move(action_counts)),
      labels_(std::move(action_labels)) {
  if (n_ < 2) throw ParseError("a game needs at least 2 players");
  num_profiles_ = 1;
  for (int c : action_counts_) {
    if (c < 2) throw ParseError("every player needs at least 2 actions");
    num_profiles_ *= c;
  }
  strides_.assign(n_, 1);
  for (int i = n_ - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * action_counts_[i + 1];
  if (static_cast<std::int64_t>(payoffs.size()) != num_profiles_ * n_)
    throw ParseError("payoff tensor size does not match (|A_1| x ... x |A_n|) x n");
  for (double v : payoffs)
    if (!std::isfinite(v)) throw ParseError("payoff tensor contains a non-finite entry");
  payoffs_ = std::move(payoffs);
  if (!labels_.empty()) {
    if (static_cast<int>(labels_.size()) != n_)
      throw ParseError("action_labels must have one entry per player");
    for (int i = 0; i < n_; ++i)
      if (static_cast<int>(labels_[i].size()) != action_counts_[i])
        throw ParseError("action_labels[" + std::to_string(i) + "] has wrong length");
  }
  auto [lo, hi] = std::minmax_element(payoffs_.begin(), payoffs_.end());
  min_utility_ = *lo;
  max_utility_ = *hi;
}

void Game::check_profile(const JointAction& profile) const {
  if (static_cast<int>(profile.size()) != n_)
    throw InvalidProfileError("profile has " + std::to_string(profile.size()) +
                              " entries, expected " + std::to_string(n_));
  for (int i = 0; i < n_; ++i)
    if (profile[i] < 0 || profile[i] >= action_counts_[i])
      throw InvalidProfileError("action " + std::to_string(profile[i]) +
                                " out of range for player " + std::to_string(i));
}

std::int64_t Game::profile_index(const JointAction& profile) const {
  check_profile(profile);
  std::int64_t idx = 0;
  for (int i = 0; i < n_; ++i) idx += profile[i] * strides_[i];
  return idx;
}

JointAction Game::profile_at(std::int64_t index) const {
  JointAction profile(n_);
  for (int i = 0; i < n_; ++i) {
    profile[i] = static_cast<int>(index / strides_[i]);
    index %= strides_[i];
  }
  return profile;
}

double Game::utility(const JointAction& profile, int player) const {
  if (player < 0 || player >= n_) throw InvalidProfileError("player index out of range");
  return payoffs_[profile_index(profile) * n_ + player];
}

std::vector<double> Game::utility(const JointAction& profile) const {
  const std::int64_t base = profile_index(profile) * n_;
  return {payoffs_.begin() + base, payoffs_.begin() + base + n_};
}

std::string Game::action_label(int player, int action) const {
  if (!labels_.empty()) return labels_[player][action];
  return std::to_string(action);
}

std::string Game::profile_label(const JointAction& profile) const {
  std::string out = "(";
  for (int i = 0; i < n_; ++i) {
    if (i) out += ",";
    out += action_label(i, profile[i]);
  }
  return out + ")";
}

namespace {

json payoff_tree(const Game& g, int depth, JointAction& profile) {
  json arr = json::array();
  if (depth == g.players()) {
    for (double v : g.utility(profile)) arr.push_back(v);
    return arr;
  }
  for (int a = 0; a < g.num_actions(depth); ++a) {
    profile[depth] = a;
    arr.push_back(payoff_tree(g, depth + 1, profile));
  }
  return arr;
}

}  // namespace

Game Game::from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("game file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ParseError("game file must be a JSON object");
    if (!doc.contains("players") || !doc.contains("actions") || !doc.contains("utilities"))
      throw ParseError("game file needs fields: players, actions, utilities");
    const int n = doc["players"].get<int>();
    std::vector<int> counts = doc["actions"].get<std::vector<int>>();
    if (static_cast<int>(counts.size()) != n)
      throw ParseError("actions must list one action count per player");
    std::int64_t profiles = 1;
    for (int c : counts) {
      if (c < 1) throw ParseError("action counts must be positive");
      profiles *= c;
    }
    std::vector<std::int64_t> strides(n, 1);
    for (int i = n - 2; i >= 0; --i) strides[i] = strides[i + 1] * counts[i + 1];
    std::vector<double> payoffs(profiles * n, 0.0);
    // walk the nested utilities array; index = sum a_i * strides[i]
    {
      const json& root = doc["utilities"];
      // recursive fill with explicit profile index bookkeeping
      std::vector<int> prof(n, 0);
      std::function<void(const json&, int, std::int64_t)> rec = [&](const json& node, int depth,
                                                                    std::int64_t idx) {
        if (depth == n) {
          if (!node.is_array() || static_cast<int>(node.size()) != n)
            throw ParseError("utilities: innermost entries must be arrays of " +
                             std::to_string(n) + " payoffs");
          for (int p = 0; p < n; ++p) {
            if (!node[p].is_number())
              throw ParseError("utilities: payoff entry is not a number");
            payoffs[idx * n + p] = node[p].get<double>();
          }
          return;
        }
        if (!node.is_array() || static_cast<int>(node.size()) != counts[depth])
          throw ParseError("utilities: expected " + std::to_string(counts[depth]) +
                           " entries at depth " + std::to_string(depth));
        for (int a = 0; a < counts[depth]; ++a) rec(node[a], depth + 1, idx + a * strides[depth]);
      };
      rec(root, 0, 0);
    }
    std::vector<std::vector<std::string>> labels;
    if (doc.contains("action_labels"))
      labels = doc["action_labels"].get<std::vector<std::vector<std::string>>>();
    return Game(std::move(counts), std::move(payoffs), std::move(labels));
  } catch (const json::exception& e) {
    throw ParseError(std::string("game file has a malformed field: ") + e.what());
  }
}

std::string Game::to_json_string(int indent) const {
  json doc;
  doc["players"] = n_;
  doc["actions"] = action_counts_;
  JointAction profile(n_, 0);
  doc["utilities"] = payoff_tree(*this, 0, profile);
  if (!labels_.empty()) doc["action_labels"] = labels_;
  return doc.dump(indent);
}

Game Game::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open game file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_string(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void Game::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write game file: " + path);
  out << to_json_string() << "\n";
}

std::vector<int> best_response(const Game& game, int player, const JointAction& profile,
                               double tol) {
  game.check_profile(profile);
  if (player < 0 || player >= game.players())
    throw InvalidProfileError("player index out of range");
  JointAction probe = profile;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < game.num_actions(player); ++a) {
    probe[player] = a;
    best = std::max(best, game.utility(probe, player));
  }
  std::vector<int> out;
  for (int a = 0; a < game.num_actions(player); ++a) {
    probe[player] = a;
    if (game.utility(probe, player) >= best - tol) out.push_back(a);
  }
  return out;
}

namespace {

bool is_nash(const Game& game, const JointAction& profile, double tol) {
  JointAction probe = profile;
  for (int i = 0; i < game.players(); ++i) {
    const double here = game.utility(profile, i);
    for (int a = 0; a < game.num_actions(i); ++a) {
      probe[i] = a;
      if (game.utility(probe, i) > here + tol) return false;
    }
    probe[i] = profile[i];
  }
  return true;
}

}  // namespace

std::vector<JointAction> pure_nash_equilibria(const Game& game, double tol) {
  std::vector<JointAction> out;
  for (std::int64_t k = 0; k < game.num_profiles(); ++k) {
    JointAction profile = game.profile_at(k);
    if (is_nash(game, profile, tol)) out.push_back(std::move(profile));
  }
  return out;
}

PositivityReport check_positive_utility(const Game& game) {
  PositivityReport report;
  for (std::int64_t k = 0; k < game.num_profiles(); ++k) {
    for (int i = 0; i < game.players(); ++i) {
      if (game.utility_flat(k, i) <= 0.0) {
        report.ok = false;
        report.violation = game.profile_at(k);
        report.violating_player = i;
        return report;
      }
    }
  }
  return report;
}

GameClassReport check_coordination(const Game& game, CoordinationOptions options) {
  GameClassReport report;
  report.options = options;
  auto positivity = check_positive_utility(game);
  report.is_positive_utility = positivity.ok;
  report.positivity_violation = positivity.violation;

  report.nash_set = pure_nash_equilibria(game, options.tol);
  std::vector<char> nash_mask(game.num_profiles(), 0);
  for (const auto& p : report.nash_set) nash_mask[game.profile_index(p)] = 1;

  // Condition (a): every non-Nash profile admits a best-response deviation
  // that makes no other player worse off.
  report.condition_a_ok = true;
  for (std::int64_t k = 0; k < game.num_profiles(); ++k) {
    if (nash_mask[k]) continue;
    const JointAction profile = game.profile_at(k);
    bool found = false;
    for (int i = 0; i < game.players() && !found; ++i) {
      for (int a : best_response(game, i, profile, options.tol)) {
        if (options.require_distinct_best_response && a == profile[i]) continue;
        JointAction dev = profile;
        dev[i] = a;
        bool ok = true;
        for (int j = 0; j < game.players(); ++j) {
          if (j == i) continue;
          if (game.utility(dev, j) < game.utility(profile, j) - options.tol) {
            ok = false;
            break;
          }
        }
        if (ok) {
          report.br_witnesses.push_back({profile, i, a});
          found = true;
          break;
        }
      }
    }
    if (!found) {
      report.condition_a_ok = false;
      if (!report.condition_a_violation) report.condition_a_violation = profile;
    }
  }

  // Condition (b): every Nash profile admits a deviation that makes every
  // player (deviator included) strictly worse off.
  report.condition_b_ok = true;
  for (const auto& star : report.nash_set) {
    bool found = false;
    for (int i = 0; i < game.players() && !found; ++i) {
      for (int a = 0; a < game.num_actions(i); ++a) {
        if (a == star[i]) continue;
        JointAction dev = star;
        dev[i] = a;
        bool ok = true;
        for (int j = 0; j < game.players(); ++j) {
          if (!(game.utility(dev, j) < game.utility(star, j) - options.tol)) {
            ok = false;
            break;
          }
        }
        if (ok) {
          report.punish_witnesses.push_back({star, i, a});
          found = true;
          break;
        }
      }
    }
    if (!found) {
      report.condition_b_ok = false;
      if (!report.condition_b_violation) report.condition_b_violation = star;
    }
  }

  report.is_coordination =
      report.condition_a_ok && report.condition_b_ok && !report.nash_set.empty();
  if (report.is_coordination)
    report.payoff_dominant_set = payoff_dominant_states(game, report.nash_set, options.tol);
  return report;
}

std::vector<JointAction> payoff_dominant_states(const Game& game,
                                                const std::vector<JointAction>& nash_set,
                                                double tol) {
  const int m = static_cast<int>(nash_set.size());
  if (m == 0) return {};
  // dominates[a][b]: u_i(nash a) > u_i(nash b) for every player
  std::vector<std::vector<char>> dominates(m, std::vector<char>(m, 0));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      bool all = true;
      for (int i = 0; i < game.players(); ++i)
        if (!(game.utility(nash_set[a], i) > game.utility(nash_set[b], i) + tol)) {
          all = false;
          break;
        }
      dominates[a][b] = all;
    }
  // Start from the undominated profiles (every admissible set contains them),
  // then grow until every member dominates every non-member. The admissible
  // sets are totally ordered by inclusion, so this yields the smallest one.
  std::vector<char> in(m, 1);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (dominates[b][a]) in[a] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < m; ++a) {
      if (!in[a]) continue;
      for (int b = 0; b < m; ++b) {
        if (in[b] || dominates[a][b]) continue;
        in[b] = 1;
        changed = true;
      }
    }
  }
  std::vector<JointAction> out;
  for (int a = 0; a < m; ++a)
    if (in[a]) out.push_back(nash_set[a]);
  return out;
}

std::vector<JointAction> payoff_dominant_states(const Game& game, double tol) {
  return payoff_dominant_states(game, pure_nash_equilibria(game, tol), tol);
}

std::vector<JointAction> best_response_path(const Game& game, const JointAction& start,
                                            const GameClassReport& report) {
  std::vector<char> nash_mask(game.num_profiles(), 0);
  for (const auto& p : report.nash_set) nash_mask[game.profile_index(p)] = 1;
  std::vector<JointAction> path{start};
  JointAction here = start;
  while (!nash_mask[game.profile_index(here)]) {
    if (static_cast<std::int64_t>(path.size()) > game.num_profiles())
      throw Error("best-response path exceeded the number of profiles");
    bool stepped = false;
    for (const auto& w : report.br_witnesses) {
      if (w.profile == here) {
        here[w.player] = w.action;
        path.push_back(here);
        stepped = true;
        break;
      }
    }
    if (!stepped) throw Error("no witness recorded for profile " + game.profile_label(here));
  }
  return path;
}

namespace {

json profile_json(const Game& game, const JointAction& p) {
  return json{{"profile", p}, {"label", game.profile_label(p)}};
}

json witness_json(const Game& game, const DeviationWitness& w) {
  return json{{"profile", w.profile},
              {"label", game.profile_label(w.profile)},
              {"player", w.player},
              {"action", w.action},
              {"action_label", game.action_label(w.player, w.action)}};
}

}  // namespace

std::string GameClassReport::to_json_string(const Game& game, int indent) const {
  json doc;
  doc["positive_utility"] = {{"ok", is_positive_utility}};
  doc["positive_utility"]["violation"] =
      positivity_violation ? profile_json(game, *positivity_violation) : json(nullptr);
  doc["coordination"] = is_coordination;
  doc["condition_a"] = {{"ok", condition_a_ok}};
  doc["condition_a"]["violation"] =
      condition_a_violation ? profile_json(game, *condition_a_violation) : json(nullptr);
  doc["condition_b"] = {{"ok", condition_b_ok}};
  doc["condition_b"]["violation"] =
      condition_b_violation ? profile_json(game, *condition_b_violation) : json(nullptr);
  doc["nash"] = json::array();
  for (const auto& p : nash_set) doc["nash"].push_back(profile_json(game, p));
  doc["payoff_dominant"] = json::array();
  for (const auto& p : payoff_dominant_set) doc["payoff_dominant"].push_back(profile_json(game, p));
  doc["witnesses"]["best_response"] = json::array();
  for (const auto& w : br_witnesses) doc["witnesses"]["best_response"].push_back(witness_json(game, w));
  doc["witnesses"]["punishment"] = json::array();
  for (const auto& w : punish_witnesses) doc["witnesses"]["punishment"].push_back(witness_json(game, w));
  doc["options"] = {{"tol", options.tol},
                    {"require_distinct_best_response", options.require_distinct_best_response}};
  return doc.dump(indent);
}

}  // namespace apla
