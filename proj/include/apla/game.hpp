#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apla/errors.hpp"

namespace apla {

// Joint action: one action index per player.
using JointAction = std::vector<int>;

// Finite strategic-form game with a dense payoff tensor. Immutable after
// construction; enumeration below is exhaustive, so cost grows exponentially
// with the number of players (fine for desk-scale games).
class Game {
 public:
  // payoffs laid out as [profile_index * players + player], profiles in
  // lexicographic order with player 0 most significant.
  Game(std::vector<int> action_counts, std::vector<double> payoffs,
       std::vector<std::vector<std::string>> action_labels = {});

  int players() const { return n_; }
  int num_actions(int player) const { return action_counts_[player]; }
  const std::vector<int>& action_counts() const { return action_counts_; }
  std::int64_t num_profiles() const { return num_profiles_; }

  // Payoff of one player at a joint action.
  double utility(const JointAction& profile, int player) const;
  // Payoff vector (u_1(a), ..., u_n(a)).
  std::vector<double> utility(const JointAction& profile) const;

  double utility_flat(std::int64_t profile_index, int player) const {
    return payoffs_[profile_index * n_ + player];
  }

  std::int64_t profile_index(const JointAction& profile) const;
  JointAction profile_at(std::int64_t index) const;

  double min_utility() const { return min_utility_; }
  double max_utility() const { return max_utility_; }

  const std::vector<std::vector<std::string>>& action_labels() const { return labels_; }
  std::string action_label(int player, int action) const;
  // "(A,B)" style label for a profile.
  std::string profile_label(const JointAction& profile) const;

  void check_profile(const JointAction& profile) const;

  std::string to_json_string(int indent = 2) const;
  static Game from_json_string(const std::string& text);
  static Game load(const std::string& path);
  void save(const std::string& path) const;

 private:
  int n_;
  std::vector<int> action_counts_;
  std::vector<std::int64_t> strides_;
  std::int64_t num_profiles_;
  std::vector<double> payoffs_;
  std::vector<std::vector<std::string>> labels_;
  double min_utility_, max_utility_;
};

// Best response of `player` against profile's complementary actions;
// set valued, all argmax ties included. Never empty.
std::vector<int> best_response(const Game& game, int player, const JointAction& profile,
                               double tol = 0.0);

// Exhaustive enumeration of pure Nash equilibria, lexicographic order.
// `tol` relaxes payoff comparisons for noisy tensors (default exact).
std::vector<JointAction> pure_nash_equilibria(const Game& game, double tol = 0.0);

struct PositivityReport {
  bool ok = true;
  std::optional<JointAction> violation;  // first profile with u_i <= 0
  int violating_player = -1;
};

PositivityReport check_positive_utility(const Game& game);

// Witness for one profile: the deviating player and the action they switch to.
struct DeviationWitness {
  JointAction profile;
  int player;
  int action;
};

struct CoordinationOptions {
  double tol = 0.0;
  // Condition (a) quantifies over best responses; when true the witness must
  // change the deviator's action (the interpretation under which a witness
  // path makes progress toward equilibrium).
  bool require_distinct_best_response = true;
};

struct GameClassReport {
  bool is_positive_utility = false;
  bool is_coordination = false;
  bool condition_a_ok = false;  // off-equilibrium best response helping everyone
  bool condition_b_ok = false;  // equilibrium deviation hurting everyone
  std::vector<JointAction> nash_set;
  std::vector<JointAction> payoff_dominant_set;
  std::vector<DeviationWitness> br_witnesses;      // one per non-Nash profile
  std::vector<DeviationWitness> punish_witnesses;  // one per Nash profile
  std::optional<JointAction> positivity_violation;
  std::optional<JointAction> condition_a_violation;  // first failing profile
  std::optional<JointAction> condition_b_violation;
  CoordinationOptions options;

  std::string to_json_string(const Game& game, int indent = 2) const;
};

// Classifies the game against both coordination-game conditions and collects
// per-profile witnesses. Deterministic: players scanned in index order, actions
// in index order, first witness wins.
GameClassReport check_coordination(const Game& game, CoordinationOptions options = {});

// The most refined nonempty subset of the Nash set whose members strictly
// dominate, for every player, every Nash profile outside the subset. Falls
// back to the whole Nash set when no strict dominance structure exists.
std::vector<JointAction> payoff_dominant_states(const Game& game,
                                                const std::vector<JointAction>& nash_set,
                                                double tol = 0.0);
std::vector<JointAction> payoff_dominant_states(const Game& game, double tol = 0.0);

// Follows condition-(a) witnesses from `start` until a Nash profile is hit;
// returns the visited profiles (start first). Throws Error if no witness
// exists or the walk exceeds the number of profiles (no such path in a
// coordination game).
std::vector<JointAction> best_response_path(const Game& game, const JointAction& start,
                                            const GameClassReport& report);

}  // namespace apla
