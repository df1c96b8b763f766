#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "apla/game.hpp"

using namespace apla;

namespace {

Game stag_hunt() { return Game::load(std::string(APLA_GAMES_DIR) + "/stag_hunt.json"); }

Game constant_game() { return Game::load(std::string(APLA_GAMES_DIR) + "/constant.json"); }

// 1/-1 matching-pennies pattern shifted positive: no pure equilibrium.
Game matching_pennies_positive() {
  return Game({2, 2}, {2, 1, 1, 2, 1, 2, 2, 1});
}

// Independent check of the equilibrium condition: literal scan over every
// unilateral deviation, written separately from the library path.
bool oracle_is_nash(const Game& g, const JointAction& profile) {
  for (int i = 0; i < g.players(); ++i) {
    JointAction dev = profile;
    for (int a = 0; a < g.num_actions(i); ++a) {
      dev[i] = a;
      if (g.utility(dev, i) > g.utility(profile, i)) return false;
    }
  }
  return true;
}

Game random_game(std::mt19937_64& gen, int max_players = 3, int max_actions = 3) {
  std::uniform_int_distribution<int> players(2, max_players), actions(2, max_actions);
  std::uniform_real_distribution<double> payoff(0.1, 10.0);
  const int n = players(gen);
  std::vector<int> counts(n);
  std::int64_t profiles = 1;
  for (int& c : counts) {
    c = actions(gen);
    profiles *= c;
  }
  std::vector<double> payoffs(profiles * n);
  for (double& v : payoffs) v = payoff(gen);
  return Game(std::move(counts), std::move(payoffs));
}

}  // namespace

TEST_CASE("utility reads the payoff tensor") {
  const Game g = stag_hunt();
  CHECK(g.utility({0, 0}) == std::vector<double>{5, 5});
  CHECK(g.utility({1, 0}) == std::vector<double>{3, 1});
  CHECK(g.utility({0, 1}) == std::vector<double>{1, 3});
  CHECK(g.utility({1, 1}) == std::vector<double>{4, 4});
  CHECK_THROWS_AS((void)g.utility({2, 0}), InvalidProfileError);
  CHECK_THROWS_AS((void)g.utility({0, 0, 0}), InvalidProfileError);
  CHECK_THROWS_AS((void)g.utility({0, -1}), InvalidProfileError);
}

TEST_CASE("shipped stag hunt reproduces the classic payoff table") {
  const Game g = stag_hunt();
  CHECK(g.players() == 2);
  CHECK(g.action_counts() == std::vector<int>{2, 2});
  CHECK(g.profile_label({0, 0}) == "(A,A)");
  CHECK(g.profile_label({1, 1}) == "(B,B)");
}

TEST_CASE("best response is set valued") {
  const Game g = stag_hunt();
  CHECK(best_response(g, 0, {0, 0}) == std::vector<int>{0});  // vs A: 5 > 3
  CHECK(best_response(g, 0, {0, 1}) == std::vector<int>{1});  // vs B: 4 > 1
  CHECK(best_response(g, 1, {0, 0}) == std::vector<int>{0});
  const Game c = constant_game();
  CHECK(best_response(c, 0, {0, 0}) == std::vector<int>{0, 1});  // all tie
  CHECK(best_response(c, 1, {1, 0}) == std::vector<int>{0, 1});
}

TEST_CASE("best response is never empty") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Game g = random_game(gen);
    JointAction profile(g.players());
    for (int i = 0; i < g.players(); ++i)
      profile[i] = static_cast<int>(gen() % g.num_actions(i));
    for (int i = 0; i < g.players(); ++i) CHECK(!best_response(g, i, profile).empty());
  }
}

TEST_CASE("pure Nash enumeration") {
  CHECK(pure_nash_equilibria(stag_hunt()) ==
        std::vector<JointAction>{{0, 0}, {1, 1}});
  CHECK(pure_nash_equilibria(constant_game()).size() == 4);  // ties everywhere
  CHECK(pure_nash_equilibria(matching_pennies_positive()).empty());
}

TEST_CASE("enumerated equilibria agree with the deviation-scan oracle") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Game g = random_game(gen);
    std::set<std::int64_t> found;
    for (const auto& p : pure_nash_equilibria(g)) {
      CHECK(oracle_is_nash(g, p));
      found.insert(g.profile_index(p));
    }
    for (std::int64_t k = 0; k < g.num_profiles(); ++k)
      if (!found.count(k)) CHECK(!oracle_is_nash(g, g.profile_at(k)));
  }
}

TEST_CASE("positive-utility check") {
  CHECK(check_positive_utility(stag_hunt()).ok);
  Game zeroed({2, 2}, {5, 5, 1, 3, 3, 1, 0, 4});
  const auto r = check_positive_utility(zeroed);
  CHECK(!r.ok);
  CHECK(*r.violation == JointAction{1, 1});
  CHECK(r.violating_player == 0);
  Game negated({2, 2}, {-5, -5, -1, -3, -3, -1, -4, -4});
  CHECK(!check_positive_utility(negated).ok);
}

TEST_CASE("stag hunt is a coordination game") {
  const auto report = check_coordination(stag_hunt());
  CHECK(report.is_positive_utility);
  CHECK(report.is_coordination);
  CHECK(report.condition_a_ok);
  CHECK(report.condition_b_ok);
  CHECK(report.nash_set == std::vector<JointAction>{{0, 0}, {1, 1}});
  CHECK(report.payoff_dominant_set == std::vector<JointAction>{{0, 0}});
  // Punishing deviation at (A,A): player 0 switching to B yields (3,1),
  // strictly worse for both.
  REQUIRE(report.punish_witnesses.size() == 2);
  CHECK(report.punish_witnesses[0].profile == JointAction{0, 0});
  CHECK(report.punish_witnesses[0].player == 0);
  CHECK(report.punish_witnesses[0].action == 1);
  // One best-response witness per non-Nash profile.
  CHECK(report.br_witnesses.size() == 2);
}

TEST_CASE("constant game fails the punishing-deviation condition") {
  const auto report = check_coordination(constant_game());
  CHECK(!report.is_coordination);
  CHECK(report.condition_a_ok);  // vacuous: every profile is an equilibrium
  CHECK(!report.condition_b_ok);
  REQUIRE(report.condition_b_violation.has_value());
  CHECK(*report.condition_b_violation == JointAction{0, 0});
}

TEST_CASE("witness search can optionally allow self best responses") {
  // With ties, a non-Nash profile may have a player whose action is already a
  // best response; only the distinct-action interpretation forces progress.
  const Game g = stag_hunt();
  CoordinationOptions lax;
  lax.require_distinct_best_response = false;
  const auto lax_report = check_coordination(g, lax);
  CHECK(lax_report.is_coordination);
  for (const auto& w : check_coordination(g).br_witnesses)
    CHECK(w.action != w.profile[w.player]);
}

TEST_CASE("condition-a witnesses chain into a short path to equilibrium") {
  const Game g = stag_hunt();
  const auto report = check_coordination(g);
  std::vector<char> nash(g.num_profiles(), 0);
  for (const auto& p : report.nash_set) nash[g.profile_index(p)] = 1;
  for (std::int64_t k = 0; k < g.num_profiles(); ++k) {
    if (nash[k]) continue;
    const auto path = best_response_path(g, g.profile_at(k), report);
    CHECK(path.size() <= static_cast<std::size_t>(g.num_profiles()));
    CHECK(std::find(report.nash_set.begin(), report.nash_set.end(), path.back()) !=
          report.nash_set.end());
  }
}

TEST_CASE("witness paths terminate for random coordination games") {
  std::mt19937_64 gen(23);
  int coordination_games = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Game g = random_game(gen, 2, 3);
    const auto report = check_coordination(g);
    if (!report.is_coordination) continue;
    ++coordination_games;
    std::vector<char> nash(g.num_profiles(), 0);
    for (const auto& p : report.nash_set) nash[g.profile_index(p)] = 1;
    for (std::int64_t k = 0; k < g.num_profiles(); ++k) {
      if (nash[k]) continue;
      const auto path = best_response_path(g, g.profile_at(k), report);
      CHECK(path.size() <= static_cast<std::size_t>(g.num_profiles()));
    }
  }
  CHECK(coordination_games > 0);  // the sample actually exercised the walk
}

TEST_CASE("payoff-dominant refinement") {
  CHECK(payoff_dominant_states(stag_hunt()) == std::vector<JointAction>{{0, 0}});

  // Two equilibria with identical payoff vectors: no strict dominance, both kept.
  Game twin({2, 2}, {5, 5, 1, 2, 2, 1, 5, 5});
  const auto nash = pure_nash_equilibria(twin);
  REQUIRE(nash.size() == 2);
  CHECK(payoff_dominant_states(twin, nash) == nash);

  // Three players, equilibrium payoffs (5,5,5) vs (4,4,4): the former wins.
  std::vector<double> u(8 * 3, 1.0);
  auto at = [&](int a, int b, int c) { return (a * 4 + b * 2 + c) * 3; };
  for (int p = 0; p < 3; ++p) u[at(0, 0, 0) + p] = 5.0;
  for (int p = 0; p < 3; ++p) u[at(1, 1, 1) + p] = 4.0;
  Game trio({2, 2, 2}, u);
  CHECK(pure_nash_equilibria(trio) ==
        std::vector<JointAction>{{0, 0, 0}, {1, 1, 1}});
  CHECK(payoff_dominant_states(trio) == std::vector<JointAction>{{0, 0, 0}});
}

TEST_CASE("payoff-dominant members dominate every excluded equilibrium") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Game g = random_game(gen);
    const auto nash = pure_nash_equilibria(g);
    const auto dominant = payoff_dominant_states(g, nash);
    if (nash.empty()) {
      CHECK(dominant.empty());
      continue;
    }
    CHECK(!dominant.empty());
    for (const auto& d : dominant)
      CHECK(std::find(nash.begin(), nash.end(), d) != nash.end());
    for (const auto& d : dominant)
      for (const auto& n : nash) {
        if (std::find(dominant.begin(), dominant.end(), n) != dominant.end()) continue;
        for (int i = 0; i < g.players(); ++i) CHECK(g.utility(d, i) > g.utility(n, i));
      }
  }
}

TEST_CASE("game JSON round trip") {
  const Game g = stag_hunt();
  const Game back = Game::from_json_string(g.to_json_string());
  CHECK(back.players() == g.players());
  CHECK(back.action_counts() == g.action_counts());
  for (std::int64_t k = 0; k < g.num_profiles(); ++k)
    for (int i = 0; i < g.players(); ++i)
      CHECK(back.utility_flat(k, i) == g.utility_flat(k, i));
  CHECK(back.profile_label({0, 1}) == "(A,B)");
}

TEST_CASE("malformed game files are rejected with context") {
  CHECK_THROWS_AS(Game::from_json_string("{\"players\": 2,"), ParseError);
  CHECK_THROWS_AS(Game::from_json_string("[1,2,3]"), ParseError);
  CHECK_THROWS_AS(Game::from_json_string(R"({"players": 2, "actions": [2]})"), ParseError);
  CHECK_THROWS_AS(
      Game::from_json_string(
          R"({"players": 2, "actions": [2, 2], "utilities": [[[5,5],[1,3]],[[3,1]]]})"),
      ParseError);
  CHECK_THROWS_AS(
      Game::from_json_string(
          R"({"players": 2, "actions": [2, 2], "utilities": [[[5,5],[1,3]],[[3,1],[4]]]})"),
      ParseError);
  CHECK_THROWS_AS(Game::load("/nonexistent/game.json"), ParseError);
}

TEST_CASE("games keep at least two players and two actions each") {
  CHECK_THROWS_AS(Game({2}, {1, 1}), ParseError);
  CHECK_THROWS_AS(Game({2, 1}, {1, 1, 1, 1}), ParseError);
  CHECK_THROWS_AS(Game({2, 2}, {1, 1, 1, 1}), ParseError);  // wrong tensor size
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Game({2, 2}, {1, 1, 1, 1, 1, 1, inf, 1}), ParseError);
}
