#include <cmath>
#include <random>

#include "agora/bradley_terry.hpp"
#include "agora/schulze.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace agora;
using testutil::ids;
using testutil::ranking;

namespace {

PairwiseWins two_way(int ab, int ba) {
  PairwiseWins w{ids({"A", "B"}), SquareMatrix<int>(2)};
  w.w(0, 1) = ab;
  w.w(1, 0) = ba;
  return w;
}

std::vector<std::vector<double>> dense(const PairwiseWins& w) {
  std::vector<std::vector<double>> out(w.candidates.size(), std::vector<double>(w.candidates.size()));
  for (size_t i = 0; i < out.size(); ++i) {
    for (size_t j = 0; j < out.size(); ++j) out[i][j] = w.w(i, j);
  }
  return out;
}

std::vector<double> logs_of(const BtStrengths& s) {
  std::vector<double> out;
  for (double v : s.strengths) out.push_back(std::log(v));
  return out;
}

}  // namespace

TEST_SUITE("bradley_terry") {
  TEST_CASE("wins from rankings") {
    auto one = wins_from_rankings(std::vector{ranking("a", {"A", "B", "C"})});
    CHECK(one.w(0, 1) == 1);
    CHECK(one.w(0, 2) == 1);
    CHECK(one.w(1, 2) == 1);
    CHECK(one.w(1, 0) == 0);
    CHECK(one.w(2, 0) == 0);
    CHECK(one.w(2, 1) == 0);

    auto opposite = wins_from_rankings(std::vector{ranking("a", {"A", "B"}), ranking("b", {"B", "A"})});
    CHECK(opposite.w(0, 1) == 1);
    CHECK(opposite.w(1, 0) == 1);

    auto rs = testutil::rankings({{"A", "B", "C"}, {"A", "B", "C"}, {"B", "C", "A"}, {"C", "A", "B"}});
    auto w = wins_from_rankings(rs);
    auto d = build_preference_matrix(rs, ids({"A", "B", "C"}));
    CHECK(w.w == d.d);

    CHECK_THROWS_AS(wins_from_rankings(std::vector{ranking("a", {"A", "B"}), ranking("b", {"A", "C"})}), Error);
  }

  TEST_CASE("symmetric two-way record gives equal strengths") {
    auto s = bt_fit(two_way(2, 2));
    CHECK(s.strength(CandidateId("A")) / s.strength(CandidateId("B")) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(bt_winner(s) == CandidateId("A"));
  }

  TEST_CASE("two-way record against grid search and closed form") {
    const double q = oracle::two_way_grid(3.5, 1.5);
    REQUIRE(std::abs(q - 0.7) < 1e-6);
    auto s = bt_fit(two_way(3, 1));
    double ratio = s.strength(CandidateId("A")) / s.strength(CandidateId("B"));
    CHECK(std::abs(ratio - q / (1 - q)) < 1e-3);
    CHECK(std::abs(ratio - 3.5 / 1.5) < 1e-8);
  }

  TEST_CASE("single ranking orders strengths, checked by grid search") {
    auto w = wins_from_rankings(std::vector{ranking("a", {"A", "B", "C"})});
    auto s = bt_fit(w);
    auto grid = oracle::bt_grid_search3(dense(w), 0.5);
    CHECK(grid[0] > grid[1]);
    CHECK(grid[1] > grid[2]);
    CHECK(s.strength(CandidateId("A")) > s.strength(CandidateId("B")));
    CHECK(s.strength(CandidateId("B")) > s.strength(CandidateId("C")));
    for (size_t i = 0; i < 3; ++i) CHECK(std::log(s.strengths[i]) == doctest::Approx(grid[i]).epsilon(1e-4));
    CHECK(bt_winner(s) == CandidateId("A"));
  }

  TEST_CASE("gauge is fixed and strengths are positive") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      auto pool = oracle::random_pool(rng, 6);
      auto s = bt_fit(wins_from_rankings(testutil::rankings(oracle::random_ballots(rng, pool, 10))));
      double sum = 0;
      for (double v : s.strengths) {
        CHECK(v > 0);
        sum += std::log(v);
      }
      CHECK(std::abs(sum) < 1e-9);
    }
  }

  TEST_CASE("scaling counts and pseudocount together leaves the fit unchanged") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
      auto pool = oracle::random_pool(rng, 5);
      auto w = wins_from_rankings(testutil::rankings(oracle::random_ballots(rng, pool, 8)));
      auto base = bt_fit(w);
      for (int k : {2, 3, 7}) {
        auto scaled = w;
        for (size_t i = 0; i < pool.size(); ++i) {
          for (size_t j = 0; j < pool.size(); ++j) scaled.w(i, j) *= k;
        }
        BtOptions o;
        o.pseudocount = 0.5 * k;
        auto fit = bt_fit(scaled, o);
        for (size_t i = 0; i < pool.size(); ++i) {
          CHECK(std::abs(std::log(fit.strengths[i]) - std::log(base.strengths[i])) < 1e-8);
        }
      }
    }
  }

  TEST_CASE("gradient vanishes at the optimum (central differences)") {
    std::mt19937 rng(33);
    for (int trial = 0; trial < 30; ++trial) {
      auto pool = oracle::random_pool(rng, 6);
      auto w = wins_from_rankings(testutil::rankings(oracle::random_ballots(rng, pool, 12)));
      auto s = bt_fit(w);
      auto theta = logs_of(s);
      auto dw = dense(w);
      const double h = 1e-5;
      for (size_t i = 0; i < theta.size(); ++i) {
        auto plus = theta, minus = theta;
        plus[i] += h;
        minus[i] -= h;
        double grad = (oracle::bt_loglik(dw, 0.5, plus) - oracle::bt_loglik(dw, 0.5, minus)) / (2 * h);
        CHECK(std::abs(grad) < 1e-6);
      }
      CHECK(bt_log_likelihood(w, 0.5, theta) == doctest::Approx(oracle::bt_loglik(dw, 0.5, theta)));
    }
  }

  TEST_CASE("unanimous ballots: BT and Schulze agree") {
    std::mt19937 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      auto pool = oracle::random_pool(rng, 6);
      auto one = oracle::random_ballots(rng, pool, 1).front();
      std::vector<oracle::Order> ballots(std::uniform_int_distribution<int>(1, 6)(rng), one);
      auto rs = testutil::rankings(ballots);
      auto bt = bt_winner(bt_fit(wins_from_rankings(rs)));
      auto sch = schulze_winner(strongest_paths(build_preference_matrix(rs, ids(pool)))).winner;
      CHECK(bt == sch);
      CHECK(bt == CandidateId(one.front()));
    }
  }

  TEST_CASE("winner ties and explicit strengths") {
    CHECK(bt_winner(BtStrengths{ids({"B", "A"}), {1.0, 2.33}}) == CandidateId("A"));
    CHECK(bt_winner(BtStrengths{ids({"A", "B"}), {2.33, 1.0}}) == CandidateId("A"));
    CHECK(bt_winner(BtStrengths{ids({"C", "B", "A"}), {1.0, 1.0, 1.0}}) == CandidateId("A"));
  }

  TEST_CASE("unregularized fits need a strongly connected comparison graph") {
    BtOptions o;
    o.pseudocount = 0;
    CHECK_THROWS_AS(bt_fit(two_way(3, 0), o), Error);
    auto s = bt_fit(two_way(3, 1), o);
    CHECK(s.strength(CandidateId("A")) / s.strength(CandidateId("B")) == doctest::Approx(3.0));
  }

  TEST_CASE("iteration cap raises with the last iterate") {
    BtOptions o;
    o.max_iterations = 2;
    auto w = wins_from_rankings(testutil::rankings({{"A", "B", "C"}, {"B", "A", "C"}, {"A", "C", "B"}}));
    try {
      bt_fit(w, o);
      FAIL("expected convergence error");
    } catch (const BtConvergenceError& e) {
      CHECK(e.code() == ErrorCode::kConvergence);
      CHECK(e.last_iterate().strengths.size() == 3);
      CHECK(e.last_iterate().iterations == 2);
    }
  }
}
