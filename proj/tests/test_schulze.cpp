#include <random>

#include "agora/schulze.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace agora;
using testutil::ids;

namespace {

StrongestPaths paths_for(const std::vector<oracle::Order>& ballots, const oracle::Order& pool,
                         LinkStrength rule = LinkStrength::kWinningVotes) {
  return strongest_paths(build_preference_matrix(testutil::rankings(ballots), ids(pool)), rule);
}

int p_at(const StrongestPaths& sp, const std::string& x, const std::string& y) {
  auto ix = std::find(sp.candidates.begin(), sp.candidates.end(), CandidateId(x)) - sp.candidates.begin();
  auto iy = std::find(sp.candidates.begin(), sp.candidates.end(), CandidateId(y)) - sp.candidates.begin();
  return sp.p(ix, iy);
}

}  // namespace

TEST_SUITE("schulze") {
  TEST_CASE("single candidate") {
    auto sp = paths_for({{"A"}}, {"A"});
    CHECK(sp.p(0, 0) == 0);
    auto r = schulze_winner(sp);
    CHECK(r.winner == CandidateId("A"));
    CHECK(r.order == ids({"A"}));
  }

  TEST_CASE("single winning link") {
    auto sp = paths_for({{"A", "B"}, {"A", "B"}, {"B", "A"}}, {"A", "B"});
    CHECK(p_at(sp, "A", "B") == 2);
    CHECK(p_at(sp, "B", "A") == 0);
  }

  TEST_CASE("three-candidate instance against path enumeration") {
    std::vector<oracle::Order> ballots{{"A", "B", "C"}, {"A", "B", "C"}, {"B", "C", "A"}, {"C", "A", "B"}};
    oracle::Order pool{"A", "B", "C"};
    auto expected = oracle::brute_force_paths(pool, oracle::count_preferences(ballots));
    // Frozen from the oracle. A-C is a 2:2 tie, so neither direction is a
    // link and nothing reaches A or gets from C to B.
    REQUIRE(oracle::get(expected, "A", "B") == 3);
    REQUIRE(oracle::get(expected, "A", "C") == 3);
    REQUIRE(oracle::get(expected, "B", "C") == 3);
    REQUIRE(oracle::get(expected, "B", "A") == 0);
    REQUIRE(oracle::get(expected, "C", "A") == 0);
    REQUIRE(oracle::get(expected, "C", "B") == 0);

    auto sp = paths_for(ballots, pool);
    for (const auto& x : pool) {
      for (const auto& y : pool) {
        if (x != y) CHECK(p_at(sp, x, y) == oracle::get(expected, x, y));
      }
    }
    auto r = schulze_winner(sp);
    CHECK(r.winner == CandidateId("A"));
    CHECK(r.order == ids({"A", "B", "C"}));
    CHECK(oracle::schulze_winner(pool, expected) == "A");
  }

  TEST_CASE("fully symmetric paths fall back to id order") {
    auto sp = paths_for({{"C", "B", "A"}, {"A", "B", "C"}}, {"C", "B", "A"});
    auto r = schulze_winner(sp);
    CHECK(r.winner == CandidateId("A"));
    CHECK(r.order == ids({"A", "B", "C"}));
  }

  TEST_CASE("margins variant") {
    auto sp = paths_for({{"A", "B"}, {"A", "B"}, {"B", "A"}}, {"A", "B"}, LinkStrength::kMargins);
    CHECK(p_at(sp, "A", "B") == 1);
    CHECK(p_at(sp, "B", "A") == 0);
  }

  TEST_CASE("closure and link invariants on random instances") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      auto pool = oracle::random_pool(rng, 6);
      auto ballots = oracle::random_ballots(rng, pool, 20);
      auto d = build_preference_matrix(testutil::rankings(ballots), ids(pool));
      auto sp = strongest_paths(d);
      const auto n = pool.size();
      for (size_t x = 0; x < n; ++x) {
        for (size_t y = 0; y < n; ++y) {
          if (x == y) continue;
          if (d.d(x, y) > d.d(y, x)) CHECK(sp.p(x, y) >= d.d(x, y));
          for (size_t z = 0; z < n; ++z) {
            if (z == x || z == y) continue;
            CHECK(sp.p(x, y) >= std::min(sp.p(x, z), sp.p(z, y)));
          }
        }
      }
      auto winner = schulze_winner(sp).winner;
      auto w = static_cast<size_t>(std::find(pool.begin(), pool.end(), winner.str()) - pool.begin());
      for (size_t y = 0; y < n; ++y) CHECK(sp.p(w, y) >= sp.p(y, w));
    }
  }

  TEST_CASE("winner matches path enumeration, margins included") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
      auto pool = oracle::random_pool(rng, 6);
      auto ballots = oracle::random_ballots(rng, pool, 20);
      for (bool margins : {false, true}) {
        auto expected = oracle::brute_force_paths(pool, oracle::count_preferences(ballots), margins);
        auto sp = paths_for(ballots, pool, margins ? LinkStrength::kMargins : LinkStrength::kWinningVotes);
        CHECK(schulze_winner(sp).winner.str() == oracle::schulze_winner(pool, expected));
      }
    }
  }

  TEST_CASE("unanimity, homogeneity and relabeling equivariance") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 150; ++trial) {
      auto pool = oracle::random_pool(rng, 6);
      auto ballots = oracle::random_ballots(rng, pool, 20);
      auto winner = schulze_winner(paths_for(ballots, pool)).winner;

      auto doubled = ballots;
      doubled.insert(doubled.end(), ballots.begin(), ballots.end());
      CHECK(schulze_winner(paths_for(doubled, pool)).winner == winner);

      // Unanimous favourite: move a random candidate to the top everywhere.
      auto fav = pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)];
      auto forced = ballots;
      for (auto& b : forced) {
        b.erase(std::find(b.begin(), b.end(), fav));
        b.insert(b.begin(), fav);
      }
      CHECK(schulze_winner(paths_for(forced, pool)).winner == CandidateId(fav));

      // Relabel with an order-preserving id map so tie-breaks are unchanged.
      auto relabel = [](const std::string& s) { return "z" + s; };
      auto relabeled = ballots;
      for (auto& b : relabeled) {
        for (auto& c : b) c = relabel(c);
      }
      oracle::Order pool2;
      for (const auto& c : pool) pool2.push_back(relabel(c));
      CHECK(schulze_winner(paths_for(relabeled, pool2)).winner == CandidateId(relabel(winner.str())));
    }
  }
}
