#include <random>
#include <sstream>

#include "agora/bradley_terry.hpp"
#include "agora/deliberation.hpp"
#include "agora/serialization.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "scripts.hpp"
#include "test_util.hpp"

using namespace agora;
using testutil::ids;

namespace {

DeliberationHeader header(ConsensusConfig config = {}) {
  DeliberationHeader h;
  h.id = DeliberationId("d1");
  h.question = "What should we do about X?";
  h.creator = "user-0";
  h.consensus = config;
  return h;
}

JoinRequest with_statement(const std::string& id, std::vector<CandidateId> ranking) {
  JoinRequest r;
  r.opinion = "an opinion";
  r.statement = StatementDraft{CandidateId(id), "title " + id, "body " + id + "."};
  r.ranking = std::move(ranking);
  return r;
}

JoinRequest ranking_only(std::vector<CandidateId> ranking) {
  JoinRequest r;
  r.opinion = "an opinion";
  r.ranking = std::move(ranking);
  return r;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kUndefined;
}

// Agent i ends up holding ballots[i]. Agent 0 authors every candidate.
Deliberation seeded(const std::vector<oracle::Order>& ballots, ConsensusConfig config = {}) {
  auto pool = ballots.front();
  auto sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  Deliberation d = open_deliberation(header(config));
  d = join(d, AgentId("a0"), with_statement(sorted[0], ids({sorted[0]})), 1).state;
  std::vector<CandidateId> so_far{CandidateId(sorted[0])};
  for (size_t i = 1; i < sorted.size(); ++i) {
    so_far.emplace_back(sorted[i]);
    d = propose_statement(d, AgentId("a0"), {CandidateId(sorted[i]), "t", "b."}, so_far, 2).state;
  }
  for (size_t i = 1; i < ballots.size(); ++i) {
    d = join(d, AgentId("a" + std::to_string(i)), ranking_only(ids(ballots[i])), 3).state;
  }
  return edit_ranking(d, AgentId("a0"), ids(ballots[0]), std::nullopt, 4).state;
}

}  // namespace

TEST_SUITE("deliberation") {
  TEST_CASE("join examples") {
    auto d = open_deliberation(header());
    auto t1 = join(d, AgentId("a1"), with_statement("S1", ids({"S1"})), 10);
    CHECK(t1.state.active_pool() == ids({"S1"}));
    CHECK(t1.state.rankings.at(AgentId("a1")).order == ids({"S1"}));
    CHECK(t1.state.winner == CandidateId("S1"));
    CHECK(t1.event.seq == 1);
    CHECK(t1.event.kind == EventKind::kJoined);

    auto t2 = join(t1.state, AgentId("a2"), ranking_only(ids({"S1"})), 11);
    CHECK(t2.state.winner == CandidateId("S1"));

    // S2 lands at the median of a1's [S1], which is rank 1.
    auto t3 = join(t1.state, AgentId("a2"), with_statement("S2", ids({"S2", "S1"})), 11);
    CHECK(t3.state.rankings.at(AgentId("a1")).order == ids({"S2", "S1"}));
    auto oracle_paths = oracle::brute_force_paths(
        {"S1", "S2"}, oracle::count_preferences({{"S2", "S1"}, {"S2", "S1"}}));
    CHECK(oracle::get(oracle_paths, "S2", "S1") == 2);
    CHECK(t3.state.winner->str() == oracle::schulze_winner({"S1", "S2"}, oracle_paths));
    CHECK(t3.state.winner == CandidateId("S2"));

    // Implicit ranking when the pool is empty.
    auto t4 = join(d, AgentId("a1"), JoinRequest{"op", ProducedVia::kAutonomous, {}, {}}, 1);
    CHECK(t4.state.rankings.at(AgentId("a1")).order.empty());
    CHECK_FALSE(t4.state.winner);
  }

  TEST_CASE("join errors") {
    auto d = join(open_deliberation(header()), AgentId("a1"), with_statement("S1", ids({"S1"})), 1).state;
    CHECK(code_of([&] { join(d, AgentId("a1"), ranking_only(ids({"S1"})), 2); }) == ErrorCode::kConflict);
    CHECK(code_of([&] { join(d, AgentId("a2"), JoinRequest{"op", {}, {}, {}}, 2); }) == ErrorCode::kValidation);
    CHECK(code_of([&] { join(d, AgentId("a2"), ranking_only(ids({"S1", "S1"})), 2); }) == ErrorCode::kValidation);
    CHECK(code_of([&] { join(d, AgentId("a2"), ranking_only(ids({"Q"})), 2); }) == ErrorCode::kValidation);
    CHECK(code_of([&] { join(d, AgentId("a2"), JoinRequest{"  ", {}, {}, ids({"S1"})}, 2); }) ==
          ErrorCode::kValidation);
    CHECK(code_of([&] { join(d, AgentId("a2"), with_statement("S1", ids({"S1"})), 2); }) ==
          ErrorCode::kConflict);
    auto closed = close_deliberation(d, "user-0", 3).state;
    CHECK(code_of([&] { join(closed, AgentId("a2"), ranking_only(ids({"S1"})), 4); }) == ErrorCode::kClosed);
  }

  TEST_CASE("propose statement extends other rankings at the median") {
    auto d = seeded({{"A", "B", "C"}, {"A", "B", "C"}});
    auto t = propose_statement(d, AgentId("a0"), {CandidateId("D"), "t", "b."}, ids({"D", "A", "B", "C"}), 9);
    CHECK(t.state.rankings.at(AgentId("a1")).order == ids({"A", "D", "B", "C"}));
    CHECK(t.state.rankings.at(AgentId("a0")).order == ids({"D", "A", "B", "C"}));
    CHECK(t.event.kind == EventKind::kStatementProposed);

    auto empty = join(open_deliberation(header()), AgentId("a1"),
                      JoinRequest{"op", ProducedVia::kAutonomous, {}, {}}, 1).state;
    auto first = propose_statement(empty, AgentId("a1"), {CandidateId("S"), "t", "b."}, ids({"S"}), 2);
    CHECK(first.state.winner == CandidateId("S"));
  }

  TEST_CASE("concurrent proposals: the later one must include the earlier") {
    auto base = seeded({{"A"}, {"A"}});
    // Both proposers read pool {A}. a0 commits first.
    auto after_first = propose_statement(base, AgentId("a0"), {CandidateId("P"), "t", "b."}, ids({"P", "A"}), 5).state;
    CHECK(code_of([&] {
            propose_statement(after_first, AgentId("a1"), {CandidateId("Q"), "t", "b."}, ids({"Q", "A"}), 6);
          }) == ErrorCode::kConflict);
    // Retry after re-reading succeeds.
    auto retry = propose_statement(after_first, AgentId("a1"), {CandidateId("Q"), "t", "b."},
                                   ids({"Q", "A", "P"}), 6);
    CHECK(retry.state.active_pool() == ids({"A", "P", "Q"}));
    CHECK(code_of([&] {
            propose_statement(base, AgentId("zz"), {CandidateId("R"), "t", "b."}, ids({"R", "A"}), 6);
          }) == ErrorCode::kNotFound);
  }

  TEST_CASE("edit ranking") {
    auto d = seeded({{"A", "B"}});
    CHECK(d.winner == CandidateId("A"));
    auto flipped = edit_ranking(d, AgentId("a0"), ids({"B", "A"}), RevisionKind::kViewChanged, 9);
    CHECK(flipped.state.winner == CandidateId("B"));
    CHECK(flipped.event.kind == EventKind::kRankingEdited);

    auto same = edit_ranking(d, AgentId("a0"), ids({"A", "B"}), std::nullopt, 9);
    CHECK(same.state.winner == d.winner);
    CHECK(same.state.event_seq == d.event_seq + 1);

    CHECK(code_of([&] { edit_ranking(d, AgentId("a0"), ids({"A"}), std::nullopt, 9); }) == ErrorCode::kConflict);
    CHECK(code_of([&] { edit_ranking(d, AgentId("a0"), ids({"A", "Z"}), std::nullopt, 9); }) ==
          ErrorCode::kValidation);
    auto closed = close_deliberation(d, "user-0", 10).state;
    CHECK(code_of([&] { edit_ranking(closed, AgentId("a0"), ids({"B", "A"}), std::nullopt, 11); }) ==
          ErrorCode::kClosed);
  }

  TEST_CASE("edit ranking on the four-ballot instance, checked by path enumeration") {
    std::vector<oracle::Order> ballots{{"A", "B", "C"}, {"A", "B", "C"}, {"B", "C", "A"}, {"C", "A", "B"}};
    auto d = seeded(ballots);
    CHECK(d.winner == CandidateId("A"));
    ballots[2] = {"A", "C", "B"};
    auto after = edit_ranking(d, AgentId("a2"), ids(ballots[2]), std::nullopt, 9).state;
    oracle::Order pool{"A", "B", "C"};
    auto expected = oracle::schulze_winner(pool, oracle::brute_force_paths(pool, oracle::count_preferences(ballots)));
    CHECK(expected == "A");
    CHECK(after.winner == CandidateId(expected));

    ballots[0] = {"C", "B", "A"};
    ballots[1] = {"C", "B", "A"};
    auto after2 = edit_ranking(edit_ranking(after, AgentId("a0"), ids(ballots[0]), std::nullopt, 10).state,
                               AgentId("a1"), ids(ballots[1]), std::nullopt, 11).state;
    expected = oracle::schulze_winner(pool, oracle::brute_force_paths(pool, oracle::count_preferences(ballots)));
    CHECK(expected == "C");
    CHECK(after2.winner == CandidateId(expected));
  }

  TEST_CASE("opinion revision and withdrawal") {
    auto d = seeded({{"A"}});
    auto rev = revise_opinion(d, AgentId("a0"), "new text", RevisionKind::kAgentMisrepresented, 20);
    CHECK(std::get<OpinionRevisedPayload>(rev.event.payload).kind == RevisionKind::kAgentMisrepresented);
    CHECK(rev.state.opinions.at(AgentId("a0")).revision_count == 1);
    CHECK(rev.state.opinions.at(AgentId("a0")).revised_at == 20);
    CHECK(rev.state.rankings == d.rankings);

    auto again = revise_opinion(rev.state, AgentId("a0"), "new text", RevisionKind::kViewChanged, 21);
    CHECK(again.state.opinions.at(AgentId("a0")).revision_count == 2);

    auto withdrawn = withdraw_opinion(again.state, AgentId("a0"), std::nullopt, 22).state;
    CHECK(withdrawn.live_opinion(AgentId("a0")) == nullptr);
    CHECK(code_of([&] { revise_opinion(withdrawn, AgentId("a0"), "x", RevisionKind::kViewChanged, 23); }) ==
          ErrorCode::kNotFound);
    auto back = submit_opinion(withdrawn, AgentId("a0"), "back again", ProducedVia::kExternal, 24).state;
    CHECK(back.live_opinion(AgentId("a0"))->text == "back again");
    CHECK(back.live_opinion(AgentId("a0"))->produced_via == ProducedVia::kAutonomous);
  }

  TEST_CASE("withdraw statement") {
    auto two = seeded({{"A", "B"}});
    auto t = withdraw_statement(two, AgentId("a0"), CandidateId("A"), 9);
    CHECK(t.state.winner == CandidateId("B"));
    CHECK(t.state.find_statement(CandidateId("A"))->status == StatementStatus::kWithdrawn);

    auto sole = seeded({{"A"}});
    auto none = withdraw_statement(sole, AgentId("a0"), CandidateId("A"), 9).state;
    CHECK_FALSE(none.winner);
    CHECK(none.rankings.at(AgentId("a0")).order.empty());

    // Withdrawn ids stay reserved.
    CHECK(code_of([&] {
            propose_statement(none, AgentId("a0"), {CandidateId("A"), "t", "b."}, ids({"A"}), 10);
          }) == ErrorCode::kConflict);
    CHECK(code_of([&] { withdraw_statement(none, AgentId("a0"), CandidateId("A"), 10); }) == ErrorCode::kNotFound);

    auto shared = join(two, AgentId("b"), ranking_only(ids({"B", "A"})), 9).state;
    CHECK(code_of([&] { withdraw_statement(shared, AgentId("b"), CandidateId("A"), 10); }) ==
          ErrorCode::kForbidden);
  }

  TEST_CASE("withdraw a non-winner from the four-ballot instance") {
    std::vector<oracle::Order> ballots{{"A", "B", "C"}, {"A", "B", "C"}, {"B", "C", "A"}, {"C", "A", "B"}};
    auto d = seeded(ballots);
    auto after = withdraw_statement(d, AgentId("a0"), CandidateId("B"), 9).state;
    for (auto& b : ballots) b.erase(std::find(b.begin(), b.end(), "B"));
    oracle::Order pool{"A", "C"};
    // A:C is 2:2 after removing B, so the id tie-break decides.
    auto expected = oracle::schulze_winner(pool, oracle::brute_force_paths(pool, oracle::count_preferences(ballots)));
    CHECK(expected == "A");
    CHECK(after.winner == CandidateId(expected));
  }

  TEST_CASE("recompute consensus") {
    CHECK_FALSE(recompute_consensus(std::vector<Ranking>{}, ids({"A", "B"}), {}));
    CHECK_FALSE(recompute_consensus(std::vector<Ranking>{}, std::vector<CandidateId>{}, {}));
    auto unanimous = testutil::rankings({{"C", "A", "B"}, {"C", "A", "B"}, {"C", "A", "B"}});
    CHECK(recompute_consensus(unanimous, ids({"A", "B", "C"}), {}) == CandidateId("C"));

    std::vector<oracle::Order> ballots{{"A", "B", "C"}, {"B", "A", "C"}, {"B", "C", "A"}, {"C", "A", "B"}, {"A", "C", "B"}};
    ConsensusConfig bt{Aggregator::kBradleyTerry, LinkStrength::kWinningVotes, 0.5};
    auto d = seeded(ballots, bt);
    auto rs = testutil::rankings(ballots);
    auto expected = bt_winner(bt_fit(wins_from_rankings(rs, ids({"A", "B", "C"}))));
    CHECK(d.winner == expected);
    CHECK(recompute_consensus(d) == recompute_consensus(d));
  }

  TEST_CASE("ranking distribution") {
    auto one = seeded({{"A", "B"}});
    auto dist = ranking_distribution(one);
    CHECK(dist[CandidateId("A")] == std::map<int, int>{{1, 1}});
    CHECK(dist[CandidateId("B")] == std::map<int, int>{{2, 1}});

    auto two = seeded({{"A", "B"}, {"B", "A"}});
    auto dist2 = ranking_distribution(two);
    CHECK(dist2[CandidateId("A")] == std::map<int, int>{{1, 1}, {2, 1}});
    CHECK(dist2[CandidateId("B")] == std::map<int, int>{{1, 1}, {2, 1}});

    CHECK(ranking_distribution(open_deliberation(header())).empty());
  }

  TEST_CASE("median insertion keeps identical rankings identical") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
      auto pool = oracle::random_pool(rng, 5);
      auto ballot = oracle::random_ballots(rng, pool, 1).front();
      auto d = seeded({ballot, ballot, ballot});
      auto order = ids(ballot);
      order.insert(order.begin() + static_cast<long>(rng() % (order.size() + 1)), CandidateId("new"));
      auto after = propose_statement(d, AgentId("a1"), {CandidateId("new"), "t", "b."}, order, 9).state;
      CHECK(after.rankings.at(AgentId("a0")) .order == after.rankings.at(AgentId("a2")).order);
    }
  }

  TEST_CASE("random scripts: invariants after every event, replay and prefixes") {
    for (int seed = 0; seed < 60; ++seed) {
      auto s = scripts::random_script(seed, 50);
      for (size_t i = 0; i < s.states.size(); ++i) {
        const auto& st = s.states[i];
        CHECK(scripts::ranking_is_complete(st));
        CHECK(s.log[i].seq == i + 1);
        CHECK(st.winner.has_value() == (!st.active_pool().empty() && !st.rankings.empty()));
        if (i > 0 && s.states[i - 1].status == DeliberationStatus::kClosed) {
          CHECK(s.log[i].kind == EventKind::kReviewRecorded);
          CHECK(st.winner == s.states[i - 1].winner);
          CHECK(st.rankings == s.states[i - 1].rankings);
        }
      }
      auto replayed = replay(s.header, s.log);
      CHECK(replayed == s.live);
      CHECK(to_json(replayed).dump() == to_json(s.live).dump());
      if (!s.log.empty()) {
        auto cut = s.log.size() / 2;
        auto prefix = replay(s.header, std::span(s.log).first(cut));
        CHECK(prefix == (cut == 0 ? open_deliberation(s.header) : s.states[cut - 1]));
      }
    }
  }

  TEST_CASE("replay rejects gaps and reordering") {
    auto s = scripts::random_script(3, 20);
    REQUIRE(s.log.size() >= 3);
    CHECK(replay(s.header, {}) == open_deliberation(s.header));
    auto gap = s.log;
    gap.erase(gap.begin() + 1);
    CHECK(code_of([&] { replay(s.header, gap); }) == ErrorCode::kCorruption);
    auto swapped = s.log;
    std::swap(swapped[0], swapped[1]);
    CHECK(code_of([&] { replay(s.header, swapped); }) == ErrorCode::kCorruption);
  }

  TEST_CASE("event log encoding round-trips and tolerates unknown fields") {
    auto s = scripts::random_script(12, 40);
    std::stringstream buf;
    write_log(buf, {s.header, s.log});
    auto back = read_log(buf);
    CHECK(back.header == s.header);
    CHECK(back.events == s.log);
    CHECK(deliberation_from_json(to_json(s.live)) == s.live);

    std::stringstream extended;
    extended << R"({"record":"header","id":"d9","question":"q","future":1})" << "\n"
             << R"({"record":"event","seq":1,"kind":"joined","actor":"a","timestamp":5,"extra":[1,2],)"
             << R"("payload":{"opinion":"o","produced_via":"external","statement":null,"ranking":null,"x":true}})"
             << "\n"
             << R"({"record":"checkpoint","note":"ignored"})" << "\n";
    auto log = read_log(extended);
    REQUIRE(log.events.size() == 1);
    auto d = replay(log.header, log.events);
    CHECK(d.participants == std::vector{AgentId("a")});

    std::stringstream broken("{\"record\":\"header\",\"id\":\"d\",\"question\":\"q\"}\n{not json\n");
    CHECK(code_of([&] { read_log(broken); }) == ErrorCode::kCorruption);
  }

  TEST_CASE("machine serializes writers and notifies observers in order") {
    DeliberationMachine m(header());
    std::vector<std::uint64_t> seen;
    m.add_observer([&](const Deliberation&, const DomainEvent& e) { seen.push_back(e.seq); });
    m.execute([](const Deliberation& d) { return join(d, AgentId("a"), with_statement("S", ids({"S"})), 1); });
    m.execute([](const Deliberation& d) { return join(d, AgentId("b"), ranking_only(ids({"S"})), 2); });
    CHECK(seen == std::vector<std::uint64_t>{1, 2});
    CHECK(m.snapshot()->winner == CandidateId("S"));
    CHECK(m.events_since(1).size() == 1);
    CHECK_THROWS_AS(m.execute([](const Deliberation& d) {
      return join(d, AgentId("a"), ranking_only(ids({"S"})), 3);
    }), Error);
    CHECK(m.last_seq() == 2);

    DeliberationMachine restored(header(), m.events_since(0));
    CHECK(*restored.snapshot() == *m.snapshot());
  }
}
