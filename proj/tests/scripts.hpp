// Randomized event scripts for replay and invariant checks.
#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "agora/deliberation.hpp"

namespace scripts {

struct Script {
  agora::DeliberationHeader header;
  agora::Deliberation live;
  std::vector<agora::DomainEvent> log;
  std::vector<agora::Deliberation> states;  // state after each event
  int rejected = 0;
};

inline agora::DeliberationHeader header_for(int seed) {
  agora::DeliberationHeader h;
  h.id = agora::DeliberationId("delib-" + std::to_string(seed));
  h.question = "Should the town fund a night bus?";
  h.creator = "user-0";
  h.created_at = 1000;
  return h;
}

inline bool ranking_is_complete(const agora::Deliberation& d) {
  auto pool = d.active_pool();
  if (d.rankings.size() != d.participants.size()) return false;
  for (const auto& [agent, r] : d.rankings) {
    if (!agora::is_permutation_of(r.order, pool)) return false;
  }
  return true;
}

// Drives a deliberation with random commands until `target` events have
// been committed or the attempt budget runs out. Invalid commands are
// expected and simply counted.
inline Script random_script(int seed, int target) {
  using namespace agora;
  std::mt19937 rng(static_cast<unsigned>(seed));
  Script s;
  s.header = header_for(seed);
  s.live = open_deliberation(s.header);
  int next_agent = 0;
  int next_statement = 0;
  Timestamp now = 2000;

  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto shuffled = [&](std::vector<CandidateId> v) {
    std::shuffle(v.begin(), v.end(), rng);
    return v;
  };
  auto some_participant = [&]() -> AgentId {
    if (s.live.participants.empty() || pick(10) == 0) return AgentId("ghost");
    return s.live.participants[pick(static_cast<int>(s.live.participants.size()))];
  };

  for (int attempt = 0; attempt < target * 6 && static_cast<int>(s.log.size()) < target; ++attempt) {
    now += 1 + pick(1000);
    const int roll = pick(100);
    try {
      Transition t;
      if (roll < 25) {
        AgentId agent("agent-" + std::to_string(next_agent++));
        JoinRequest req;
        req.opinion = "opinion of " + agent.str();
        req.produced_via = static_cast<ProducedVia>(pick(3));
        auto pool = s.live.active_pool();
        if (pick(2) == 0) {
          req.statement = StatementDraft{CandidateId("s" + std::to_string(next_statement++)),
                                         "Title " + agent.str(), "Body by " + agent.str() + "."};
          pool.push_back(req.statement->id);
        }
        if (!pool.empty() || pick(2) == 0) req.ranking = shuffled(pool);
        if (pick(15) == 0 && req.ranking && !req.ranking->empty()) req.ranking->pop_back();
        t = join(s.live, agent, req, now);
      } else if (roll < 40) {
        auto agent = some_participant();
        StatementDraft draft{CandidateId("s" + std::to_string(next_statement++)), "Proposal",
                             "A proposal by " + agent.str() + "."};
        auto pool = s.live.active_pool();
        pool.push_back(draft.id);
        auto order = shuffled(pool);
        if (pick(8) == 0 && order.size() > 1) order.erase(order.begin());  // stale
        t = propose_statement(s.live, agent, draft, order, now);
      } else if (roll < 50) {
        std::vector<CandidateStatement> active;
        for (const auto& st : s.live.statements) {
          if (st.status == StatementStatus::kActive) active.push_back(st);
        }
        if (active.empty()) continue;
        const auto& victim = active[pick(static_cast<int>(active.size()))];
        AgentId actor = pick(6) == 0 ? some_participant() : victim.author;
        t = withdraw_statement(s.live, actor, victim.id, now);
      } else if (roll < 70) {
        auto agent = some_participant();
        auto order = shuffled(s.live.active_pool());
        if (pick(2) == 0) {
          t = edit_ranking(s.live, agent, order,
                           pick(2) == 0 ? std::optional<RevisionKind>{} : RevisionKind::kViewChanged, now);
        } else {
          t = submit_ranking(s.live, agent, order, now);
        }
      } else if (roll < 82) {
        auto agent = some_participant();
        t = revise_opinion(s.live, agent, "revised " + std::to_string(now),
                           pick(2) == 0 ? RevisionKind::kAgentMisrepresented : RevisionKind::kViewChanged, now);
      } else if (roll < 88) {
        t = withdraw_opinion(s.live, some_participant(), std::nullopt, now);
      } else if (roll < 93) {
        t = submit_opinion(s.live, some_participant(), "resubmitted", ProducedVia::kExternal, now);
      } else if (roll < 98) {
        t = record_review(s.live, "user-1", s.live.header.id.str() + ":" + std::to_string(pick(10) + 1), now);
      } else {
        t = close_deliberation(s.live, "user-0", now);
      }
      s.live = std::move(t.state);
      s.log.push_back(std::move(t.event));
      s.states.push_back(s.live);
    } catch (const Error&) {
      ++s.rejected;
    }
  }
  return s;
}

}  // namespace scripts
