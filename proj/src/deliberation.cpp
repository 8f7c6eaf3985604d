// Copyright 2026 The Agora Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "agora/deliberation.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>
#include <utility>

#include "agora/bradley_terry.hpp"

namespace agora {
namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::pair<Enum, std::string_view>, N>& table,
                std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw Error(ErrorCode::kValidation, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum v, const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "unknown";
}

constexpr std::array kProducedVia{
    std::pair{ProducedVia::kAutonomous, std::string_view("autonomous")},
    std::pair{ProducedVia::kTopicInterview, std::string_view("topic_interview")},
    std::pair{ProducedVia::kExternal, std::string_view("external")},
};
constexpr std::array kRevisionKind{
    std::pair{RevisionKind::kAgentMisrepresented, std::string_view("agent_misrepresented")},
    std::pair{RevisionKind::kViewChanged, std::string_view("view_changed")},
};
constexpr std::array kStatementStatus{
    std::pair{StatementStatus::kActive, std::string_view("active")},
    std::pair{StatementStatus::kWithdrawn, std::string_view("withdrawn")},
};
constexpr std::array kDeliberationStatus{
    std::pair{DeliberationStatus::kOpen, std::string_view("open")},
    std::pair{DeliberationStatus::kClosed, std::string_view("closed")},
};
constexpr std::array kAggregator{
    std::pair{Aggregator::kSchulze, std::string_view("schulze")},
    std::pair{Aggregator::kBradleyTerry, std::string_view("bradley_terry")},
};
constexpr std::array kEventKind{
    std::pair{EventKind::kJoined, std::string_view("joined")},
    std::pair{EventKind::kOpinionSubmitted, std::string_view("opinion_submitted")},
    std::pair{EventKind::kOpinionRevised, std::string_view("opinion_revised")},
    std::pair{EventKind::kOpinionWithdrawn, std::string_view("opinion_withdrawn")},
    std::pair{EventKind::kStatementProposed, std::string_view("statement_proposed")},
    std::pair{EventKind::kStatementWithdrawn, std::string_view("statement_withdrawn")},
    std::pair{EventKind::kRankingSubmitted, std::string_view("ranking_submitted")},
    std::pair{EventKind::kRankingEdited, std::string_view("ranking_edited")},
    std::pair{EventKind::kDeliberationClosed, std::string_view("deliberation_closed")},
    std::pair{EventKind::kReviewRecorded, std::string_view("review_recorded")},
};

void require_open(const Deliberation& d) {
  if (d.status == DeliberationStatus::kClosed) {
    throw Error(ErrorCode::kClosed, "deliberation '" + d.header.id.str() + "' is closed");
  }
}

void require_participant(const Deliberation& d, const AgentId& agent) {
  if (!d.is_participant(agent)) {
    throw Error(ErrorCode::kNotFound, "agent '" + agent.str() +
                                          "' does not participate in deliberation '" +
                                          d.header.id.str() + "'");
  }
}

void require_text(const std::string& text, std::string_view what) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::kValidation, std::string(what) + " must not be empty");
  }
}

// A ranking that is a strict order over some earlier version of the pool is
// stale (conflict: re-read and retry). Anything else malformed is a
// validation error.
void check_ranking(const Deliberation& d, const AgentId& agent,
                   std::span<const CandidateId> order, std::span<const CandidateId> pool) {
  if (is_permutation_of(order, pool)) return;
  std::unordered_set<CandidateId> known(pool.begin(), pool.end());
  for (const auto& s : d.statements) known.insert(s.id);
  std::unordered_set<CandidateId> seen;
  bool plausible = true;
  for (const auto& c : order) {
    if (!known.contains(c) || !seen.insert(c).second) plausible = false;
  }
  if (plausible) {
    throw Error(ErrorCode::kConflict, "ranking of agent '" + agent.str() +
                                          "' does not match the current pool of '" +
                                          d.header.id.str() + "'; re-read and retry");
  }
  throw Error(ErrorCode::kValidation, "ranking of agent '" + agent.str() +
                                          "' is not a strict order over the pool");
}

void require_fresh_statement(const Deliberation& d, const StatementDraft& s) {
  if (s.id.empty()) throw Error(ErrorCode::kValidation, "statement id must not be empty");
  if (d.find_statement(s.id) != nullptr) {
    throw Error(ErrorCode::kConflict, "candidate id '" + s.id.str() + "' already used");
  }
  require_text(s.title, "statement title");
  require_text(s.body, "statement body");
}

// Adds an active statement and extends every existing ranking except
// `except` at the median.
void add_statement(Deliberation& d, const AgentId& author, const StatementDraft& s,
                   const AgentId& except) {
  d.statements.push_back(CandidateStatement{s.id, author, s.title, s.body,
                                            StatementStatus::kActive});
  for (auto& [agent, ranking] : d.rankings) {
    if (agent != except) ranking = insert_at_median(ranking, s.id);
  }
}

template <typename Payload>
const Payload& payload_as(const DomainEvent& e) {
  const auto* p = std::get_if<Payload>(&e.payload);
  if (p == nullptr) {
    throw Error(ErrorCode::kValidation, "payload does not match event kind '" +
                                            std::string(to_string(e.kind)) + "'");
  }
  return *p;
}

void apply_joined(Deliberation& d, const AgentId& agent, const DomainEvent& e) {
  const auto& p = payload_as<JoinedPayload>(e);
  require_open(d);
  if (agent.empty()) throw Error(ErrorCode::kValidation, "agent id must not be empty");
  if (d.is_participant(agent)) {
    throw Error(ErrorCode::kConflict, "agent '" + agent.str() + "' already participates");
  }
  require_text(p.opinion, "opinion");

  auto pool = d.active_pool();
  if (p.statement) {
    require_fresh_statement(d, *p.statement);
    pool.push_back(p.statement->id);
  }
  std::vector<CandidateId> own;
  if (p.ranking) {
    check_ranking(d, agent, *p.ranking, pool);
    own = *p.ranking;
  } else if (pool.size() <= 1 && (pool.empty() || p.statement)) {
    own = pool;
  } else {
    throw Error(ErrorCode::kValidation,
                "joining a deliberation with a non-empty pool requires a ranking");
  }

  d.participants.push_back(agent);
  d.opinions[agent] = Opinion{agent, d.header.id, p.opinion, p.produced_via,
                              e.timestamp, e.timestamp, 0, true};
  if (p.statement) add_statement(d, agent, *p.statement, agent);
  d.rankings[agent] = Ranking{agent, std::move(own)};
}

void apply_event(Deliberation& d, const DomainEvent& e) {
  const AgentId agent(e.actor);
  switch (e.kind) {
    case EventKind::kJoined:
      apply_joined(d, agent, e);
      break;
    case EventKind::kOpinionSubmitted: {
      const auto& p = payload_as<OpinionSubmittedPayload>(e);
      require_open(d);
      require_participant(d, agent);
      require_text(p.text, "opinion");
      if (d.live_opinion(agent) != nullptr) {
        throw Error(ErrorCode::kConflict, "agent '" + agent.str() + "' already has a live opinion");
      }
      auto& op = d.opinions[agent];
      // produced_via is fixed by the first submission.
      const bool first = op.agent.empty();
      op.agent = agent;
      op.deliberation = d.header.id;
      op.text = p.text;
      if (first) {
        op.produced_via = p.produced_via;
        op.created_at = e.timestamp;
      }
      op.revised_at = e.timestamp;
      op.live = true;
      break;
    }
    case EventKind::kOpinionRevised: {
      const auto& p = payload_as<OpinionRevisedPayload>(e);
      require_open(d);
      require_participant(d, agent);
      require_text(p.text, "opinion");
      auto it = d.opinions.find(agent);
      if (it == d.opinions.end() || !it->second.live) {
        throw Error(ErrorCode::kNotFound, "no live opinion for agent '" + agent.str() + "'");
      }
      it->second.text = p.text;
      it->second.revised_at = e.timestamp;
      ++it->second.revision_count;
      break;
    }
    case EventKind::kOpinionWithdrawn: {
      payload_as<OpinionWithdrawnPayload>(e);
      require_open(d);
      require_participant(d, agent);
      auto it = d.opinions.find(agent);
      if (it == d.opinions.end() || !it->second.live) {
        throw Error(ErrorCode::kNotFound, "no live opinion for agent '" + agent.str() + "'");
      }
      it->second.live = false;
      it->second.revised_at = e.timestamp;
      break;
    }
    case EventKind::kStatementProposed: {
      const auto& p = payload_as<StatementProposedPayload>(e);
      require_open(d);
      require_participant(d, agent);
      require_fresh_statement(d, p.statement);
      auto pool = d.active_pool();
      pool.push_back(p.statement.id);
      check_ranking(d, agent, p.author_ranking, pool);
      add_statement(d, agent, p.statement, agent);
      d.rankings[agent] = Ranking{agent, p.author_ranking};
      break;
    }
    case EventKind::kStatementWithdrawn: {
      const auto& p = payload_as<StatementWithdrawnPayload>(e);
      require_open(d);
      auto it = std::find_if(d.statements.begin(), d.statements.end(),
                             [&](const auto& s) { return s.id == p.candidate; });
      if (it == d.statements.end() || it->status != StatementStatus::kActive) {
        throw Error(ErrorCode::kNotFound,
                    "no active statement '" + p.candidate.str() + "'");
      }
      if (it->author != agent) {
        throw Error(ErrorCode::kForbidden, "only the author may withdraw statement '" +
                                               p.candidate.str() + "'");
      }
      it->status = StatementStatus::kWithdrawn;
      for (auto& [a, ranking] : d.rankings) ranking = withdraw_candidate(ranking, p.candidate);
      break;
    }
    case EventKind::kRankingSubmitted:
    case EventKind::kRankingEdited: {
      const auto& p = payload_as<RankingPayload>(e);
      require_open(d);
      require_participant(d, agent);
      check_ranking(d, agent, p.order, d.active_pool());
      d.rankings[agent] = Ranking{agent, p.order};
      break;
    }
    case EventKind::kDeliberationClosed:
      payload_as<ClosedPayload>(e);
      require_open(d);
      d.status = DeliberationStatus::kClosed;
      break;
    case EventKind::kReviewRecorded: {
      // Reviews annotate past actions and are accepted after closure.
      const auto& p = payload_as<ReviewRecordedPayload>(e);
      if (p.action_id.empty()) throw Error(ErrorCode::kValidation, "empty action id");
      if (!d.reviewed_actions.insert(p.action_id).second) {
        throw Error(ErrorCode::kConflict, "action '" + p.action_id + "' already reviewed");
      }
      break;
    }
  }
}

Transition emit(const Deliberation& d, EventKind kind, std::string actor, Timestamp at,
                EventPayload payload) {
  DomainEvent e{d.event_seq + 1, kind, std::move(actor), at, std::move(payload)};
  Deliberation next = apply(d, e);
  return Transition{std::move(next), std::move(e)};
}

}  // namespace

std::string_view to_string(ProducedVia v) { return name_of(v, kProducedVia); }
std::string_view to_string(RevisionKind v) { return name_of(v, kRevisionKind); }
std::string_view to_string(StatementStatus v) { return name_of(v, kStatementStatus); }
std::string_view to_string(DeliberationStatus v) { return name_of(v, kDeliberationStatus); }
std::string_view to_string(Aggregator v) { return name_of(v, kAggregator); }
std::string_view to_string(EventKind v) { return name_of(v, kEventKind); }

ProducedVia parse_produced_via(std::string_view s) { return parse_enum(s, kProducedVia, "produced_via"); }
RevisionKind parse_revision_kind(std::string_view s) { return parse_enum(s, kRevisionKind, "revision kind"); }
StatementStatus parse_statement_status(std::string_view s) { return parse_enum(s, kStatementStatus, "statement status"); }
DeliberationStatus parse_deliberation_status(std::string_view s) { return parse_enum(s, kDeliberationStatus, "deliberation status"); }
Aggregator parse_aggregator(std::string_view s) { return parse_enum(s, kAggregator, "aggregator"); }
EventKind parse_event_kind(std::string_view s) { return parse_enum(s, kEventKind, "event kind"); }

std::vector<CandidateId> Deliberation::active_pool() const {
  std::vector<CandidateId> pool;
  for (const auto& s : statements) {
    if (s.status == StatementStatus::kActive) pool.push_back(s.id);
  }
  return pool;
}

bool Deliberation::is_participant(const AgentId& agent) const {
  return std::find(participants.begin(), participants.end(), agent) != participants.end();
}

const CandidateStatement* Deliberation::find_statement(const CandidateId& id) const {
  for (const auto& s : statements) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const Opinion* Deliberation::live_opinion(const AgentId& agent) const {
  auto it = opinions.find(agent);
  if (it == opinions.end() || !it->second.live) return nullptr;
  return &it->second;
}

Deliberation open_deliberation(DeliberationHeader header) {
  if (header.id.empty()) throw Error(ErrorCode::kValidation, "deliberation id must not be empty");
  Deliberation d;
  d.header = std::move(header);
  return d;
}

Transition join(const Deliberation& d, const AgentId& agent, JoinRequest request, Timestamp at) {
  return emit(d, EventKind::kJoined, agent.str(), at,
              JoinedPayload{std::move(request.opinion), request.produced_via,
                            std::move(request.statement), std::move(request.ranking)});
}

Transition submit_opinion(const Deliberation& d, const AgentId& agent, std::string text,
                          ProducedVia via, Timestamp at) {
  return emit(d, EventKind::kOpinionSubmitted, agent.str(), at,
              OpinionSubmittedPayload{std::move(text), via});
}

Transition revise_opinion(const Deliberation& d, const AgentId& agent, std::string new_text,
                          RevisionKind kind, Timestamp at) {
  return emit(d, EventKind::kOpinionRevised, agent.str(), at,
              OpinionRevisedPayload{std::move(new_text), kind});
}

Transition withdraw_opinion(const Deliberation& d, const AgentId& agent,
                            std::optional<RevisionKind> kind, Timestamp at) {
  return emit(d, EventKind::kOpinionWithdrawn, agent.str(), at, OpinionWithdrawnPayload{kind});
}

Transition propose_statement(const Deliberation& d, const AgentId& author,
                             StatementDraft statement, std::vector<CandidateId> author_ranking,
                             Timestamp at) {
  return emit(d, EventKind::kStatementProposed, author.str(), at,
              StatementProposedPayload{std::move(statement), std::move(author_ranking)});
}

Transition withdraw_statement(const Deliberation& d, const AgentId& author,
                              const CandidateId& candidate, Timestamp at) {
  return emit(d, EventKind::kStatementWithdrawn, author.str(), at,
              StatementWithdrawnPayload{candidate});
}

Transition edit_ranking(const Deliberation& d, const AgentId& agent,
                        std::vector<CandidateId> order, std::optional<RevisionKind> kind,
                        Timestamp at) {
  return emit(d, EventKind::kRankingEdited, agent.str(), at,
              RankingPayload{std::move(order), kind});
}

Transition submit_ranking(const Deliberation& d, const AgentId& agent,
                          std::vector<CandidateId> order, Timestamp at) {
  return emit(d, EventKind::kRankingSubmitted, agent.str(), at,
              RankingPayload{std::move(order), std::nullopt});
}

Transition close_deliberation(const Deliberation& d, std::string actor, Timestamp at) {
  return emit(d, EventKind::kDeliberationClosed, std::move(actor), at, ClosedPayload{});
}

Transition record_review(const Deliberation& d, std::string reviewer, std::string action_id,
                         Timestamp at) {
  return emit(d, EventKind::kReviewRecorded, std::move(reviewer), at,
              ReviewRecordedPayload{std::move(action_id)});
}

Deliberation apply(Deliberation d, const DomainEvent& event) {
  if (event.seq != d.event_seq + 1) {
    throw Error(ErrorCode::kCorruption, "event seq " + std::to_string(event.seq) +
                                            " does not follow " + std::to_string(d.event_seq));
  }
  apply_event(d, event);
  d.event_seq = event.seq;
  d.winner = recompute_consensus(d);
  return d;
}

Deliberation replay(const DeliberationHeader& header, std::span<const DomainEvent> events) {
  Deliberation d = open_deliberation(header);
  for (const auto& e : events) {
    try {
      d = apply(std::move(d), e);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kCorruption) throw;
      throw Error(ErrorCode::kCorruption, "event " + std::to_string(e.seq) +
                                              " cannot be applied: " + err.what());
    }
  }
  return d;
}

std::optional<CandidateId> recompute_consensus(std::span<const Ranking> rankings,
                                               std::span<const CandidateId> pool,
                                               const ConsensusConfig& config) {
  if (pool.empty() || rankings.empty()) return std::nullopt;
  if (config.aggregator == Aggregator::kBradleyTerry) {
    BtOptions options;
    options.pseudocount = config.pseudocount;
    return bt_winner(bt_fit(wins_from_rankings(rankings, pool), options));
  }
  auto d = build_preference_matrix(rankings, pool);
  return schulze_winner(strongest_paths(d, config.link)).winner;
}

std::optional<CandidateId> recompute_consensus(const Deliberation& d) {
  std::vector<Ranking> rankings;
  rankings.reserve(d.rankings.size());
  for (const auto& [agent, r] : d.rankings) rankings.push_back(r);
  return recompute_consensus(rankings, d.active_pool(), d.header.consensus);
}

std::map<CandidateId, std::map<int, int>> ranking_distribution(const Deliberation& d) {
  std::map<CandidateId, std::map<int, int>> out;
  const auto pool = d.active_pool();
  for (const auto& c : pool) out[c];
  for (const auto& [agent, r] : d.rankings) {
    for (std::size_t i = 0; i < r.order.size(); ++i) {
      ++out[r.order[i]][static_cast<int>(i) + 1];
    }
  }
  return out;
}

DeliberationMachine::DeliberationMachine(DeliberationHeader header)
    : state_(std::make_shared<const Deliberation>(open_deliberation(std::move(header)))) {}

DeliberationMachine::DeliberationMachine(DeliberationHeader header,
                                         std::span<const DomainEvent> log)
    : state_(std::make_shared<const Deliberation>(replay(header, log))),
      log_(log.begin(), log.end()) {}

std::shared_ptr<const Deliberation> DeliberationMachine::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::vector<DomainEvent> DeliberationMachine::events_since(std::uint64_t seq) const {
  std::lock_guard lock(mutex_);
  if (seq >= log_.size()) return {};
  return {log_.begin() + static_cast<std::ptrdiff_t>(seq), log_.end()};
}

std::uint64_t DeliberationMachine::last_seq() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

void DeliberationMachine::add_observer(Observer observer) {
  std::lock_guard lock(mutex_);
  observers_.push_back(std::move(observer));
}

void DeliberationMachine::commit(Transition t) {
  if (t.event.seq != log_.size() + 1) {
    throw Error(ErrorCode::kConflict, "transition computed against a stale state");
  }
  for (const auto& observer : observers_) observer(t.state, t.event);
  log_.push_back(std::move(t.event));
  state_ = std::make_shared<const Deliberation>(std::move(t.state));
}

}  // namespace agora
