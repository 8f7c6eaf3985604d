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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "agora/ranked_ballots.hpp"
#include "agora/schulze.hpp"

namespace agora {

enum class ProducedVia { kAutonomous, kTopicInterview, kExternal };
enum class RevisionKind { kAgentMisrepresented, kViewChanged };
enum class StatementStatus { kActive, kWithdrawn };
enum class DeliberationStatus { kOpen, kClosed };
enum class Aggregator { kSchulze, kBradleyTerry };

enum class EventKind {
  kJoined,
  kOpinionSubmitted,
  kOpinionRevised,
  kOpinionWithdrawn,
  kStatementProposed,
  kStatementWithdrawn,
  kRankingSubmitted,
  kRankingEdited,
  kDeliberationClosed,
  kReviewRecorded,
};

struct Opinion {
  AgentId agent;
  DeliberationId deliberation;
  std::string text;
  ProducedVia produced_via = ProducedVia::kAutonomous;
  Timestamp created_at = 0;
  Timestamp revised_at = 0;
  int revision_count = 0;
  bool live = true;

  friend bool operator==(const Opinion&, const Opinion&) = default;
};

struct CandidateStatement {
  CandidateId id;
  AgentId author;
  std::string title;
  std::string body;
  StatementStatus status = StatementStatus::kActive;

  friend bool operator==(const CandidateStatement&, const CandidateStatement&) = default;
};

struct ConsensusConfig {
  Aggregator aggregator = Aggregator::kSchulze;
  LinkStrength link = LinkStrength::kWinningVotes;
  double pseudocount = 0.5;

  friend bool operator==(const ConsensusConfig&, const ConsensusConfig&) = default;
};

// Immutable identity of a deliberation. Written once as the head of its log;
// everything else is derived from events.
struct DeliberationHeader {
  DeliberationId id;
  std::string question;
  std::string creator;
  Timestamp created_at = 0;
  ConsensusConfig consensus;

  friend bool operator==(const DeliberationHeader&, const DeliberationHeader&) = default;
};

struct Deliberation {
  DeliberationHeader header;
  DeliberationStatus status = DeliberationStatus::kOpen;
  std::vector<AgentId> participants;  // join order
  std::map<AgentId, Opinion> opinions;
  std::vector<CandidateStatement> statements;  // proposal order, withdrawn kept
  std::map<AgentId, Ranking> rankings;
  std::optional<CandidateId> winner;
  std::uint64_t event_seq = 0;
  std::set<std::string> reviewed_actions;

  // Active statement ids in proposal order.
  std::vector<CandidateId> active_pool() const;
  bool is_participant(const AgentId& agent) const;
  const CandidateStatement* find_statement(const CandidateId& id) const;
  const Opinion* live_opinion(const AgentId& agent) const;

  friend bool operator==(const Deliberation&, const Deliberation&) = default;
};

struct StatementDraft {
  CandidateId id;
  std::string title;
  std::string body;

  friend bool operator==(const StatementDraft&, const StatementDraft&) = default;
};

struct JoinedPayload {
  std::string opinion;
  ProducedVia produced_via = ProducedVia::kAutonomous;
  std::optional<StatementDraft> statement;
  std::optional<std::vector<CandidateId>> ranking;

  friend bool operator==(const JoinedPayload&, const JoinedPayload&) = default;
};

struct OpinionSubmittedPayload {
  std::string text;
  ProducedVia produced_via = ProducedVia::kAutonomous;

  friend bool operator==(const OpinionSubmittedPayload&, const OpinionSubmittedPayload&) = default;
};

struct OpinionRevisedPayload {
  std::string text;
  RevisionKind kind = RevisionKind::kViewChanged;

  friend bool operator==(const OpinionRevisedPayload&, const OpinionRevisedPayload&) = default;
};

struct OpinionWithdrawnPayload {
  std::optional<RevisionKind> kind;

  friend bool operator==(const OpinionWithdrawnPayload&, const OpinionWithdrawnPayload&) = default;
};

struct StatementProposedPayload {
  StatementDraft statement;
  std::vector<CandidateId> author_ranking;

  friend bool operator==(const StatementProposedPayload&, const StatementProposedPayload&) = default;
};

struct StatementWithdrawnPayload {
  CandidateId candidate;

  friend bool operator==(const StatementWithdrawnPayload&, const StatementWithdrawnPayload&) = default;
};

// Shared by ranking_submitted and ranking_edited.
struct RankingPayload {
  std::vector<CandidateId> order;
  std::optional<RevisionKind> kind;

  friend bool operator==(const RankingPayload&, const RankingPayload&) = default;
};

struct ClosedPayload {
  friend bool operator==(const ClosedPayload&, const ClosedPayload&) = default;
};

struct ReviewRecordedPayload {
  std::string action_id;

  friend bool operator==(const ReviewRecordedPayload&, const ReviewRecordedPayload&) = default;
};

using EventPayload =
    std::variant<JoinedPayload, OpinionSubmittedPayload, OpinionRevisedPayload,
                 OpinionWithdrawnPayload, StatementProposedPayload,
                 StatementWithdrawnPayload, RankingPayload, ClosedPayload,
                 ReviewRecordedPayload>;

inline constexpr std::string_view kSystemActor = "system";

struct DomainEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kJoined;
  // The agent whose artifact changes; for closure and reviews, the principal.
  std::string actor;
  Timestamp timestamp = 0;
  EventPayload payload;

  friend bool operator==(const DomainEvent&, const DomainEvent&) = default;
};

struct Transition {
  Deliberation state;
  DomainEvent event;
};

struct JoinRequest {
  std::string opinion;
  ProducedVia produced_via = ProducedVia::kAutonomous;
  std::optional<StatementDraft> statement;
  std::optional<std::vector<CandidateId>> ranking;
};

Deliberation open_deliberation(DeliberationHeader header);

// Commands. Each validates against `d`, emits the next event and returns the
// state after applying it; `d` is never modified.
Transition join(const Deliberation& d, const AgentId& agent, JoinRequest request,
                Timestamp at);
Transition submit_opinion(const Deliberation& d, const AgentId& agent,
                          std::string text, ProducedVia via, Timestamp at);
Transition revise_opinion(const Deliberation& d, const AgentId& agent,
                          std::string new_text, RevisionKind kind, Timestamp at);
Transition withdraw_opinion(const Deliberation& d, const AgentId& agent,
                            std::optional<RevisionKind> kind, Timestamp at);
Transition propose_statement(const Deliberation& d, const AgentId& author,
                             StatementDraft statement,
                             std::vector<CandidateId> author_ranking, Timestamp at);
Transition withdraw_statement(const Deliberation& d, const AgentId& author,
                              const CandidateId& candidate, Timestamp at);
// A human revision of the agent's ranking (ranking_edited).
Transition edit_ranking(const Deliberation& d, const AgentId& agent,
                        std::vector<CandidateId> order,
                        std::optional<RevisionKind> kind, Timestamp at);
// An agent-produced re-ranking (ranking_submitted), e.g. from a heartbeat.
Transition submit_ranking(const Deliberation& d, const AgentId& agent,
                          std::vector<CandidateId> order, Timestamp at);
Transition close_deliberation(const Deliberation& d, std::string actor, Timestamp at);
Transition record_review(const Deliberation& d, std::string reviewer,
                         std::string action_id, Timestamp at);

// Applies one event. Requires event.seq == d.event_seq + 1.
Deliberation apply(Deliberation d, const DomainEvent& event);

// Rebuilds state from the header and a contiguous event sequence starting at
// 1. Gaps, reordering and inapplicable events raise kCorruption.
Deliberation replay(const DeliberationHeader& header,
                    std::span<const DomainEvent> events);

std::optional<CandidateId> recompute_consensus(const Deliberation& d);
std::optional<CandidateId> recompute_consensus(std::span<const Ranking> rankings,
                                               std::span<const CandidateId> pool,
                                               const ConsensusConfig& config);

// Rank histogram per active statement: candidate -> (rank -> count).
std::map<CandidateId, std::map<int, int>> ranking_distribution(const Deliberation& d);

// Single-writer sequencer for one deliberation. Commands are serialized;
// snapshots are immutable and safe to hand to other threads. Observers run
// under the writer lock, in seq order.
class DeliberationMachine {
 public:
  using Observer = std::function<void(const Deliberation&, const DomainEvent&)>;

  explicit DeliberationMachine(DeliberationHeader header);
  DeliberationMachine(DeliberationHeader header, std::span<const DomainEvent> log);

  std::shared_ptr<const Deliberation> snapshot() const;
  std::vector<DomainEvent> events_since(std::uint64_t seq) const;
  std::uint64_t last_seq() const;

  void add_observer(Observer observer);

  // Runs `command` on the current state and commits the resulting event.
  template <typename Command>
  DomainEvent execute(Command&& command) {
    std::lock_guard lock(mutex_);
    Transition t = std::forward<Command>(command)(*state_);
    commit(std::move(t));
    return log_.back();
  }

 private:
  void commit(Transition t);

  mutable std::mutex mutex_;
  std::shared_ptr<const Deliberation> state_;
  std::vector<DomainEvent> log_;
  std::vector<Observer> observers_;
};

std::string_view to_string(ProducedVia v);
std::string_view to_string(RevisionKind v);
std::string_view to_string(StatementStatus v);
std::string_view to_string(DeliberationStatus v);
std::string_view to_string(Aggregator v);
std::string_view to_string(EventKind v);

ProducedVia parse_produced_via(std::string_view s);
RevisionKind parse_revision_kind(std::string_view s);
StatementStatus parse_statement_status(std::string_view s);
DeliberationStatus parse_deliberation_status(std::string_view s);
Aggregator parse_aggregator(std::string_view s);
EventKind parse_event_kind(std::string_view s);

}  // namespace agora
