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

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agora/deliberation.hpp"
#include "agora/serialization.hpp"
#include "agora/text_client.hpp"

namespace agora {

enum class ActionKind { kOpinionSubmitted, kStatementProposed, kRankingSubmitted };

std::string_view to_string(ActionKind k);
ActionKind parse_action_kind(std::string_view s);

struct ReviewableAction {
  std::string id;  // "<deliberation>:<seq>:<kind>"
  AgentId agent;
  DeliberationId deliberation;
  std::uint64_t seq = 0;
  ActionKind kind = ActionKind::kOpinionSubmitted;
  std::string content;
  std::string memory_snapshot;
  Timestamp at = 0;
  bool reviewed = false;
  std::optional<double> risk;

  friend bool operator==(const ReviewableAction&, const ReviewableAction&) = default;
};

std::string action_id(const DeliberationId& deliberation, std::uint64_t seq, ActionKind kind);

// Memory the agent held when it acted; nullopt excludes the actor (e.g. an
// external agent, whose memory the platform never sees).
using MemoryLookup = std::function<std::optional<std::string>(const AgentId&, Timestamp)>;

// Agent-produced actions in a deliberation's log. A join yields an opinion
// action plus a statement and ranking action when it carried them. Human
// revisions are not reviewable. `reviewed` reflects review_recorded events
// in the same log.
std::vector<ReviewableAction> extract_actions(const DeliberationId& deliberation,
                                              std::span<const DomainEvent> events,
                                              const MemoryLookup& memory_at);

class RiskScorer {
 public:
  virtual ~RiskScorer() = default;
  virtual double score(const ReviewableAction& action) = 0;
};

// 1 - Jaccard(tokens(content), tokens(memory)).
class JaccardRiskScorer : public RiskScorer {
 public:
  double score(const ReviewableAction& action) override;
};

// Uses the "risk" template; the reply must be a number in [0, 1].
class LlmRiskScorer : public RiskScorer {
 public:
  explicit LlmRiskScorer(TextClient& client) : client_(client) {}
  double score(const ReviewableAction& action) override;

 private:
  TextClient& client_;
};

// kValidation if the action is already reviewed or the scorer returns a
// value outside [0, 1].
double score_risk(const ReviewableAction& action, RiskScorer& scorer);

struct ScoringOutcome {
  std::vector<ReviewableAction> actions;  // risk filled where scoring succeeded
  std::vector<std::string> unscored;      // ids left for the next cycle
};

// Scores every unreviewed, unscored action. Scorer failures leave the action
// unscored rather than aborting the batch.
ScoringOutcome score_all(std::vector<ReviewableAction> actions, RiskScorer& scorer);

struct Period {
  Timestamp begin = 0;  // inclusive
  Timestamp end = 0;    // exclusive

  friend bool operator==(const Period&, const Period&) = default;
};

inline constexpr std::int64_t kDefaultDigestCadenceMs = 7LL * 24 * 3600 * 1000;

struct ReviewDigest {
  UserId user;
  Period period;
  ReviewableAction headline;
  std::string deep_link;
};

std::string deep_link(const ReviewableAction& action);

// Highest-risk unreviewed, scored action in the period; ties go to the most
// recent. nullopt when there is nothing to review.
std::optional<ReviewDigest> build_digest(const UserId& user, std::span<const ReviewableAction> actions,
                                         Period period);

// {user, period{begin,end}, headline{id, kind, deliberation, excerpt, risk}, deep_link}
Json digest_document(const ReviewDigest& digest, std::size_t excerpt_chars = 280);

struct EmailMessage {
  std::string to;
  std::string subject;
  std::string body;
};

// Renders a digest document into a plain-text template and hands it to a
// transport. Placeholders: {user}, {kind}, {deliberation}, {excerpt},
// {risk}, {link}.
class DigestMailer {
 public:
  using Send = std::function<void(const EmailMessage&)>;

  DigestMailer(std::string subject, std::string body_template, Send send);
  static std::string default_template();

  EmailMessage render(const Json& document, const std::string& to) const;
  void deliver(const ReviewDigest& digest, const std::string& to) const;

 private:
  std::string subject_;
  std::string template_;
  Send send_;
};

struct RevisionRecord {
  DeliberationId deliberation;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kOpinionRevised;
  std::optional<RevisionKind> revision_kind;
  AgentId agent;
  UserId user;
  Timestamp at = 0;
  bool cascaded = false;

  friend bool operator==(const RevisionRecord&, const RevisionRecord&) = default;
};

struct RevisionCounts {
  int agent_misrepresented = 0;
  int view_changed = 0;
  int unspecified = 0;
  int cascaded = 0;
  std::map<EventKind, int> by_event;

  friend bool operator==(const RevisionCounts&, const RevisionCounts&) = default;
};

bool is_revision_event(EventKind kind);

// Counts revisions by kind and flags a revision as cascaded when the same
// user edits memory within the window after it. Edits and revisions may
// arrive in any order.
class RevisionTelemetry {
 public:
  explicit RevisionTelemetry(std::int64_t cascade_window_ms = 3600 * 1000)
      : window_(cascade_window_ms) {}

  // kValidation unless the event is opinion_revised, opinion_withdrawn or
  // ranking_edited.
  void record_revision_outcome(const DeliberationId& deliberation, const DomainEvent& event,
                               const UserId& user);
  void record_memory_edit(const UserId& user, Timestamp at);

  RevisionCounts counts() const;
  std::vector<RevisionRecord> records() const;
  Json to_json() const;

 private:
  std::int64_t window_;
  mutable std::mutex mu_;
  std::vector<RevisionRecord> records_;
  std::map<UserId, std::vector<Timestamp>> memory_edits_;
};

}  // namespace agora
