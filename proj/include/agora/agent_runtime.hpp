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
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "agora/deliberation.hpp"
#include "agora/text_client.hpp"

namespace agora {

enum class Hosting { kHosted, kExternal };

std::string_view to_string(Hosting h);
Hosting parse_hosting(std::string_view s);

inline constexpr std::string_view kNoPositionSentinel = "I don't have a clear position on this";

struct AgentRecord {
  AgentId id;
  UserId owner;
  std::string name;
  std::string memory;  // the only state that travels across deliberations
  std::int64_t heartbeat_interval_ms = 24 * 3600 * 1000;
  Hosting hosting = Hosting::kHosted;
  std::optional<Timestamp> last_heartbeat;
  std::uint64_t memory_revision = 0;
  std::uint64_t memory_revision_at_heartbeat = 0;

  friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

struct ChatTurn {
  std::string speaker;  // "user" or "agent"
  std::string text;
};

struct OpinionContext {
  std::string_view memory;
  std::string_view question;
};

struct StatementContext {
  AgentId agent;
  std::string_view memory;
  std::string_view question;
  std::string_view own_opinion;
  std::span<const std::string> opinions;           // every visible opinion
  std::span<const CandidateStatement> pool;        // active statements
};

struct RankingContext {
  std::string_view memory;
  std::string_view question;
  std::string_view own_opinion;
  std::span<const CandidateStatement> pool;
};

struct InterviewContext {
  std::string_view agent_name;
  std::string_view memory;
  std::span<const ChatTurn> transcript;
  std::string_view user_turn;
};

struct MemoryUpdateContext {
  std::string_view memory;
  std::span<const std::string> joined_questions;
};

struct StatementText {
  std::string title;
  std::string body;
};

struct InterviewTurn {
  std::string reply;
  std::string memory_delta;  // empty when nothing worth saving was said
};

// Produces an agent's contributions. Production binds this to an LLM; tests
// and the simulator use MockGenerator.
class Generator {
 public:
  virtual ~Generator() = default;
  // Non-empty text, or exactly kNoPositionSentinel.
  virtual std::string opinion(const OpinionContext& ctx) = 0;
  // nullopt when the agent chooses not to author a statement.
  virtual std::optional<StatementText> statement(const StatementContext& ctx) = 0;
  // Must be a permutation of ctx.pool's ids; callers validate.
  virtual std::vector<CandidateId> ranking(const RankingContext& ctx) = 0;
  virtual InterviewTurn interview_turn(const InterviewContext& ctx) = 0;
  virtual std::string memory_update(const MemoryUpdateContext& ctx) = 0;
};

// Deterministic stand-in built from stable hashes of its inputs.
//  opinion:   "Position: <stance>. ..." with the stance picked by
//             hash(memory, question); the sentinel iff memory is blank.
//  statement: authored iff no active statement mentions the agent's stance.
//  ranking:   pool sorted by hash(memory, body).
//  interview: saves the user turn verbatim when it states a view.
class MockGenerator : public Generator {
 public:
  std::string opinion(const OpinionContext& ctx) override;
  std::optional<StatementText> statement(const StatementContext& ctx) override;
  std::vector<CandidateId> ranking(const RankingContext& ctx) override;
  InterviewTurn interview_turn(const InterviewContext& ctx) override;
  std::string memory_update(const MemoryUpdateContext& ctx) override;

  // The stance word of an opinion produced by this generator, or "" if none.
  static std::string stance_of(std::string_view opinion);
};

// Generator backed by a TextClient using the "opinion", "statement",
// "ranking", "chat" and "heartbeat" templates.
class LlmGenerator : public Generator {
 public:
  explicit LlmGenerator(TextClient& client, std::size_t max_pool = 8)
      : client_(client), max_pool_(max_pool) {}

  std::string opinion(const OpinionContext& ctx) override;
  std::optional<StatementText> statement(const StatementContext& ctx) override;
  std::vector<CandidateId> ranking(const RankingContext& ctx) override;
  InterviewTurn interview_turn(const InterviewContext& ctx) override;
  std::string memory_update(const MemoryUpdateContext& ctx) override;

 private:
  TextClient& client_;
  std::size_t max_pool_;
};

// "TITLE: ...\nSTATEMENT: ..." -> StatementText. kValidation if either part
// is missing.
StatementText parse_titled_statement(std::string_view reply);
// Comma-separated ids, best first, validated against the pool.
std::vector<CandidateId> parse_ranking_reply(std::string_view reply,
                                             std::span<const CandidateStatement> pool);

enum class SkipReason {
  kInsufficientMemory,
  kGeneratorFailure,
  kInvalidRanking,
  kConflict,
  kRejected,
};

std::string_view to_string(SkipReason r);

using SufficiencyPolicy =
    std::function<std::optional<SkipReason>(const AgentRecord&, const Deliberation&)>;

// Joins only when memory holds at least `min_chars` code points.
SufficiencyPolicy memory_length_policy(std::size_t min_chars = 200);

struct HeartbeatPolicy {
  SufficiencyPolicy sufficiency = memory_length_policy();
  // Re-rank deliberations already joined when the pool has changed.
  bool rerank_joined = true;
};

struct HeartbeatReport {
  AgentId agent;
  Timestamp fired_at = 0;
  std::vector<DeliberationId> joined;
  std::vector<std::pair<DeliberationId, SkipReason>> skipped;
  std::vector<DeliberationId> reranked;
  bool memory_updated = false;
};

// Where heartbeat contributions go. The platform routes these through the
// deliberation's sequencer; errors propagate as agora::Error.
class ParticipationSink {
 public:
  virtual ~ParticipationSink() = default;
  virtual void join(const DeliberationId& deliberation, const AgentId& agent,
                    const JoinRequest& request) = 0;
  virtual void rerank(const DeliberationId& deliberation, const AgentId& agent,
                      const std::vector<CandidateId>& order) = 0;
};

// One heartbeat: for every open deliberation the agent has not joined,
// decide, generate and join. A failure on one deliberation is reported as a
// skip and never aborts the rest. Updates last_heartbeat and may append to
// memory. kUnsupported for external agents.
HeartbeatReport run_heartbeat(AgentRecord& agent, std::span<const Deliberation> open,
                              Generator& generator, const HeartbeatPolicy& policy,
                              ParticipationSink& sink, Timestamp now);

struct InterviewResult {
  std::string reply;
  std::string memory_delta;
  AgentRecord agent;
};

// One interview turn. A non-empty delta is appended to memory as a new line;
// memory is untouched if the generator fails.
InterviewResult conduct_interview(const AgentRecord& agent, std::span<const ChatTurn> transcript,
                                  std::string_view user_turn, Generator& generator);

std::string generate_opinion(std::string_view memory, std::string_view question,
                             Generator& generator);

// Replaces memory. Existing opinions are untouched; only future generation
// sees the new text. kUnsupported for external agents.
AgentRecord edit_memory(const AgentRecord& agent, std::string new_memory);

// Fires each agent once per interval, jittered by up to ±jitter of the
// interval so that agents registered together spread out.
class HeartbeatScheduler {
 public:
  explicit HeartbeatScheduler(std::uint64_t seed, double jitter = 0.1);

  // Agents whose next fire time is <= now, in input order.
  std::vector<AgentId> due(std::span<const AgentRecord> agents, Timestamp now);
  // Schedules the next fire after a heartbeat at `fired_at`.
  void mark_fired(const AgentRecord& agent, Timestamp fired_at);
  std::optional<Timestamp> next_due(const AgentId& agent) const;

 private:
  std::mt19937_64 rng_;
  double jitter_;
  std::map<AgentId, Timestamp> next_due_;
};

}  // namespace agora
