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

#include "agora/agent_runtime.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "agora/text.hpp"

namespace agora {
namespace {

constexpr std::array<std::string_view, 4> kStances = {"expand", "restrict", "reform", "preserve"};

constexpr std::array<std::string_view, 7> kValueMarkers = {
    "i believe", "i think", "i care", "i want", "should", "matters to me", "i value",
};

bool contains_word(std::string_view text, std::string_view word) {
  const auto toks = text::token_set(text);
  return toks.contains(std::string(word));
}

std::string grounding_line(std::string_view memory, std::string_view question) {
  const auto q = text::token_set(question);
  std::string best;
  std::size_t best_overlap = 0;
  bool any = false;
  for (const auto& line : text::split_lines(memory)) {
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    std::size_t overlap = 0;
    for (const auto& tok : text::token_set(t)) overlap += q.contains(tok);
    if (!any || overlap >= best_overlap) {
      best = t;
      best_overlap = overlap;
      any = true;
    }
  }
  return best;
}

std::string join_lines(std::span<const std::string> items, std::string_view bullet = "- ") {
  std::string out;
  for (const auto& s : items) {
    out += bullet;
    out += s;
    out += '\n';
  }
  return out;
}

std::string pool_listing(std::span<const CandidateStatement> pool) {
  std::string out;
  for (const auto& s : pool) {
    out += s.id.str() + ": " + s.title + ". " + s.body + '\n';
  }
  return out;
}

std::string append_line(const std::string& memory, std::string_view delta) {
  if (memory.empty()) return std::string(delta);
  std::string out = memory;
  if (out.back() != '\n') out += '\n';
  out += delta;
  return out;
}

CandidateId mint_candidate_id(const Deliberation& d, const AgentId& agent) {
  for (int n = 1;; ++n) {
    CandidateId id{agent.str() + ":" + std::to_string(n)};
    if (d.find_statement(id) == nullptr) return id;
  }
}

bool same_members(std::vector<CandidateId> a, std::vector<CandidateId> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b && std::adjacent_find(a.begin(), a.end()) == a.end();
}

std::vector<std::string> visible_opinions(const Deliberation& d) {
  std::vector<std::string> out;
  for (const auto& agent : d.participants) {
    if (const Opinion* o = d.live_opinion(agent)) out.push_back(o->text);
  }
  return out;
}

std::vector<CandidateStatement> active_statements(const Deliberation& d) {
  std::vector<CandidateStatement> out;
  for (const auto& s : d.statements) {
    if (s.status == StatementStatus::kActive) out.push_back(s);
  }
  return out;
}

}  // namespace

std::string_view to_string(Hosting h) {
  return h == Hosting::kHosted ? "hosted" : "external";
}

Hosting parse_hosting(std::string_view s) {
  if (s == "hosted") return Hosting::kHosted;
  if (s == "external") return Hosting::kExternal;
  throw Error(ErrorCode::kValidation, "unknown hosting: " + std::string(s));
}

std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::kInsufficientMemory: return "insufficient_memory";
    case SkipReason::kGeneratorFailure: return "generator_failure";
    case SkipReason::kInvalidRanking: return "invalid_ranking";
    case SkipReason::kConflict: return "conflict";
    case SkipReason::kRejected: return "rejected";
  }
  return "rejected";
}

// ---- MockGenerator

std::string MockGenerator::opinion(const OpinionContext& ctx) {
  if (text::trim(ctx.memory).empty()) return std::string(kNoPositionSentinel);
  const std::uint64_t h = fnv1a(ctx.question, fnv1a(ctx.memory));
  const std::string_view stance = kStances[h % kStances.size()];
  std::string out = "Position: " + std::string(stance) + ". ";
  out += "This follows from what I hold: " + grounding_line(ctx.memory, ctx.question);
  if (out.back() != '.') out += '.';
  out += " Ref " + text::hex64(h) + ".";
  return out;
}

std::string MockGenerator::stance_of(std::string_view opinion) {
  constexpr std::string_view prefix = "Position: ";
  if (!opinion.starts_with(prefix)) return "";
  opinion.remove_prefix(prefix.size());
  const auto dot = opinion.find('.');
  std::string word(opinion.substr(0, dot));
  for (auto s : kStances) {
    if (s == word) return word;
  }
  return "";
}

std::optional<StatementText> MockGenerator::statement(const StatementContext& ctx) {
  const std::string stance = stance_of(ctx.own_opinion);
  if (stance.empty()) return std::nullopt;
  for (const auto& s : ctx.pool) {
    if (contains_word(s.title, stance) || contains_word(s.body, stance)) return std::nullopt;
  }
  StatementText out;
  out.title = "Consensus: " + stance;
  out.body = text::first_sentence(ctx.own_opinion) +
             " The group should " + stance + " current policy on this question, with a public review after one year.";
  return out;
}

std::vector<CandidateId> MockGenerator::ranking(const RankingContext& ctx) {
  const std::string stance = stance_of(ctx.own_opinion);
  const std::uint64_t seed = fnv1a(ctx.memory);
  struct Key {
    int affinity;
    std::uint64_t h;
    CandidateId id;
    auto operator<=>(const Key&) const = default;
  };
  std::vector<Key> keys;
  keys.reserve(ctx.pool.size());
  for (const auto& s : ctx.pool) {
    const bool mine = !stance.empty() &&
                      (contains_word(s.title, stance) || contains_word(s.body, stance));
    keys.push_back({mine ? 0 : 1, fnv1a(s.body, seed), s.id});
  }
  std::sort(keys.begin(), keys.end());
  std::vector<CandidateId> out;
  for (auto& k : keys) out.push_back(k.id);
  return out;
}

InterviewTurn MockGenerator::interview_turn(const InterviewContext& ctx) {
  const std::string lowered = text::lower(ctx.user_turn);
  const bool states_view = std::any_of(kValueMarkers.begin(), kValueMarkers.end(),
                                       [&](std::string_view m) {
                                         return lowered.find(m) != std::string::npos;
                                       });
  InterviewTurn out;
  if (states_view) {
    out.memory_delta = text::trim(ctx.user_turn);
    out.reply = "Noted. What would change your mind on that?";
  } else {
    out.reply = "Tell me more about what matters to you here.";
  }
  return out;
}

std::string MockGenerator::memory_update(const MemoryUpdateContext&) { return ""; }

// ---- LlmGenerator

StatementText parse_titled_statement(std::string_view reply) {
  std::string title;
  std::string body;
  bool in_body = false;
  for (const auto& raw : text::split_lines(reply)) {
    const std::string line = text::trim(raw);
    if (line.starts_with("TITLE:")) {
      title = text::trim(std::string_view(line).substr(6));
      in_body = false;
    } else if (line.starts_with("STATEMENT:")) {
      body = text::trim(std::string_view(line).substr(10));
      in_body = true;
    } else if (in_body && !line.empty()) {
      body += " " + line;
    }
  }
  if (title.empty() || body.empty()) {
    throw Error(ErrorCode::kValidation, "reply lacks TITLE or STATEMENT");
  }
  return {title, body};
}

std::vector<CandidateId> parse_ranking_reply(std::string_view reply,
                                             std::span<const CandidateStatement> pool) {
  std::vector<CandidateId> out;
  std::string_view rest = reply;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string item = text::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    while (!item.empty() && (item.front() == '[' || item.front() == '"')) item.erase(0, 1);
    while (!item.empty() && (item.back() == ']' || item.back() == '"' || item.back() == '.')) {
      item.pop_back();
    }
    if (!item.empty()) out.emplace_back(item);
  }
  std::vector<CandidateId> ids;
  for (const auto& s : pool) ids.push_back(s.id);
  if (!same_members(out, ids)) {
    throw Error(ErrorCode::kValidation, "ranking reply is not a permutation of the pool");
  }
  return out;
}

std::string LlmGenerator::opinion(const OpinionContext& ctx) {
  std::string reply = text::trim(client_.complete(
      {"opinion", {{"profile", std::string(ctx.memory)}, {"question", std::string(ctx.question)}}}));
  if (reply.empty()) throw Error(ErrorCode::kValidation, "empty opinion reply");
  if (reply.starts_with(kNoPositionSentinel)) return std::string(kNoPositionSentinel);
  return reply;
}

std::optional<StatementText> LlmGenerator::statement(const StatementContext& ctx) {
  if (ctx.pool.size() >= max_pool_ || ctx.own_opinion == kNoPositionSentinel) return std::nullopt;
  const std::string reply = client_.complete(
      {"statement",
       {{"question", std::string(ctx.question)},
        {"profile", std::string(ctx.memory)},
        {"opinions", join_lines(ctx.opinions)}}});
  return parse_titled_statement(reply);
}

std::vector<CandidateId> LlmGenerator::ranking(const RankingContext& ctx) {
  if (ctx.pool.empty()) return {};
  const std::string reply = client_.complete(
      {"ranking",
       {{"question", std::string(ctx.question)},
        {"profile", std::string(ctx.memory)},
        {"opinion", std::string(ctx.own_opinion)},
        {"statements", pool_listing(ctx.pool)}}});
  return parse_ranking_reply(reply, ctx.pool);
}

InterviewTurn LlmGenerator::interview_turn(const InterviewContext& ctx) {
  std::string transcript;
  for (const auto& t : ctx.transcript) {
    transcript += (t.speaker == "user" ? "User: " : "Agent: ") + t.text + '\n';
  }
  const std::string reply = client_.complete(
      {"chat",
       {{"agent_name", std::string(ctx.agent_name)},
        {"profile", std::string(ctx.memory)},
        {"transcript", transcript},
        {"user_turn", std::string(ctx.user_turn)}}});
  InterviewTurn out;
  for (const auto& line : text::split_lines(reply)) {
    const std::string t = text::trim(line);
    if (t.starts_with("UPDATE_PROFILE:")) {
      const std::string delta = text::trim(std::string_view(t).substr(15));
      if (!delta.empty()) out.memory_delta = append_line(out.memory_delta, delta);
    } else {
      if (!out.reply.empty()) out.reply += '\n';
      out.reply += line;
    }
  }
  out.reply = text::trim(out.reply);
  return out;
}

std::string LlmGenerator::memory_update(const MemoryUpdateContext& ctx) {
  if (ctx.joined_questions.empty()) return "";
  return text::trim(client_.complete(
      {"heartbeat",
       {{"profile", std::string(ctx.memory)}, {"joined", join_lines(ctx.joined_questions)}}}));
}

// ---- heartbeat

SufficiencyPolicy memory_length_policy(std::size_t min_chars) {
  return [min_chars](const AgentRecord& agent, const Deliberation&) -> std::optional<SkipReason> {
    if (text::utf8_length(agent.memory) < min_chars) return SkipReason::kInsufficientMemory;
    return std::nullopt;
  };
}

namespace {

std::optional<SkipReason> try_join(const AgentRecord& agent, const Deliberation& d,
                                   Generator& generator, ParticipationSink& sink) {
  const std::string& question = d.header.question;
  std::string opinion;
  std::optional<StatementText> text;
  std::vector<CandidateStatement> pool = active_statements(d);
  std::optional<StatementDraft> draft;
  std::vector<CandidateId> order;
  try {
    opinion = generator.opinion({agent.memory, question});
    if (text::trim(opinion).empty()) return SkipReason::kGeneratorFailure;
    if (opinion != kNoPositionSentinel) {
      const auto opinions = visible_opinions(d);
      text = generator.statement({agent.id, agent.memory, question, opinion, opinions, pool});
    }
    if (text) {
      draft = StatementDraft{mint_candidate_id(d, agent.id), text->title, text->body};
      pool.push_back({draft->id, agent.id, draft->title, draft->body, StatementStatus::kActive});
    }
    order = generator.ranking({agent.memory, question, opinion, pool});
  } catch (const std::exception&) {
    return SkipReason::kGeneratorFailure;
  }
  std::vector<CandidateId> ids;
  for (const auto& s : pool) ids.push_back(s.id);
  if (!same_members(order, ids)) return SkipReason::kInvalidRanking;

  JoinRequest request;
  request.opinion = std::move(opinion);
  request.produced_via = ProducedVia::kAutonomous;
  request.statement = std::move(draft);
  request.ranking = std::move(order);
  try {
    sink.join(d.header.id, agent.id, request);
  } catch (const Error& e) {
    return e.code() == ErrorCode::kConflict ? SkipReason::kConflict : SkipReason::kRejected;
  }
  return std::nullopt;
}

std::optional<SkipReason> try_rerank(const AgentRecord& agent, const Deliberation& d,
                                     Generator& generator, ParticipationSink& sink,
                                     bool& changed) {
  changed = false;
  const Opinion* own = d.live_opinion(agent.id);
  const auto current = d.rankings.find(agent.id);
  if (own == nullptr || current == d.rankings.end()) return std::nullopt;
  const std::vector<CandidateStatement> pool = active_statements(d);
  if (pool.size() < 2) return std::nullopt;
  std::vector<CandidateId> order;
  try {
    order = generator.ranking({agent.memory, d.header.question, own->text, pool});
  } catch (const std::exception&) {
    return SkipReason::kGeneratorFailure;
  }
  if (!same_members(order, d.active_pool())) return SkipReason::kInvalidRanking;
  if (order == current->second.order) return std::nullopt;
  try {
    sink.rerank(d.header.id, agent.id, order);
  } catch (const Error& e) {
    return e.code() == ErrorCode::kConflict ? SkipReason::kConflict : SkipReason::kRejected;
  }
  changed = true;
  return std::nullopt;
}

}  // namespace

HeartbeatReport run_heartbeat(AgentRecord& agent, std::span<const Deliberation> open,
                              Generator& generator, const HeartbeatPolicy& policy,
                              ParticipationSink& sink, Timestamp now) {
  if (agent.hosting == Hosting::kExternal) {
    throw Error(ErrorCode::kUnsupported, "external agents run their own loop");
  }
  HeartbeatReport report;
  report.agent = agent.id;
  report.fired_at = now;
  std::vector<std::string> joined_questions;

  for (const auto& d : open) {
    if (d.status != DeliberationStatus::kOpen) continue;
    if (d.is_participant(agent.id)) {
      if (!policy.rerank_joined) continue;
      bool changed = false;
      if (auto skip = try_rerank(agent, d, generator, sink, changed)) {
        report.skipped.emplace_back(d.header.id, *skip);
      } else if (changed) {
        report.reranked.push_back(d.header.id);
      }
      continue;
    }
    if (policy.sufficiency) {
      if (auto skip = policy.sufficiency(agent, d)) {
        report.skipped.emplace_back(d.header.id, *skip);
        continue;
      }
    }
    if (auto skip = try_join(agent, d, generator, sink)) {
      report.skipped.emplace_back(d.header.id, *skip);
      continue;
    }
    report.joined.push_back(d.header.id);
    joined_questions.push_back(d.header.question);
  }

  if (!joined_questions.empty()) {
    std::string delta;
    try {
      delta = text::trim(generator.memory_update({agent.memory, joined_questions}));
    } catch (const std::exception&) {
      delta.clear();
    }
    if (!delta.empty()) {
      agent.memory = append_line(agent.memory, delta);
      ++agent.memory_revision;
      report.memory_updated = true;
    }
  }
  agent.last_heartbeat = now;
  agent.memory_revision_at_heartbeat = agent.memory_revision;
  return report;
}

InterviewResult conduct_interview(const AgentRecord& agent, std::span<const ChatTurn> transcript,
                                  std::string_view user_turn, Generator& generator) {
  if (text::trim(user_turn).empty()) {
    throw Error(ErrorCode::kValidation, "empty message");
  }
  InterviewTurn turn = generator.interview_turn({agent.name, agent.memory, transcript, user_turn});
  InterviewResult out{std::move(turn.reply), text::trim(turn.memory_delta), agent};
  if (!out.memory_delta.empty()) {
    out.agent.memory = append_line(agent.memory, out.memory_delta);
    ++out.agent.memory_revision;
  }
  return out;
}

std::string generate_opinion(std::string_view memory, std::string_view question,
                             Generator& generator) {
  return generator.opinion({memory, question});
}

AgentRecord edit_memory(const AgentRecord& agent, std::string new_memory) {
  if (agent.hosting == Hosting::kExternal) {
    throw Error(ErrorCode::kUnsupported, "external agents keep their own memory");
  }
  AgentRecord out = agent;
  if (out.memory != new_memory) {
    out.memory = std::move(new_memory);
    ++out.memory_revision;
  }
  return out;
}

// ---- scheduler

HeartbeatScheduler::HeartbeatScheduler(std::uint64_t seed, double jitter)
    : rng_(seed), jitter_(jitter) {}

std::vector<AgentId> HeartbeatScheduler::due(std::span<const AgentRecord> agents, Timestamp now) {
  std::vector<AgentId> out;
  for (const auto& a : agents) {
    if (a.hosting == Hosting::kExternal) continue;
    auto it = next_due_.find(a.id);
    if (it == next_due_.end()) {
      Timestamp first = now;
      if (a.last_heartbeat) {
        std::uniform_real_distribution<double> u(-jitter_, jitter_);
        first = *a.last_heartbeat +
                static_cast<Timestamp>(std::llround(a.heartbeat_interval_ms * (1.0 + u(rng_))));
      }
      it = next_due_.emplace(a.id, first).first;
    }
    if (it->second <= now) out.push_back(a.id);
  }
  return out;
}

void HeartbeatScheduler::mark_fired(const AgentRecord& agent, Timestamp fired_at) {
  std::uniform_real_distribution<double> u(-jitter_, jitter_);
  next_due_[agent.id] =
      fired_at + static_cast<Timestamp>(std::llround(agent.heartbeat_interval_ms * (1.0 + u(rng_))));
}

std::optional<Timestamp> HeartbeatScheduler::next_due(const AgentId& agent) const {
  auto it = next_due_.find(agent);
  if (it == next_due_.end()) return std::nullopt;
  return it->second;
}

}  // namespace agora
