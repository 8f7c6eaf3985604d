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

#include "agora/oversight.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "agora/text.hpp"

namespace agora {
namespace {

std::string excerpt(std::string_view s, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (chars == max_chars) return std::string(s.substr(0, i)) + "...";
      ++chars;
    }
  }
  return std::string(s);
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string format_risk(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r);
  return buf;
}

}  // namespace

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::kOpinionSubmitted: return "opinion_submitted";
    case ActionKind::kStatementProposed: return "statement_proposed";
    case ActionKind::kRankingSubmitted: return "ranking_submitted";
  }
  return "opinion_submitted";
}

ActionKind parse_action_kind(std::string_view s) {
  for (auto k : {ActionKind::kOpinionSubmitted, ActionKind::kStatementProposed,
                 ActionKind::kRankingSubmitted}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::kValidation, "unknown action kind: " + std::string(s));
}

std::string action_id(const DeliberationId& deliberation, std::uint64_t seq, ActionKind kind) {
  return deliberation.str() + ":" + std::to_string(seq) + ":" + std::string(to_string(kind));
}

std::vector<ReviewableAction> extract_actions(const DeliberationId& deliberation,
                                              std::span<const DomainEvent> events,
                                              const MemoryLookup& memory_at) {
  std::map<CandidateId, std::string> titles;
  std::set<std::string> reviewed;
  std::vector<ReviewableAction> out;

  auto ranking_text = [&](const std::vector<CandidateId>& order) {
    std::string s;
    int rank = 1;
    for (const auto& id : order) {
      auto it = titles.find(id);
      s += std::to_string(rank++) + ". " + (it == titles.end() ? id.str() : it->second) + "\n";
    }
    return s;
  };
  auto emit = [&](const DomainEvent& e, ActionKind kind, std::string content) {
    AgentId agent(e.actor);
    auto memory = memory_at(agent, e.timestamp);
    if (!memory) return;
    ReviewableAction a;
    a.id = action_id(deliberation, e.seq, kind);
    a.agent = agent;
    a.deliberation = deliberation;
    a.seq = e.seq;
    a.kind = kind;
    a.content = std::move(content);
    a.memory_snapshot = std::move(*memory);
    a.at = e.timestamp;
    out.push_back(std::move(a));
  };

  for (const auto& e : events) {
    if (const auto* p = std::get_if<JoinedPayload>(&e.payload)) {
      if (p->statement) titles[p->statement->id] = p->statement->title;
      emit(e, ActionKind::kOpinionSubmitted, p->opinion);
      if (p->statement) {
        emit(e, ActionKind::kStatementProposed, p->statement->title + ". " + p->statement->body);
      }
      if (p->ranking && !p->ranking->empty()) {
        emit(e, ActionKind::kRankingSubmitted, ranking_text(*p->ranking));
      }
    } else if (const auto* p = std::get_if<OpinionSubmittedPayload>(&e.payload)) {
      emit(e, ActionKind::kOpinionSubmitted, p->text);
    } else if (const auto* p = std::get_if<StatementProposedPayload>(&e.payload)) {
      titles[p->statement.id] = p->statement.title;
      emit(e, ActionKind::kStatementProposed, p->statement.title + ". " + p->statement.body);
    } else if (const auto* p = std::get_if<RankingPayload>(&e.payload)) {
      if (e.kind == EventKind::kRankingSubmitted) {
        emit(e, ActionKind::kRankingSubmitted, ranking_text(p->order));
      }
    } else if (const auto* p = std::get_if<ReviewRecordedPayload>(&e.payload)) {
      reviewed.insert(p->action_id);
    }
  }
  for (auto& a : out) a.reviewed = reviewed.contains(a.id);
  return out;
}

double JaccardRiskScorer::score(const ReviewableAction& action) {
  return 1.0 - text::jaccard(text::token_set(text::lower(action.content)),
                             text::token_set(text::lower(action.memory_snapshot)));
}

double LlmRiskScorer::score(const ReviewableAction& action) {
  const std::string reply = text::trim(client_.complete(
      {"risk",
       {{"memory", action.memory_snapshot},
        {"kind", std::string(to_string(action.kind))},
        {"content", action.content}}}));
  double v = 0;
  const char* begin = reply.data();
  const char* end = begin + reply.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr == begin) {
    throw Error(ErrorCode::kValidation, "risk reply is not a number: " + reply);
  }
  return v;
}

double score_risk(const ReviewableAction& action, RiskScorer& scorer) {
  if (action.reviewed) throw Error(ErrorCode::kValidation, "action already reviewed");
  const double r = scorer.score(action);
  if (!(r >= 0.0 && r <= 1.0)) {
    throw Error(ErrorCode::kValidation, "risk out of range");
  }
  return r;
}

ScoringOutcome score_all(std::vector<ReviewableAction> actions, RiskScorer& scorer) {
  ScoringOutcome out;
  for (auto& a : actions) {
    if (a.reviewed || a.risk) continue;
    try {
      a.risk = score_risk(a, scorer);
    } catch (const std::exception&) {
      out.unscored.push_back(a.id);
    }
  }
  out.actions = std::move(actions);
  return out;
}

std::string deep_link(const ReviewableAction& action) {
  return "/deliberations/" + action.deliberation.str() + "/actions/" + std::to_string(action.seq) +
         "/" + std::string(to_string(action.kind));
}

std::optional<ReviewDigest> build_digest(const UserId& user, std::span<const ReviewableAction> actions,
                                         Period period) {
  const ReviewableAction* best = nullptr;
  for (const auto& a : actions) {
    if (a.reviewed || !a.risk || a.at < period.begin || a.at >= period.end) continue;
    if (best == nullptr || *a.risk > *best->risk ||
        (*a.risk == *best->risk && std::tie(a.at, a.seq) > std::tie(best->at, best->seq))) {
      best = &a;
    }
  }
  if (best == nullptr) return std::nullopt;
  return ReviewDigest{user, period, *best, deep_link(*best)};
}

Json digest_document(const ReviewDigest& digest, std::size_t excerpt_chars) {
  const auto& h = digest.headline;
  return Json{
      {"user", digest.user.str()},
      {"period", {{"begin", digest.period.begin}, {"end", digest.period.end}}},
      {"headline",
       {{"id", h.id},
        {"kind", to_string(h.kind)},
        {"deliberation", h.deliberation.str()},
        {"agent", h.agent.str()},
        {"excerpt", excerpt(h.content, excerpt_chars)},
        {"risk", h.risk.value_or(0.0)}}},
      {"deep_link", digest.deep_link},
  };
}

DigestMailer::DigestMailer(std::string subject, std::string body_template, Send send)
    : subject_(std::move(subject)), template_(std::move(body_template)), send_(std::move(send)) {}

std::string DigestMailer::default_template() {
  return "Hi {user},\n\n"
         "Your agent did this recently ({kind} in {deliberation}):\n\n"
         "  {excerpt}\n\n"
         "Does it sound like you? Review it here: {link}\n";
}

EmailMessage DigestMailer::render(const Json& doc, const std::string& to) const {
  const Json& h = doc.at("headline");
  std::string body = template_;
  replace_all(body, "{user}", doc.at("user").get<std::string>());
  replace_all(body, "{kind}", h.at("kind").get<std::string>());
  replace_all(body, "{deliberation}", h.at("deliberation").get<std::string>());
  replace_all(body, "{excerpt}", h.at("excerpt").get<std::string>());
  replace_all(body, "{risk}", format_risk(h.at("risk").get<double>()));
  replace_all(body, "{link}", doc.at("deep_link").get<std::string>());
  return {to, subject_, body};
}

void DigestMailer::deliver(const ReviewDigest& digest, const std::string& to) const {
  send_(render(digest_document(digest), to));
}

bool is_revision_event(EventKind kind) {
  return kind == EventKind::kOpinionRevised || kind == EventKind::kOpinionWithdrawn ||
         kind == EventKind::kRankingEdited;
}

void RevisionTelemetry::record_revision_outcome(const DeliberationId& deliberation,
                                                const DomainEvent& event, const UserId& user) {
  if (!is_revision_event(event.kind)) {
    throw Error(ErrorCode::kValidation,
                "not a revision event: " + std::string(to_string(event.kind)));
  }
  RevisionRecord r;
  r.deliberation = deliberation;
  r.seq = event.seq;
  r.kind = event.kind;
  r.agent = AgentId(event.actor);
  r.user = user;
  r.at = event.timestamp;
  if (const auto* p = std::get_if<OpinionRevisedPayload>(&event.payload)) {
    r.revision_kind = p->kind;
  } else if (const auto* p = std::get_if<OpinionWithdrawnPayload>(&event.payload)) {
    r.revision_kind = p->kind;
  } else if (const auto* p = std::get_if<RankingPayload>(&event.payload)) {
    r.revision_kind = p->kind;
  }
  std::lock_guard lock(mu_);
  auto it = memory_edits_.find(user);
  if (it != memory_edits_.end()) {
    r.cascaded = std::any_of(it->second.begin(), it->second.end(),
                             [&](Timestamp t) { return t >= r.at && t - r.at <= window_; });
  }
  records_.push_back(std::move(r));
}

void RevisionTelemetry::record_memory_edit(const UserId& user, Timestamp at) {
  std::lock_guard lock(mu_);
  memory_edits_[user].push_back(at);
  for (auto& r : records_) {
    if (r.user == user && at >= r.at && at - r.at <= window_) r.cascaded = true;
  }
}

RevisionCounts RevisionTelemetry::counts() const {
  std::lock_guard lock(mu_);
  RevisionCounts c;
  for (const auto& r : records_) {
    if (!r.revision_kind) {
      ++c.unspecified;
    } else if (*r.revision_kind == RevisionKind::kAgentMisrepresented) {
      ++c.agent_misrepresented;
    } else {
      ++c.view_changed;
    }
    c.cascaded += r.cascaded;
    ++c.by_event[r.kind];
  }
  return c;
}

std::vector<RevisionRecord> RevisionTelemetry::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

Json RevisionTelemetry::to_json() const {
  const RevisionCounts c = counts();
  Json by_event = Json::object();
  for (const auto& [k, n] : c.by_event) by_event[std::string(to_string(k))] = n;
  return Json{
      {"cascade_window_ms", window_},
      {"agent_misrepresented", c.agent_misrepresented},
      {"view_changed", c.view_changed},
      {"unspecified", c.unspecified},
      {"cascaded", c.cascaded},
      {"by_event", by_event},
  };
}

}  // namespace agora
