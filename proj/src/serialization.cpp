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

#include "agora/serialization.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace agora {
namespace {

template <typename T>
T field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kValidation, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kValidation, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return field<T>(j, key);
}

Json draft_to_json(const StatementDraft& s) {
  return {{"id", s.id.str()}, {"title", s.title}, {"body", s.body}};
}

StatementDraft draft_from_json(const Json& j) {
  return {CandidateId(field<std::string>(j, "id")), field<std::string>(j, "title"),
          field<std::string>(j, "body")};
}

Json optional_kind(const std::optional<RevisionKind>& k) {
  return k ? Json(std::string(to_string(*k))) : Json(nullptr);
}

std::optional<RevisionKind> optional_kind_from(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return parse_revision_kind(field<std::string>(j, key));
}

struct PayloadEncoder {
  Json operator()(const JoinedPayload& p) const {
    Json j{{"opinion", p.opinion}, {"produced_via", std::string(to_string(p.produced_via))}};
    j["statement"] = p.statement ? draft_to_json(*p.statement) : Json(nullptr);
    j["ranking"] = p.ranking ? ids_to_json(*p.ranking) : Json(nullptr);
    return j;
  }
  Json operator()(const OpinionSubmittedPayload& p) const {
    return {{"text", p.text}, {"produced_via", std::string(to_string(p.produced_via))}};
  }
  Json operator()(const OpinionRevisedPayload& p) const {
    return {{"text", p.text}, {"revision_kind", std::string(to_string(p.kind))}};
  }
  Json operator()(const OpinionWithdrawnPayload& p) const {
    return {{"revision_kind", optional_kind(p.kind)}};
  }
  Json operator()(const StatementProposedPayload& p) const {
    return {{"statement", draft_to_json(p.statement)},
            {"author_ranking", ids_to_json(p.author_ranking)}};
  }
  Json operator()(const StatementWithdrawnPayload& p) const {
    return {{"candidate", p.candidate.str()}};
  }
  Json operator()(const RankingPayload& p) const {
    return {{"order", ids_to_json(p.order)}, {"revision_kind", optional_kind(p.kind)}};
  }
  Json operator()(const ClosedPayload&) const { return Json::object(); }
  Json operator()(const ReviewRecordedPayload& p) const {
    return {{"action_id", p.action_id}};
  }
};

EventPayload payload_from_json(EventKind kind, const Json& j) {
  switch (kind) {
    case EventKind::kJoined: {
      JoinedPayload p;
      p.opinion = field<std::string>(j, "opinion");
      p.produced_via = parse_produced_via(field<std::string>(j, "produced_via"));
      if (auto it = j.find("statement"); it != j.end() && !it->is_null()) {
        p.statement = draft_from_json(*it);
      }
      if (auto it = j.find("ranking"); it != j.end() && !it->is_null()) {
        p.ranking = ids_from_json(*it);
      }
      return p;
    }
    case EventKind::kOpinionSubmitted:
      return OpinionSubmittedPayload{field<std::string>(j, "text"),
                                     parse_produced_via(field<std::string>(j, "produced_via"))};
    case EventKind::kOpinionRevised:
      return OpinionRevisedPayload{field<std::string>(j, "text"),
                                   parse_revision_kind(field<std::string>(j, "revision_kind"))};
    case EventKind::kOpinionWithdrawn:
      return OpinionWithdrawnPayload{optional_kind_from(j, "revision_kind")};
    case EventKind::kStatementProposed:
      return StatementProposedPayload{draft_from_json(field<Json>(j, "statement")),
                                      ids_from_json(field<Json>(j, "author_ranking"))};
    case EventKind::kStatementWithdrawn:
      return StatementWithdrawnPayload{CandidateId(field<std::string>(j, "candidate"))};
    case EventKind::kRankingSubmitted:
    case EventKind::kRankingEdited:
      return RankingPayload{ids_from_json(field<Json>(j, "order")),
                            optional_kind_from(j, "revision_kind")};
    case EventKind::kDeliberationClosed:
      return ClosedPayload{};
    case EventKind::kReviewRecorded:
      return ReviewRecordedPayload{field<std::string>(j, "action_id")};
  }
  throw Error(ErrorCode::kValidation, "unhandled event kind");
}

Json consensus_to_json(const ConsensusConfig& c) {
  return {{"aggregator", std::string(to_string(c.aggregator))},
          {"link_strength", std::string(to_string(c.link))},
          {"pseudocount", c.pseudocount}};
}

ConsensusConfig consensus_from_json(const Json& j) {
  ConsensusConfig c;
  c.aggregator = parse_aggregator(field_or<std::string>(j, "aggregator", "schulze"));
  c.link = parse_link_strength(field_or<std::string>(j, "link_strength", "winning_votes"));
  c.pseudocount = field_or<double>(j, "pseudocount", 0.5);
  return c;
}

}  // namespace

std::string_view to_string(LinkStrength v) {
  return v == LinkStrength::kMargins ? "margins" : "winning_votes";
}

LinkStrength parse_link_strength(std::string_view s) {
  if (s == "winning_votes") return LinkStrength::kWinningVotes;
  if (s == "margins") return LinkStrength::kMargins;
  throw Error(ErrorCode::kValidation, "unknown link strength '" + std::string(s) + "'");
}

Json ids_to_json(std::span<const CandidateId> ids) {
  Json j = Json::array();
  for (const auto& id : ids) j.push_back(id.str());
  return j;
}

std::vector<CandidateId> ids_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kValidation, "expected an array of candidate ids");
  std::vector<CandidateId> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw Error(ErrorCode::kValidation, "candidate ids must be strings");
    out.emplace_back(v.get<std::string>());
  }
  return out;
}

Json to_json(const DeliberationHeader& h) {
  return {{"id", h.id.str()},
          {"question", h.question},
          {"creator", h.creator},
          {"created_at", h.created_at},
          {"consensus", consensus_to_json(h.consensus)}};
}

DeliberationHeader header_from_json(const Json& j) {
  DeliberationHeader h;
  h.id = DeliberationId(field<std::string>(j, "id"));
  h.question = field<std::string>(j, "question");
  h.creator = field_or<std::string>(j, "creator", "");
  h.created_at = field_or<Timestamp>(j, "created_at", 0);
  if (auto it = j.find("consensus"); it != j.end() && it->is_object()) {
    h.consensus = consensus_from_json(*it);
  }
  return h;
}

Json to_json(const DomainEvent& e) {
  return {{"seq", e.seq},
          {"kind", std::string(to_string(e.kind))},
          {"actor", e.actor},
          {"timestamp", e.timestamp},
          {"payload", std::visit(PayloadEncoder{}, e.payload)}};
}

DomainEvent event_from_json(const Json& j) {
  DomainEvent e;
  e.seq = field<std::uint64_t>(j, "seq");
  e.kind = parse_event_kind(field<std::string>(j, "kind"));
  e.actor = field<std::string>(j, "actor");
  e.timestamp = field_or<Timestamp>(j, "timestamp", 0);
  auto payload = j.find("payload");
  e.payload = payload_from_json(e.kind, payload == j.end() ? Json::object() : *payload);
  return e;
}

Json to_json(const CandidateStatement& s) {
  return {{"id", s.id.str()},
          {"author", s.author.str()},
          {"title", s.title},
          {"body", s.body},
          {"status", std::string(to_string(s.status))}};
}

Json to_json(const Opinion& o) {
  return {{"agent", o.agent.str()},
          {"deliberation", o.deliberation.str()},
          {"text", o.text},
          {"produced_via", std::string(to_string(o.produced_via))},
          {"created_at", o.created_at},
          {"revised_at", o.revised_at},
          {"revision_count", o.revision_count},
          {"live", o.live}};
}

Json to_json(const Deliberation& d) {
  Json j;
  j["header"] = to_json(d.header);
  j["status"] = std::string(to_string(d.status));
  j["participants"] = Json::array();
  for (const auto& a : d.participants) j["participants"].push_back(a.str());
  j["opinions"] = Json::array();
  for (const auto& [agent, o] : d.opinions) j["opinions"].push_back(to_json(o));
  j["statements"] = Json::array();
  for (const auto& s : d.statements) j["statements"].push_back(to_json(s));
  j["rankings"] = Json::object();
  for (const auto& [agent, r] : d.rankings) j["rankings"][agent.str()] = ids_to_json(r.order);
  j["winner"] = d.winner ? Json(d.winner->str()) : Json(nullptr);
  j["event_seq"] = d.event_seq;
  j["reviewed_actions"] = Json(d.reviewed_actions);
  return j;
}

Deliberation deliberation_from_json(const Json& j) {
  Deliberation d;
  d.header = header_from_json(field<Json>(j, "header"));
  d.status = parse_deliberation_status(field<std::string>(j, "status"));
  for (const auto& a : field<Json>(j, "participants")) d.participants.emplace_back(a.get<std::string>());
  for (const auto& o : field<Json>(j, "opinions")) {
    Opinion op;
    op.agent = AgentId(field<std::string>(o, "agent"));
    op.deliberation = DeliberationId(field<std::string>(o, "deliberation"));
    op.text = field<std::string>(o, "text");
    op.produced_via = parse_produced_via(field<std::string>(o, "produced_via"));
    op.created_at = field<Timestamp>(o, "created_at");
    op.revised_at = field<Timestamp>(o, "revised_at");
    op.revision_count = field<int>(o, "revision_count");
    op.live = field<bool>(o, "live");
    d.opinions.emplace(op.agent, op);
  }
  for (const auto& s : field<Json>(j, "statements")) {
    d.statements.push_back(CandidateStatement{
        CandidateId(field<std::string>(s, "id")), AgentId(field<std::string>(s, "author")),
        field<std::string>(s, "title"), field<std::string>(s, "body"),
        parse_statement_status(field<std::string>(s, "status"))});
  }
  const Json rankings = field<Json>(j, "rankings");
  for (const auto& [agent, order] : rankings.items()) {
    d.rankings.emplace(AgentId(agent), Ranking{AgentId(agent), ids_from_json(order)});
  }
  if (auto it = j.find("winner"); it != j.end() && !it->is_null()) {
    d.winner = CandidateId(it->get<std::string>());
  }
  d.event_seq = field<std::uint64_t>(j, "event_seq");
  for (const auto& a : field_or<Json>(j, "reviewed_actions", Json::array())) {
    d.reviewed_actions.insert(a.get<std::string>());
  }
  return d;
}

void write_header_line(std::ostream& out, const DeliberationHeader& header) {
  Json j = to_json(header);
  j["record"] = "header";
  out << j.dump() << '\n';
}

void write_event_line(std::ostream& out, const DomainEvent& event) {
  Json j = to_json(event);
  j["record"] = "event";
  out << j.dump() << '\n';
}

void write_log(std::ostream& out, const EventLogFile& log) {
  write_header_line(out, log.header);
  for (const auto& e : log.events) write_event_line(out, e);
}

EventLogFile read_log(std::istream& in) {
  EventLogFile log;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      const auto record = field_or<std::string>(j, "record", "event");
      if (record == "header") {
        if (have_header) throw Error(ErrorCode::kValidation, "duplicate header record");
        log.header = header_from_json(j);
        have_header = true;
      } else if (record == "event") {
        if (!have_header) throw Error(ErrorCode::kValidation, "event before header record");
        log.events.push_back(event_from_json(j));
      }
      // Other record types are reserved for future use and skipped.
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kCorruption,
                  "log line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruption,
                  "log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::kCorruption, "log has no header record");
  return log;
}

}  // namespace agora
