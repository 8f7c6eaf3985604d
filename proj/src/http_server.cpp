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

#include "httplib.h"

#include <atomic>
#include <functional>

#include "agora/platform.hpp"

namespace agora {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return 400;
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kForbidden: return 403;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kClosed: return 409;
    case ErrorCode::kUnsupported:
    case ErrorCode::kUndefined:
    case ErrorCode::kInsufficientSignal: return 422;
    case ErrorCode::kTransport: return 502;
    case ErrorCode::kCorruption:
    case ErrorCode::kConvergence: return 500;
  }
  return 500;
}

namespace {

using Req = httplib::Request;
using Res = httplib::Response;

void send(Res& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Json error_body(ErrorCode code, const std::string& message) {
  return {{"error", error_code_name(code)}, {"message", message}};
}

Json body_of(const Req& req) {
  if (req.body.empty()) return Json::object();
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kValidation, "body must be a JSON object");
  return j;
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kValidation, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kValidation, std::string("bad field '") + key + "'");
  }
}

std::optional<RevisionKind> optional_kind(const Json& j) {
  if (!j.contains("kind") || j["kind"].is_null()) return std::nullopt;
  return parse_revision_kind(field<std::string>(j, "kind"));
}

std::vector<CandidateId> order_of(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw Error(ErrorCode::kValidation, std::string("'") + key + "' must be an array of candidate ids");
  }
  try {
    return ids_from_json(j[key]);
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kValidation, std::string("'") + key + "' must be an array of candidate ids");
  }
}

ConsensusConfig consensus_of(const Json& j) {
  ConsensusConfig c;
  if (j.contains("aggregator")) c.aggregator = parse_aggregator(field<std::string>(j, "aggregator"));
  if (j.contains("link_strength")) c.link = parse_link_strength(field<std::string>(j, "link_strength"));
  if (j.contains("pseudocount")) c.pseudocount = field<double>(j, "pseudocount");
  return c;
}

Json consensus_view(const Deliberation& d) {
  Json winner = nullptr;
  if (d.winner) {
    const CandidateStatement* s = d.find_statement(*d.winner);
    winner = {{"id", d.winner->str()}, {"title", s ? s->title : ""}, {"body", s ? s->body : ""}};
  }
  return {{"deliberation", d.header.id.str()},
          {"status", to_string(d.status)},
          {"aggregator", to_string(d.header.consensus.aggregator)},
          {"winner", winner},
          {"pool", ids_to_json(d.active_pool())},
          {"participants", d.participants.size()},
          {"event_seq", d.event_seq}};
}

Json distribution_view(const Deliberation& d) {
  const std::size_t n = d.active_pool().size();
  Json out = Json::array();
  for (const auto& [cid, hist] : ranking_distribution(d)) {
    Json counts = Json::array();
    for (std::size_t r = 1; r <= n; ++r) {
      auto it = hist.find(static_cast<int>(r));
      counts.push_back(it == hist.end() ? 0 : it->second);
    }
    const CandidateStatement* s = d.find_statement(cid);
    out.push_back({{"candidate", cid.str()}, {"title", s ? s->title : ""}, {"counts", counts}});
  }
  return {{"deliberation", d.header.id.str()}, {"ranks", n}, {"distribution", out}};
}

Json session_json(const ApiSession& s) {
  return {{"id", s.principal.id}, {"role", to_string(s.principal.role)}, {"token", s.token}};
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(Platform& p) : platform(p) { routes(); }

  Platform& platform;
  httplib::Server server;
  std::thread thread;

  Principal auth(const Req& req) const {
    const std::string h = req.get_header_value("Authorization");
    constexpr std::string_view kBearer = "Bearer ";
    if (!h.starts_with(kBearer)) throw Error(ErrorCode::kUnauthorized, "missing bearer token");
    return platform.authenticate(h.substr(kBearer.size()));
  }

  // Runs `fn`, mapping errors to status codes. A stale ranking also carries
  // the current pool so the client can re-rank without another round trip.
  void guard(const Req& req, Res& res, const std::function<void()>& fn,
             std::optional<DeliberationId> pool_of = std::nullopt) {
    (void)req;
    try {
      fn();
    } catch (const Error& e) {
      Json body = error_body(e.code(), e.what());
      if (e.code() == ErrorCode::kConflict && pool_of) {
        try {
          body["current_pool"] = ids_to_json(platform.deliberation(*pool_of)->active_pool());
        } catch (const Error&) {
        }
      }
      send(res, http_status(e.code()), body);
    } catch (const std::exception& e) {
      send(res, 500, error_body(ErrorCode::kCorruption, e.what()));
    }
  }

  using Handler = std::function<void(const Req&, Res&)>;

  Handler wrap(std::function<void(const Req&, Res&)> fn) {
    return [this, fn](const Req& req, Res& res) { guard(req, res, [&] { fn(req, res); }); };
  }

  void routes() {
    auto& s = server;

    s.Get("/healthz", [](const Req&, Res& res) { send(res, 200, {{"status", "ok"}}); });

    s.Post("/users", wrap([this](const Req& req, Res& res) {
      const Json b = body_of(req);
      send(res, 201, session_json(platform.register_user(field<std::string>(b, "name"), b.value("email", ""))));
    }));

    s.Get(R"(/users/([^/]+)/agents)", wrap([this](const Req& req, Res& res) {
      const Principal p = auth(req);
      const UserId user(req.matches[1].str());
      if (!(p.role == Role::kAdmin || (p.role == Role::kUser && p.id == user.str()))) {
        throw Error(ErrorCode::kForbidden, "agents are listed only to their owner");
      }
      Json out = Json::array();
      for (const auto& a : platform.agents_of(user)) out.push_back(to_json(a));
      send(res, 200, out);
    }));

    s.Get(R"(/users/([^/]+)/digest)", wrap([this](const Req& req, Res& res) {
      auto d = platform.digest(auth(req), UserId(req.matches[1].str()));
      send(res, 200, d ? digest_document(*d) : Json(nullptr));
    }));

    s.Get(R"(/users/([^/]+)/actions)", wrap([this](const Req& req, Res& res) {
      const bool unreviewed = req.get_param_value("unreviewed") == "true";
      Json out = Json::array();
      for (const auto& a : platform.actions_for(auth(req), UserId(req.matches[1].str()))) {
        if (!unreviewed || !a.reviewed) out.push_back(to_json(a));
      }
      send(res, 200, out);
    }));

    s.Get(R"(/users/([^/]+)/suggestions)", wrap([this](const Req& req, Res& res) {
      Json out = Json::array();
      for (const auto& x : platform.suggestions_for(auth(req), UserId(req.matches[1].str()))) {
        out.push_back(to_json(x));
      }
      send(res, 200, out);
    }));

    s.Post(R"(/suggestions/([^/]+)/confirm)", wrap([this](const Req& req, Res& res) {
      send(res, 201, to_json(platform.confirm_suggestion(auth(req), req.matches[1].str())));
    }));

    s.Post("/agents", wrap([this](const Req& req, Res& res) {
      const Principal p = auth(req);
      const Json b = body_of(req);
      RegisterAgent r;
      r.name = field<std::string>(b, "name");
      r.hosting = parse_hosting(b.value("hosting", "hosted"));
      r.memory = b.value("memory", "");
      if (b.contains("heartbeat_interval_ms")) r.heartbeat_interval_ms = field<std::int64_t>(b, "heartbeat_interval_ms");
      auto [agent, session] = platform.register_agent(p, r);
      send(res, 201, {{"agent", to_json(agent)}, {"token", session.token}});
    }));

    s.Get(R"(/agents/([^/]+))", wrap([this](const Req& req, Res& res) {
      send(res, 200, to_json(platform.agent(auth(req), AgentId(req.matches[1].str()))));
    }));

    s.Put(R"(/agents/([^/]+)/memory)", wrap([this](const Req& req, Res& res) {
      const Json b = body_of(req);
      send(res, 200,
           to_json(platform.put_memory(auth(req), AgentId(req.matches[1].str()), field<std::string>(b, "memory"))));
    }));

    s.Post(R"(/agents/([^/]+)/chat)", wrap([this](const Req& req, Res& res) {
      const Json b = body_of(req);
      ChatReply r = platform.chat(auth(req), AgentId(req.matches[1].str()), field<std::string>(b, "message"));
      send(res, 200, {{"reply", r.reply}, {"memory_delta", r.memory_delta}, {"agent", to_json(r.agent)}});
    }));

    s.Get(R"(/agents/([^/]+)/heartbeats)", wrap([this](const Req& req, Res& res) {
      Json out = Json::array();
      for (const auto& r : platform.heartbeat_reports(auth(req), AgentId(req.matches[1].str()))) {
        out.push_back(to_json(r));
      }
      send(res, 200, out);
    }));

    s.Put(R"(/agents/([^/]+)/heartbeat)", wrap([this](const Req& req, Res& res) {
      const Json b = body_of(req);
      send(res, 200, to_json(platform.set_heartbeat_interval(auth(req), AgentId(req.matches[1].str()),
                                                             field<std::int64_t>(b, "heartbeat_interval_ms"))));
    }));

    s.Get(R"(/agents/([^/]+)/participations)", wrap([this](const Req& req, Res& res) {
      Json out = Json::array();
      for (const auto& x : platform.participations(auth(req), AgentId(req.matches[1].str()))) {
        out.push_back(to_json(x));
      }
      send(res, 200, out);
    }));

    // Target of digest deep links.
    s.Get(R"(/deliberations/([^/]+)/actions/(\d+)/([a-z_]+))", wrap([this](const Req& req, Res& res) {
      const auto a = platform.action(auth(req), DeliberationId(req.matches[1].str()),
                                     std::stoull(req.matches[2].str()), parse_action_kind(req.matches[3].str()));
      Json j = to_json(a);
      j["memory_snapshot"] = a.memory_snapshot;
      send(res, 200, j);
    }));

    s.Post("/deliberations", wrap([this](const Req& req, Res& res) {
      const Json b = body_of(req);
      CreateDeliberation c;
      c.question = field<std::string>(b, "question");
      c.consensus = consensus_of(b);
      c.suggested = b.value("suggested", false);
      CreateResult r = platform.create_deliberation(auth(req), c);
      if (r.header) send(res, 201, to_json(*r.header));
      else send(res, 202, {{"suggestion", to_json(*r.suggestion)}});
    }));

    s.Get("/deliberations", wrap([this](const Req& req, Res& res) {
      auth(req);
      std::optional<DeliberationStatus> status;
      if (req.has_param("status")) status = parse_deliberation_status(req.get_param_value("status"));
      Json out = Json::array();
      for (const auto& d : platform.list_deliberations(status)) {
        Json v = consensus_view(*d);
        v["question"] = d->header.question;
        out.push_back(std::move(v));
      }
      send(res, 200, out);
    }));

    s.Get(R"(/deliberations/([^/]+))", wrap([this](const Req& req, Res& res) {
      auth(req);
      send(res, 200, to_json(*platform.deliberation(DeliberationId(req.matches[1].str()))));
    }));

    s.Get(R"(/deliberations/([^/]+)/consensus)", wrap([this](const Req& req, Res& res) {
      auth(req);
      send(res, 200, consensus_view(*platform.deliberation(DeliberationId(req.matches[1].str()))));
    }));

    s.Get(R"(/deliberations/([^/]+)/ranking-distribution)", wrap([this](const Req& req, Res& res) {
      auth(req);
      send(res, 200, distribution_view(*platform.deliberation(DeliberationId(req.matches[1].str()))));
    }));

    s.Get(R"(/deliberations/([^/]+)/events)", wrap([this](const Req& req, Res& res) {
      auth(req);
      std::uint64_t since = 0;
      if (req.has_param("since")) {
        try {
          since = std::stoull(req.get_param_value("since"));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kValidation, "since must be a non-negative integer");
        }
      }
      Json out = Json::array();
      for (const auto& e : platform.events_since(DeliberationId(req.matches[1].str()), since)) {
        out.push_back(to_json(e));
      }
      send(res, 200, out);
    }));

    s.Post(R"(/deliberations/([^/]+)/close)", wrap([this](const Req& req, Res& res) {
      const DeliberationId id(req.matches[1].str());
      platform.close_deliberation(auth(req), id);
      send(res, 200, consensus_view(*platform.deliberation(id)));
    }));

    s.Post(R"(/deliberations/([^/]+)/join)", [this](const Req& req, Res& res) {
      const DeliberationId id(req.matches[1].str());
      guard(req, res, [&] {
        const Principal p = auth(req);
        const Json b = body_of(req);
        JoinRequest j;
        j.opinion = field<std::string>(b, "opinion");
        if (b.contains("produced_via")) j.produced_via = parse_produced_via(field<std::string>(b, "produced_via"));
        if (b.contains("statement") && !b["statement"].is_null()) {
          const Json& st = b["statement"];
          j.statement = StatementDraft{CandidateId(st.value("id", "")), field<std::string>(st, "title"),
                                       field<std::string>(st, "body")};
        }
        if (b.contains("ranking") && !b["ranking"].is_null()) j.ranking = order_of(b, "ranking");
        const AgentId agent(b.value("agent", p.id));
        send(res, 201, to_json(platform.join(p, id, agent, std::move(j))));
      }, id);
    });

    s.Post(R"(/deliberations/([^/]+)/statements)", [this](const Req& req, Res& res) {
      const DeliberationId id(req.matches[1].str());
      guard(req, res, [&] {
        const Principal p = auth(req);
        const Json b = body_of(req);
        StatementDraft d{CandidateId(b.value("id", "")), field<std::string>(b, "title"), field<std::string>(b, "body")};
        const AgentId agent(b.value("agent", p.id));
        send(res, 201, to_json(platform.propose_statement(p, id, agent, std::move(d), order_of(b, "ranking"))));
      }, id);
    });

    s.Delete(R"(/deliberations/([^/]+)/statements/([^/]+))", wrap([this](const Req& req, Res& res) {
      send(res, 200, to_json(platform.withdraw_statement(auth(req), DeliberationId(req.matches[1].str()),
                                                         CandidateId(req.matches[2].str()))));
    }));

    s.Put(R"(/deliberations/([^/]+)/rankings/([^/]+))", [this](const Req& req, Res& res) {
      const DeliberationId id(req.matches[1].str());
      guard(req, res, [&] {
        const Json b = body_of(req);
        send(res, 200, to_json(platform.put_ranking(auth(req), id, AgentId(req.matches[2].str()),
                                                    order_of(b, "order"), optional_kind(b))));
      }, id);
    });

    s.Put(R"(/deliberations/([^/]+)/opinions/([^/]+))", wrap([this](const Req& req, Res& res) {
      const Json b = body_of(req);
      const auto kind = optional_kind(b);
      if (!kind) throw Error(ErrorCode::kValidation, "missing field 'kind'");
      send(res, 200, to_json(platform.revise_opinion(auth(req), DeliberationId(req.matches[1].str()),
                                                     AgentId(req.matches[2].str()), field<std::string>(b, "text"),
                                                     *kind)));
    }));

    s.Post(R"(/deliberations/([^/]+)/opinions/([^/]+))", wrap([this](const Req& req, Res& res) {
      const Json b = body_of(req);
      send(res, 201, to_json(platform.submit_opinion(auth(req), DeliberationId(req.matches[1].str()),
                                                     AgentId(req.matches[2].str()), field<std::string>(b, "text"))));
    }));

    s.Delete(R"(/deliberations/([^/]+)/opinions/([^/]+))", wrap([this](const Req& req, Res& res) {
      std::optional<RevisionKind> kind;
      if (req.has_param("kind")) kind = parse_revision_kind(req.get_param_value("kind"));
      send(res, 200, to_json(platform.withdraw_opinion(auth(req), DeliberationId(req.matches[1].str()),
                                                       AgentId(req.matches[2].str()), kind)));
    }));

    s.Post(R"(/actions/(.+)/reviewed)", wrap([this](const Req& req, Res& res) {
      platform.mark_reviewed(auth(req), req.matches[1].str());
      send(res, 200, {{"id", req.matches[1].str()}, {"reviewed", true}});
    }));

    s.Get("/telemetry", wrap([this](const Req& req, Res& res) {
      if (auth(req).role != Role::kAdmin) throw Error(ErrorCode::kForbidden, "admin only");
      send(res, 200, platform.telemetry().to_json());
    }));

    s.Post("/admin/tick", wrap([this](const Req& req, Res& res) {
      if (auth(req).role != Role::kAdmin) throw Error(ErrorCode::kForbidden, "admin only");
      const Json b = body_of(req);
      Json reports = Json::array();
      if (b.value("heartbeats", true)) {
        for (const auto& r : platform.tick_heartbeats()) reports.push_back(to_json(r));
      }
      std::size_t digests = b.value("digests", false) ? platform.tick_digests() : 0;
      send(res, 200, {{"heartbeats", reports}, {"digests_sent", digests}});
    }));
  }
};

HttpServer::HttpServer(Platform& platform) : impl_(std::make_unique<Impl>(platform)) {}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::start_background(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw Error(ErrorCode::kTransport, "cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace agora
