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

#include "agora/platform.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "agora/text.hpp"

namespace agora {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMaxReports = 20;
constexpr std::size_t kMaxTranscript = 20;

Timestamp system_now() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

bool truthy(const std::string& v) {
  const std::string l = text::lower(v);
  return l == "1" || l == "true" || l == "yes" || l == "on";
}

std::uint64_t id_suffix(const std::string& id, std::string_view prefix) {
  if (!id.starts_with(prefix)) return 0;
  try {
    return std::stoull(id.substr(prefix.size()));
  } catch (const std::exception&) {
    return 0;
  }
}

Json optional_ts(const std::optional<Timestamp>& t) { return t ? Json(*t) : Json(nullptr); }

// Splits "<deliberation>:<seq>:<kind>"; deliberation ids may contain ':'.
std::tuple<DeliberationId, std::uint64_t, ActionKind> parse_action_id(const std::string& id) {
  const auto k = id.rfind(':');
  const auto s = k == std::string::npos || k == 0 ? std::string::npos : id.rfind(':', k - 1);
  if (k == std::string::npos || s == std::string::npos || s == 0) {
    throw Error(ErrorCode::kValidation, "malformed action id: " + id);
  }
  std::uint64_t seq = 0;
  try {
    seq = std::stoull(id.substr(s + 1, k - s - 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kValidation, "malformed action id: " + id);
  }
  return {DeliberationId(id.substr(0, s)), seq, parse_action_kind(id.substr(k + 1))};
}

}  // namespace

// ---- codecs

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kUser: return "user";
    case Role::kHostedAgent: return "hosted_agent";
    case Role::kExternalAgent: return "external_agent";
    case Role::kAdmin: return "admin";
  }
  return "user";
}

Role parse_role(std::string_view s) {
  for (auto r : {Role::kUser, Role::kHostedAgent, Role::kExternalAgent, Role::kAdmin}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::kValidation, "unknown role: " + std::string(s));
}

Json to_json(const AgentRecord& a) {
  return {{"id", a.id.str()},
          {"owner", a.owner.str()},
          {"name", a.name},
          {"memory", a.memory},
          {"heartbeat_interval_ms", a.heartbeat_interval_ms},
          {"hosting", to_string(a.hosting)},
          {"last_heartbeat", optional_ts(a.last_heartbeat)},
          {"memory_revision", a.memory_revision},
          {"memory_revision_at_heartbeat", a.memory_revision_at_heartbeat}};
}

AgentRecord agent_from_json(const Json& j) {
  AgentRecord a;
  a.id = AgentId(j.at("id").get<std::string>());
  a.owner = UserId(j.at("owner").get<std::string>());
  a.name = j.value("name", "");
  a.memory = j.value("memory", "");
  a.heartbeat_interval_ms = j.value("heartbeat_interval_ms", a.heartbeat_interval_ms);
  a.hosting = parse_hosting(j.value("hosting", "hosted"));
  if (j.contains("last_heartbeat") && !j["last_heartbeat"].is_null()) {
    a.last_heartbeat = j["last_heartbeat"].get<Timestamp>();
  }
  a.memory_revision = j.value("memory_revision", std::uint64_t{0});
  a.memory_revision_at_heartbeat = j.value("memory_revision_at_heartbeat", std::uint64_t{0});
  return a;
}

Json to_json(const HeartbeatReport& r) {
  auto ids = [](const std::vector<DeliberationId>& v) {
    Json out = Json::array();
    for (const auto& id : v) out.push_back(id.str());
    return out;
  };
  Json skipped = Json::array();
  for (const auto& [id, reason] : r.skipped) {
    skipped.push_back({{"deliberation", id.str()}, {"reason", to_string(reason)}});
  }
  return {{"agent", r.agent.str()},       {"fired_at", r.fired_at},
          {"joined", ids(r.joined)},      {"skipped", skipped},
          {"reranked", ids(r.reranked)},  {"memory_updated", r.memory_updated}};
}

Json to_json(const ReviewableAction& a) {
  return {{"id", a.id},
          {"agent", a.agent.str()},
          {"deliberation", a.deliberation.str()},
          {"seq", a.seq},
          {"kind", to_string(a.kind)},
          {"content", a.content},
          {"at", a.at},
          {"reviewed", a.reviewed},
          {"risk", a.risk ? Json(*a.risk) : Json(nullptr)},
          {"deep_link", deep_link(a)}};
}

Json to_json(const Suggestion& s) {
  return {{"id", s.id},
          {"agent", s.agent.str()},
          {"owner", s.owner.str()},
          {"question", s.question},
          {"aggregator", to_string(s.consensus.aggregator)},
          {"link_strength", to_string(s.consensus.link)},
          {"pseudocount", s.consensus.pseudocount},
          {"confirmed", s.confirmed},
          {"deliberation", s.deliberation ? Json(s.deliberation->str()) : Json(nullptr)}};
}

Json to_json(const Participation& p) {
  return {{"deliberation", p.deliberation.str()},
          {"question", p.question},
          {"status", to_string(p.status)},
          {"opinion", p.opinion ? Json(*p.opinion) : Json(nullptr)},
          {"contributed_at", p.contributed_at},
          {"ranking", ids_to_json(p.ranking)},
          {"potentially_affected", p.potentially_affected}};
}

namespace {

Suggestion suggestion_from_json(const Json& j) {
  Suggestion s;
  s.id = j.at("id").get<std::string>();
  s.agent = AgentId(j.at("agent").get<std::string>());
  s.owner = UserId(j.at("owner").get<std::string>());
  s.question = j.at("question").get<std::string>();
  s.consensus.aggregator = parse_aggregator(j.value("aggregator", "schulze"));
  s.consensus.link = parse_link_strength(j.value("link_strength", "winning_votes"));
  s.consensus.pseudocount = j.value("pseudocount", 0.5);
  s.confirmed = j.value("confirmed", false);
  if (j.contains("deliberation") && j["deliberation"].is_string()) {
    s.deliberation = DeliberationId(j["deliberation"].get<std::string>());
  }
  return s;
}

}  // namespace

// ---- config

PlatformConfig PlatformConfig::from_json(const Json& j) {
  PlatformConfig c;
  c.data_dir = j.value("data_dir", c.data_dir);
  c.bind_address = j.value("bind_address", c.bind_address);
  c.port = j.value("port", c.port);
  c.mock_mode = j.value("mock_mode", c.mock_mode);
  c.heartbeat_tick_ms = j.value("heartbeat_tick_ms", c.heartbeat_tick_ms);
  c.default_heartbeat_interval_ms = j.value("default_heartbeat_interval_ms", c.default_heartbeat_interval_ms);
  c.digest_cadence_ms = j.value("digest_cadence_ms", c.digest_cadence_ms);
  c.cascade_window_ms = j.value("cascade_window_ms", c.cascade_window_ms);
  c.min_memory_chars = j.value("min_memory_chars", c.min_memory_chars);
  c.scheduler_seed = j.value("scheduler_seed", c.scheduler_seed);
  c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
  c.admin_token = j.value("admin_token", c.admin_token);
  if (j.contains("llm")) {
    const Json& l = j["llm"];
    c.llm.endpoint = l.value("endpoint", c.llm.endpoint);
    c.llm.model = l.value("model", c.llm.model);
    c.llm.timeout = std::chrono::milliseconds(l.value("timeout_ms", c.llm.timeout.count()));
    c.llm.retries = l.value("retries", c.llm.retries);
  }
  return c;
}

PlatformConfig PlatformConfig::load(const std::string& path) {
  Json j = Json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kNotFound, "cannot open config " + path);
    j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kValidation, "config is not a JSON object");
  }
  PlatformConfig c = from_json(j);
  const ChatClientConfig llm_env = ChatClientConfig::from_env();
  if (!llm_env.endpoint.empty()) c.llm.endpoint = llm_env.endpoint;
  if (!llm_env.api_key.empty()) c.llm.api_key = llm_env.api_key;
  if (!llm_env.model.empty()) c.llm.model = llm_env.model;
  if (env("AGORA_LLM_TIMEOUT_MS")) c.llm.timeout = llm_env.timeout;
  if (env("AGORA_LLM_RETRIES")) c.llm.retries = llm_env.retries;
  if (auto v = env("AGORA_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("AGORA_BIND")) c.bind_address = *v;
  if (auto v = env("AGORA_PORT")) c.port = std::stoi(*v);
  if (auto v = env("AGORA_MOCK")) c.mock_mode = truthy(*v);
  if (auto v = env("AGORA_ADMIN_TOKEN")) c.admin_token = *v;
  return c;
}

// ---- internals

struct Platform::Entry {
  DeliberationHeader header;
  std::unique_ptr<DeliberationMachine> machine;
  fs::path log_path;
};

struct Platform::AgentSlot {
  AgentSlot(AgentRecord r) : id(r.id), owner(r.owner), hosting(r.hosting), record(std::move(r)) {}

  const AgentId id;
  const UserId owner;
  const Hosting hosting;
  std::mutex mu;  // guards everything below
  AgentRecord record;
  std::vector<std::pair<Timestamp, std::string>> memory_history;
  std::deque<ChatTurn> transcript;
  std::deque<HeartbeatReport> reports;
};

Platform::Platform(PlatformConfig config, Clock clock, std::unique_ptr<Generator> generator,
                   std::unique_ptr<RiskScorer> scorer)
    : config_(std::move(config)),
      clock_(clock ? std::move(clock) : Clock(system_now)),
      generator_(std::move(generator)),
      scorer_(std::move(scorer)),
      scheduler_(config_.scheduler_seed),
      telemetry_(config_.cascade_window_ms) {
  if (!config_.mock_mode && (!generator_ || !scorer_)) {
    llm_ = std::make_unique<ChatCompletionClient>(config_.llm, PromptLibrary::defaults());
  }
  if (!generator_) {
    if (config_.mock_mode) generator_ = std::make_unique<MockGenerator>();
    else generator_ = std::make_unique<LlmGenerator>(*llm_);
  }
  if (!scorer_) {
    if (config_.mock_mode) scorer_ = std::make_unique<JaccardRiskScorer>();
    else scorer_ = std::make_unique<LlmRiskScorer>(*llm_);
  }
  mailer_ = std::make_unique<DigestMailer>(
      "Does this sound like you?", DigestMailer::default_template(), [this](const EmailMessage& m) {
        std::lock_guard lock(outbox_mu_);
        outbox_.push_back(m);
      });
  if (!config_.admin_token.empty()) tokens_[config_.admin_token] = {Role::kAdmin, "admin"};
  if (!config_.data_dir.empty()) {
    fs::create_directories(fs::path(config_.data_dir) / "deliberations");
    load();
  }
}

Platform::~Platform() { stop_background(); }

std::string Platform::mint_token() {
  static thread_local std::mt19937_64 rng(std::random_device{}());
  return text::hex64(rng()) + text::hex64(rng());
}

std::string Platform::next_id(const char* prefix, std::uint64_t& counter) {
  return std::string(prefix) + std::to_string(++counter);
}

std::shared_ptr<Platform::Entry> Platform::entry(const DeliberationId& id) const {
  std::shared_lock lock(mu_);
  auto it = deliberations_.find(id);
  if (it == deliberations_.end()) throw Error(ErrorCode::kNotFound, "no deliberation " + id.str());
  return it->second;
}

std::shared_ptr<Platform::AgentSlot> Platform::slot(const AgentId& id) const {
  std::shared_lock lock(mu_);
  auto it = agents_.find(id);
  if (it == agents_.end()) throw Error(ErrorCode::kNotFound, "no agent " + id.str());
  return it->second;
}

void Platform::persist_registry(const Json& record) {
  if (config_.data_dir.empty()) return;
  std::lock_guard lock(registry_file_mu_);
  std::ofstream out(fs::path(config_.data_dir) / "registry.ndjson", std::ios::app);
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kTransport, "cannot write registry");
}

void Platform::store_agent(const AgentRecord& a) {
  Json j = to_json(a);
  j["record"] = "agent";
  j["at"] = now();
  persist_registry(j);
}

void Platform::attach(const std::shared_ptr<Entry>& e, bool fresh) {
  if (config_.data_dir.empty()) return;
  e->log_path = fs::path(config_.data_dir) / "deliberations" / (e->header.id.str() + ".ndjson");
  if (fresh) {
    std::ofstream out(e->log_path, std::ios::trunc);
    write_header_line(out, e->header);
    out.flush();
    if (!out) throw Error(ErrorCode::kTransport, "cannot create " + e->log_path.string());
  }
  const fs::path log_path = e->log_path;
  const std::uint64_t every = config_.snapshot_every;
  // Runs before the event is committed: a failed write rejects the event.
  e->machine->add_observer([log_path, every](const Deliberation& state, const DomainEvent& event) {
    std::ofstream out(log_path, std::ios::app);
    write_event_line(out, event);
    out.flush();
    if (!out) throw Error(ErrorCode::kTransport, "cannot append to " + log_path.string());
    if (every > 0 && event.seq % every == 0) {
      fs::path snap = log_path;
      snap.replace_extension(".snapshot.json");
      fs::path tmp = snap;
      tmp += ".tmp";
      {
        std::ofstream s(tmp, std::ios::trunc);
        s << Json{{"seq", event.seq}, {"state", to_json(state)}}.dump() << '\n';
      }
      std::error_code ec;
      fs::rename(tmp, snap, ec);
    }
  });
}

void Platform::load() {
  const fs::path dir(config_.data_dir);
  const fs::path registry = dir / "registry.ndjson";
  std::vector<std::pair<UserId, Timestamp>> memory_edits;
  if (fs::exists(registry)) {
    std::ifstream in(registry);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (text::trim(line).empty()) continue;
      Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::kCorruption, "registry line " + std::to_string(n) + " is not JSON");
      }
      const std::string kind = j.value("record", "");
      if (kind == "user") {
        UserRecord u{UserId(j.at("id").get<std::string>()), j.value("name", ""), j.value("email", "")};
        user_counter_ = std::max(user_counter_, id_suffix(u.id.str(), "user-"));
        users_[u.id] = u;
      } else if (kind == "token") {
        tokens_[j.at("token").get<std::string>()] = {parse_role(j.at("role").get<std::string>()),
                                                      j.at("id").get<std::string>()};
      } else if (kind == "agent") {
        AgentRecord a = agent_from_json(j);
        const Timestamp at = j.value("at", Timestamp{0});
        agent_counter_ = std::max(agent_counter_, id_suffix(a.id.str(), "agent-"));
        auto it = agents_.find(a.id);
        if (it == agents_.end()) {
          auto s = std::make_shared<AgentSlot>(a);
          s->memory_history.emplace_back(at, a.memory);
          agents_.emplace(a.id, s);
        } else {
          auto& s = *it->second;
          if (s.record.memory != a.memory) s.memory_history.emplace_back(at, a.memory);
          s.record = a;
        }
      } else if (kind == "memory_edit") {
        memory_edits.emplace_back(UserId(j.at("user").get<std::string>()), j.at("at").get<Timestamp>());
      } else if (kind == "suggestion") {
        Suggestion s = suggestion_from_json(j);
        suggestion_counter_ = std::max(suggestion_counter_, id_suffix(s.id, "suggestion-"));
        suggestions_[s.id] = s;
      }
    }
  }

  std::vector<fs::path> logs;
  for (const auto& f : fs::directory_iterator(dir / "deliberations")) {
    if (f.path().extension() == ".ndjson") logs.push_back(f.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    std::ifstream in(path);
    EventLogFile log = read_log(in);
    auto e = std::make_shared<Entry>();
    e->header = log.header;
    e->machine = std::make_unique<DeliberationMachine>(log.header, log.events);
    delib_counter_ = std::max(delib_counter_, id_suffix(log.header.id.str(), "d-"));
    attach(e, false);
    for (const auto& ev : log.events) {
      if (!is_revision_event(ev.kind)) continue;
      auto a = agents_.find(AgentId(ev.actor));
      telemetry_.record_revision_outcome(log.header.id, ev,
                                         a == agents_.end() ? UserId(ev.actor) : a->second->owner);
    }
    deliberations_.emplace(log.header.id, std::move(e));
  }
  for (const auto& [user, at] : memory_edits) telemetry_.record_memory_edit(user, at);
}

// ---- identity

ApiSession Platform::register_user(const std::string& name, const std::string& email) {
  if (text::trim(name).empty()) throw Error(ErrorCode::kValidation, "name is required");
  std::unique_lock lock(mu_);
  UserRecord u{UserId(next_id("user-", user_counter_)), name, email};
  ApiSession s{{Role::kUser, u.id.str()}, mint_token()};
  persist_registry({{"record", "user"}, {"id", u.id.str()}, {"name", name}, {"email", email}});
  persist_registry({{"record", "token"}, {"token", s.token}, {"role", "user"}, {"id", u.id.str()}});
  users_[u.id] = u;
  tokens_[s.token] = s.principal;
  return s;
}

std::pair<AgentRecord, ApiSession> Platform::register_agent(const Principal& owner, const RegisterAgent& req) {
  if (owner.role != Role::kUser) throw Error(ErrorCode::kForbidden, "only users register agents");
  if (text::trim(req.name).empty()) throw Error(ErrorCode::kValidation, "name is required");
  if (req.heartbeat_interval_ms && *req.heartbeat_interval_ms <= 0) {
    throw Error(ErrorCode::kValidation, "heartbeat interval must be positive");
  }
  std::unique_lock lock(mu_);
  if (!users_.contains(UserId(owner.id))) throw Error(ErrorCode::kNotFound, "no user " + owner.id);
  AgentRecord a;
  a.id = AgentId(next_id("agent-", agent_counter_));
  a.owner = UserId(owner.id);
  a.name = req.name;
  a.hosting = req.hosting;
  if (req.hosting == Hosting::kHosted) a.memory = req.memory;
  a.heartbeat_interval_ms = req.heartbeat_interval_ms.value_or(config_.default_heartbeat_interval_ms);
  const Role role = req.hosting == Hosting::kHosted ? Role::kHostedAgent : Role::kExternalAgent;
  ApiSession s{{role, a.id.str()}, mint_token()};
  store_agent(a);
  persist_registry({{"record", "token"}, {"token", s.token}, {"role", to_string(role)}, {"id", a.id.str()}});
  auto slot = std::make_shared<AgentSlot>(a);
  slot->memory_history.emplace_back(now(), a.memory);
  agents_.emplace(a.id, slot);
  tokens_[s.token] = s.principal;
  return {a, s};
}

Principal Platform::authenticate(const std::string& token) const {
  std::shared_lock lock(mu_);
  auto it = tokens_.find(token);
  if (token.empty() || it == tokens_.end()) throw Error(ErrorCode::kUnauthorized, "unknown token");
  return it->second;
}

void Platform::require_owner(const Principal& p, const AgentRecord& a) const {
  if (p.role == Role::kAdmin) return;
  if (p.role == Role::kUser && p.id == a.owner.str()) return;
  throw Error(ErrorCode::kForbidden, "only the owner of " + a.id.str() + " may do this");
}

void Platform::require_self(const Principal& p, const AgentId& agent) const {
  if (p.role == Role::kAdmin) return;
  if ((p.role == Role::kHostedAgent || p.role == Role::kExternalAgent) && p.id == agent.str()) return;
  throw Error(ErrorCode::kForbidden, "agents may only act as themselves");
}

AgentRecord Platform::agent_unlocked(const AgentId& id) const {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  return s->record;
}

// ---- deliberations

DeliberationHeader Platform::open_new(const std::string& creator, const std::string& question,
                                      const ConsensusConfig& consensus) {
  if (text::trim(question).empty()) throw Error(ErrorCode::kValidation, "question is required");
  if (!(consensus.pseudocount >= 0)) throw Error(ErrorCode::kValidation, "pseudocount must be >= 0");
  std::unique_lock lock(mu_);
  auto e = std::make_shared<Entry>();
  e->header.id = DeliberationId(next_id("d-", delib_counter_));
  e->header.question = question;
  e->header.creator = creator;
  e->header.created_at = now();
  e->header.consensus = consensus;
  e->machine = std::make_unique<DeliberationMachine>(e->header);
  attach(e, true);
  deliberations_.emplace(e->header.id, e);
  return e->header;
}

CreateResult Platform::create_deliberation(const Principal& p, const CreateDeliberation& req) {
  CreateResult out;
  if (req.suggested) {
    if (p.role != Role::kHostedAgent && p.role != Role::kExternalAgent) {
      throw Error(ErrorCode::kValidation, "only agents suggest deliberations");
    }
    if (text::trim(req.question).empty()) throw Error(ErrorCode::kValidation, "question is required");
    auto s = slot(AgentId(p.id));
    std::unique_lock lock(mu_);
    Suggestion sug{next_id("suggestion-", suggestion_counter_), s->id, s->owner, req.question,
                   req.consensus, false, std::nullopt};
    Json j = to_json(sug);
    j["record"] = "suggestion";
    persist_registry(j);
    suggestions_[sug.id] = sug;
    out.suggestion = sug;
    return out;
  }
  if (p.role != Role::kUser && p.role != Role::kAdmin) {
    throw Error(ErrorCode::kForbidden, "agents must suggest deliberations for owner confirmation");
  }
  out.header = open_new(p.id, req.question, req.consensus);
  return out;
}

DeliberationHeader Platform::confirm_suggestion(const Principal& p, const std::string& suggestion_id) {
  Suggestion sug;
  {
    std::shared_lock lock(mu_);
    auto it = suggestions_.find(suggestion_id);
    if (it == suggestions_.end()) throw Error(ErrorCode::kNotFound, "no suggestion " + suggestion_id);
    sug = it->second;
  }
  if (!(p.role == Role::kAdmin || (p.role == Role::kUser && p.id == sug.owner.str()))) {
    throw Error(ErrorCode::kForbidden, "only the agent's owner confirms its suggestions");
  }
  if (sug.confirmed) throw Error(ErrorCode::kConflict, "suggestion already confirmed");
  DeliberationHeader h = open_new(p.id, sug.question, sug.consensus);
  std::unique_lock lock(mu_);
  auto& stored = suggestions_[suggestion_id];
  stored.confirmed = true;
  stored.deliberation = h.id;
  Json j = to_json(stored);
  j["record"] = "suggestion";
  persist_registry(j);
  return h;
}

std::vector<Suggestion> Platform::suggestions_for(const Principal& p, const UserId& user) const {
  if (!(p.role == Role::kAdmin || (p.role == Role::kUser && p.id == user.str()))) {
    throw Error(ErrorCode::kForbidden, "suggestions are private to their owner");
  }
  std::shared_lock lock(mu_);
  std::vector<Suggestion> out;
  for (const auto& [id, s] : suggestions_) {
    if (s.owner == user) out.push_back(s);
  }
  return out;
}

void Platform::close_deliberation(const Principal& p, const DeliberationId& id) {
  auto e = entry(id);
  if (p.role != Role::kAdmin && p.id != e->header.creator) {
    throw Error(ErrorCode::kForbidden, "only the creator closes a deliberation");
  }
  e->machine->execute([&](const Deliberation& d) { return agora::close_deliberation(d, p.id, now()); });
}

std::vector<std::shared_ptr<const Deliberation>> Platform::list_deliberations(
    std::optional<DeliberationStatus> status) const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, e] : deliberations_) entries.push_back(e);
  }
  std::vector<std::shared_ptr<const Deliberation>> out;
  for (const auto& e : entries) {
    auto snap = e->machine->snapshot();
    if (!status || snap->status == *status) out.push_back(std::move(snap));
  }
  return out;
}

std::shared_ptr<const Deliberation> Platform::deliberation(const DeliberationId& id) const {
  return entry(id)->machine->snapshot();
}

DomainEvent Platform::join(const Principal& p, const DeliberationId& id, const AgentId& agent,
                           JoinRequest req) {
  require_self(p, agent);
  auto s = slot(agent);
  auto e = entry(id);
  req.produced_via = s->hosting == Hosting::kExternal ? ProducedVia::kExternal
                     : req.produced_via == ProducedVia::kExternal ? ProducedVia::kAutonomous
                                                                  : req.produced_via;
  return e->machine->execute([&](const Deliberation& d) {
    if (req.statement && req.statement->id.empty()) {
      for (int n = 1;; ++n) {
        CandidateId cid{agent.str() + ":" + std::to_string(n)};
        if (d.find_statement(cid) == nullptr) {
          req.statement->id = cid;
          break;
        }
      }
    }
    return agora::join(d, agent, req, now());
  });
}

DomainEvent Platform::propose_statement(const Principal& p, const DeliberationId& id, const AgentId& agent,
                                        StatementDraft draft, std::vector<CandidateId> author_ranking) {
  require_self(p, agent);
  slot(agent);
  return entry(id)->machine->execute([&](const Deliberation& d) {
    if (draft.id.empty()) {
      for (int n = 1;; ++n) {
        CandidateId cid{agent.str() + ":" + std::to_string(n)};
        if (d.find_statement(cid) == nullptr) {
          draft.id = cid;
          break;
        }
      }
    }
    return agora::propose_statement(d, agent, draft, author_ranking, now());
  });
}

DomainEvent Platform::withdraw_statement(const Principal& p, const DeliberationId& id, const CandidateId& cid) {
  auto e = entry(id);
  return e->machine->execute([&](const Deliberation& d) {
    const CandidateStatement* st = d.find_statement(cid);
    if (st == nullptr) throw Error(ErrorCode::kNotFound, "no statement " + cid.str());
    if (p.role == Role::kUser) {
      require_owner(p, agent_unlocked(st->author));
    } else {
      require_self(p, st->author);
    }
    return agora::withdraw_statement(d, st->author, cid, now());
  });
}

void Platform::after_revision(const DeliberationId& id, const DomainEvent& e) {
  if (!is_revision_event(e.kind)) return;
  telemetry_.record_revision_outcome(id, e, slot(AgentId(e.actor))->owner);
}

DomainEvent Platform::put_ranking(const Principal& p, const DeliberationId& id, const AgentId& agent,
                                  std::vector<CandidateId> order, std::optional<RevisionKind> kind) {
  auto s = slot(agent);
  auto e = entry(id);
  DomainEvent ev;
  if (p.role == Role::kUser || p.role == Role::kAdmin) {
    if (p.role == Role::kUser && p.id != s->owner.str()) {
      throw Error(ErrorCode::kForbidden, "users may only revise their own agent's ranking");
    }
    ev = e->machine->execute(
        [&](const Deliberation& d) { return agora::edit_ranking(d, agent, order, kind, now()); });
  } else {
    require_self(p, agent);
    ev = e->machine->execute(
        [&](const Deliberation& d) { return agora::submit_ranking(d, agent, order, now()); });
  }
  after_revision(id, ev);
  return ev;
}

DomainEvent Platform::revise_opinion(const Principal& p, const DeliberationId& id, const AgentId& agent,
                                     std::string text, RevisionKind kind) {
  auto s = slot(agent);
  if (!(p.role == Role::kAdmin || (p.role == Role::kUser && p.id == s->owner.str()))) {
    throw Error(ErrorCode::kForbidden, "only the agent's owner revises its opinion");
  }
  auto ev = entry(id)->machine->execute(
      [&](const Deliberation& d) { return agora::revise_opinion(d, agent, text, kind, now()); });
  after_revision(id, ev);
  return ev;
}

DomainEvent Platform::submit_opinion(const Principal& p, const DeliberationId& id, const AgentId& agent,
                                     std::string text) {
  require_self(p, agent);
  auto s = slot(agent);
  const ProducedVia via = s->hosting == Hosting::kExternal ? ProducedVia::kExternal : ProducedVia::kAutonomous;
  return entry(id)->machine->execute(
      [&](const Deliberation& d) { return agora::submit_opinion(d, agent, text, via, now()); });
}

DomainEvent Platform::withdraw_opinion(const Principal& p, const DeliberationId& id, const AgentId& agent,
                                       std::optional<RevisionKind> kind) {
  auto s = slot(agent);
  if (p.role == Role::kUser) {
    if (p.id != s->owner.str()) throw Error(ErrorCode::kForbidden, "not your agent");
  } else {
    require_self(p, agent);
  }
  auto ev = entry(id)->machine->execute(
      [&](const Deliberation& d) { return agora::withdraw_opinion(d, agent, kind, now()); });
  after_revision(id, ev);
  return ev;
}

std::vector<DomainEvent> Platform::events_since(const DeliberationId& id, std::uint64_t seq) const {
  return entry(id)->machine->events_since(seq);
}

std::uint64_t Platform::log_length(const DeliberationId& id) const { return entry(id)->machine->last_seq(); }

// ---- agents

AgentRecord Platform::agent(const Principal& p, const AgentId& id) const {
  AgentRecord a = agent_unlocked(id);
  if (p.role == Role::kAdmin || p.id == a.id.str() || (p.role == Role::kUser && p.id == a.owner.str())) {
    return a;
  }
  throw Error(ErrorCode::kForbidden, "not your agent");
}

AgentRecord Platform::put_memory(const Principal& p, const AgentId& id, std::string memory) {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  require_owner(p, s->record);
  AgentRecord updated = edit_memory(s->record, std::move(memory));
  if (updated.memory_revision != s->record.memory_revision) {
    const Timestamp at = now();
    store_agent(updated);
    persist_registry({{"record", "memory_edit"}, {"user", s->owner.str()}, {"at", at}});
    s->memory_history.emplace_back(at, updated.memory);
    telemetry_.record_memory_edit(s->owner, at);
  }
  s->record = updated;
  return updated;
}

ChatReply Platform::chat(const Principal& p, const AgentId& id, const std::string& message) {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  require_owner(p, s->record);
  if (s->hosting == Hosting::kExternal) {
    throw Error(ErrorCode::kUnsupported, "external agents are interviewed by their own runtime");
  }
  const std::vector<ChatTurn> transcript(s->transcript.begin(), s->transcript.end());
  InterviewResult r = conduct_interview(s->record, transcript, message, *generator_);
  if (!r.memory_delta.empty()) {
    const Timestamp at = now();
    store_agent(r.agent);
    persist_registry({{"record", "memory_edit"}, {"user", s->owner.str()}, {"at", at}});
    s->memory_history.emplace_back(at, r.agent.memory);
    telemetry_.record_memory_edit(s->owner, at);
  }
  s->record = r.agent;
  s->transcript.push_back({"user", message});
  s->transcript.push_back({"agent", r.reply});
  while (s->transcript.size() > kMaxTranscript) s->transcript.pop_front();
  return {r.reply, r.memory_delta, r.agent};
}

std::vector<HeartbeatReport> Platform::heartbeat_reports(const Principal& p, const AgentId& id) const {
  agent(p, id);
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  return {s->reports.begin(), s->reports.end()};
}

std::vector<AgentRecord> Platform::agents_of(const UserId& owner) const {
  std::vector<std::shared_ptr<AgentSlot>> slots;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, s] : agents_) {
      if (s->owner == owner) slots.push_back(s);
    }
  }
  std::vector<AgentRecord> out;
  for (const auto& s : slots) {
    std::lock_guard lock(s->mu);
    out.push_back(s->record);
  }
  return out;
}

AgentRecord Platform::set_heartbeat_interval(const Principal& p, const AgentId& id, std::int64_t interval_ms) {
  if (interval_ms <= 0) throw Error(ErrorCode::kValidation, "heartbeat interval must be positive");
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  require_owner(p, s->record);
  if (s->hosting == Hosting::kExternal) {
    throw Error(ErrorCode::kUnsupported, "external agents schedule themselves");
  }
  AgentRecord updated = s->record;
  updated.heartbeat_interval_ms = interval_ms;
  store_agent(updated);
  s->record = updated;
  return updated;
}

std::vector<Participation> Platform::participations(const Principal& p, const AgentId& id) const {
  const AgentRecord a = agent(p, id);
  Timestamp last_edit = 0;
  {
    auto s = slot(id);
    std::lock_guard lock(s->mu);
    if (a.memory_revision > 0 && !s->memory_history.empty()) last_edit = s->memory_history.back().first;
  }
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(mu_);
    for (const auto& [did, e] : deliberations_) entries.push_back(e);
  }
  std::vector<Participation> out;
  for (const auto& e : entries) {
    const auto d = e->machine->snapshot();
    if (!d->is_participant(id)) continue;
    Participation part;
    part.deliberation = d->header.id;
    part.question = d->header.question;
    part.status = d->status;
    if (const Opinion* o = d->live_opinion(id)) part.opinion = o->text;
    if (auto r = d->rankings.find(id); r != d->rankings.end()) part.ranking = r->second.order;
    for (const auto& ev : e->machine->events_since(0)) {
      if (ev.actor == id.str()) part.contributed_at = std::max(part.contributed_at, ev.timestamp);
    }
    part.potentially_affected = last_edit > 0 && part.contributed_at < last_edit;
    out.push_back(std::move(part));
  }
  return out;
}

// ---- oversight

std::optional<std::string> Platform::memory_at(const AgentId& agent, Timestamp t) const {
  std::shared_ptr<AgentSlot> s;
  try {
    s = slot(agent);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (s->hosting == Hosting::kExternal) return std::nullopt;
  std::lock_guard lock(s->mu);
  if (s->memory_history.empty()) return s->record.memory;
  const std::string* best = &s->memory_history.front().second;
  for (const auto& [at, memory] : s->memory_history) {
    if (at <= t) best = &memory;
  }
  return *best;
}

std::vector<ReviewableAction> Platform::actions_for(const Principal& p, const UserId& user) {
  if (!(p.role == Role::kAdmin || (p.role == Role::kUser && p.id == user.str()))) {
    throw Error(ErrorCode::kForbidden, "reviews are private to their owner");
  }
  std::set<AgentId> mine;
  for (const auto& a : agents_of(user)) {
    if (a.hosting == Hosting::kHosted) mine.insert(a.id);
  }
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, e] : deliberations_) entries.push_back(e);
  }
  std::vector<ReviewableAction> actions;
  for (const auto& e : entries) {
    const auto events = e->machine->events_since(0);
    auto found = extract_actions(e->header.id, events, [&](const AgentId& a, Timestamp t) {
      return mine.contains(a) ? memory_at(a, t) : std::nullopt;
    });
    actions.insert(actions.end(), found.begin(), found.end());
  }
  {
    std::shared_lock lock(mu_);
    for (auto& a : actions) {
      auto it = risk_cache_.find(a.id);
      if (it != risk_cache_.end()) a.risk = it->second;
    }
  }
  ScoringOutcome scored = score_all(std::move(actions), *scorer_);
  {
    std::unique_lock lock(mu_);
    for (const auto& a : scored.actions) {
      if (a.risk) risk_cache_[a.id] = *a.risk;
    }
  }
  std::stable_sort(scored.actions.begin(), scored.actions.end(), [](const auto& x, const auto& y) {
    if (x.risk.has_value() != y.risk.has_value()) return x.risk.has_value();
    return x.risk.value_or(0) > y.risk.value_or(0);
  });
  return scored.actions;
}

ReviewableAction Platform::action(const Principal& p, const DeliberationId& id, std::uint64_t seq,
                                  ActionKind kind) {
  auto e = entry(id);
  const auto events = seq == 0 ? std::vector<DomainEvent>{} : e->machine->events_since(seq - 1);
  if (events.empty() || events.front().seq != seq) throw Error(ErrorCode::kNotFound, "no such action");
  const DomainEvent& ev = events.front();
  auto s = slot(AgentId(ev.actor));
  if (!(p.role == Role::kAdmin || (p.role == Role::kUser && p.id == s->owner.str()))) {
    throw Error(ErrorCode::kForbidden, "only the agent's owner reviews its actions");
  }
  for (const auto& a : actions_for(p, s->owner)) {
    if (a.deliberation == id && a.seq == seq && a.kind == kind) return a;
  }
  throw Error(ErrorCode::kNotFound, "no such action");
}

std::optional<ReviewDigest> Platform::digest(const Principal& p, const UserId& user) {
  const auto actions = actions_for(p, user);
  const Timestamp t = now();
  return build_digest(user, actions, Period{t - config_.digest_cadence_ms, t + 1});
}

void Platform::mark_reviewed(const Principal& p, const std::string& action_id) {
  const auto [did, seq, kind] = parse_action_id(action_id);
  auto e = entry(did);
  const auto events = e->machine->events_since(seq - 1);
  if (seq == 0 || events.empty() || events.front().seq != seq) {
    throw Error(ErrorCode::kNotFound, "no action " + action_id);
  }
  const DomainEvent& ev = events.front();
  auto owner_slot = slot(AgentId(ev.actor));
  if (!(p.role == Role::kAdmin || (p.role == Role::kUser && p.id == owner_slot->owner.str()))) {
    throw Error(ErrorCode::kForbidden, "only the agent's owner reviews its actions");
  }
  const auto acts = extract_actions(did, std::span(&ev, 1),
                                    [](const AgentId&, Timestamp) { return std::string(); });
  if (std::none_of(acts.begin(), acts.end(), [&](auto& a) { return a.id == action_id; })) {
    throw Error(ErrorCode::kNotFound, "no action " + action_id);
  }
  e->machine->execute([&](const Deliberation& d) { return record_review(d, p.id, action_id, now()); });
}

std::vector<EmailMessage> Platform::outbox() const {
  std::lock_guard lock(outbox_mu_);
  return outbox_;
}

// ---- background

namespace {

class PlatformSink : public ParticipationSink {
 public:
  PlatformSink(Platform& p, Principal self) : platform_(p), self_(std::move(self)) {}
  void join(const DeliberationId& d, const AgentId& agent, const JoinRequest& request) override {
    platform_.join(self_, d, agent, request);
  }
  void rerank(const DeliberationId& d, const AgentId& agent, const std::vector<CandidateId>& order) override {
    platform_.put_ranking(self_, d, agent, order, std::nullopt);
  }

 private:
  Platform& platform_;
  Principal self_;
};

}  // namespace

std::vector<HeartbeatReport> Platform::tick_heartbeats() {
  const Timestamp t = now();
  std::vector<std::shared_ptr<AgentSlot>> slots;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, s] : agents_) {
      if (s->hosting == Hosting::kHosted) slots.push_back(s);
    }
  }
  std::vector<AgentRecord> records;
  for (const auto& s : slots) {
    std::lock_guard lock(s->mu);
    records.push_back(s->record);
  }
  std::vector<AgentId> due;
  {
    std::lock_guard lock(scheduler_mu_);
    due = scheduler_.due(records, t);
  }
  HeartbeatPolicy policy;
  policy.sufficiency = memory_length_policy(config_.min_memory_chars);

  std::vector<HeartbeatReport> reports;
  for (const auto& id : due) {
    auto s = slot(id);
    std::vector<Deliberation> open;
    for (const auto& d : list_deliberations(DeliberationStatus::kOpen)) open.push_back(*d);
    PlatformSink sink(*this, {Role::kHostedAgent, id.str()});
    std::lock_guard lock(s->mu);
    const std::string before = s->record.memory;
    HeartbeatReport r = run_heartbeat(s->record, open, *generator_, policy, sink, t);
    if (s->record.memory != before) s->memory_history.emplace_back(t, s->record.memory);
    store_agent(s->record);
    {
      std::lock_guard sl(scheduler_mu_);
      scheduler_.mark_fired(s->record, t);
    }
    s->reports.push_back(r);
    while (s->reports.size() > kMaxReports) s->reports.pop_front();
    reports.push_back(std::move(r));
  }
  return reports;
}

std::size_t Platform::tick_digests() {
  const Timestamp t = now();
  std::vector<UserRecord> users;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, u] : users_) users.push_back(u);
  }
  std::size_t sent = 0;
  const Principal admin{Role::kAdmin, "system"};
  for (const auto& u : users) {
    {
      std::lock_guard lock(outbox_mu_);
      auto it = last_digest_.find(u.id);
      if (it != last_digest_.end() && t - it->second < config_.digest_cadence_ms) continue;
    }
    auto d = digest(admin, u.id);
    std::lock_guard lock(outbox_mu_);
    last_digest_[u.id] = t;
    if (!d) continue;
    outbox_.push_back(mailer_->render(digest_document(*d), u.email.empty() ? u.id.str() : u.email));
    ++sent;
  }
  return sent;
}

void Platform::start_background() {
  std::lock_guard lock(bg_mu_);
  if (!bg_threads_.empty()) return;
  bg_stop_ = false;
  bg_threads_.emplace_back([this] {
    std::unique_lock lock(bg_mu_);
    while (!bg_stop_) {
      lock.unlock();
      try {
        tick_heartbeats();
        tick_digests();
      } catch (const std::exception& e) {
        std::cerr << "background tick failed: " << e.what() << '\n';
      }
      lock.lock();
      bg_cv_.wait_for(lock, std::chrono::milliseconds(config_.heartbeat_tick_ms), [this] { return bg_stop_; });
    }
  });
}

void Platform::stop_background() {
  {
    std::lock_guard lock(bg_mu_);
    bg_stop_ = true;
  }
  bg_cv_.notify_all();
  for (auto& t : bg_threads_) {
    if (t.joinable()) t.join();
  }
  bg_threads_.clear();
}

}  // namespace agora
