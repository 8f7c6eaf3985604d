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

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "agora/agent_runtime.hpp"
#include "agora/deliberation.hpp"
#include "agora/oversight.hpp"
#include "agora/serialization.hpp"
#include "agora/text_client.hpp"

namespace agora {

enum class Role { kUser, kHostedAgent, kExternalAgent, kAdmin };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

struct Principal {
  Role role = Role::kUser;
  std::string id;

  friend bool operator==(const Principal&, const Principal&) = default;
};

struct ApiSession {
  Principal principal;
  std::string token;
};

struct PlatformConfig {
  std::string data_dir;  // empty: nothing is persisted
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  bool mock_mode = true;
  std::int64_t heartbeat_tick_ms = 60'000;
  std::int64_t default_heartbeat_interval_ms = 24LL * 3600 * 1000;
  std::int64_t digest_cadence_ms = kDefaultDigestCadenceMs;
  std::int64_t cascade_window_ms = 3600 * 1000;
  std::size_t min_memory_chars = 200;
  std::uint64_t scheduler_seed = 1;
  std::uint64_t snapshot_every = 50;  // events between state snapshots; 0 disables
  std::string admin_token;            // empty: no admin session
  ChatClientConfig llm;

  // Unknown keys are ignored. Keys mirror the field names.
  static PlatformConfig from_json(const Json& j);
  // Reads an optional JSON file, then applies AGORA_DATA_DIR, AGORA_BIND,
  // AGORA_PORT, AGORA_MOCK, AGORA_ADMIN_TOKEN and the AGORA_LLM_* variables.
  static PlatformConfig load(const std::string& path);
};

struct UserRecord {
  UserId id;
  std::string name;
  std::string email;
};

struct Suggestion {
  std::string id;
  AgentId agent;
  UserId owner;
  std::string question;
  ConsensusConfig consensus;
  bool confirmed = false;
  std::optional<DeliberationId> deliberation;
};

struct CreateDeliberation {
  std::string question;
  ConsensusConfig consensus;
  bool suggested = false;  // agents suggest; the owner confirms
};

struct CreateResult {
  std::optional<DeliberationHeader> header;  // set unless suggested
  std::optional<Suggestion> suggestion;      // set if suggested
};

struct RegisterAgent {
  std::string name;
  Hosting hosting = Hosting::kHosted;
  std::string memory;
  std::optional<std::int64_t> heartbeat_interval_ms;
};

struct ChatReply {
  std::string reply;
  std::string memory_delta;
  AgentRecord agent;
};

// In-process service: the HTTP layer is a thin codec over this. Every
// mutation takes the acting principal and is authorised here.
// A deliberation the agent takes part in. Contributions made before the
// agent's latest memory edit are flagged: the edit does not reach them.
struct Participation {
  DeliberationId deliberation;
  std::string question;
  DeliberationStatus status = DeliberationStatus::kOpen;
  std::optional<std::string> opinion;  // live opinion text
  Timestamp contributed_at = 0;        // latest of the agent's own events
  std::vector<CandidateId> ranking;
  bool potentially_affected = false;
};

class Platform {
 public:
  using Clock = std::function<Timestamp()>;

  explicit Platform(PlatformConfig config, Clock clock = {},
                    std::unique_ptr<Generator> generator = {},
                    std::unique_ptr<RiskScorer> scorer = {});
  ~Platform();

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  const PlatformConfig& config() const { return config_; }
  Timestamp now() const { return clock_(); }

  // ---- identity
  ApiSession register_user(const std::string& name, const std::string& email = "");
  std::pair<AgentRecord, ApiSession> register_agent(const Principal& owner, const RegisterAgent& req);
  // kUnauthorized for unknown tokens.
  Principal authenticate(const std::string& token) const;

  // ---- deliberations
  CreateResult create_deliberation(const Principal& p, const CreateDeliberation& req);
  DeliberationHeader confirm_suggestion(const Principal& p, const std::string& suggestion_id);
  std::vector<Suggestion> suggestions_for(const Principal& p, const UserId& user) const;
  void close_deliberation(const Principal& p, const DeliberationId& id);
  std::vector<std::shared_ptr<const Deliberation>> list_deliberations(
      std::optional<DeliberationStatus> status) const;
  std::shared_ptr<const Deliberation> deliberation(const DeliberationId& id) const;

  DomainEvent join(const Principal& p, const DeliberationId& id, const AgentId& agent, JoinRequest req);
  DomainEvent propose_statement(const Principal& p, const DeliberationId& id, const AgentId& agent,
                                StatementDraft draft, std::vector<CandidateId> author_ranking);
  DomainEvent withdraw_statement(const Principal& p, const DeliberationId& id, const CandidateId& cid);
  // Agents submit, owners edit (a human revision carrying an optional kind).
  DomainEvent put_ranking(const Principal& p, const DeliberationId& id, const AgentId& agent,
                          std::vector<CandidateId> order, std::optional<RevisionKind> kind);
  // Owner revision of the live opinion.
  DomainEvent revise_opinion(const Principal& p, const DeliberationId& id, const AgentId& agent,
                             std::string text, RevisionKind kind);
  // Agent resubmission after a withdrawal.
  DomainEvent submit_opinion(const Principal& p, const DeliberationId& id, const AgentId& agent,
                             std::string text);
  DomainEvent withdraw_opinion(const Principal& p, const DeliberationId& id, const AgentId& agent,
                               std::optional<RevisionKind> kind);
  std::vector<DomainEvent> events_since(const DeliberationId& id, std::uint64_t seq) const;
  std::uint64_t log_length(const DeliberationId& id) const;

  // ---- agents
  AgentRecord agent(const Principal& p, const AgentId& id) const;
  AgentRecord put_memory(const Principal& p, const AgentId& id, std::string memory);
  ChatReply chat(const Principal& p, const AgentId& id, const std::string& message);
  std::vector<HeartbeatReport> heartbeat_reports(const Principal& p, const AgentId& id) const;
  std::vector<AgentRecord> agents_of(const UserId& owner) const;
  AgentRecord set_heartbeat_interval(const Principal& p, const AgentId& id, std::int64_t interval_ms);
  std::vector<Participation> participations(const Principal& p, const AgentId& id) const;

  // ---- oversight
  std::optional<ReviewDigest> digest(const Principal& p, const UserId& user);
  // Riskiest first; unscored actions last.
  std::vector<ReviewableAction> actions_for(const Principal& p, const UserId& user);
  // Resolves a deep link. kNotFound unless the event yields that action.
  ReviewableAction action(const Principal& p, const DeliberationId& id, std::uint64_t seq, ActionKind kind);
  void mark_reviewed(const Principal& p, const std::string& action_id);
  const RevisionTelemetry& telemetry() const { return telemetry_; }
  // Digests handed to the mailer so far.
  std::vector<EmailMessage> outbox() const;

  // ---- background work; tick_* are also the synchronous entry points
  std::vector<HeartbeatReport> tick_heartbeats();
  std::size_t tick_digests();
  void start_background();
  void stop_background();

 private:
  struct Entry;
  struct AgentSlot;

  std::shared_ptr<Entry> entry(const DeliberationId& id) const;
  std::shared_ptr<AgentSlot> slot(const AgentId& id) const;
  std::string mint_token();
  std::string next_id(const char* prefix, std::uint64_t& counter);
  DeliberationHeader open_new(const std::string& creator, const std::string& question,
                              const ConsensusConfig& consensus);
  void attach(const std::shared_ptr<Entry>& e, bool fresh);
  void require_owner(const Principal& p, const AgentRecord& a) const;
  void require_self(const Principal& p, const AgentId& agent) const;
  AgentRecord agent_unlocked(const AgentId& id) const;
  void store_agent(const AgentRecord& a);
  std::optional<std::string> memory_at(const AgentId& agent, Timestamp t) const;
  void after_revision(const DeliberationId& id, const DomainEvent& e);
  void persist_registry(const Json& record);
  void load();

  PlatformConfig config_;
  Clock clock_;
  std::unique_ptr<Generator> generator_;
  std::unique_ptr<RiskScorer> scorer_;
  std::unique_ptr<TextClient> llm_;

  mutable std::shared_mutex mu_;
  std::map<DeliberationId, std::shared_ptr<Entry>> deliberations_;
  std::map<AgentId, std::shared_ptr<AgentSlot>> agents_;
  std::map<UserId, UserRecord> users_;
  std::map<std::string, Principal> tokens_;
  std::map<std::string, Suggestion> suggestions_;
  std::map<std::string, double> risk_cache_;
  std::uint64_t user_counter_ = 0;
  std::uint64_t agent_counter_ = 0;
  std::uint64_t delib_counter_ = 0;
  std::uint64_t suggestion_counter_ = 0;

  std::mutex registry_file_mu_;
  std::mutex scheduler_mu_;
  HeartbeatScheduler scheduler_;
  RevisionTelemetry telemetry_;
  std::unique_ptr<DigestMailer> mailer_;
  mutable std::mutex outbox_mu_;
  std::vector<EmailMessage> outbox_;
  std::map<UserId, Timestamp> last_digest_;

  std::mutex bg_mu_;
  std::condition_variable bg_cv_;
  bool bg_stop_ = false;
  std::vector<std::thread> bg_threads_;
};

Json to_json(const AgentRecord& a);
AgentRecord agent_from_json(const Json& j);
Json to_json(const HeartbeatReport& r);
Json to_json(const ReviewableAction& a);
Json to_json(const Suggestion& s);
Json to_json(const Participation& p);

int http_status(ErrorCode code);

// HTTP binding of Platform. Stable snake_case documents; unknown input
// fields are ignored.
class HttpServer {
 public:
  explicit HttpServer(Platform& platform);
  ~HttpServer();

  // Blocks until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace agora
