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

// agora: platform server and offline tools.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "agora/eval.hpp"
#include "agora/platform.hpp"

namespace fs = std::filesystem;
using namespace agora;

namespace {

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int serve(const std::string& config_path, std::optional<int> port, std::optional<std::string> data,
          bool mock) {
  PlatformConfig c = PlatformConfig::load(config_path);
  if (port) c.port = *port;
  if (data) c.data_dir = *data;
  if (mock) c.mock_mode = true;
  Platform platform(c);
  HttpServer server(platform);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  platform.start_background();
  std::cerr << "listening on " << c.bind_address << ':' << c.port << (c.mock_mode ? " (mock)" : "") << '\n';
  const bool ok = server.listen(c.bind_address, c.port);
  platform.stop_background();
  g_server = nullptr;
  if (!ok) std::cerr << "error: cannot bind " << c.bind_address << ':' << c.port << '\n';
  return ok ? 0 : 1;
}

// ---- simulate

const char* kConcerns[] = {
    "shift workers getting home safely",  "keeping public spending in check", "quiet residential streets",
    "students without cars",              "accessible services for the elderly", "local businesses at night",
    "climate and emissions",              "fair treatment of every district",
};
const char* kQuestions[] = {
    "Should the city fund late-night bus service?",
    "How should the parks budget be split between new parks and upkeep?",
    "Should model cards be required for public-sector AI systems?",
    "Should libraries open on Sundays?",
    "Should the downtown core become car-free on weekends?",
    "How should the housing levy be spent?",
};

std::string simulated_memory(std::mt19937_64& rng) {
  std::ostringstream m;
  const int n = 3 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n; ++i) {
    m << "I care about " << kConcerns[rng() % std::size(kConcerns)] << ". ";
    m << (rng() % 2 ? "I think the city should act on it soon.\n" : "I want any change to be gradual.\n");
  }
  return m.str();
}

// Checks the invariants every committed state must satisfy. Returns the
// violations found.
std::vector<std::string> check_invariants(const Platform& p, const Deliberation& d) {
  std::vector<std::string> out;
  const auto events = p.events_since(d.header.id, 0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].seq != i + 1) {
      out.push_back("seq gap at " + std::to_string(i + 1));
      break;
    }
  }
  const auto pool = d.active_pool();
  for (const auto& [agent, r] : d.rankings) {
    try {
      require_complete(r, pool);
    } catch (const Error& e) {
      out.push_back("incomplete ranking of " + agent.str() + ": " + e.what());
    }
  }
  if (!(replay(d.header, events) == d)) out.push_back("replay differs from live state");
  if (recompute_consensus(d) != d.winner) out.push_back("stored winner differs from recomputation");
  return out;
}

int simulate(int n_agents, int n_delibs, std::uint64_t seed, int ticks, std::optional<std::string> data,
             std::uint64_t snapshot_every) {
  if (n_agents < 1 || n_delibs < 1 || ticks < 1) {
    std::cerr << "agents, deliberations and ticks must be positive\n";
    return 2;
  }
  auto clock = std::make_shared<Timestamp>(1'700'000'000'000);
  PlatformConfig c;
  c.mock_mode = true;
  c.scheduler_seed = seed;
  c.snapshot_every = snapshot_every;
  if (data) c.data_dir = *data;
  Platform p(c, [clock] { return *clock; });
  std::mt19937_64 rng(seed);

  std::vector<ApiSession> users;
  for (int i = 0; i < std::max(1, n_agents / 4); ++i) users.push_back(p.register_user("user " + std::to_string(i)));
  std::vector<DeliberationId> delibs;
  for (int i = 0; i < n_delibs; ++i) {
    const auto& creator = users[i % users.size()];
    CreateDeliberation req{kQuestions[i % std::size(kQuestions)], {}, false};
    if (i % 2 == 1) req.consensus.aggregator = Aggregator::kBradleyTerry;
    delibs.push_back(p.create_deliberation(creator.principal, req).header->id);
  }
  struct Sim {
    AgentId id;
    Principal owner;
  };
  std::vector<Sim> agents;
  for (int i = 0; i < n_agents; ++i) {
    const auto& owner = users[i % users.size()];
    // Roughly one in ten agents starts too thin to participate.
    std::string memory = rng() % 10 == 0 ? "New here." : simulated_memory(rng);
    auto [a, s] = p.register_agent(owner.principal, {"agent " + std::to_string(i), Hosting::kHosted, memory,
                                                     std::nullopt});
    agents.push_back({a.id, owner.principal});
  }

  const Timestamp step = c.default_heartbeat_interval_ms * 11 / 10 + 1;
  int violations = 0;
  for (int t = 1; t <= ticks; ++t) {
    const auto reports = p.tick_heartbeats();
    std::size_t joins = 0;
    std::size_t skips = 0;
    std::size_t reranks = 0;
    for (const auto& r : reports) {
      reranks += r.reranked.size();
      joins += r.joined.size();
      skips += r.skipped.size();
    }
    // Owners occasionally step in: a memory edit or a ranking revision.
    int edits = 0;
    for (const auto& a : agents) {
      const auto roll = rng() % 20;
      if (roll == 0) {
        auto rec = p.agent(a.owner, a.id);
        p.put_memory(a.owner, a.id, rec.memory + simulated_memory(rng));
        ++edits;
      } else if (roll == 1) {
        const auto& d = delibs[rng() % delibs.size()];
        auto snap = p.deliberation(d);
        if (!snap->rankings.contains(a.id) || snap->status != DeliberationStatus::kOpen) continue;
        auto order = snap->active_pool();
        std::shuffle(order.begin(), order.end(), rng);
        p.put_ranking(a.owner, d, a.id, order,
                      rng() % 2 ? RevisionKind::kViewChanged : RevisionKind::kAgentMisrepresented);
        ++edits;
      }
    }
    for (const auto& id : delibs) {
      auto snap = p.deliberation(id);
      for (const auto& v : check_invariants(p, *snap)) {
        std::cout << "VIOLATION tick " << t << ' ' << id.str() << ": " << v << '\n';
        ++violations;
      }
    }
    std::cout << "tick " << t << ": " << reports.size() << " heartbeats, " << joins << " joins, " << skips
              << " skips, " << reranks << " reranks, " << edits << " owner edits\n";
    *clock += step;
  }
  for (const auto& id : delibs) {
    auto d = p.deliberation(id);
    std::cout << id.str() << " [" << to_string(d->header.consensus.aggregator) << "] participants="
              << d->participants.size() << " candidates=" << d->active_pool().size() << " events=" << d->event_seq
              << " winner=";
    if (d->winner) std::cout << d->winner->str() << " \"" << d->find_statement(*d->winner)->title << '"';
    else std::cout << "none";
    std::cout << '\n';
  }
  const auto counts = p.telemetry().counts();
  std::cout << "revisions: misrepresented=" << counts.agent_misrepresented << " view_changed=" << counts.view_changed
            << " cascaded=" << counts.cascaded << '\n';
  std::cout << (violations == 0 ? "invariants: ok" : "invariants: FAILED") << '\n';
  return violations == 0 ? 0 : 1;
}

// ---- evaluate

int evaluate(const std::string& fixtures_dir, bool mock, const std::string& out_dir,
             const std::vector<std::string>& methods, int k, bool sequential) {
  const auto fixtures = eval::load_fixtures(fixtures_dir);
  if (fixtures.empty()) {
    std::cerr << "no fixtures in " << fixtures_dir << '\n';
    return 2;
  }
  auto registry = eval::default_registry(k);
  if (!methods.empty()) registry = eval::select_methods(registry, methods);

  std::unique_ptr<ChatCompletionClient> client;
  std::unique_ptr<eval::SynthesisBackend> backend;
  std::vector<std::unique_ptr<eval::Judge>> owned;
  if (mock) {
    backend = std::make_unique<eval::MockSynthesisBackend>();
    owned.push_back(std::make_unique<eval::JaccardJudge>());
    owned.push_back(std::make_unique<eval::CoverageJudge>());
  } else {
    const ChatClientConfig cfg = ChatClientConfig::from_env();
    client = std::make_unique<ChatCompletionClient>(cfg, PromptLibrary::defaults());
    backend = std::make_unique<eval::LlmSynthesisBackend>(*client);
    owned.push_back(std::make_unique<eval::LlmJudge>(cfg.model.empty() ? "llm" : cfg.model, *client));
  }
  std::vector<eval::Judge*> judges;
  for (auto& j : owned) judges.push_back(j.get());

  eval::ComparisonOptions opts;
  opts.parallel = !sequential;
  const auto result = eval::run_comparison(fixtures, registry, *backend, judges, opts);

  fs::create_directories(out_dir);
  std::ofstream(fs::path(out_dir) / "comparison.csv") << eval::to_csv(result);
  std::ofstream(fs::path(out_dir) / "comparison.json") << eval::to_json(result).dump(2) << '\n';

  for (const auto& row : result.rows) {
    std::printf("%-28s %-14s rep=%s act=%s\n", row.method.c_str(), row.judge.c_str(),
                row.representativeness ? std::to_string(*row.representativeness).c_str() : "n/a",
                row.actionability ? std::to_string(*row.actionability).c_str() : "n/a");
  }
  for (const auto& [judge, frontier] : result.frontier) {
    std::cout << "frontier " << judge << ':';
    for (const auto& m : frontier) std::cout << ' ' << m;
    std::cout << '\n';
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : result.failures) std::cerr << "failed: " << f.fixture << '/' << f.method << ": " << f.message << '\n';
  return 0;
}

// ---- replay / export

int replay_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << '\n';
    return 2;
  }
  const EventLogFile log = read_log(in);
  const Deliberation a = replay(log.header, log.events);
  const Deliberation b = replay(log.header, log.events);
  if (!(a == b)) {
    std::cout << "replay: NONDETERMINISTIC\n";
    return 1;
  }
  std::cout << "events: " << log.events.size() << '\n' << "status: " << to_string(a.status) << '\n';
  std::cout << "winner: " << (a.winner ? a.winner->str() : "none") << '\n';

  fs::path snap = path;
  snap.replace_extension(".snapshot.json");
  if (fs::exists(snap)) {
    std::ifstream s(snap);
    const Json j = Json::parse(s);
    const auto seq = j.at("seq").get<std::uint64_t>();
    if (seq > log.events.size()) {
      std::cout << "snapshot: ahead of log (seq " << seq << ")\n";
      return 1;
    }
    const Deliberation prefix = replay(log.header, std::span(log.events).first(seq));
    const bool same = prefix == deliberation_from_json(j.at("state"));
    std::cout << "snapshot: seq " << seq << (same ? " matches" : " DIFFERS") << '\n';
    if (!same) return 1;
  }
  std::cout << "replay: deterministic\n";
  return 0;
}

int export_deliberation(const std::string& id, const std::string& data) {
  PlatformConfig c;
  c.data_dir = data;
  c.mock_mode = true;
  Platform p(c);
  const DeliberationId did(id);
  const auto d = p.deliberation(did);
  Json events = Json::array();
  for (const auto& e : p.events_since(did, 0)) events.push_back(to_json(e));
  Json dist = Json::object();
  for (const auto& [cid, hist] : ranking_distribution(*d)) {
    Json h = Json::object();
    for (const auto& [rank, n] : hist) h[std::to_string(rank)] = n;
    dist[cid.str()] = h;
  }
  std::cout << Json{{"header", to_json(d->header)}, {"state", to_json(*d)}, {"ranking_distribution", dist},
                    {"events", events}}
                   .dump(2)
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agora: deliberation platform"};
  app.require_subcommand(1);

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  std::string config_path;
  std::optional<int> port;
  std::optional<std::string> serve_data;
  bool serve_mock = false;
  serve_cmd->add_option("--config", config_path, "JSON config file");
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--data", serve_data, "data directory");
  serve_cmd->add_flag("--mock", serve_mock, "use mock generators and scorers");

  auto* sim_cmd = app.add_subcommand("simulate", "run hosted agents against a mock platform");
  int agents = 20, delibs = 5, ticks = 10;
  std::uint64_t seed = 1;
  std::optional<std::string> sim_data;
  sim_cmd->add_option("--agents", agents);
  sim_cmd->add_option("--deliberations", delibs);
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_option("--ticks", ticks);
  sim_cmd->add_option("--data", sim_data, "persist to this directory");
  std::uint64_t snapshot_every = 50;
  sim_cmd->add_option("--snapshot-every", snapshot_every, "events between state snapshots");

  auto* eval_cmd = app.add_subcommand("evaluate", "compare statement-generation methods");
  std::string fixtures, out_dir = "eval-out";
  bool mock_judges = false, sequential = false;
  std::vector<std::string> methods;
  int k = 15;
  eval_cmd->add_option("--fixtures", fixtures)->required();
  eval_cmd->add_flag("--mock-judges", mock_judges, "offline backend and judges");
  eval_cmd->add_option("--out", out_dir);
  eval_cmd->add_option("--methods", methods)->delimiter(',');
  eval_cmd->add_option("--k", k, "system candidates per fixture");
  eval_cmd->add_flag("--sequential", sequential);

  auto* replay_cmd = app.add_subcommand("replay", "replay an event log and check determinism");
  std::string log_path;
  replay_cmd->add_option("--log", log_path)->required();

  auto* export_cmd = app.add_subcommand("export", "print a deliberation as JSON");
  std::string export_id, export_data;
  export_cmd->add_option("--deliberation", export_id)->required();
  export_cmd->add_option("--data", export_data)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve_cmd) return serve(config_path, port, serve_data, serve_mock);
    if (*sim_cmd) return simulate(agents, delibs, seed, ticks, sim_data, snapshot_every);
    if (*eval_cmd) return evaluate(fixtures, mock_judges, out_dir, methods, k, sequential);
    if (*replay_cmd) return replay_log(log_path);
    if (*export_cmd) return export_deliberation(export_id, export_data);
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
