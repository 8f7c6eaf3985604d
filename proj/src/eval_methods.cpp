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

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "agora/agent_runtime.hpp"
#include "agora/bradley_terry.hpp"
#include "agora/eval.hpp"
#include "agora/schulze.hpp"
#include "agora/text.hpp"

namespace agora::eval {
namespace {

const std::set<std::string> kStopwords = {
    "the", "and", "for", "that", "this", "with", "are", "was", "but", "not", "have", "has",
    "they", "their", "them", "its", "our", "you", "your", "from", "about", "into", "than",
    "what", "which", "who", "will", "would", "should", "could", "can", "must", "more", "most",
    "all", "any", "some", "there", "these", "those", "been", "being", "also", "very", "just",
    "only", "own", "out", "over", "such", "too", "does", "did", "doing", "because", "while",
    "i", "we", "it", "is", "be", "to", "of", "in", "on", "a", "an", "or", "as", "at", "by",
    "if", "so", "do", "my", "me", "us", "no",
};

constexpr std::array<std::string_view, 6> kDirections = {
    "through direct public funding",
    "through binding regulation of providers",
    "through voluntary industry standards",
    "through local council pilots",
    "through tax incentives",
    "through an independent oversight board",
};

const std::set<std::string> kStrongMarkers = {
    "must", "never", "ban", "abolish", "only", "every", "immediately", "always", "end",
};

std::vector<std::string> content_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : text::tokens(s)) {
    if (t.size() > 2 && !kStopwords.contains(t)) out.push_back(std::move(t));
  }
  return out;
}

// Most frequent content tokens, ties alphabetical.
std::vector<std::string> top_tokens(const std::vector<std::string>& texts, std::size_t n) {
  std::map<std::string, int> freq;
  for (const auto& t : texts) {
    const auto toks = content_tokens(t);
    for (const auto& tok : std::set<std::string>(toks.begin(), toks.end())) ++freq[tok];
  }
  std::vector<std::pair<std::string, int>> v(freq.begin(), freq.end());
  std::stable_sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size() && i < n; ++i) out.push_back(v[i].first);
  return out;
}

std::string join(const std::vector<std::string>& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::vector<std::string> opinions_of(const Fixture& f) {
  std::vector<std::string> out;
  for (const auto& a : f.agents) out.push_back(a.opinion);
  return out;
}

std::string bullet_opinions(const Fixture& f) {
  std::string out;
  for (const auto& a : f.agents) out += "- " + a.opinion + "\n";
  return out;
}

std::string listing(std::span<const Statement> pool) {
  std::string out;
  for (const auto& s : pool) out += s.id + ": " + s.text() + "\n";
  return out;
}

Statement from_titled(std::string id, std::string_view reply) {
  auto t = parse_titled_statement(reply);
  return {std::move(id), std::move(t.title), std::move(t.body)};
}

std::vector<CandidateId> pool_ids(std::span<const Statement> pool) {
  std::vector<CandidateId> out;
  for (const auto& s : pool) out.emplace_back(s.id);
  return out;
}

const Statement& by_id(std::span<const Statement> pool, const CandidateId& id) {
  for (const auto& s : pool) {
    if (s.id == id.str()) return s;
  }
  throw Error(ErrorCode::kNotFound, "no statement " + id.str());
}

std::vector<Ranking> agent_rankings(const Fixture& f, std::span<const Statement> pool,
                                    SynthesisBackend& backend) {
  const auto ids = pool_ids(pool);
  std::vector<Ranking> out;
  for (const auto& a : f.agents) {
    Ranking r{AgentId(a.agent_id), {}};
    for (auto& id : backend.agent_ranking(f, a, pool)) r.order.emplace_back(std::move(id));
    require_complete(r, ids);
    out.push_back(std::move(r));
  }
  return out;
}

BtStrengths fit(std::span<const Ranking> rankings, std::span<const Statement> pool) {
  const auto ids = pool_ids(pool);
  return bt_fit(wins_from_rankings(rankings, ids));
}

Statement bt_best(const Fixture& f, std::span<const Statement> pool, SynthesisBackend& backend) {
  if (pool.empty()) throw Error(ErrorCode::kValidation, "empty candidate pool");
  const auto rankings = agent_rankings(f, pool, backend);
  return by_id(pool, bt_winner(fit(rankings, pool)));
}

std::vector<Statement> anchored_pool(const Fixture& f, SynthesisBackend& backend) {
  std::vector<Statement> pool;
  std::set<std::string> seen;
  for (const auto& a : f.agents) {
    Statement s = backend.anchored_proposal(f, a, pool);
    if (!seen.insert(s.id).second) throw Error(ErrorCode::kValidation, "duplicate statement id " + s.id);
    pool.push_back(std::move(s));
  }
  return pool;
}

}  // namespace

// ---- fixtures

Fixture fixture_from_json(const Json& j) {
  try {
    Fixture f;
    f.id = j.at("id").get<std::string>();
    f.question = j.at("question").get<std::string>();
    for (const auto& a : j.at("agents")) {
      FixtureAgent fa;
      fa.agent_id = a.at("agent_id").get<std::string>();
      fa.profile = a.value("profile", "");
      fa.opinion = a.at("opinion").get<std::string>();
      if (a.contains("production_ranking") && !a["production_ranking"].is_null()) {
        fa.production_ranking = ids_from_json(a["production_ranking"]);
      }
      f.agents.push_back(std::move(fa));
    }
    if (j.contains("statements")) {
      for (const auto& s : j["statements"]) {
        f.statements.push_back({s.at("id").get<std::string>(), s.value("title", ""),
                                s.at("body").get<std::string>()});
      }
    }
    return f;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed fixture: ") + e.what());
  }
}

Json to_json(const Fixture& f) {
  Json agents = Json::array();
  for (const auto& a : f.agents) {
    Json ja{{"agent_id", a.agent_id}, {"profile", a.profile}, {"opinion", a.opinion}};
    if (a.production_ranking) ja["production_ranking"] = ids_to_json(*a.production_ranking);
    agents.push_back(std::move(ja));
  }
  Json statements = Json::array();
  for (const auto& s : f.statements) {
    statements.push_back({{"id", s.id}, {"title", s.title}, {"body", s.body}});
  }
  return {{"id", f.id}, {"question", f.question}, {"agents", agents}, {"statements", statements}};
}

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kValidation, "invalid JSON in " + path);
  return fixture_from_json(j);
}

std::vector<Fixture> load_fixtures(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kNotFound, "not a directory: " + dir);
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Fixture> out;
  for (const auto& p : paths) out.push_back(load_fixture(p.string()));
  return out;
}

std::vector<Ranking> production_rankings(const Fixture& f) {
  if (f.statements.empty()) throw Error(ErrorCode::kValidation, "fixture has no production pool");
  const auto ids = pool_ids(f.statements);
  std::vector<Ranking> out;
  for (const auto& a : f.agents) {
    if (!a.production_ranking) continue;
    Ranking r{AgentId(a.agent_id), *a.production_ranking};
    require_complete(r, ids);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw Error(ErrorCode::kValidation, "fixture has no production rankings");
  return out;
}

// ---- mock backend

Statement MockSynthesisBackend::synthesize(SynthesisBias bias, const Fixture& f) {
  const auto opinions = opinions_of(f);
  switch (bias) {
    case SynthesisBias::kBaseline:
      return {"", "Shared priorities",
              "Participants broadly agree that " + join(top_tokens(opinions, 6), ", ") +
                  " matter most."};
    case SynthesisBias::kSpecific:
      return {"", "A funded plan",
              "The city council must fund " + join(top_tokens(opinions, 4), ", ") +
                  " within 12 months and report progress quarterly."};
    case SynthesisBias::kStrongest: {
      std::map<std::string, int> df;
      for (const auto& o : opinions) {
        const auto toks = content_tokens(o);
        for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++df[t];
      }
      const FixtureAgent* best = nullptr;
      double best_score = -1;
      for (const auto& a : f.agents) {
        const auto toks = content_tokens(a.opinion);
        if (toks.empty()) continue;
        double rarity = 0;
        for (const auto& t : toks) rarity += 1.0 / df[t];
        rarity /= static_cast<double>(toks.size());
        if (rarity > best_score) {
          best_score = rarity;
          best = &a;
        }
      }
      if (best == nullptr) throw Error(ErrorCode::kValidation, "no opinions to synthesize");
      return {"", "A distinctive position", text::first_sentence(best->opinion)};
    }
  }
  throw Error(ErrorCode::kValidation, "unknown bias");
}

std::vector<Statement> MockSynthesisBackend::system_candidates(const Fixture& f, int k, bool strongest) {
  if (f.agents.empty()) throw Error(ErrorCode::kValidation, "no opinions");
  std::vector<Statement> out;
  for (int i = 0; i < k; ++i) {
    const auto& a = f.agents[static_cast<std::size_t>(i) % f.agents.size()];
    const auto words = top_tokens({a.opinion}, 3);
    Statement s;
    s.id = "cand-" + std::to_string(i + 1);
    if (strongest) {
      s.title = "Hold firm on " + (words.empty() ? std::string("this") : words.front());
      s.body = text::first_sentence(a.opinion) + " No compromise on " + join(words, " or ") + ".";
    } else {
      s.title = "Direction " + std::to_string(i + 1);
      s.body = "Address " + join(words, ", ") + " " +
               std::string(kDirections[static_cast<std::size_t>(i) % kDirections.size()]) + ".";
    }
    out.push_back(std::move(s));
  }
  return out;
}

Statement MockSynthesisBackend::anchored_proposal(const Fixture&, const FixtureAgent& agent,
                                                  std::span<const Statement> pool) {
  const auto words = top_tokens({agent.opinion}, 1);
  return {"anchored-" + std::to_string(pool.size() + 1), "Anchored on " + agent.agent_id,
          text::first_sentence(agent.opinion) + " Keep " +
              (words.empty() ? std::string("this concern") : words.front()) + " central."};
}

std::vector<std::string> MockSynthesisBackend::agent_ranking(const Fixture&, const FixtureAgent& agent,
                                                             std::span<const Statement> pool) {
  const auto context = text::token_set(agent.profile + " " + agent.opinion);
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& s : pool) {
    scored.emplace_back(-text::jaccard(text::token_set(s.text()), context), s.id);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (auto& [score, id] : scored) out.push_back(std::move(id));
  return out;
}

std::string MockSynthesisBackend::most_acceptable(const Fixture& f, std::span<const Statement> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kValidation, "no candidates");
  const Statement* best = nullptr;
  double best_score = -1;
  for (const auto& c : candidates) {
    const auto toks = text::token_set(c.text());
    double score = 0;
    for (const auto& a : f.agents) {
      const auto op = text::token_set(a.opinion);
      if (op.empty()) continue;
      const auto hit = std::count_if(op.begin(), op.end(), [&](auto& t) { return toks.contains(t); });
      score += static_cast<double>(hit) / static_cast<double>(op.size());
    }
    if (score > best_score) {
      best_score = score;
      best = &c;
    }
  }
  return best->id;
}

int MockSynthesisBackend::disagreeability(const Statement& s) {
  const auto toks = text::token_set(s.text());
  const auto hits = std::count_if(toks.begin(), toks.end(), [](auto& t) { return kStrongMarkers.contains(t); });
  return 1 + static_cast<int>(std::min<long>(4, hits));
}

// ---- LLM backend

Statement LlmSynthesisBackend::synthesize(SynthesisBias bias, const Fixture& f) {
  const char* tmpl = bias == SynthesisBias::kBaseline   ? "synth_baseline"
                     : bias == SynthesisBias::kSpecific ? "synth_specific"
                                                        : "synth_strongest";
  return from_titled("", client_.complete({tmpl, {{"question", f.question}, {"opinions", bullet_opinions(f)}}}));
}

std::vector<Statement> LlmSynthesisBackend::system_candidates(const Fixture& f, int k, bool strongest) {
  std::vector<Statement> out;
  if (strongest) {
    for (int i = 0; i < k; ++i) {
      Statement s = synthesize(SynthesisBias::kStrongest, f);
      s.id = "cand-" + std::to_string(i + 1);
      out.push_back(std::move(s));
    }
    return out;
  }
  const std::string reply = client_.complete(
      {"system_candidates",
       {{"k", std::to_string(k)}, {"question", f.question}, {"opinions", bullet_opinions(f)}}});
  for (const auto& line : text::split_lines(reply)) {
    const std::string t = text::trim(line);
    const auto bar = t.find('|');
    if (!t.starts_with("TITLE:") || bar == std::string::npos) continue;
    std::string rest = text::trim(std::string_view(t).substr(bar + 1));
    if (!rest.starts_with("STATEMENT:")) continue;
    out.push_back({"cand-" + std::to_string(out.size() + 1), text::trim(std::string_view(t).substr(6, bar - 6)),
                   text::trim(std::string_view(rest).substr(10))});
  }
  if (out.empty()) throw Error(ErrorCode::kValidation, "no candidates in reply");
  return out;
}

Statement LlmSynthesisBackend::anchored_proposal(const Fixture& f, const FixtureAgent& agent,
                                                 std::span<const Statement> pool) {
  return from_titled("anchored-" + std::to_string(pool.size() + 1),
                     client_.complete({"anchored_proposal",
                                       {{"question", f.question},
                                        {"profile", agent.profile},
                                        {"opinion", agent.opinion},
                                        {"pool", listing(pool)}}}));
}

std::vector<std::string> LlmSynthesisBackend::agent_ranking(const Fixture& f, const FixtureAgent& agent,
                                                            std::span<const Statement> pool) {
  std::vector<CandidateStatement> cands;
  for (const auto& s : pool) cands.push_back({CandidateId(s.id), AgentId(), s.title, s.body});
  const std::string reply = client_.complete({"ranking",
                                              {{"question", f.question},
                                               {"profile", agent.profile},
                                               {"opinion", agent.opinion},
                                               {"statements", listing(pool)}}});
  std::vector<std::string> out;
  for (const auto& id : parse_ranking_reply(reply, cands)) out.push_back(id.str());
  return out;
}

std::string LlmSynthesisBackend::most_acceptable(const Fixture& f, std::span<const Statement> candidates) {
  const std::string reply = text::trim(client_.complete(
      {"acceptability", {{"opinions", bullet_opinions(f)}, {"candidates", listing(candidates)}}}));
  for (const auto& c : candidates) {
    if (reply == c.id) return c.id;
  }
  throw Error(ErrorCode::kValidation, "acceptability reply names no candidate: " + reply);
}

int LlmSynthesisBackend::disagreeability(const Statement& s) {
  const std::string reply = text::trim(client_.complete({"disagreeability", {{"statement", s.text()}}}));
  if (reply.size() >= 1 && reply[0] >= '1' && reply[0] <= '5') return reply[0] - '0';
  throw Error(ErrorCode::kValidation, "disagreeability reply out of range: " + reply);
}

// ---- registry

std::vector<MethodSpec> default_registry(int k) {
  std::vector<MethodSpec> r;
  auto single = [](SynthesisBias b) {
    return [b](const Fixture& f, SynthesisBackend& be) { return be.synthesize(b, f); };
  };
  r.push_back({std::string(kBaselineMethod), "Single-shot (baseline)", single(SynthesisBias::kBaseline)});
  r.push_back({"single_shot_specific", "Single-shot (be specific)", single(SynthesisBias::kSpecific)});
  r.push_back({"single_shot_strongest", "Single-shot (strongest)", single(SynthesisBias::kStrongest)});
  r.push_back({"production_schulze", "Production Schulze", [](const Fixture& f, SynthesisBackend&) {
                 const auto rankings = production_rankings(f);
                 const auto pm = build_preference_matrix(rankings, pool_ids(f.statements));
                 return by_id(f.statements, schulze_winner(strongest_paths(pm)).winner);
               }});
  r.push_back({"bt_on_production", "BT on production rankings", [](const Fixture& f, SynthesisBackend&) {
                 const auto rankings = production_rankings(f);
                 return by_id(f.statements, bt_winner(fit(rankings, f.statements)));
               }});
  r.push_back({"system_cands_bt", "System cands + BT", [k](const Fixture& f, SynthesisBackend& be) {
                 const auto pool = be.system_candidates(f, k, false);
                 return bt_best(f, pool, be);
               }});
  r.push_back({"strongest_cands_bt", "Strongest cands + BT", [k](const Fixture& f, SynthesisBackend& be) {
                 const auto pool = be.system_candidates(f, k, true);
                 return bt_best(f, pool, be);
               }});
  r.push_back({"anchored_bt", "Anchored + BT", [](const Fixture& f, SynthesisBackend& be) {
                 const auto pool = anchored_pool(f, be);
                 return bt_best(f, pool, be);
               }});
  r.push_back({"anchored_acceptability", "Anchored + acceptability",
               [](const Fixture& f, SynthesisBackend& be) {
                 const auto pool = anchored_pool(f, be);
                 const auto strengths = fit(agent_rankings(f, pool, be), pool);
                 std::vector<std::pair<double, std::string>> order;
                 for (const auto& s : pool) order.emplace_back(-strengths.strength(CandidateId(s.id)), s.id);
                 std::sort(order.begin(), order.end());
                 std::vector<Statement> top;
                 for (std::size_t i = 0; i < order.size() && i < 3; ++i) {
                   top.push_back(by_id(pool, CandidateId(order[i].second)));
                 }
                 return by_id(top, CandidateId(be.most_acceptable(f, top)));
               }});
  r.push_back({"anchored_disagreeable", "Anchored + disagreeable",
               [](const Fixture& f, SynthesisBackend& be) {
                 const auto pool = anchored_pool(f, be);
                 if (pool.empty()) throw Error(ErrorCode::kValidation, "empty candidate pool");
                 std::size_t best = 0;
                 int best_score = 0;
                 for (std::size_t i = 0; i < pool.size(); ++i) {
                   const int d = be.disagreeability(pool[i]);
                   if (d < 1 || d > 5) throw Error(ErrorCode::kValidation, "disagreeability out of range");
                   if (d > best_score) {
                     best_score = d;
                     best = i;
                   }
                 }
                 return pool[best];
               }});
  return r;
}

std::vector<MethodSpec> select_methods(const std::vector<MethodSpec>& registry,
                                       const std::vector<std::string>& ids) {
  std::vector<MethodSpec> out;
  for (const auto& id : ids) {
    auto it = std::find_if(registry.begin(), registry.end(), [&](auto& m) { return m.id == id; });
    if (it == registry.end()) throw Error(ErrorCode::kNotFound, "unknown method " + id);
    out.push_back(*it);
  }
  return out;
}

}  // namespace agora::eval
