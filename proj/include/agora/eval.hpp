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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agora/deliberation.hpp"
#include "agora/serialization.hpp"
#include "agora/text_client.hpp"

namespace agora::eval {

// ---- opinion homogeneity

struct OpinionVector {
  std::string opinion_id;
  std::vector<double> embedding;
  ProducedVia production_path = ProducedVia::kAutonomous;
};

// kValidation on zero vectors or mismatched dimensions.
double cosine(std::span<const double> a, std::span<const double> b);

// Mean cosine over unordered pairs. kUndefined with fewer than two vectors.
double mean_pairwise_similarity(std::span<const OpinionVector> vectors);
// Mean cosine over pairs drawn one from each group. kUndefined if either is empty.
double mean_cross_similarity(std::span<const OpinionVector> a, std::span<const OpinionVector> b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

// Signed feature hashing of lowercased tokens, L2-normalised.
class HashedBagOfWordsEmbedder : public Embedder {
 public:
  explicit HashedBagOfWordsEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dim_;
};

// 1-based ranks, ties get the average of the positions they span.
std::vector<double> average_ranks(std::span<const double> xs);

// Pearson correlation of average ranks. kValidation unless both series have
// the same length >= 3; kUndefined when either is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

// ---- judging

struct Statement {
  std::string id;
  std::string title;
  std::string body;

  std::string text() const;
  friend bool operator==(const Statement&, const Statement&) = default;
};

struct JudgeContext {
  std::string context_id;  // usually the agent id
  std::string question;
  std::string profile;
  std::string opinion;
};

struct JudgeVerdict {
  std::string context_id;
  std::string x;           // statement ids
  std::string y;
  std::string verdict_xy;  // winner when x is shown first
  std::string verdict_yx;  // winner when y is shown first

  bool decisive() const { return verdict_xy == verdict_yx; }
};

struct WinRate {
  double rate = 0;
  double wins = 0;
  int n_decisive = 0;
};

// Win rate of `method` against `baseline` over decisive verdicts. Identical
// statements score exactly 0.5. kValidation if a verdict concerns another
// pair; kInsufficientSignal when no verdict is decisive.
WinRate debiased_win_rate(std::span<const JudgeVerdict> verdicts, const Statement& method,
                          const Statement& baseline);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string id() const = 0;
  // 1 if `first` better represents the context, else 2.
  virtual int prefer(const JudgeContext& ctx, const Statement& first, const Statement& second) = 0;
  // Highest rubric level fully satisfied, 1..5.
  virtual int actionability(const Statement& s, std::string_view question) = 0;
};

// Asks the judge in both presentation orders.
JudgeVerdict judge_pair(Judge& judge, const JudgeContext& ctx, const Statement& x, const Statement& y);

// Keyword rubric: named actor and concrete mechanism -> 3, plus a binding
// parameter -> 4, plus legal drafting markers -> 5; a directive about an
// action or property without an actor -> 2; anything else -> 1.
int mock_actionability(std::string_view statement);

// Prefers the statement sharing more tokens with profile and opinion
// (Jaccard). Exact ties go to whichever was shown first.
class JaccardJudge : public Judge {
 public:
  std::string id() const override { return "mock-jaccard"; }
  int prefer(const JudgeContext& ctx, const Statement& first, const Statement& second) override;
  int actionability(const Statement& s, std::string_view question) override;
};

// Prefers the statement covering more of the opinion's tokens. Exact ties go
// to whichever was shown first.
class CoverageJudge : public Judge {
 public:
  std::string id() const override { return "mock-coverage"; }
  int prefer(const JudgeContext& ctx, const Statement& first, const Statement& second) override;
  int actionability(const Statement& s, std::string_view question) override;
};

// "judge_pairwise" and "judge_actionability" templates.
class LlmJudge : public Judge {
 public:
  LlmJudge(std::string id, TextClient& client) : id_(std::move(id)), client_(client) {}
  std::string id() const override { return id_; }
  int prefer(const JudgeContext& ctx, const Statement& first, const Statement& second) override;
  int actionability(const Statement& s, std::string_view question) override;

 private:
  std::string id_;
  TextClient& client_;
};

// ---- frontier

struct MethodScore {
  std::string method;
  std::string judge;
  std::optional<double> representativeness;  // nullopt: insufficient signal
  int n_decisive = 0;
  std::optional<double> actionability;       // nullopt: nothing scored
  int n_actionability = 0;
  int n_fixtures = 0;
};

// Methods not dominated on (representativeness, actionability), best
// representativeness first. Rows missing either value are ignored.
// kValidation if the rows come from more than one judge.
std::vector<MethodScore> pareto_frontier(std::span<const MethodScore> scores);

// ---- fixtures and methods

struct FixtureAgent {
  std::string agent_id;
  std::string profile;
  std::string opinion;
  std::optional<std::vector<CandidateId>> production_ranking;
};

struct Fixture {
  std::string id;
  std::string question;
  std::vector<FixtureAgent> agents;
  std::vector<Statement> statements;  // production pool, if any
};

Fixture fixture_from_json(const Json& j);
Json to_json(const Fixture& f);
Fixture load_fixture(const std::string& path);
// Every *.json file in the directory, sorted by file name.
std::vector<Fixture> load_fixtures(const std::string& dir);

enum class SynthesisBias { kBaseline, kSpecific, kStrongest };

// The generation steps the methods are built from.
class SynthesisBackend {
 public:
  virtual ~SynthesisBackend() = default;
  virtual Statement synthesize(SynthesisBias bias, const Fixture& f) = 0;
  // `strongest` switches from diverse policy directions to distinctive
  // minority positions.
  virtual std::vector<Statement> system_candidates(const Fixture& f, int k, bool strongest) = 0;
  virtual Statement anchored_proposal(const Fixture& f, const FixtureAgent& agent,
                                      std::span<const Statement> pool) = 0;
  virtual std::vector<std::string> agent_ranking(const Fixture& f, const FixtureAgent& agent,
                                                 std::span<const Statement> pool) = 0;
  // Id of the candidate the broadest group would endorse.
  virtual std::string most_acceptable(const Fixture& f, std::span<const Statement> candidates) = 0;
  virtual int disagreeability(const Statement& s) = 0;
};

class MockSynthesisBackend : public SynthesisBackend {
 public:
  Statement synthesize(SynthesisBias bias, const Fixture& f) override;
  std::vector<Statement> system_candidates(const Fixture& f, int k, bool strongest) override;
  Statement anchored_proposal(const Fixture& f, const FixtureAgent& agent,
                              std::span<const Statement> pool) override;
  std::vector<std::string> agent_ranking(const Fixture& f, const FixtureAgent& agent,
                                         std::span<const Statement> pool) override;
  std::string most_acceptable(const Fixture& f, std::span<const Statement> candidates) override;
  int disagreeability(const Statement& s) override;
};

class LlmSynthesisBackend : public SynthesisBackend {
 public:
  explicit LlmSynthesisBackend(TextClient& client) : client_(client) {}
  Statement synthesize(SynthesisBias bias, const Fixture& f) override;
  std::vector<Statement> system_candidates(const Fixture& f, int k, bool strongest) override;
  Statement anchored_proposal(const Fixture& f, const FixtureAgent& agent,
                              std::span<const Statement> pool) override;
  std::vector<std::string> agent_ranking(const Fixture& f, const FixtureAgent& agent,
                                         std::span<const Statement> pool) override;
  std::string most_acceptable(const Fixture& f, std::span<const Statement> candidates) override;
  int disagreeability(const Statement& s) override;

 private:
  TextClient& client_;
};

using MethodFn = std::function<Statement(const Fixture&, SynthesisBackend&)>;

struct MethodSpec {
  std::string id;
  std::string label;
  MethodFn run;
};

inline constexpr std::string_view kBaselineMethod = "single_shot_baseline";

// The ten architectures, baseline first. `k` is the system candidate count.
std::vector<MethodSpec> default_registry(int k = 15);
std::vector<MethodSpec> select_methods(const std::vector<MethodSpec>& registry,
                                       const std::vector<std::string>& ids);

// Rankings over the production pool from the fixture, completed and
// validated; shared by the two production methods.
std::vector<Ranking> production_rankings(const Fixture& f);

// ---- comparison

struct MethodFailure {
  std::string fixture;
  std::string method;
  std::string message;
};

struct ComparisonResult {
  std::vector<std::string> judges;
  std::map<std::string, std::string> labels;  // method -> display label
  std::vector<MethodScore> rows;  // method order of the registry, then judge order
  std::map<std::string, std::vector<std::string>> frontier;  // judge -> methods
  std::vector<MethodFailure> failures;
  // fixture -> method -> statement as produced (original ids)
  std::map<std::string, std::map<std::string, Statement>> statements;
  std::vector<std::string> warnings;
};

struct ComparisonOptions {
  bool parallel = true;  // fixtures run concurrently; backends and judges must be thread-safe
};

// The registry must contain the baseline method. A fixture whose baseline
// fails is skipped for every method.
ComparisonResult run_comparison(std::span<const Fixture> fixtures,
                                const std::vector<MethodSpec>& methods, SynthesisBackend& backend,
                                std::span<Judge* const> judges, const ComparisonOptions& options = {});

std::string to_csv(const ComparisonResult& r);
Json to_json(const ComparisonResult& r);

}  // namespace agora::eval
