#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "agora/eval.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "published_points.hpp"

using namespace agora;
using namespace agora::eval;

namespace {

OpinionVector vec(std::vector<double> v) { return {"o", std::move(v)}; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an agora::Error");
  return ErrorCode::kValidation;
}

JudgeVerdict verdict(const std::string& xy, const std::string& yx) {
  return {"ctx", "m", "b", xy, yx};
}

struct ScriptedClient : TextClient {
  std::map<std::string, std::string> replies;
  std::string complete(const PromptRequest& r) override {
    auto it = replies.find(r.template_id);
    if (it == replies.end()) throw Error(ErrorCode::kTransport, "unreachable");
    return it->second;
  }
};

struct FailingJudge : Judge {
  std::string id() const override { return "failing"; }
  int prefer(const JudgeContext&, const Statement&, const Statement&) override {
    throw Error(ErrorCode::kTransport, "down");
  }
  int actionability(const Statement&, std::string_view) override {
    throw Error(ErrorCode::kTransport, "down");
  }
};

std::vector<Fixture> three_fixtures() {
  return {synthetic::fixture(1), synthetic::fixture(2), synthetic::fixture(3)};
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("pairwise similarity examples") {
  CHECK(mean_pairwise_similarity(std::vector{vec({0.6, 0.8}), vec({0.6, 0.8})}) == doctest::Approx(1.0));
  CHECK(mean_pairwise_similarity(std::vector{vec({1, 0}), vec({0, 1})}) == 0.0);
  const double r = 1 / std::sqrt(2.0);
  const double v = mean_pairwise_similarity(std::vector{vec({1, 0}), vec({0, 1}), vec({r, r})});
  // Pairs: (e1,e2)=0, (e1,d)=r, (e2,d)=r.
  CHECK(std::abs(v - 0.4714) < 1e-4);
  CHECK(v == doctest::Approx((0 + r + r) / 3).epsilon(1e-12));
  CHECK(code_of([] { mean_pairwise_similarity(std::vector{vec({1, 0})}); }) == ErrorCode::kUndefined);
  CHECK(code_of([] { mean_pairwise_similarity({}); }) == ErrorCode::kUndefined);
  CHECK(code_of([] { mean_pairwise_similarity(std::vector{vec({0, 0}), vec({1, 0})}); }) ==
        ErrorCode::kValidation);
}

TEST_CASE("similarity is invariant under rotation and positive scaling") {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + trial % 5;
    std::vector<OpinionVector> vs;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = g(rng);
      vs.push_back(vec(v));
    }
    const double base = mean_pairwise_similarity(vs);
    // A Givens rotation in a random plane, applied to every vector.
    const int p = static_cast<int>(rng() % dim);
    const int q = (p + 1 + static_cast<int>(rng() % (dim - 1))) % dim;
    const double th = g(rng);
    auto rotated = vs;
    for (auto& o : rotated) {
      const double a = o.embedding[p], b = o.embedding[q];
      o.embedding[p] = std::cos(th) * a - std::sin(th) * b;
      o.embedding[q] = std::sin(th) * a + std::cos(th) * b;
    }
    CHECK(mean_pairwise_similarity(rotated) == doctest::Approx(base).epsilon(1e-9));
    auto scaled = vs;
    for (auto& o : scaled) {
      const double k = scale(rng);
      for (auto& x : o.embedding) x *= k;
    }
    CHECK(mean_pairwise_similarity(scaled) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("hashed embedder is deterministic and separates topics") {
  HashedBagOfWordsEmbedder e;
  const auto a = e.embed("Night buses keep shift workers safe");
  CHECK(a == e.embed("night BUSES keep shift workers safe!"));
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  const auto b = e.embed("Plant more trees in the park");
  CHECK(cosine(a, b) < 0.5);
  CHECK(code_of([&] { e.embed("  ,,, "); }) == ErrorCode::kValidation);
}

TEST_CASE("spearman examples") {
  using V = std::vector<double>;
  CHECK(spearman(V{1, 2, 3}, V{10, 20, 30}) == doctest::Approx(1.0));
  CHECK(spearman(V{1, 2, 3}, V{30, 20, 10}) == doctest::Approx(-1.0));
  // Frozen from the brute-force rank-then-Pearson oracle.
  const double tied = oracle::spearman({1, 2, 2, 4}, {1, 3, 2, 4});
  CHECK(tied == doctest::Approx(0.9486832980505138).epsilon(1e-12));
  CHECK(spearman(V{1, 2, 2, 4}, V{1, 3, 2, 4}) == doctest::Approx(0.9486832980505138).epsilon(1e-12));
  CHECK(code_of([] { spearman(V{1, 1, 1}, V{1, 2, 3}); }) == ErrorCode::kUndefined);
  CHECK(code_of([] { spearman(V{1, 2}, V{1, 2}); }) == ErrorCode::kValidation);
  CHECK(code_of([] { spearman(V{1, 2, 3}, V{1, 2}); }) == ErrorCode::kValidation);
  CHECK(average_ranks(V{3, 1, 3, 2}) == V{3.5, 1, 3.5, 2});
}

TEST_CASE("spearman matches the oracle and ignores monotone transforms") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 10);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 6);
      y[i] = static_cast<double>(rng() % 6);
    }
    double rho = 0;
    try {
      rho = spearman(x, y);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUndefined);
      continue;
    }
    CHECK(rho == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-12));
    auto fx = x;
    for (auto& v : fx) v = std::exp(v) * 3 - 7;
    auto fy = y;
    for (auto& v : fy) v = -1.0 / (v + 1);  // strictly increasing on v >= 0
    CHECK(spearman(fx, fy) == doctest::Approx(rho).epsilon(1e-12));
  }
}

TEST_CASE("debiased win rate examples") {
  const Statement m{"m", "", "method text"}, b{"b", "", "baseline text"};
  std::vector<JudgeVerdict> vs{verdict("m", "m"), verdict("m", "b"), verdict("b", "b"), verdict("m", "m")};
  auto w = debiased_win_rate(vs, m, b);
  CHECK(w.rate == doctest::Approx(2.0 / 3.0));
  CHECK(w.n_decisive == 3);

  std::vector<JudgeVerdict> none{verdict("m", "b"), verdict("b", "m")};
  CHECK(code_of([&] { debiased_win_rate(none, m, b); }) == ErrorCode::kInsufficientSignal);

  std::vector<JudgeVerdict> other{{"ctx", "m", "zzz", "m", "m"}};
  CHECK(code_of([&] { debiased_win_rate(other, m, b); }) == ErrorCode::kValidation);
}

TEST_CASE("a method against itself is pinned at one half") {
  std::mt19937 rng(3);
  const Statement m{"m", "T", "same words"}, b{"b", "T", "same words"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<JudgeVerdict> vs;
    const int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) vs.push_back(verdict(rng() % 2 ? "m" : "b", rng() % 2 ? "m" : "b"));
    CHECK(debiased_win_rate(vs, m, b).rate == 0.5);
  }
}

TEST_CASE("mock judges show position bias only on ties") {
  JaccardJudge j;
  const JudgeContext ctx{"a", "q", "I like buses", "Night buses now"};
  const Statement x{"x", "", "night buses now please"}, y{"y", "", "plant trees"};
  auto v = judge_pair(j, ctx, x, y);
  CHECK(v.decisive());
  CHECK(v.verdict_xy == "x");
  const Statement x2{"x2", "", "night buses now please"};
  auto tie = judge_pair(j, ctx, x, x2);
  CHECK_FALSE(tie.decisive());
  CHECK(tie.verdict_xy == "x");
  CHECK(tie.verdict_yx == "x2");
  CoverageJudge c;
  CHECK(judge_pair(c, ctx, y, x).verdict_xy == "x");
}

TEST_CASE("actionability rubric anchors") {
  CHECK(mock_actionability("We must prioritise ethical AI") == 1);
  CHECK(mock_actionability("AI systems should be transparent and accountable") == 2);
  CHECK(mock_actionability("AI providers should publish model cards documenting their training data") == 3);
  CHECK(mock_actionability("AI providers must publish model cards within 30 days of release, audited "
                           "annually by an independent body") == 4);
  CHECK(mock_actionability("Section 2. AI providers shall publish model cards within 30 days; penalties "
                           "for non-compliance are set by the regulator.") == 5);
  CHECK(mock_actionability("") == 1);
}

TEST_CASE("frontier on the published judge points") {
  auto gpt = published::scores(true);
  auto f = published::methods(pareto_frontier(gpt));
  CHECK(f == std::vector<std::string>{"production_schulze", "bt_on_production", "single_shot_specific"});
  auto claude = published::scores(false);
  CHECK(published::methods(pareto_frontier(claude)) ==
        std::vector<std::string>{"production_schulze", "bt_on_production", "single_shot_specific"});
}

TEST_CASE("frontier small cases and affine invariance") {
  std::vector<MethodScore> one{{"a", "j", 0.3, 5, 2.0, 3, 1}};
  CHECK(published::methods(pareto_frontier(one)) == std::vector<std::string>{"a"});
  std::vector<MethodScore> two{{"a", "j", 0.3, 5, 2.0, 3, 1}, {"b", "j", 0.3, 5, 2.5, 3, 1}};
  CHECK(published::methods(pareto_frontier(two)) == std::vector<std::string>{"b"});
  std::vector<MethodScore> equal{{"a", "j", 0.3, 5, 2.0, 3, 1}, {"b", "j", 0.3, 5, 2.0, 3, 1}};
  CHECK(pareto_frontier(equal).size() == 2);
  std::vector<MethodScore> mixed{{"a", "j", 0.3, 5, 2.0, 3, 1}, {"b", "k", 0.3, 5, 2.0, 3, 1}};
  CHECK(code_of([&] { pareto_frontier(mixed); }) == ErrorCode::kValidation);
  std::vector<MethodScore> partial{{"a", "j", std::nullopt, 0, 4.0, 3, 1}, {"b", "j", 0.1, 5, 1.0, 3, 1}};
  CHECK(published::methods(pareto_frontier(partial)) == std::vector<std::string>{"b"});

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<MethodScore> rows;
    for (int i = 0; i < 8; ++i) {
      rows.push_back({"m" + std::to_string(i), "j", std::round(u(rng) * 10) / 10, 1,
                      1 + std::round(u(rng) * 8) / 2, 1, 1});
    }
    auto base = published::methods(pareto_frontier(rows));
    std::sort(base.begin(), base.end());
    auto scaled = rows;
    const double a = 0.1 + u(rng) * 5, b = u(rng) * 3 - 1;
    const bool repr_axis = trial % 2 == 0;
    for (auto& r : scaled) {
      if (repr_axis) r.representativeness = a * *r.representativeness + b;
      else r.actionability = a * *r.actionability + b;
    }
    auto after = published::methods(pareto_frontier(scaled));
    std::sort(after.begin(), after.end());
    CHECK(after == base);
    // Direct dominance oracle.
    for (const auto& m : base) {
      auto& p = *std::find_if(rows.begin(), rows.end(), [&](auto& r) { return r.method == m; });
      for (const auto& q : rows) {
        const bool dom = *q.representativeness >= *p.representativeness &&
                         *q.actionability >= *p.actionability &&
                         (*q.representativeness > *p.representativeness || *q.actionability > *p.actionability);
        CHECK_FALSE(dom);
      }
    }
  }
}

TEST_CASE("fixtures round-trip and load from disk") {
  auto f = synthetic::fixture(9);
  auto g = fixture_from_json(to_json(f));
  CHECK(to_json(g) == to_json(f));
  CHECK(code_of([] { fixture_from_json(Json{{"id", "x"}}); }) == ErrorCode::kValidation);
  auto disk = load_fixtures(AGORA_SOURCE_DIR "/fixtures");
  REQUIRE(disk.size() == 3);
  CHECK(disk[0].id == "ai-model-cards");
  for (const auto& d : disk) CHECK_NOTHROW(production_rankings(d));
  CHECK(code_of([] { load_fixtures("/nonexistent"); }) == ErrorCode::kNotFound);
}

TEST_CASE("production methods pick the aggregation winner") {
  Fixture f;
  f.id = "f";
  f.question = "q";
  f.statements = {{"A", "", "a"}, {"B", "", "b"}, {"C", "", "c"}};
  auto add = [&](const std::string& id, std::vector<std::string> order) {
    FixtureAgent a{id, "", "op", std::vector<CandidateId>{}};
    for (auto& o : order) a.production_ranking->emplace_back(o);
    f.agents.push_back(a);
  };
  add("1", {"A", "B", "C"});
  add("2", {"A", "B", "C"});
  add("3", {"B", "C", "A"});
  auto reg = default_registry();
  MockSynthesisBackend be;
  CHECK(select_methods(reg, {"production_schulze"})[0].run(f, be).id == "A");
  CHECK(select_methods(reg, {"bt_on_production"})[0].run(f, be).id == "A");
  f.agents[0].production_ranking->pop_back();
  CHECK(code_of([&] { select_methods(reg, {"production_schulze"})[0].run(f, be); }) ==
        ErrorCode::kValidation);
  CHECK(code_of([&] { select_methods(reg, {"nope"}); }) == ErrorCode::kNotFound);
}

TEST_CASE("registry has ten methods that all run on mock backends") {
  auto reg = default_registry();
  REQUIRE(reg.size() == 10);
  CHECK(reg[0].id == kBaselineMethod);
  MockSynthesisBackend be;
  const auto f = synthetic::fixture(4, 8);
  for (const auto& m : reg) {
    CAPTURE(m.id);
    Statement s = m.run(f, be);
    CHECK_FALSE(s.text().empty());
  }
  CHECK(be.system_candidates(f, 15, false).size() == 15);
  CHECK(mock_actionability(be.synthesize(SynthesisBias::kSpecific, f).text()) == 4);
}

TEST_CASE("comparison with the two production methods") {
  auto fixtures = three_fixtures();
  auto methods = select_methods(default_registry(),
                                {std::string(kBaselineMethod), "production_schulze", "bt_on_production"});
  MockSynthesisBackend be;
  JaccardJudge j1;
  CoverageJudge j2;
  std::vector<Judge*> judges{&j1, &j2};
  auto r = run_comparison(fixtures, methods, be, judges);
  REQUIRE(r.rows.size() == 6);
  for (const auto& row : r.rows) {
    CHECK(row.n_fixtures == 3);
    if (row.method == kBaselineMethod) CHECK(row.representativeness == 0.5);
  }
  CHECK(r.failures.empty());
  CHECK(r.frontier.size() == 2);
  CHECK(to_csv(r).starts_with("method,label,judge,"));
}

TEST_CASE("comparison is deterministic and independent of concurrency") {
  auto fixtures = three_fixtures();
  MockSynthesisBackend be;
  JaccardJudge j1;
  CoverageJudge j2;
  std::vector<Judge*> judges{&j1, &j2};
  const auto reg = default_registry();
  const auto a = run_comparison(fixtures, reg, be, judges);
  const auto b = run_comparison(fixtures, reg, be, judges);
  const auto c = run_comparison(fixtures, reg, be, judges, {.parallel = false});
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(to_json(a).dump() == to_json(c).dump());
  CHECK(to_csv(a) == to_csv(c));
}

TEST_CASE("ten-method comparison: frontier members are never dominated by the baseline") {
  std::vector<Fixture> fixtures;
  for (unsigned s = 10; s < 16; ++s) fixtures.push_back(synthetic::fixture(s, 7));
  MockSynthesisBackend be;
  JaccardJudge j1;
  CoverageJudge j2;
  std::vector<Judge*> judges{&j1, &j2};
  const auto r = run_comparison(fixtures, default_registry(), be, judges);
  for (const auto& judge : r.judges) {
    const auto& frontier = r.frontier.at(judge);
    CHECK_FALSE(frontier.empty());
    auto row = [&](const std::string& m) {
      return *std::find_if(r.rows.begin(), r.rows.end(),
                           [&](auto& x) { return x.method == m && x.judge == judge; });
    };
    const auto base = row(std::string(kBaselineMethod));
    REQUIRE(base.representativeness);
    CHECK(*base.representativeness == 0.5);
    for (const auto& m : frontier) {
      const auto p = row(m);
      const bool dom = *base.representativeness >= *p.representativeness &&
                       *base.actionability >= *p.actionability &&
                       (*base.representativeness > *p.representativeness ||
                        *base.actionability > *p.actionability);
      CHECK_FALSE(dom);
    }
  }
}

TEST_CASE("method and judge failures are isolated") {
  auto fixtures = three_fixtures();
  fixtures[1].agents[0].production_ranking.reset();
  fixtures[1].agents[1].production_ranking->pop_back();
  MockSynthesisBackend be;
  JaccardJudge good;
  FailingJudge bad;
  std::vector<Judge*> judges{&good, &bad};
  auto r = run_comparison(fixtures, select_methods(default_registry(), {std::string(kBaselineMethod), "production_schulze"}),
                          be, judges);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].fixture == fixtures[1].id);
  CHECK(r.failures[0].method == "production_schulze");
  for (const auto& row : r.rows) {
    if (row.method == "production_schulze") CHECK(row.n_fixtures == 2);
    if (row.judge == "failing") {
      CHECK_FALSE(row.actionability);
      if (row.method != kBaselineMethod) CHECK_FALSE(row.representativeness);
    }
  }
  CHECK_FALSE(r.warnings.empty());

  auto no_base = select_methods(default_registry(), {"production_schulze"});
  CHECK(code_of([&] { run_comparison(fixtures, no_base, be, judges); }) == ErrorCode::kValidation);
}

TEST_CASE("LLM backend and judge parse replies") {
  ScriptedClient c;
  c.replies["synth_specific"] = "TITLE: Buses\nSTATEMENT: Fund buses.";
  c.replies["system_candidates"] =
      "TITLE: One | STATEMENT: First.\nnoise\nTITLE: Two | STATEMENT: Second.\n";
  c.replies["acceptability"] = " cand-2 \n";
  c.replies["disagreeability"] = "4";
  c.replies["judge_pairwise"] = "2";
  c.replies["judge_actionability"] = "Level 3";
  LlmSynthesisBackend be(c);
  auto f = synthetic::fixture(1);
  CHECK(be.synthesize(SynthesisBias::kSpecific, f).body == "Fund buses.");
  auto cands = be.system_candidates(f, 2, false);
  REQUIRE(cands.size() == 2);
  CHECK(cands[1].title == "Two");
  CHECK(cands[1].body == "Second.");
  CHECK(be.most_acceptable(f, cands) == "cand-2");
  CHECK(be.disagreeability(cands[0]) == 4);
  CHECK(code_of([&] { be.synthesize(SynthesisBias::kBaseline, f); }) == ErrorCode::kTransport);
  LlmJudge j("llm", c);
  CHECK(j.prefer({}, cands[0], cands[1]) == 2);
  CHECK(j.actionability(cands[0], "q") == 3);
  c.replies["judge_pairwise"] = "maybe";
  CHECK(code_of([&] { j.prefer({}, cands[0], cands[1]); }) == ErrorCode::kValidation);
}

TEST_CASE("clustered opinions are more similar within than across clusters") {
  const auto groups = synthetic::clusters(21, 3, 12, 32, 0.6);
  double intra = 0;
  for (const auto& g : groups) intra += mean_pairwise_similarity(g);
  intra /= static_cast<double>(groups.size());
  double inter = 0;
  int n = 0;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      inter += mean_cross_similarity(groups[a], groups[b]);
      ++n;
    }
  }
  inter /= n;
  CHECK(intra - inter > 0.2);
}

}  // TEST_SUITE
