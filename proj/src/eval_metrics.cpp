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
#include <cmath>
#include <numeric>
#include <set>

#include "agora/eval.hpp"
#include "agora/text.hpp"

namespace agora::eval {
namespace {

const std::set<std::string> kActors = {
    "providers", "provider", "developers", "developer", "companies", "company", "government",
    "governments", "ministry", "agency", "agencies", "regulator", "regulators", "council",
    "parliament", "congress", "commission", "board", "body", "court", "courts", "employers",
    "schools", "city", "operators", "platforms", "department", "authority", "authorities",
    "municipality", "landlords", "hospitals", "police", "banks", "insurers", "universities",
    "legislature", "ombudsman", "inspectorate", "regulator", "mayor",
};

const std::set<std::string> kMechanisms = {
    "publish", "audit", "audited", "audits", "register", "license", "licence", "report",
    "disclose", "fund", "ban", "tax", "require", "certify", "inspect", "label", "document",
    "documenting", "file", "submit", "cap", "subsidise", "subsidize", "enforce", "review", "pay",
    "build", "provide", "hire", "train", "extend", "run", "levy", "mandate", "allocate", "expand",
};

const std::set<std::string> kBindingWords = {
    "annually", "quarterly", "monthly", "weekly", "daily", "days", "weeks",
    "months", "years", "deadline", "percent",
};

const std::set<std::string> kDirectives = {
    "should", "must", "shall", "need", "needs", "ought", "will", "require", "requires",
};

const std::set<std::string> kProperties = {
    "transparent", "accountable", "fair", "safe", "accessible", "explainable", "auditable",
    "affordable", "open",
};

const std::set<std::string> kLegalMarkers = {
    "shall", "section", "article", "penalty", "penalties", "fines", "remedy", "remedies",
    "pursuant", "compliance",
};

bool any_in(const std::set<std::string>& toks, const std::set<std::string>& lexicon) {
  return std::any_of(toks.begin(), toks.end(), [&](const auto& t) { return lexicon.contains(t); });
}

int count_in(const std::set<std::string>& toks, const std::set<std::string>& lexicon) {
  return static_cast<int>(std::count_if(toks.begin(), toks.end(),
                                        [&](const auto& t) { return lexicon.contains(t); }));
}

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) throw Error(ErrorCode::kUndefined, "constant series has no rank variance");
  return sab / std::sqrt(saa * sbb);
}

int parse_int_reply(const std::string& reply, int lo, int hi) {
  const std::string t = text::trim(reply);
  for (char c : t) {
    if (c >= '0' && c <= '9') {
      const int v = c - '0';
      if (v >= lo && v <= hi) return v;
      break;
    }
  }
  throw Error(ErrorCode::kValidation, "expected a number in range, got: " + t);
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kValidation, "embedding dimensions differ");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0 || nb == 0) throw Error(ErrorCode::kValidation, "zero embedding");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (na * nb);
}

double mean_pairwise_similarity(std::span<const OpinionVector> vectors) {
  if (vectors.size() < 2) throw Error(ErrorCode::kUndefined, "need at least two opinions");
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      sum += cosine(vectors[i].embedding, vectors[j].embedding);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double mean_cross_similarity(std::span<const OpinionVector> a, std::span<const OpinionVector> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kUndefined, "empty group");
  double sum = 0;
  for (const auto& x : a) {
    for (const auto& y : b) sum += cosine(x.embedding, y.embedding);
  }
  return sum / static_cast<double>(a.size() * b.size());
}

std::vector<double> HashedBagOfWordsEmbedder::embed(std::string_view s) {
  std::vector<double> v(dim_, 0.0);
  for (const auto& tok : text::tokens(s)) {
    const std::uint64_t h = fnv1a(tok);
    v[h % dim_] += (fnv1a(tok, h) & 1) ? 1.0 : -1.0;
  }
  const double n = norm(v);
  if (n == 0) throw Error(ErrorCode::kValidation, "text has no embeddable tokens");
  for (auto& x : v) x /= n;
  return v;
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::kValidation, "series lengths differ");
  if (xs.size() < 3) throw Error(ErrorCode::kValidation, "need at least three observations");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

std::string Statement::text() const {
  if (title.empty()) return body;
  if (body.empty()) return title;
  return title + ". " + body;
}

WinRate debiased_win_rate(std::span<const JudgeVerdict> verdicts, const Statement& method,
                          const Statement& baseline) {
  for (const auto& v : verdicts) {
    const bool same_pair = (v.x == method.id && v.y == baseline.id) ||
                           (v.x == baseline.id && v.y == method.id);
    if (!same_pair) throw Error(ErrorCode::kValidation, "verdict concerns a different pair");
  }
  if (method.text() == baseline.text()) {
    const int n = static_cast<int>(verdicts.size());
    return {0.5, 0.5 * n, n};
  }
  WinRate out;
  for (const auto& v : verdicts) {
    if (!v.decisive()) continue;
    ++out.n_decisive;
    if (v.verdict_xy == method.id) out.wins += 1;
  }
  if (out.n_decisive == 0) throw Error(ErrorCode::kInsufficientSignal, "no decisive verdicts");
  out.rate = out.wins / out.n_decisive;
  return out;
}

JudgeVerdict judge_pair(Judge& judge, const JudgeContext& ctx, const Statement& x, const Statement& y) {
  JudgeVerdict v;
  v.context_id = ctx.context_id;
  v.x = x.id;
  v.y = y.id;
  v.verdict_xy = judge.prefer(ctx, x, y) == 1 ? x.id : y.id;
  v.verdict_yx = judge.prefer(ctx, y, x) == 1 ? y.id : x.id;
  return v;
}

int mock_actionability(std::string_view statement) {
  const auto toks = text::token_set(statement);
  const bool actor = any_in(toks, kActors);
  const bool mechanism = any_in(toks, kMechanisms);
  const bool binding =
      any_in(toks, kBindingWords) ||
      std::any_of(toks.begin(), toks.end(), [](const std::string& t) {
        return std::any_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
      });
  if (actor && mechanism) {
    if (!binding) return 3;
    return count_in(toks, kLegalMarkers) >= 2 ? 5 : 4;
  }
  if (any_in(toks, kDirectives) && (mechanism || any_in(toks, kProperties))) return 2;
  return 1;
}

int JaccardJudge::prefer(const JudgeContext& ctx, const Statement& first, const Statement& second) {
  const auto context = text::token_set(ctx.profile + " " + ctx.opinion);
  const double a = text::jaccard(text::token_set(first.text()), context);
  const double b = text::jaccard(text::token_set(second.text()), context);
  return b > a ? 2 : 1;
}

int JaccardJudge::actionability(const Statement& s, std::string_view) {
  return mock_actionability(s.text());
}

int CoverageJudge::prefer(const JudgeContext& ctx, const Statement& first, const Statement& second) {
  auto target = text::token_set(ctx.opinion);
  if (target.empty()) target = text::token_set(ctx.profile);
  auto covered = [&](const Statement& s) {
    const auto toks = text::token_set(s.text());
    return std::count_if(target.begin(), target.end(), [&](const auto& t) { return toks.contains(t); });
  };
  return covered(second) > covered(first) ? 2 : 1;
}

int CoverageJudge::actionability(const Statement& s, std::string_view) {
  return mock_actionability(s.text());
}

int LlmJudge::prefer(const JudgeContext& ctx, const Statement& first, const Statement& second) {
  return parse_int_reply(client_.complete({"judge_pairwise",
                                           {{"profile", ctx.profile},
                                            {"opinion", ctx.opinion},
                                            {"first", first.text()},
                                            {"second", second.text()}}}),
                         1, 2);
}

int LlmJudge::actionability(const Statement& s, std::string_view) {
  return parse_int_reply(client_.complete({"judge_actionability", {{"statement", s.text()}}}), 1, 5);
}

std::vector<MethodScore> pareto_frontier(std::span<const MethodScore> scores) {
  std::vector<const MethodScore*> points;
  for (const auto& s : scores) {
    if (!scores.empty() && s.judge != scores.front().judge) {
      throw Error(ErrorCode::kValidation, "frontier rows must come from one judge");
    }
    if (s.representativeness && s.actionability) points.push_back(&s);
  }
  std::vector<MethodScore> out;
  for (const auto* p : points) {
    const bool dominated = std::any_of(points.begin(), points.end(), [&](const MethodScore* q) {
      const double qr = *q->representativeness, qa = *q->actionability;
      const double pr = *p->representativeness, pa = *p->actionability;
      return qr >= pr && qa >= pa && (qr > pr || qa > pa);
    });
    if (!dominated) out.push_back(*p);
  }
  std::sort(out.begin(), out.end(), [](const MethodScore& a, const MethodScore& b) {
    if (*a.representativeness != *b.representativeness) {
      return *a.representativeness > *b.representativeness;
    }
    if (*a.actionability != *b.actionability) return *a.actionability > *b.actionability;
    return a.method < b.method;
  });
  return out;
}

}  // namespace agora::eval
