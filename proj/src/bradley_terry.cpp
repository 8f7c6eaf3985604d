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

#include "agora/bradley_terry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace agora {
namespace {

std::size_t find_index(const std::vector<CandidateId>& c, const CandidateId& id) {
  auto it = std::find(c.begin(), c.end(), id);
  if (it == c.end()) {
    throw Error(ErrorCode::kNotFound, "candidate '" + id.str() + "' has no strength");
  }
  return static_cast<std::size_t>(it - c.begin());
}

// Every node reachable from node 0 along win edges and along reversed win
// edges.
bool strongly_connected(const SquareMatrix<int>& w) {
  const std::size_t n = w.size();
  auto reach_all = [&](bool reversed) {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      auto i = q.front();
      q.pop();
      for (std::size_t j = 0; j < n; ++j) {
        int edge = reversed ? w(j, i) : w(i, j);
        if (!seen[j] && edge > 0) {
          seen[j] = true;
          q.push(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach_all(false) && reach_all(true);
}

void center_logs(std::vector<double>& logs) {
  double mean = 0;
  for (double v : logs) mean += v;
  mean /= static_cast<double>(logs.size());
  for (double& v : logs) v -= mean;
}

BtStrengths to_strengths(const std::vector<CandidateId>& c,
                         const std::vector<double>& logs, int iterations) {
  BtStrengths s{c, {}, iterations};
  s.strengths.reserve(logs.size());
  for (double v : logs) s.strengths.push_back(std::exp(v));
  return s;
}

}  // namespace

double BtStrengths::strength(const CandidateId& id) const {
  return strengths[find_index(candidates, id)];
}

double BtStrengths::log_strength(const CandidateId& id) const {
  return std::log(strength(id));
}

PairwiseWins wins_from_rankings(std::span<const Ranking> rankings,
                                std::span<const CandidateId> pool) {
  auto d = build_preference_matrix(rankings, pool);
  return PairwiseWins{std::move(d.candidates), std::move(d.d)};
}

PairwiseWins wins_from_rankings(std::span<const Ranking> rankings) {
  if (rankings.empty()) return {};
  const auto& pool = rankings.front().order;
  for (const auto& r : rankings) {
    if (!is_permutation_of(r.order, pool)) {
      throw Error(ErrorCode::kValidation,
                  "ranking of agent '" + r.agent.str() + "' covers a different pool");
    }
  }
  return wins_from_rankings(rankings, pool);
}

BtStrengths bt_fit(const PairwiseWins& wins, const BtOptions& options) {
  const std::size_t n = wins.candidates.size();
  if (n == 0) throw Error(ErrorCode::kValidation, "bt_fit on empty pool");
  if (wins.w.size() != n) {
    throw Error(ErrorCode::kValidation, "win matrix does not match candidate list");
  }
  if (!(options.pseudocount >= 0)) {
    throw Error(ErrorCode::kValidation, "pseudocount must be non-negative");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (wins.w(i, i) != 0) throw Error(ErrorCode::kValidation, "w[x][x] must be 0");
    for (std::size_t j = 0; j < n; ++j) {
      if (wins.w(i, j) < 0) throw Error(ErrorCode::kValidation, "negative win count");
    }
  }
  std::vector<double> logs(n, 0.0);
  if (n == 1) return to_strengths(wins.candidates, logs, 0);
  if (options.pseudocount == 0 && !strongly_connected(wins.w)) {
    throw Error(ErrorCode::kValidation,
                "unregularized fit has no finite maximum: comparison graph is not "
                "strongly connected");
  }

  const double c = options.pseudocount;
  std::vector<double> total_wins(n, 0.0);
  SquareMatrix<double> games(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      total_wins[i] += wins.w(i, j) + c;
      games(i, j) = wins.w(i, j) + wins.w(j, i) + 2 * c;
    }
  }

  std::vector<double> gamma(n, 1.0);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    std::vector<double> prev = logs;
    for (std::size_t i = 0; i < n; ++i) {
      double denom = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) denom += games(i, j) / (gamma[i] + gamma[j]);
      }
      gamma[i] = total_wins[i] / denom;
    }
    for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(gamma[i]);
    center_logs(logs);
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      gamma[i] = std::exp(logs[i]);
      change = std::max(change, std::abs(logs[i] - prev[i]));
    }
    if (change < options.tolerance) return to_strengths(wins.candidates, logs, iter);
  }
  throw BtConvergenceError(
      "Bradley-Terry fit did not converge within " +
          std::to_string(options.max_iterations) + " iterations",
      to_strengths(wins.candidates, logs, options.max_iterations));
}

double bt_log_likelihood(const PairwiseWins& wins, double pseudocount,
                         std::span<const double> log_strengths) {
  const std::size_t n = wins.candidates.size();
  double ll = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      // log(s_i / (s_i + s_j)) = -log(1 + exp(theta_j - theta_i))
      double diff = log_strengths[j] - log_strengths[i];
      ll -= (wins.w(i, j) + pseudocount) * std::log1p(std::exp(diff));
    }
  }
  return ll;
}

CandidateId bt_winner(const BtStrengths& s) {
  if (s.candidates.empty()) throw Error(ErrorCode::kValidation, "bt_winner on empty pool");
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.candidates.size(); ++i) {
    const double a = s.strengths[i];
    const double b = s.strengths[best];
    const bool tied = std::abs(a - b) <= 1e-9 * std::max(a, b);
    if ((!tied && a > b) || (tied && s.candidates[i] < s.candidates[best])) best = i;
  }
  return s.candidates[best];
}

}  // namespace agora
