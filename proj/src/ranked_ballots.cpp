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

#include "agora/ranked_ballots.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace agora {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kForbidden: return "forbidden";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kClosed: return "closed";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kCorruption: return "corruption";
    case ErrorCode::kUndefined: return "undefined";
    case ErrorCode::kInsufficientSignal: return "insufficient_signal";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kConvergence: return "convergence";
  }
  return "unknown";
}

std::optional<std::size_t> PreferenceMatrix::index_of(const CandidateId& id) const {
  auto it = std::find(candidates.begin(), candidates.end(), id);
  if (it == candidates.end()) return std::nullopt;
  return static_cast<std::size_t>(it - candidates.begin());
}

int PreferenceMatrix::at(const CandidateId& x, const CandidateId& y) const {
  auto i = index_of(x);
  auto j = index_of(y);
  if (!i || !j) {
    throw Error(ErrorCode::kNotFound, "candidate not in preference matrix");
  }
  return d(*i, *j);
}

bool is_permutation_of(std::span<const CandidateId> order,
                       std::span<const CandidateId> pool) {
  if (order.size() != pool.size()) return false;
  std::unordered_set<CandidateId> members(pool.begin(), pool.end());
  std::unordered_set<CandidateId> seen;
  for (const auto& c : order) {
    if (!members.contains(c) || !seen.insert(c).second) return false;
  }
  return true;
}

void require_complete(const Ranking& ranking, std::span<const CandidateId> pool) {
  if (!is_permutation_of(ranking.order, pool)) {
    throw Error(ErrorCode::kValidation,
                "ranking of agent '" + ranking.agent.str() +
                    "' is not a complete strict order over the pool");
  }
}

PreferenceMatrix build_preference_matrix(std::span<const Ranking> rankings,
                                         std::span<const CandidateId> pool) {
  PreferenceMatrix m{{pool.begin(), pool.end()}, SquareMatrix<int>(pool.size())};
  std::unordered_map<CandidateId, std::size_t> index;
  for (std::size_t i = 0; i < pool.size(); ++i) index.emplace(pool[i], i);
  if (index.size() != pool.size()) {
    throw Error(ErrorCode::kValidation, "candidate pool contains duplicates");
  }

  std::vector<std::size_t> slots;
  for (const auto& r : rankings) {
    require_complete(r, pool);
    slots.clear();
    for (const auto& c : r.order) slots.push_back(index.at(c));
    for (std::size_t a = 0; a < slots.size(); ++a) {
      for (std::size_t b = a + 1; b < slots.size(); ++b) {
        ++m.d(slots[a], slots[b]);
      }
    }
  }
  return m;
}

std::vector<std::pair<CandidateId, CandidateId>> implied_pairwise_outcomes(
    const Ranking& ranking) {
  std::vector<std::pair<CandidateId, CandidateId>> out;
  const auto& o = ranking.order;
  out.reserve(o.size() * (o.size() - (o.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < o.size(); ++a) {
    for (std::size_t b = a + 1; b < o.size(); ++b) out.emplace_back(o[a], o[b]);
  }
  return out;
}

std::size_t median_insert_rank(std::size_t prior_length) noexcept {
  return prior_length / 2 + 1;
}

Ranking insert_at_median(const Ranking& ranking, const CandidateId& candidate) {
  if (std::find(ranking.order.begin(), ranking.order.end(), candidate) !=
      ranking.order.end()) {
    throw Error(ErrorCode::kValidation, "candidate '" + candidate.str() +
                                            "' already ranked by agent '" +
                                            ranking.agent.str() + "'");
  }
  Ranking out = ranking;
  const auto pos = median_insert_rank(ranking.order.size()) - 1;
  out.order.insert(out.order.begin() + static_cast<std::ptrdiff_t>(pos), candidate);
  return out;
}

Ranking withdraw_candidate(const Ranking& ranking, const CandidateId& candidate) {
  Ranking out = ranking;
  auto it = std::find(out.order.begin(), out.order.end(), candidate);
  if (it == out.order.end()) {
    throw Error(ErrorCode::kValidation, "candidate '" + candidate.str() +
                                            "' not ranked by agent '" +
                                            ranking.agent.str() + "'");
  }
  out.order.erase(it);
  return out;
}

}  // namespace agora
