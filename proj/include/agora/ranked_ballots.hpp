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

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "agora/common.hpp"

namespace agora {

// Dense n x n matrix in row-major order.
template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{})
      : n_(n), cells_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  T& operator()(std::size_t row, std::size_t col) { return cells_[row * n_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return cells_[row * n_ + col];
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> cells_;
};

// An agent's strict total order over a candidate pool, best first.
struct Ranking {
  AgentId agent;
  std::vector<CandidateId> order;

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

// d(x, y) = number of rankings placing x strictly above y. Rows and columns
// follow `candidates`.
struct PreferenceMatrix {
  std::vector<CandidateId> candidates;
  SquareMatrix<int> d;

  std::optional<std::size_t> index_of(const CandidateId& id) const;
  int at(const CandidateId& x, const CandidateId& y) const;
};

// Throws kValidation naming the agent unless `order` is a permutation of
// `pool`.
void require_complete(const Ranking& ranking, std::span<const CandidateId> pool);

// True iff `order` has no duplicates and the same members as `pool`.
bool is_permutation_of(std::span<const CandidateId> order,
                       std::span<const CandidateId> pool);

PreferenceMatrix build_preference_matrix(std::span<const Ranking> rankings,
                                         std::span<const CandidateId> pool);

// Every (winner, loser) pair implied by the order: n(n-1)/2 pairs, listed
// winner-major in rank order.
std::vector<std::pair<CandidateId, CandidateId>> implied_pairwise_outcomes(
    const Ranking& ranking);

// 1-based rank at which a new candidate lands in a ranking of length n:
// the median of {1..n}, upper median for even n.
std::size_t median_insert_rank(std::size_t prior_length) noexcept;

Ranking insert_at_median(const Ranking& ranking, const CandidateId& candidate);

Ranking withdraw_candidate(const Ranking& ranking, const CandidateId& candidate);

}  // namespace agora
