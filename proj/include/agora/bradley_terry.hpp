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

#include <span>
#include <vector>

#include "agora/ranked_ballots.hpp"

namespace agora {

// w(x, y) = number of outcomes in which x beat y.
struct PairwiseWins {
  std::vector<CandidateId> candidates;
  SquareMatrix<int> w;
};

// Gauge-fixed strengths: log-strengths sum to zero.
struct BtStrengths {
  std::vector<CandidateId> candidates;
  std::vector<double> strengths;
  int iterations = 0;

  double strength(const CandidateId& id) const;
  double log_strength(const CandidateId& id) const;
};

struct BtOptions {
  double pseudocount = 0.5;
  double tolerance = 1e-10;  // max |change| in log-strength per sweep
  int max_iterations = 10000;
};

class BtConvergenceError : public Error {
 public:
  BtConvergenceError(const std::string& message, BtStrengths last)
      : Error(ErrorCode::kConvergence, message), last_(std::move(last)) {}

  const BtStrengths& last_iterate() const noexcept { return last_; }

 private:
  BtStrengths last_;
};

// Win counts implied by complete rankings over `pool`.
PairwiseWins wins_from_rankings(std::span<const Ranking> rankings,
                                std::span<const CandidateId> pool);

// Same, taking the pool (and its order) from the first ranking. Any ranking
// over a different candidate set is a validation error.
PairwiseWins wins_from_rankings(std::span<const Ranking> rankings);

// Regularized maximum-likelihood fit by minorization-maximization. The
// pseudocount is added to every ordered pair x != y.
BtStrengths bt_fit(const PairwiseWins& wins, const BtOptions& options = {});

// Sum over x != y of (w[x][y] + c) * log(s_x / (s_x + s_y)).
double bt_log_likelihood(const PairwiseWins& wins, double pseudocount,
                         std::span<const double> log_strengths);

// Argmax strength. Strengths within a relative 1e-9 count as tied, and ties
// go to the smallest id.
CandidateId bt_winner(const BtStrengths& strengths);

}  // namespace agora
