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

#include <vector>

#include "agora/ranked_ballots.hpp"

namespace agora {

// How a pairwise defeat of x over y is weighted as a beat-path link.
// Only defeats (d[x][y] > d[y][x]) become links under either rule.
enum class LinkStrength {
  kWinningVotes,  // d[x][y]
  kMargins,       // d[x][y] - d[y][x]
};

// p(x, y) = strength of the widest beat path from x to y.
struct StrongestPaths {
  std::vector<CandidateId> candidates;
  SquareMatrix<int> p;
};

struct SchulzeResult {
  CandidateId winner;
  std::vector<CandidateId> order;
};

StrongestPaths strongest_paths(const PreferenceMatrix& d,
                               LinkStrength rule = LinkStrength::kWinningVotes);

// Orders candidates by how many others they beat under p (p[x][y] > p[y][x]),
// descending, ties by id. The head is always a Schulze winner since the beat
// relation on p is transitive. Requires at least one candidate.
SchulzeResult schulze_winner(const StrongestPaths& paths);

}  // namespace agora
