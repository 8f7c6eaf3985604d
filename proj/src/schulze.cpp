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

#include "agora/schulze.hpp"

#include <algorithm>
#include <numeric>

namespace agora {

StrongestPaths strongest_paths(const PreferenceMatrix& d, LinkStrength rule) {
  const std::size_t n = d.candidates.size();
  StrongestPaths out{d.candidates, SquareMatrix<int>(n)};
  auto& p = out.p;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || d.d(i, j) <= d.d(j, i)) continue;
      p(i, j) = rule == LinkStrength::kWinningVotes ? d.d(i, j)
                                                    : d.d(i, j) - d.d(j, i);
    }
  }

  // Floyd-Warshall on the (max, min) semiring.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        p(i, j) = std::max(p(i, j), std::min(p(i, k), p(k, j)));
      }
    }
  }
  return out;
}

SchulzeResult schulze_winner(const StrongestPaths& paths) {
  const std::size_t n = paths.candidates.size();
  if (n == 0) throw Error(ErrorCode::kValidation, "schulze_winner on empty pool");

  std::vector<int> beats(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && paths.p(i, j) > paths.p(j, i)) ++beats[i];
    }
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (beats[a] != beats[b]) return beats[a] > beats[b];
    return paths.candidates[a] < paths.candidates[b];
  });

  SchulzeResult result;
  result.order.reserve(n);
  for (auto i : idx) result.order.push_back(paths.candidates[i]);
  result.winner = result.order.front();
  return result;
}

}  // namespace agora
