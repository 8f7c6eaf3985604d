#pragma once

#include <string>
#include <vector>

#include "agora/ranked_ballots.hpp"

namespace testutil {

inline std::vector<agora::CandidateId> ids(std::initializer_list<const char*> names) {
  std::vector<agora::CandidateId> out;
  for (auto n : names) out.emplace_back(n);
  return out;
}

inline std::vector<agora::CandidateId> ids(const std::vector<std::string>& names) {
  std::vector<agora::CandidateId> out;
  for (const auto& n : names) out.emplace_back(n);
  return out;
}

inline agora::Ranking ranking(const std::string& agent, std::initializer_list<const char*> order) {
  return agora::Ranking{agora::AgentId(agent), ids(order)};
}

inline std::vector<agora::Ranking> rankings(const std::vector<std::vector<std::string>>& ballots) {
  std::vector<agora::Ranking> out;
  for (size_t i = 0; i < ballots.size(); ++i) {
    out.push_back({agora::AgentId("agent" + std::to_string(i)), ids(ballots[i])});
  }
  return out;
}

}  // namespace testutil
