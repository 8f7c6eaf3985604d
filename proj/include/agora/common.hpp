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

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace agora {

// Error categories shared by every module. The platform maps each onto an
// HTTP status; the CLI maps them onto exit codes.
enum class ErrorCode {
  kValidation,
  kConflict,
  kNotFound,
  kForbidden,
  kUnauthorized,
  kClosed,
  kUnsupported,
  kCorruption,
  kUndefined,
  kInsufficientSignal,
  kTransport,
  kConvergence,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Identifier with a phantom tag so agent, candidate and deliberation ids do
// not mix.
template <typename Tag>
class StrongId {
 public:
  StrongId() = default;
  explicit StrongId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
  friend bool operator==(const StrongId&, const StrongId&) = default;

 private:
  std::string value_;
};

using CandidateId = StrongId<struct CandidateTag>;
using AgentId = StrongId<struct AgentTag>;
using DeliberationId = StrongId<struct DeliberationTag>;
using UserId = StrongId<struct UserTag>;

// Milliseconds since the Unix epoch. Recorded on events, never used to order
// them.
using Timestamp = std::int64_t;

// 64-bit FNV-1a. Stable across processes and platforms, which std::hash is
// not; the mock generators depend on that.
constexpr std::uint64_t fnv1a(std::string_view data,
                              std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace agora

template <typename Tag>
struct std::hash<agora::StrongId<Tag>> {
  std::size_t operator()(const agora::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
