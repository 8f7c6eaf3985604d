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

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace agora::text {

// Lowercased ASCII-alphanumeric runs; every other byte separates tokens.
std::vector<std::string> tokens(std::string_view s);
std::set<std::string> token_set(std::string_view s);

// |a ∩ b| / |a ∪ b|; 1 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

std::string trim(std::string_view s);
std::string lower(std::string_view s);

// Text up to and including the first '.', '!' or '?' followed by whitespace
// or end of input; the whole trimmed text if there is none.
std::string first_sentence(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string hex64(std::uint64_t v);

}  // namespace agora::text
