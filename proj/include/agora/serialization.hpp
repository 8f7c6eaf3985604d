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

#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "agora/deliberation.hpp"

namespace agora {

using Json = nlohmann::json;

// Wire and storage encodings. Field names are snake_case and stable; readers
// ignore fields they do not know.
Json to_json(const DeliberationHeader& header);
Json to_json(const DomainEvent& event);
Json to_json(const Deliberation& d);
Json to_json(const CandidateStatement& s);
Json to_json(const Opinion& o);

DeliberationHeader header_from_json(const Json& j);
DomainEvent event_from_json(const Json& j);
Deliberation deliberation_from_json(const Json& j);

Json ids_to_json(std::span<const CandidateId> ids);
std::vector<CandidateId> ids_from_json(const Json& j);

std::string_view to_string(LinkStrength v);
LinkStrength parse_link_strength(std::string_view s);

// Newline-delimited log: one header record, then one record per event.
struct EventLogFile {
  DeliberationHeader header;
  std::vector<DomainEvent> events;
};

void write_header_line(std::ostream& out, const DeliberationHeader& header);
void write_event_line(std::ostream& out, const DomainEvent& event);
void write_log(std::ostream& out, const EventLogFile& log);
// Malformed lines raise kCorruption naming the line number.
EventLogFile read_log(std::istream& in);

}  // namespace agora
