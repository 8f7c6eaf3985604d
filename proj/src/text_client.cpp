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

#include "agora/text_client.hpp"

#include <cstdlib>
#include <thread>

#include "agora/common.hpp"
#include "httplib.h"
#include "json.hpp"

namespace agora {
namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

// Splits "https://host:443/v1" into ("https://host:443", "/v1").
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::kValidation, "endpoint must include a scheme: " + endpoint);
  }
  auto path = endpoint.find('/', scheme + 3);
  if (path == std::string::npos) return {endpoint, ""};
  auto base = endpoint.substr(path);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {endpoint.substr(0, path), base};
}

}  // namespace

ChatClientConfig ChatClientConfig::from_env() {
  ChatClientConfig c;
  c.endpoint = env_or("AGORA_LLM_ENDPOINT", "");
  c.api_key = env_or("AGORA_LLM_API_KEY", "");
  c.model = env_or("AGORA_LLM_MODEL", "");
  c.timeout = std::chrono::milliseconds(std::stoll(env_or("AGORA_LLM_TIMEOUT_MS", "30000")));
  c.retries = std::stoi(env_or("AGORA_LLM_RETRIES", "2"));
  return c;
}

const std::string& PromptLibrary::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::kNotFound, "no prompt template '" + id + "'");
  return it->second;
}

void PromptLibrary::set(std::string id, std::string text) {
  templates_[std::move(id)] = std::move(text);
}

std::string PromptLibrary::render(const PromptRequest& request) const {
  const std::string& tpl = get(request.template_id);
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      auto close = tpl.find('}', i);
      if (close != std::string::npos) {
        const auto name = tpl.substr(i + 1, close - i - 1);
        auto it = request.substitutions.find(name);
        if (it == request.substitutions.end()) {
          throw Error(ErrorCode::kValidation, "template '" + request.template_id +
                                                  "' has no value for {" + name + "}");
        }
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out += tpl[i++];
  }
  return out;
}

ChatCompletionClient::ChatCompletionClient(ChatClientConfig config, PromptLibrary prompts)
    : config_(std::move(config)), prompts_(std::move(prompts)) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kValidation, "no LLM endpoint configured (AGORA_LLM_ENDPOINT)");
  }
}

std::string ChatCompletionClient::complete(const PromptRequest& request) {
  const auto prompt = prompts_.render(request);
  const auto [host, base] = split_endpoint(config_.endpoint);

  nlohmann::json body{{"model", config_.model},
                      {"messages", {{{"role", "user"}, {"content", prompt}}}}};
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
    httplib::Client client(host);
    const auto secs = config_.timeout.count() / 1000;
    const auto usecs = (config_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    auto res = client.Post(base + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kTransport, "LLM endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kTransport, std::string("malformed LLM response: ") + e.what());
    }
  }
  throw Error(ErrorCode::kTransport, "LLM request failed after retries: " + last_error);
}

}  // namespace agora
