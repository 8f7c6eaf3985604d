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

#include <chrono>
#include <map>
#include <memory>
#include <string>

namespace agora {

// A prompt to send: which template, and the values for its {placeholders}.
struct PromptRequest {
  std::string template_id;
  std::map<std::string, std::string> substitutions;
};

// Outbound text-generation transport. Implementations must be safe to call
// from several threads at once.
class TextClient {
 public:
  virtual ~TextClient() = default;
  virtual std::string complete(const PromptRequest& request) = 0;
};

// Template id -> template text with {name} placeholders.
class PromptLibrary {
 public:
  static PromptLibrary defaults();

  const std::string& get(const std::string& id) const;
  void set(std::string id, std::string text);
  bool contains(const std::string& id) const { return templates_.contains(id); }

  // Replaces every {name} with its substitution. Unknown placeholders are a
  // validation error so a typo never reaches the model.
  std::string render(const PromptRequest& request) const;

 private:
  std::map<std::string, std::string> templates_;
};

struct ChatClientConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;

  // AGORA_LLM_ENDPOINT, AGORA_LLM_API_KEY, AGORA_LLM_MODEL,
  // AGORA_LLM_TIMEOUT_MS, AGORA_LLM_RETRIES.
  static ChatClientConfig from_env();
};

// Renders the template locally and posts it as a single user message to an
// OpenAI-compatible /chat/completions endpoint. Network failures, 429 and
// 5xx are retried; the final failure surfaces as kTransport.
class ChatCompletionClient : public TextClient {
 public:
  ChatCompletionClient(ChatClientConfig config, PromptLibrary prompts);
  std::string complete(const PromptRequest& request) override;

 private:
  ChatClientConfig config_;
  PromptLibrary prompts_;
};

}  // namespace agora
