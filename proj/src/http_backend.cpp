// Copyright 2026 The kgcd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "kgcd/error.hpp"
#include "kgcd/llm_gateway.hpp"

namespace kgcd {

namespace {

constexpr std::size_t kBodyExcerpt = 200;

// Releases one in-flight slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) {
    sem_.acquire();
  }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

bool is_transient(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint '" + url + "' lacks a scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (config_.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      api_key_ = key;
    }
  }
  in_flight_ = std::make_unique<std::counting_semaphore<>>(config_.parallelism);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const {
  return "http:" + (config_.model.empty() ? scheme_host_port_ : config_.model);
}

Completion parse_completion_response(const nlohmann::json& body,
                                     bool want_logprobs,
                                     const std::string& backend_id) {
  Completion c;
  c.backend_id = backend_id;
  try {
    const auto& choice = body.at("choices").at(0);
    c.text = choice.at("text").get<std::string>();
    auto lp = choice.find("logprobs");
    if (lp != choice.end() && lp->is_object() &&
        lp->contains("token_logprobs")) {
      const auto& values = lp->at("token_logprobs");
      const nlohmann::json* strings =
          lp->contains("tokens") ? &lp->at("tokens") : nullptr;
      c.token_text_available = strings != nullptr;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].is_null()) continue;
        TokenLogprob t;
        t.logprob = std::min(0.0, values[i].get<double>());
        if (strings) t.token = strings->at(i).get<std::string>();
        c.tokens.push_back(std::move(t));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable(std::string("malformed completion response: ") +
                             e.what());
  }
  if (want_logprobs && c.tokens.empty()) {
    throw CapabilityMissing("backend returned no token log-probabilities");
  }
  return c;
}

Completion HttpBackend::do_complete(const CompletionRequest& request) {
  SlotGuard slot(*in_flight_);

  nlohmann::json payload;
  payload["model"] = config_.model;
  payload["prompt"] = request.prompt;
  payload["max_tokens"] = request.max_tokens;
  payload["temperature"] = request.temperature;
  payload["logprobs"] = request.want_logprobs;
  const std::string body = payload.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }

  std::string last_problem;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(config_.base_backoff * (1LL << (attempt - 1)));
    }
    ++attempts_;
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_problem = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw BackendUnavailable(std::string("response is not JSON: ") +
                                 e.what());
      }
      return parse_completion_response(parsed, request.want_logprobs, id());
    }
    if (is_transient(res->status)) {
      last_problem = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw BackendRejected(res->status, res->body.substr(0, kBodyExcerpt));
  }
  throw BackendUnavailable("backend " + scheme_host_port_ + " unavailable after " +
                           std::to_string(config_.max_retries + 1) +
                           " attempts (" + last_problem + ")");
}

}  // namespace kgcd
