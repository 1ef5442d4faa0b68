#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cear/error.hpp"
#include "cear/validate.hpp"

namespace cear {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};  // doubles per retry
};

/// Chat-completions transport. Posts
///   {"model":…, "messages":[{"role":"system",…},{"role":"user",…}],
///    "temperature":…, "top_p":…}
/// to the configured endpoint and returns the first message content of the
/// reply. Retries with exponential backoff before raising TransportError.
class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(std::string endpoint, std::string model,
                 std::string bearer_token = from_env(),
                 RetryPolicy retry = RetryPolicy{})
      : model_(std::move(model)),
        token_(std::move(bearer_token)),
        retry_(retry) {
    split_endpoint(endpoint);
  }

  static std::string from_env() {
    const char* token = std::getenv("CEAR_LLM_TOKEN");
    return token ? token : "";
  }

  std::string id() const override { return model_; }

  size_t calls() const { return calls_; }

  std::string chat(const std::string& system, const std::string& user,
                   const SamplingConfig& config) override {
    nlohmann::ordered_json body{
        {"model", model_},
        {"messages",
         {{{"role", "system"}, {"content", system}},
          {{"role", "user"}, {"content", user}}}},
        {"temperature", config.temperature},
        {"top_p", config.top_p}};
    const std::string payload = body.dump();

    std::string last_error;
    auto backoff = retry_.initial_backoff;
    for (int attempt = 0; attempt < retry_.attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      ++calls_;
      httplib::Client client(base_);
      client.set_read_timeout(120, 0);
      httplib::Headers headers;
      if (!token_.empty())
        headers.emplace("Authorization", "Bearer " + token_);
      auto res = client.Post(path_, headers, payload, "application/json");
      if (!res) {
        last_error = "connection failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      return extract_answer(res->body);
    }
    throw Error(ErrorKind::TransportError,
                base_ + path_ + " after " + std::to_string(retry_.attempts) +
                    " attempts: " + last_error);
  }

 private:
  // Reply shapes seen in the wild: OpenAI-style choices, a bare message, or
  // a top-level content string.
  std::string extract_answer(const std::string& body) const {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
      throw Error(ErrorKind::TransportError, "reply is not JSON");
    if (j.contains("choices") && j.at("choices").is_array() &&
        !j.at("choices").empty()) {
      const auto& first = j.at("choices").front();
      if (first.contains("message"))
        return first.at("message").at("content").get<std::string>();
      if (first.contains("text")) return first.at("text").get<std::string>();
    }
    if (j.contains("message") && j.at("message").contains("content"))
      return j.at("message").at("content").get<std::string>();
    if (j.contains("content") && j.at("content").is_string())
      return j.at("content").get<std::string>();
    throw Error(ErrorKind::TransportError, "reply has no message content");
  }

  void split_endpoint(const std::string& endpoint) {
    size_t scheme = endpoint.find("://");
    size_t path_start = scheme == std::string::npos
                            ? endpoint.find('/')
                            : endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) {
      base_ = endpoint;
      path_ = "/";
    } else {
      base_ = endpoint.substr(0, path_start);
      path_ = endpoint.substr(path_start);
    }
  }

  std::string base_;   // scheme://host[:port]
  std::string path_;   // /v1/chat/completions
  std::string model_;
  std::string token_;
  RetryPolicy retry_;
  size_t calls_ = 0;
};

}  // namespace cear
