#include "reclap/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

// Keep the vendored header lean: no compression, no TLS. Endpoints are
// plain http; anything else is rejected at URL-parse time.
#include <httplib.h>

namespace reclap {

namespace {

using nlohmann::json;

class HttpTransport : public Transport {
 public:
  std::string post(const std::string& url, const std::string& body,
                   const std::vector<HttpHeader>& headers,
                   double timeout_seconds) override {
    ParsedUrl parsed = parse_http_url(url);
    httplib::Client client(parsed.host, parsed.port);
    const auto timeout = std::chrono::microseconds(
        static_cast<long long>(timeout_seconds * 1e6));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers http_headers;
    for (const HttpHeader& header : headers) {
      http_headers.emplace(header.name, header.value);
    }
    httplib::Result result = client.Post(parsed.path, http_headers, body,
                                         "application/json");
    if (!result) {
      throw std::runtime_error("llm: cannot reach endpoint " + url + " (" +
                               httplib::to_string(result.error()) + ")");
    }
    if (result->status < 200 || result->status >= 300) {
      throw std::runtime_error("llm: endpoint returned status " +
                               std::to_string(result->status));
    }
    return result->body;
  }
};

class RealSleeper : public Sleeper {
 public:
  void sleep_seconds(double seconds) override {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }
};

}  // namespace

void LlmClientConfig::validate() const {
  if (endpoint.empty()) {
    throw std::invalid_argument("llm: endpoint must not be empty");
  }
  if (model.empty()) {
    throw std::invalid_argument("llm: model name must not be empty");
  }
  if (max_inflight < 1) {
    throw std::invalid_argument("llm: max_inflight must be at least 1");
  }
  if (timeout_seconds <= 0.0) {
    throw std::invalid_argument("llm: timeout must be positive");
  }
  if (backoff_base_seconds < 0.0 || backoff_factor < 1.0) {
    throw std::invalid_argument(
        "llm: backoff base must be non-negative and factor at least 1");
  }
}

ParsedUrl parse_http_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw std::invalid_argument(
        "llm: unsupported endpoint scheme in \"" + url +
        "\"; only http:// endpoints are supported");
  }
  ParsedUrl parsed;
  std::string rest = url.substr(scheme.size());
  std::size_t slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  if (slash != std::string::npos) {
    parsed.path = rest.substr(slash);
  }
  if (authority.empty()) {
    throw std::invalid_argument("llm: endpoint \"" + url + "\" has no host");
  }
  std::size_t colon = authority.find(':');
  if (colon == std::string::npos) {
    parsed.host = authority;
  } else {
    parsed.host = authority.substr(0, colon);
    try {
      parsed.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      parsed.port = 0;
    }
    if (parsed.port <= 0 || parsed.port > 65535) {
      throw std::invalid_argument("llm: endpoint \"" + url +
                                  "\" has an invalid port");
    }
  }
  if (parsed.host.empty()) {
    throw std::invalid_argument("llm: endpoint \"" + url + "\" has no host");
  }
  return parsed;
}

std::unique_ptr<Transport> make_http_transport() {
  return std::make_unique<HttpTransport>();
}

std::unique_ptr<Sleeper> make_real_sleeper() {
  return std::make_unique<RealSleeper>();
}

LlmClient::LlmClient(LlmClientConfig config)
    : LlmClient(std::move(config), make_http_transport(),
                make_real_sleeper()) {}

LlmClient::LlmClient(LlmClientConfig config,
                     std::unique_ptr<Transport> transport,
                     std::unique_ptr<Sleeper> sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)) {
  config_.validate();
}

std::vector<HttpHeader> LlmClient::build_headers() const {
  std::vector<HttpHeader> headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || key[0] == '\0') {
      throw std::runtime_error("llm: environment variable " +
                               config_.api_key_env +
                               " is not set; it must hold the API key");
    }
    headers.push_back({"Authorization", std::string("Bearer ") + key});
  }
  return headers;
}

std::string LlmClient::attempt_once(const std::string& body,
                                    const std::vector<HttpHeader>& headers) {
  std::string response =
      transport_->post(config_.endpoint, body, headers,
                       config_.timeout_seconds);
  json doc;
  try {
    doc = json::parse(response);
  } catch (const json::exception& e) {
    throw std::runtime_error(
        std::string("llm: endpoint returned malformed document: ") +
        e.what());
  }
  if (!doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw std::runtime_error("llm: response has no choices");
  }
  const json& message = doc["choices"][0];
  if (!message.contains("message") || !message["message"].is_object() ||
      !message["message"].contains("content") ||
      !message["message"]["content"].is_string()) {
    throw std::runtime_error(
        "llm: first choice has no message content string");
  }
  return message["message"]["content"].get<std::string>();
}

std::string LlmClient::complete(const std::string& system_prompt,
                                const std::string& user_prompt) {
  json messages = json::array();
  if (!system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", user_prompt}});
  json request{{"model", config_.model},
               {"messages", messages},
               {"temperature", config_.temperature}};
  const std::string body = request.dump();
  const std::vector<HttpHeader> headers = build_headers();

  const std::size_t attempts = config_.retries + 1;
  double backoff = config_.backoff_base_seconds;
  std::string last_error;
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      sleeper_->sleep_seconds(backoff);
      backoff *= config_.backoff_factor;
    }
    try {
      return attempt_once(body, headers);
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw std::runtime_error("llm: request failed after " +
                           std::to_string(attempts) +
                           " attempts; last error: " + last_error);
}

std::vector<std::string> LlmClient::complete_many(
    const std::string& system_prompt,
    const std::vector<std::string>& user_prompts) {
  std::vector<std::string> results(user_prompts.size());
  std::vector<std::exception_ptr> failures(user_prompts.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= user_prompts.size()) return;
      try {
        results[index] = complete(system_prompt, user_prompts[index]);
      } catch (...) {
        failures[index] = std::current_exception();
      }
    }
  };

  const std::size_t workers =
      std::min(config_.max_inflight, user_prompts.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (std::thread& thread : pool) thread.join();

  for (std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return results;
}

}  // namespace reclap
