#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace reclap {

// Generic chat-completion endpoint. The API key is read from the process
// environment via api_key_env; keys never live in config files.
struct LlmClientConfig {
  std::string endpoint = "http://127.0.0.1:8088/v1/chat/completions";
  std::string model = "local-chat";
  std::string api_key_env;      // empty = unauthenticated endpoint
  std::size_t max_inflight = 4;
  double timeout_seconds = 60.0;
  std::size_t retries = 3;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  double temperature = 0.7;

  void validate() const;
};

struct HttpHeader {
  std::string name;
  std::string value;
};

// One HTTP round trip; the seam tests mock. Throws on connection failure
// or a non-2xx status, returns the raw response body otherwise.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string post(const std::string& url, const std::string& body,
                           const std::vector<HttpHeader>& headers,
                           double timeout_seconds) = 0;
};

// Backoff seam so retry tests run instantly.
class Sleeper {
 public:
  virtual ~Sleeper() = default;
  virtual void sleep_seconds(double seconds) = 0;
};

std::unique_ptr<Transport> make_http_transport();
std::unique_ptr<Sleeper> make_real_sleeper();

// Pieces of an http:// URL as the transport needs them.
struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};
ParsedUrl parse_http_url(const std::string& url);

class LlmClient {
 public:
  explicit LlmClient(LlmClientConfig config);
  LlmClient(LlmClientConfig config, std::unique_ptr<Transport> transport,
            std::unique_ptr<Sleeper> sleeper);

  // One completion: POSTs {model, messages, temperature}, retries with
  // exponential backoff, returns the first choice's message content.
  std::string complete(const std::string& system_prompt,
                       const std::string& user_prompt);

  // Bounded-concurrency batch (at most max_inflight requests in flight);
  // results are joined in input order. The first failure, in input order,
  // is rethrown after all workers finish.
  std::vector<std::string> complete_many(
      const std::string& system_prompt,
      const std::vector<std::string>& user_prompts);

  const LlmClientConfig& config() const { return config_; }

 private:
  std::string attempt_once(const std::string& body,
                           const std::vector<HttpHeader>& headers);
  std::vector<HttpHeader> build_headers() const;

  LlmClientConfig config_;
  std::unique_ptr<Transport> transport_;
  std::unique_ptr<Sleeper> sleeper_;
};

}  // namespace reclap
