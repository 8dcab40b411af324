#pragma once

#include <string>

#include "dynarag/policy.hpp"

namespace dynarag {

struct RemoteConfig {
  std::string endpoint_url;              // e.g. http://localhost:8089/v1/chat/completions
  std::string model = "default";
  std::string api_key_env = "DYNARAG_API_KEY";
  double temperature = 0.0;
  int max_tokens = 256;
  int retries = 2;           // attempts after the first, exponential backoff
  int backoff_base_ms = 200;
  bool verbose = false;      // request/response logging with the token redacted
};

/// Chat-completion client: renders the role prompt, posts it as a single
/// user message, and returns the first choice's message content. Transport
/// or protocol failure after the retry budget throws BackendUnavailable.
class RemoteChatBackend : public PolicyBackend {
 public:
  explicit RemoteChatBackend(RemoteConfig cfg);
  ActionSample act(Role role, const Observation& obs) override;

 private:
  RemoteConfig cfg_;
  std::string host_;  // scheme://host:port
  std::string path_;
};

}  // namespace dynarag
