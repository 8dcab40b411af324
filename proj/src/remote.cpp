#include "dynarag/remote.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dynarag/errors.hpp"
#include "dynarag/prompts.hpp"

namespace dynarag {

namespace {

// Splits "scheme://host:port/path" into (scheme://host:port, /path).
std::pair<std::string, std::string> split_url(const std::string& url) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigurationError("endpoint url must include a scheme: " + url);
  }
  const size_t path_start = url.find('/', scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RemoteChatBackend::RemoteChatBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint_url.empty()) throw ConfigurationError("remote backend needs an endpoint url");
  std::tie(host_, path_) = split_url(cfg_.endpoint_url);
}

ActionSample RemoteChatBackend::act(Role role, const Observation& obs) {
  nlohmann::json request{
      {"model", cfg_.model},
      {"messages", nlohmann::json::array({nlohmann::json{
                       {"role", "user"}, {"content", render_prompt(role, obs)}}})},
      {"temperature", cfg_.temperature},
      {"max_tokens", cfg_.max_tokens},
  };
  const std::string body = request.dump();

  httplib::Headers headers;
  const char* token = std::getenv(cfg_.api_key_env.c_str());
  if (token && *token) headers.emplace("Authorization", std::string("Bearer ") + token);

  if (cfg_.verbose) {
    std::cerr << "[remote] POST " << host_ << path_
              << (token ? " (Authorization: Bearer ***)" : "") << "\n[remote] " << body << "\n";
  }

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg_.backoff_base_ms * (1 << (attempt - 1))));
    }
    httplib::Client client(host_);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      if (cfg_.verbose) std::cerr << "[remote] " << res->body << "\n";
      ActionSample sample;
      sample.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      return sample;
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  throw BackendUnavailable(last_error);
}

}  // namespace dynarag
