#include <chrono>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "skillforge/optimizer/optimizer.hpp"

namespace skillforge::optimizer {

using json = nlohmann::ordered_json;

HttpBackend::HttpBackend(EndpointConfig config) : config_(std::move(config)) {}

namespace {

// Splits http://host:port/prefix into client root and path prefix.
bool split_url(const std::string& url, std::string& root, std::string& prefix) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) return false;
  auto path = url.find('/', scheme + 3);
  if (path == std::string::npos) {
    root = url;
    prefix.clear();
  } else {
    root = url.substr(0, path);
    prefix = url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }
  return true;
}

}  // namespace

CompletionResult HttpBackend::propose(const std::string& prompt,
                                      const telemetry::DiagnosticReport&,
                                      const OptimizerState&) {
  std::string root, prefix;
  if (!split_url(config_.base_url, root, prefix))
    return EndpointError{"malformed base URL: " + config_.base_url};

  httplib::Client client(root);
  client.set_connection_timeout(config_.timeout_s);
  client.set_read_timeout(config_.timeout_s);
  client.set_write_timeout(config_.timeout_s);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  json body;
  body["model"] = config_.model;
  body["messages"] = json::array(
      {json{{"role", "system"},
            {"content",
             "You are the skill-library co-optimizer for a cooperative "
             "kitchen team. Reply with a skill-DSL document only."}},
       json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = config_.temperature;
  body["top_p"] = config_.top_p;
  body["max_tokens"] = config_.max_tokens;

  auto begin = std::chrono::steady_clock::now();
  auto response =
      client.Post(prefix + "/chat/completions", headers, body.dump(),
                  "application/json");
  auto end = std::chrono::steady_clock::now();

  if (!response)
    return EndpointError{"request failed: " +
                         httplib::to_string(response.error())};
  if (response->status != 200)
    return EndpointError{"HTTP " + std::to_string(response->status) + ": " +
                         response->body.substr(0, 200)};

  json reply = json::parse(response->body, nullptr, false);
  if (reply.is_discarded()) return EndpointError{"response is not JSON"};
  if (!reply.contains("choices") || reply["choices"].empty() ||
      !reply["choices"][0].contains("message"))
    return EndpointError{"response has no choices[0].message"};
  if (!reply.contains("usage") || !reply["usage"].contains("prompt_tokens") ||
      !reply["usage"].contains("completion_tokens"))
    return EndpointError{"response lacks the usage block"};

  Completion completion;
  completion.text = reply["choices"][0]["message"].value("content", "");
  completion.usage.prompt_tokens = reply["usage"]["prompt_tokens"];
  completion.usage.completion_tokens = reply["usage"]["completion_tokens"];
  completion.latency_s = std::chrono::duration<double>(end - begin).count();
  return completion;
}

}  // namespace skillforge::optimizer
