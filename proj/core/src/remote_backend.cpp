#include "vchat/remote_backend.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "http_util.hpp"

namespace vchat {

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv(k_api_key_env)) config_.api_key = key;
  }
  detail::split_url(config_.base_url);
}

std::string RemoteBackend::complete(const CompletionRequest& request) {
  request.validate();
  const auto url = detail::split_url(config_.base_url);
  auto client = detail::make_client(url.origin, config_.timeout_seconds);

  nlohmann::json body;
  body["model"] = config_.model;
  body["prompt"] = request.prompt;
  body["stop"] = request.stop_sequences;
  body["max_tokens"] = request.max_output_tokens;
  body["temperature"] = request.temperature;

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto result = client->Post(url.path + config_.endpoint, headers, body.dump(), "application/json");
  if (!result) throw Error(Errc::transport, "completion request failed: " + httplib::to_string(result.error()));
  if (result->status != 200) {
    throw Error(Errc::transport, "completion endpoint returned HTTP " + std::to_string(result->status));
  }
  try {
    const auto reply = nlohmann::json::parse(result->body);
    const auto text = reply.at("choices").at(0).at("text").get<std::string>();
    return truncate_at_stop(text, request.stop_sequences);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::transport, std::string("unreadable completion response: ") + e.what());
  }
}

} // namespace vchat
