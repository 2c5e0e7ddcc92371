#include "vchat/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vchat/error.hpp"
#include "vchat/kv_format.hpp"
#include "vchat/remote_backend.hpp"
#include "vchat/remote_executor.hpp"

namespace vchat {

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(Errc::config, std::string(key) + ": expected a number, got \"" + std::string(value) + "\"");
  }
  return out;
}

void require_one_of(std::string_view key, std::string_view value, std::initializer_list<std::string_view> allowed) {
  for (auto option : allowed) {
    if (option == value) return;
  }
  throw Error(Errc::config, std::string(key) + ": unsupported value \"" + std::string(value) + "\"");
}

} // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void AppConfig::set(std::string_view key, std::string_view raw) {
  const auto value = trim(raw);
  if (key == "history.max_tokens") {
    budget.max_history_tokens = parse_number<std::size_t>(key, value);
  } else if (key == "history.estimator") {
    token_estimator(value);
    budget.estimator = value;
  } else if (key == "prompts.dir") {
    prompts_dir = value;
  } else if (key == "tools.catalog") {
    tools_catalog = value;
  } else if (key == "tools.enabled") {
    tools_enabled = split_list(value);
  } else if (key == "backend.kind") {
    require_one_of(key, value, {"remote", "scripted", "recording"});
    backend_kind = value;
  } else if (key == "backend.url") {
    backend_url = value;
  } else if (key == "backend.model") {
    backend_model = value;
  } else if (key == "backend.transcript") {
    backend_transcript = value;
  } else if (key == "engine.max_steps") {
    engine.max_steps = parse_number<std::size_t>(key, value);
  } else if (key == "engine.format_retries") {
    engine.format_retries = parse_number<std::size_t>(key, value);
  } else if (key == "engine.max_output_tokens") {
    engine.max_output_tokens = parse_number<int>(key, value);
  } else if (key == "executor.kind") {
    require_one_of(key, value, {"mock", "remote"});
    executor_kind = value;
  } else if (key == "executor.url") {
    executor_url = value;
  } else if (key == "executor.max_payload_bytes") {
    executor_max_payload_bytes = parse_number<std::size_t>(key, value);
  } else if (key == "workspace.dir") {
    workspace_dir = value;
  } else if (key == "server.host") {
    server_host = value;
  } else if (key == "server.port") {
    server_port = parse_number<int>(key, value);
  } else if (key == "session.seed") {
    session_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "session.id_length") {
    session_id_length = parse_number<std::size_t>(key, value);
  } else {
    throw Error(Errc::config, "unknown key \"" + std::string(key) + "\"");
  }
}

void AppConfig::validate() const {
  if (budget.max_history_tokens == 0) throw Error(Errc::config, "history.max_tokens must be positive");
  try {
    engine.validate();
  } catch (const Error& e) {
    throw Error(Errc::config, e.what());
  }
  if (session_id_length < 1 || session_id_length > 12) {
    throw Error(Errc::config, "session.id_length must lie in [1, 12]");
  }
  if (server_port < 0 || server_port > 65535) throw Error(Errc::config, "server.port out of range");
  if (backend_kind == "scripted" && !backend_transcript) {
    throw Error(Errc::config, "backend.kind = scripted needs backend.transcript");
  }
  if (executor_kind == "remote" && executor_url.empty()) {
    throw Error(Errc::config, "executor.kind = remote needs executor.url");
  }
}

AppConfig parse_config(std::string_view text) {
  AppConfig config;
  for (const auto& record : parse_kv_records(text, '=')) {
    for (const auto& [key, value] : record.entries) config.set(key, value);
  }
  config.validate();
  return config;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::config, "cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

Resources load_resources(const AppConfig& config) {
  auto principles = config.prompts_dir ? PrinciplePromptSet::load(*config.prompts_dir) : PrinciplePromptSet::builtin();
  auto catalog = config.tools_catalog ? load_catalog(*config.tools_catalog) : builtin_catalog();
  if (!config.tools_enabled.empty()) catalog = catalog.with_enabled(config.tools_enabled);
  return {std::move(principles), std::move(catalog)};
}

std::shared_ptr<CompletionBackend> make_backend(const AppConfig& config) {
  if (config.backend_kind == "scripted") {
    if (!config.backend_transcript) throw Error(Errc::config, "scripted backend needs backend.transcript");
    return std::make_shared<ScriptedBackend>(load_transcript(*config.backend_transcript));
  }
  RemoteBackendConfig remote;
  remote.base_url = config.backend_url;
  remote.model = config.backend_model;
  return std::make_shared<RemoteBackend>(remote);
}

std::shared_ptr<ToolExecutor> make_executor(const AppConfig& config) {
  if (config.executor_kind == "remote") {
    return std::make_shared<RemoteExecutor>(RemoteToolConfig{config.executor_url, config.executor_max_payload_bytes});
  }
  return std::make_shared<MockExecutor>();
}

} // namespace vchat
