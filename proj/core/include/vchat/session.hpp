#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vchat/backend.hpp"
#include "vchat/config.hpp"
#include "vchat/engine.hpp"
#include "vchat/executors.hpp"
#include "vchat/prompt.hpp"
#include "vchat/provenance.hpp"
#include "vchat/registry.hpp"
#include "vchat/transcript.hpp"
#include "vchat/workspace.hpp"

namespace vchat {

struct SessionConfig {
  EngineConfig engine;
  TokenBudget budget;
  /// Unset: every tool enabled in the shared catalog.
  std::optional<std::vector<std::string>> enabled_tools;
  std::uint64_t seed = 0;
  std::size_t id_length = 8;
  std::size_t max_upload_bytes = k_default_max_upload_bytes;

  nlohmann::ordered_json to_json() const;
  static SessionConfig from_json(const nlohmann::json& doc);
  /// Engine, budget and naming settings from an application config. An unset
  /// session.seed is drawn from std::random_device.
  static SessionConfig from_app(const AppConfig& app);
};

struct UploadRequest {
  std::string filename;
  std::string bytes;
  std::optional<std::string> caption;
};

struct MessageFile {
  WorkspacePath path;
  ImageSource kind = ImageSource::derived;
};

struct MessageResponse {
  std::size_t round = 0;
  std::string final_answer;
  /// The message's upload first, then files created by the round.
  std::vector<MessageFile> files;
  ReasoningTrace trace;
  Termination termination = Termination::normal;

  /// `{round, final_answer, files:[{path, kind}], trace, termination}`
  nlohmann::ordered_json to_json() const;
};

/// One conversation: dialogue history, a private workspace and the tool
/// subset it may use. Rounds on one session are mutually exclusive; a second
/// concurrent upload or message fails with Error(busy).
///
/// On-disk layout under dir(): session.json, history.jsonl, image/.
class Session {
public:
  /// With a recorder, every completion plus the session's own events are
  /// appended to it, and it is sealed when the session is destroyed.
  static std::shared_ptr<Session> create(std::string id, const std::filesystem::path& dir, SessionConfig config,
                                         std::shared_ptr<const Resources> resources,
                                         std::shared_ptr<CompletionBackend> backend,
                                         std::shared_ptr<ToolExecutor> executor,
                                         std::shared_ptr<TranscriptWriter> recorder = nullptr);
  static std::shared_ptr<Session> load(const std::filesystem::path& dir, std::shared_ptr<const Resources> resources,
                                       std::shared_ptr<CompletionBackend> backend,
                                       std::shared_ptr<ToolExecutor> executor);

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;
  ~Session();

  const std::string& id() const noexcept { return id_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  const SessionConfig& config() const noexcept { return config_; }
  const Registry& registry() const noexcept { return registry_; }

  DialogueHistory history() const;
  std::size_t round_counter() const;

  WorkspacePath upload_image(std::string_view bytes, std::string_view original_filename,
                             std::optional<std::string> caption = std::nullopt);
  /// Runs the optional upload, then one round. Backend failures propagate as
  /// RoundAborted; the history is left as it was before the round.
  MessageResponse post_message(std::string text, std::optional<UploadRequest> upload = std::nullopt);

  ProvenanceGraph provenance() const;
  /// `{round_counter, pairs:[{question, answer}]}`
  nlohmann::ordered_json history_json() const;
  const Workspace& workspace() const noexcept { return *workspace_; }

  void save() const;

private:
  Session(std::string id, std::filesystem::path dir, SessionConfig config, std::shared_ptr<const Resources> resources,
          std::shared_ptr<CompletionBackend> backend, std::shared_ptr<ToolExecutor> executor,
          std::unique_ptr<Workspace> workspace);

  WorkspacePath add_upload(std::string_view bytes, std::string_view filename, std::optional<std::string> caption);
  void append_pair(std::string question, std::string answer);

  std::string id_;
  std::filesystem::path dir_;
  SessionConfig config_;
  std::shared_ptr<const Resources> resources_;
  Registry registry_;
  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<ToolExecutor> executor_;
  std::shared_ptr<TranscriptWriter> recorder_;
  std::unique_ptr<Workspace> workspace_;

  std::mutex round_mutex_;
  mutable std::mutex state_mutex_;
  DialogueHistory history_;
  std::size_t round_counter_ = 0;
};

/// Sessions under one root directory, created on demand and reloaded from
/// disk when first asked for.
class SessionStore {
public:
  using BackendFactory = std::function<std::shared_ptr<CompletionBackend>(const std::string& session_id)>;
  using RecorderFactory =
      std::function<std::shared_ptr<TranscriptWriter>(const std::string& session_id, const std::filesystem::path& dir)>;

  SessionStore(std::filesystem::path root, std::shared_ptr<const Resources> resources, SessionConfig defaults,
               BackendFactory backends, std::shared_ptr<ToolExecutor> executor, RecorderFactory recorders = {});

  const Resources& resources() const noexcept { return *resources_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  /// Throws Error(validation) naming an undeclared tool.
  std::shared_ptr<Session> create(std::optional<std::vector<std::string>> enabled_tools = std::nullopt);
  /// Throws Error(not_found).
  std::shared_ptr<Session> get(std::string_view id);

private:
  std::filesystem::path root_;
  std::shared_ptr<const Resources> resources_;
  SessionConfig defaults_;
  BackendFactory backends_;
  std::shared_ptr<ToolExecutor> executor_;
  RecorderFactory recorders_;

  std::mutex mutex_;
  RandomIdSource session_ids_;
  std::map<std::string, std::shared_ptr<Session>, std::less<>> sessions_;
};

} // namespace vchat
