#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vchat {

class TranscriptWriter;

struct CompletionRequest {
  std::string prompt;
  std::vector<std::string> stop_sequences;
  int max_output_tokens = 512;
  double temperature = 0.0;

  /// Throws Error(validation) on an empty prompt, a non-positive token limit
  /// or a temperature outside [0, 1].
  void validate() const;
};

/// The completion model behind one contract. The engine cannot tell the
/// implementations apart.
class CompletionBackend {
public:
  virtual ~CompletionBackend() = default;
  /// Model text, cut at the first stop sequence.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// `text` up to (excluding) the earliest occurrence of any stop sequence.
std::string truncate_at_stop(std::string_view text, std::span<const std::string> stops);

inline constexpr std::size_t k_prompt_suffix_chars = 200;

struct TranscriptEntry {
  /// SHA-256 of the full prompt. Entries without one accept any prompt.
  std::optional<std::string> prompt_digest;
  std::optional<std::size_t> prompt_length;
  /// Last 200 characters of the prompt, for readable diffs.
  std::string prompt_suffix;
  std::string response;

  static TranscriptEntry recorded(std::string_view prompt, std::string response);
  bool verified() const noexcept { return prompt_digest.has_value(); }
};

/// Serves transcript entries in order, checking each prompt against its
/// recording. Strictly sequential.
class ScriptedBackend final : public CompletionBackend {
public:
  explicit ScriptedBackend(std::vector<TranscriptEntry> entries);
  /// Unverified entries answering with `responses` in order.
  static ScriptedBackend from_responses(std::vector<std::string> responses);

  /// Throws Error(transcript_exhausted) past the last entry and
  /// Error(prompt_mismatch) naming the first divergent byte offset.
  std::string complete(const CompletionRequest& request) override;

  std::size_t served() const noexcept { return next_; }
  std::size_t remaining() const noexcept { return entries_.size() - next_; }

private:
  std::vector<TranscriptEntry> entries_;
  std::size_t next_ = 0;
};

/// Proxies another backend and appends one completion record per call.
class RecordingBackend final : public CompletionBackend {
public:
  RecordingBackend(std::shared_ptr<CompletionBackend> inner, std::shared_ptr<TranscriptWriter> writer);

  std::string complete(const CompletionRequest& request) override;

private:
  std::shared_ptr<CompletionBackend> inner_;
  std::shared_ptr<TranscriptWriter> writer_;
};

std::unique_ptr<RecordingBackend> record(std::shared_ptr<CompletionBackend> inner,
                                         std::shared_ptr<TranscriptWriter> writer);

/// Scripted backend over the completion records of a transcript file.
/// Throws Error(transcript_parse) or Error(version_mismatch).
ScriptedBackend load_transcript(const std::filesystem::path& path);

} // namespace vchat
