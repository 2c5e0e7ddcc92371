#include "vchat/backend.hpp"

#include <algorithm>

#include "vchat/digest.hpp"
#include "vchat/error.hpp"
#include "vchat/transcript.hpp"

namespace vchat {

void CompletionRequest::validate() const {
  if (prompt.empty()) throw Error(Errc::validation, "completion prompt is empty");
  if (max_output_tokens <= 0) throw Error(Errc::validation, "max_output_tokens must be positive");
  if (!(temperature >= 0.0 && temperature <= 1.0)) throw Error(Errc::validation, "temperature must lie in [0, 1]");
}

std::string truncate_at_stop(std::string_view text, std::span<const std::string> stops) {
  auto cut = text.size();
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  return std::string(text.substr(0, cut));
}

TranscriptEntry TranscriptEntry::recorded(std::string_view prompt, std::string response) {
  TranscriptEntry entry;
  entry.prompt_digest = sha256_hex(prompt);
  entry.prompt_length = prompt.size();
  entry.prompt_suffix = std::string(prompt.substr(prompt.size() - std::min(prompt.size(), k_prompt_suffix_chars)));
  entry.response = std::move(response);
  return entry;
}

ScriptedBackend::ScriptedBackend(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}

ScriptedBackend ScriptedBackend::from_responses(std::vector<std::string> responses) {
  std::vector<TranscriptEntry> entries;
  entries.reserve(responses.size());
  for (auto& response : responses) {
    TranscriptEntry entry;
    entry.response = std::move(response);
    entries.push_back(std::move(entry));
  }
  return ScriptedBackend(std::move(entries));
}

namespace {

// Locates the first byte where `prompt` departs from the recording, using
// the stored length and suffix window. Returns the offset and whether it is
// exact (inside the window) or only an upper bound.
std::pair<std::size_t, bool> divergence(const TranscriptEntry& entry, std::string_view prompt) {
  const auto recorded_length = entry.prompt_length.value_or(prompt.size());
  const auto window_start = recorded_length - std::min(recorded_length, entry.prompt_suffix.size());
  for (std::size_t i = 0; i < entry.prompt_suffix.size(); ++i) {
    const auto offset = window_start + i;
    if (offset >= prompt.size() || prompt[offset] != entry.prompt_suffix[i]) return {offset, true};
  }
  if (prompt.size() != recorded_length) return {std::min(prompt.size(), recorded_length), true};
  return {window_start, false};
}

} // namespace

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  if (next_ >= entries_.size()) {
    throw Error(Errc::transcript_exhausted,
                "no recorded response for call " + std::to_string(next_ + 1) + " (transcript holds " +
                    std::to_string(entries_.size()) + ")");
  }
  const auto& entry = entries_[next_];
  if (entry.verified() && (sha256_hex(request.prompt) != *entry.prompt_digest ||
                           request.prompt.size() != entry.prompt_length.value_or(request.prompt.size()))) {
    const auto [offset, exact] = divergence(entry, request.prompt);
    throw Error(Errc::prompt_mismatch, "call " + std::to_string(next_ + 1) + ": prompt diverges from the recording " +
                                           (exact ? "at byte offset " : "before byte offset ") +
                                           std::to_string(offset));
  }
  ++next_;
  return truncate_at_stop(entry.response, request.stop_sequences);
}

RecordingBackend::RecordingBackend(std::shared_ptr<CompletionBackend> inner, std::shared_ptr<TranscriptWriter> writer)
    : inner_(std::move(inner)), writer_(std::move(writer)) {
  if (!inner_ || !writer_) throw Error(Errc::validation, "recording backend needs an inner backend and a writer");
}

std::string RecordingBackend::complete(const CompletionRequest& request) {
  auto response = inner_->complete(request);
  writer_->write_completion(TranscriptEntry::recorded(request.prompt, response));
  return response;
}

std::unique_ptr<RecordingBackend> record(std::shared_ptr<CompletionBackend> inner,
                                         std::shared_ptr<TranscriptWriter> writer) {
  return std::make_unique<RecordingBackend>(std::move(inner), std::move(writer));
}

ScriptedBackend load_transcript(const std::filesystem::path& path) {
  return ScriptedBackend(read_transcript(path).completions);
}

} // namespace vchat
