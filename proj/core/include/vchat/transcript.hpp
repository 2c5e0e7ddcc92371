#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vchat/backend.hpp"

namespace vchat {

inline constexpr int k_transcript_version = 1;

/// Transcript files are JSON lines, one record per line, each with a "kind":
///
///   header      {version, config}          first record when present
///   upload      {filename, data, caption?}  data is base64
///   message     {text, upload?}
///   completion  {prompt_digest?, prompt_length?, prompt_suffix?, response}
///   round       {round, termination, final_answer, trace_digest}
///   seal        {digest}                    SHA-256 of every preceding byte
class TranscriptWriter {
public:
  /// Truncates `path`. Each record is flushed as it is written.
  static std::shared_ptr<TranscriptWriter> to_file(const std::filesystem::path& path);
  static std::shared_ptr<TranscriptWriter> in_memory();

  void write(const nlohmann::ordered_json& record);
  void write_completion(const TranscriptEntry& entry);
  /// Appends the seal record. Nothing may be written afterwards.
  void seal();

  std::string contents() const;
  std::size_t count(std::string_view kind) const;
  bool sealed() const;

private:
  TranscriptWriter() = default;
  void append_locked(const nlohmann::ordered_json& record);

  mutable std::mutex mutex_;
  std::optional<std::ofstream> file_;
  std::string contents_;
  std::vector<std::string> kinds_;
  bool sealed_ = false;
};

nlohmann::ordered_json completion_record(const TranscriptEntry& entry);
TranscriptEntry entry_from_record(const nlohmann::json& record);

struct Transcript {
  std::optional<nlohmann::json> header;
  /// Every record in file order, header and seal included.
  std::vector<nlohmann::json> records;
  std::vector<TranscriptEntry> completions;
  bool sealed = false;
  bool seal_valid = false;
};

/// Throws Error(transcript_parse) on malformed lines or unknown kinds and
/// Error(version_mismatch) on a header of another version.
Transcript parse_transcript(std::string_view text);
Transcript read_transcript(const std::filesystem::path& path);

} // namespace vchat
