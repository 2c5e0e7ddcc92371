#include "vchat/transcript.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "vchat/digest.hpp"
#include "vchat/error.hpp"

namespace vchat {

std::shared_ptr<TranscriptWriter> TranscriptWriter::to_file(const std::filesystem::path& path) {
  std::shared_ptr<TranscriptWriter> writer(new TranscriptWriter());
  writer->file_.emplace(path, std::ios::binary | std::ios::trunc);
  if (!*writer->file_) throw Error(Errc::io, "cannot write transcript " + path.string());
  return writer;
}

std::shared_ptr<TranscriptWriter> TranscriptWriter::in_memory() {
  return std::shared_ptr<TranscriptWriter>(new TranscriptWriter());
}

void TranscriptWriter::write(const nlohmann::ordered_json& record) {
  std::lock_guard lock(mutex_);
  append_locked(record);
}

void TranscriptWriter::append_locked(const nlohmann::ordered_json& record) {
  if (sealed_) throw Error(Errc::validation, "transcript is sealed");
  const auto line = record.dump() + "\n";
  if (file_) {
    *file_ << line;
    file_->flush();
    if (!*file_) throw Error(Errc::io, "transcript write failed");
  }
  contents_ += line;
  kinds_.push_back(record.value("kind", ""));
}

void TranscriptWriter::write_completion(const TranscriptEntry& entry) { write(completion_record(entry)); }

void TranscriptWriter::seal() {
  std::lock_guard lock(mutex_);
  if (sealed_) return;
  nlohmann::ordered_json record;
  record["kind"] = "seal";
  record["digest"] = sha256_hex(contents_);
  append_locked(record);
  sealed_ = true;
}

std::string TranscriptWriter::contents() const {
  std::lock_guard lock(mutex_);
  return contents_;
}

std::size_t TranscriptWriter::count(std::string_view kind) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), kind));
}

bool TranscriptWriter::sealed() const {
  std::lock_guard lock(mutex_);
  return sealed_;
}

nlohmann::ordered_json completion_record(const TranscriptEntry& entry) {
  nlohmann::ordered_json record;
  record["kind"] = "completion";
  if (entry.prompt_digest) record["prompt_digest"] = *entry.prompt_digest;
  if (entry.prompt_length) record["prompt_length"] = *entry.prompt_length;
  if (entry.prompt_digest || !entry.prompt_suffix.empty()) record["prompt_suffix"] = entry.prompt_suffix;
  record["response"] = entry.response;
  return record;
}

TranscriptEntry entry_from_record(const nlohmann::json& record) {
  TranscriptEntry entry;
  try {
    entry.response = record.at("response").get<std::string>();
    if (record.contains("prompt_digest")) entry.prompt_digest = record.at("prompt_digest").get<std::string>();
    if (record.contains("prompt_length")) entry.prompt_length = record.at("prompt_length").get<std::size_t>();
    if (record.contains("prompt_suffix")) entry.prompt_suffix = record.at("prompt_suffix").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::transcript_parse, std::string("bad completion record: ") + e.what());
  }
  return entry;
}

Transcript parse_transcript(std::string_view text) {
  static constexpr std::array<std::string_view, 6> k_kinds = {"header", "upload", "message",
                                                              "completion", "round", "seal"};
  Transcript transcript;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    const auto line_start = pos;
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const auto where = "line " + std::to_string(line_no);
    if (transcript.sealed) throw Error(Errc::transcript_parse, where + ": content after the seal record");

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::transcript_parse, where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("kind") || !record["kind"].is_string()) {
      throw Error(Errc::transcript_parse, where + ": record needs a string \"kind\"");
    }
    const auto kind = record["kind"].get<std::string>();
    if (std::find(k_kinds.begin(), k_kinds.end(), kind) == k_kinds.end()) {
      throw Error(Errc::transcript_parse, where + ": unknown record kind \"" + kind + "\"");
    }

    if (kind == "header") {
      if (!transcript.records.empty()) throw Error(Errc::transcript_parse, where + ": header must come first");
      if (!record.contains("version") || !record["version"].is_number_integer()) {
        throw Error(Errc::transcript_parse, where + ": header lacks an integer version");
      }
      if (record["version"].get<int>() != k_transcript_version) {
        throw Error(Errc::version_mismatch, "transcript version " + record["version"].dump() + ", expected " +
                                                std::to_string(k_transcript_version));
      }
      transcript.header = record;
    } else if (kind == "completion") {
      transcript.completions.push_back(entry_from_record(record));
    } else if (kind == "seal") {
      transcript.sealed = true;
      const auto digest = record.value("digest", std::string());
      transcript.seal_valid = digest == sha256_hex(text.substr(0, line_start));
    }
    transcript.records.push_back(std::move(record));
  }
  return transcript;
}

Transcript read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read transcript " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_transcript(buffer.str());
}

} // namespace vchat
