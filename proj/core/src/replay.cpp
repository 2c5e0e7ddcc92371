#include "vchat/replay.hpp"

#include "vchat/digest.hpp"
#include "vchat/error.hpp"

namespace vchat {

using nlohmann::json;

namespace {

SessionConfig config_of(const Transcript& transcript) {
  if (transcript.header && transcript.header->contains("config")) {
    return SessionConfig::from_json(transcript.header->at("config"));
  }
  return {};
}

UploadRequest upload_of(const json& record) {
  try {
    UploadRequest upload{record.at("filename").get<std::string>(), base64_decode(record.at("data").get<std::string>()),
                         std::nullopt};
    if (record.contains("caption")) upload.caption = record.at("caption").get<std::string>();
    return upload;
  } catch (const json::exception& e) {
    throw Error(Errc::transcript_parse, std::string("bad upload record: ") + e.what());
  }
}

// Feeds the user events of `transcript` to `session`; `on_round` sees each
// round record together with the most recent response.
template <typename OnRound>
std::vector<MessageResponse> play(const Transcript& transcript, Session& session, OnRound on_round) {
  std::vector<MessageResponse> responses;
  for (const auto& record : transcript.records) {
    const auto kind = record.at("kind").get<std::string>();
    if (kind == "upload") {
      const auto upload = upload_of(record);
      session.upload_image(upload.bytes, upload.filename, upload.caption);
    } else if (kind == "message") {
      std::optional<UploadRequest> upload;
      if (record.contains("upload")) upload = upload_of(record.at("upload"));
      responses.push_back(session.post_message(record.at("text").get<std::string>(), std::move(upload)));
    } else if (kind == "round") {
      on_round(record, responses.empty() ? nullptr : &responses.back());
    }
  }
  return responses;
}

void require_fresh(const std::filesystem::path& dir) {
  std::error_code ec;
  if (std::filesystem::exists(dir, ec) && !std::filesystem::is_empty(dir, ec)) {
    throw Error(Errc::validation, dir.string() + " already holds a session");
  }
}

} // namespace

std::vector<MessageResponse> record_scenario(const Transcript& scenario, std::shared_ptr<const Resources> resources,
                                             const std::filesystem::path& work_dir,
                                             std::shared_ptr<TranscriptWriter> out,
                                             std::shared_ptr<ToolExecutor> executor) {
  require_fresh(work_dir / "record");
  auto backend = std::make_shared<ScriptedBackend>(scenario.completions);
  std::vector<MessageResponse> responses;
  {
    auto session = Session::create("record", work_dir / "record", config_of(scenario), std::move(resources), backend,
                                   std::move(executor), out);
    responses = play(scenario, *session, [](const json&, const MessageResponse*) {});
  }
  if (!out->sealed()) out->seal();
  return responses;
}

ReplayReport replay_transcript(const Transcript& transcript, std::shared_ptr<const Resources> resources,
                               const std::filesystem::path& work_dir, std::shared_ptr<ToolExecutor> executor) {
  require_fresh(work_dir / "replay");
  ReplayReport report;
  if (!transcript.sealed) {
    report.mismatches.push_back("transcript is not sealed");
  } else if (!transcript.seal_valid) {
    report.mismatches.push_back("seal digest does not match the transcript contents");
  }

  auto backend = std::make_shared<ScriptedBackend>(transcript.completions);
  try {
    auto session = Session::create("replay", work_dir / "replay", config_of(transcript), std::move(resources),
                                   backend, std::move(executor));
    report.responses = play(transcript, *session, [&](const json& record, const MessageResponse* response) {
      ++report.rounds;
      const auto round = record.value("round", std::size_t{0});
      const auto where = "round " + std::to_string(round) + ": ";
      if (!response || response->round != round) {
        report.mismatches.push_back(where + "no matching message");
        return;
      }
      if (record.value("termination", "") != to_string(response->termination)) {
        report.mismatches.push_back(where + "termination differs");
      }
      if (record.value("final_answer", "") != response->final_answer) {
        report.mismatches.push_back(where + "final answer differs");
      }
      if (record.value("trace_digest", "") != sha256_hex(export_trace_jsonl(response->trace))) {
        report.mismatches.push_back(where + "trace differs");
      }
    });
  } catch (const Error& e) {
    report.mismatches.push_back(e.what());
  }

  report.completions = backend->served();
  if (backend->remaining() != 0) {
    report.mismatches.push_back(std::to_string(backend->remaining()) + " recorded completions were never requested");
  }
  return report;
}

} // namespace vchat
