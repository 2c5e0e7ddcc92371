#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "vchat/config.hpp"
#include "vchat/executors.hpp"
#include "vchat/session.hpp"
#include "vchat/transcript.hpp"

namespace vchat {

/// A scenario is a transcript without prompt digests: a header (optional),
/// upload and message events, and completion records holding only the
/// responses to serve in order.
///
/// Plays the scenario on a fresh session under `work_dir`, writes every event
/// and a digest-bearing completion record per backend call to `out`, then
/// seals it. Returns the responses of each message.
std::vector<MessageResponse> record_scenario(const Transcript& scenario, std::shared_ptr<const Resources> resources,
                                             const std::filesystem::path& work_dir,
                                             std::shared_ptr<TranscriptWriter> out,
                                             std::shared_ptr<ToolExecutor> executor = std::make_shared<MockExecutor>());

struct ReplayReport {
  std::size_t rounds = 0;
  std::size_t completions = 0;
  std::vector<std::string> mismatches;
  std::vector<MessageResponse> responses;

  bool matched() const noexcept { return mismatches.empty(); }
};

/// Re-runs a recorded transcript against a verifying scripted backend and
/// compares every round record. Any byte changed after recording shows up as
/// a seal mismatch, and prompt divergence as a prompt-mismatch.
ReplayReport replay_transcript(const Transcript& transcript, std::shared_ptr<const Resources> resources,
                               const std::filesystem::path& work_dir,
                               std::shared_ptr<ToolExecutor> executor = std::make_shared<MockExecutor>());

} // namespace vchat
