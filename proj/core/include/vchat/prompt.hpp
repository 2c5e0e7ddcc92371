#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vchat/filename.hpp"
#include "vchat/registry.hpp"
#include "vchat/trace.hpp"

namespace vchat {

inline constexpr std::string_view k_force_thinking_marker = "Thought: Do I need to use a tool?";
inline constexpr std::size_t k_default_history_tokens = 2000;

/// System principles, format grammar and the force-thinking suffix.
struct PrinciplePromptSet {
  std::string prefix;
  /// Contains `{tool_names}`, replaced by the enabled names joined with ", ".
  std::string format_instructions;
  /// Appended after every user query; ends with k_force_thinking_marker.
  std::string suffix_template;

  /// The prompt files compiled into the library.
  static PrinciplePromptSet builtin();
  /// Reads prefix.txt, format_instructions.txt and suffix.txt from `dir`.
  static PrinciplePromptSet load(const std::filesystem::path& dir);

  /// Throws Error(validation) if an invariant is broken.
  void validate() const;
  std::string render_format_instructions(const Registry& registry) const;
};

struct QaPair {
  std::string question;
  std::string answer;
  /// Estimate for render_pair(question, answer), fixed when the pair is added.
  std::size_t tokens = 0;
};

/// `Human: {question}\nAI: {answer}\n`
std::string render_pair(std::string_view question, std::string_view answer);

using TokenEstimator = std::function<std::size_t(std::string_view)>;

/// "chars4" (ceil(chars / 4), the default) or "words" (whitespace-separated
/// words). Throws Error(config) for other ids.
TokenEstimator token_estimator(std::string_view id);
std::size_t estimate_tokens(std::string_view text, std::string_view estimator_id = "chars4");

struct TokenBudget {
  std::size_t max_history_tokens = k_default_history_tokens;
  std::string estimator = "chars4";
};

struct DialogueHistory {
  std::vector<QaPair> pairs;

  void append(std::string question, std::string answer, const TokenBudget& budget = {});
  std::size_t total_tokens() const noexcept;
  std::string render() const;
};

struct TruncationResult {
  DialogueHistory history;
  std::size_t dropped = 0;
  /// The newest pair alone exceeds the budget and was kept anyway.
  bool overflow = false;
};

/// Drops whole pairs oldest-first until the total estimate fits. The newest
/// pair always survives.
TruncationResult truncate_history(const DialogueHistory& history, const TokenBudget& budget);

struct UserQuery {
  std::string text;
  std::optional<WorkspacePath> attached_image;
};

struct WrappedQuery {
  std::string text;
  std::vector<std::string> warnings;
};

/// The synthetic exchange recorded when an image is uploaded. Only the file
/// name enters the prompt. Throws Error(missing_file) if the file is absent
/// under `workspace_root`.
QaPair render_upload_event(const WorkspacePath& path, const std::filesystem::path& workspace_root,
                           const TokenBudget& budget = {});

/// `{text}\n{suffix}`; earlier copies of the suffix inside `text` are removed
/// so it appears exactly once.
WrappedQuery wrap_user_query(const UserQuery& query, const PrinciplePromptSet& principles);

/// `{completion}\nObservation: {observation}\n{marker}` per step.
std::string render_trace(const ReasoningTrace& trace);

struct PromptSections {
  std::string prefix;
  std::string tools;
  std::string instructions;
  std::string history;
  std::string query;
  std::string trace;

  std::string str() const;
};

PromptSections assemble_sections(const PrinciplePromptSet& principles, const Registry& registry,
                                 const DialogueHistory& history, const WrappedQuery& query,
                                 const ReasoningTrace& trace);

/// The single prompt sent to the model for one step.
std::string assemble(const PrinciplePromptSet& principles, const Registry& registry,
                     const DialogueHistory& history, const WrappedQuery& query, const ReasoningTrace& trace);

inline constexpr std::string_view k_sample_query = "describe this image";

/// Relative path -> contents for every rendered prompt artifact:
/// tools/{stem}.txt per catalog tool, the three prompt files as loaded by
/// PrinciplePromptSet::load, and prompts/assembled_empty.txt (k_sample_query,
/// no history, no trace).
std::map<std::string, std::string> render_prompt_files(const PrinciplePromptSet& principles,
                                                       const Registry& registry);

} // namespace vchat
