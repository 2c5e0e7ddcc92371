#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vchat/backend.hpp"
#include "vchat/error.hpp"
#include "vchat/executors.hpp"
#include "vchat/prompt.hpp"
#include "vchat/registry.hpp"
#include "vchat/step_parser.hpp"
#include "vchat/trace.hpp"
#include "vchat/workspace.hpp"

namespace vchat {

enum class Termination { normal, step_limit, format_failure, clarification };

std::string_view to_string(Termination termination) noexcept;
Termination termination_from_string(std::string_view text);

struct EngineConfig {
  std::size_t max_steps = 10;
  std::size_t format_retries = 2;
  std::vector<std::string> stop_sequences{"\nObservation:"};
  int max_output_tokens = 512;
  double temperature = 0.0;

  void validate() const;
};

struct RoundResult {
  std::string final_answer;
  ReasoningTrace trace;
  std::vector<WorkspacePath> new_files;
  Termination termination = Termination::normal;
  /// Backend calls made, format re-asks included.
  std::size_t completions = 0;
};

/// Everything a round reads besides the query. History is truncated to the
/// budget before every prompt.
struct RoundContext {
  const PrinciplePromptSet& principles;
  const Registry& registry;
  const DialogueHistory& history;
  const TokenBudget& budget;
  Workspace& workspace;
};

/// A backend failure ended the round; the steps completed so far ride along.
class RoundAborted : public Error {
public:
  RoundAborted(const Error& cause, ReasoningTrace partial);

  const ReasoningTrace& partial_trace() const noexcept { return partial_; }

private:
  ReasoningTrace partial_;
};

enum class FormatDecision { retry, give_up };

/// Retry while `attempt` (1-based count of format errors for this step)
/// is within cfg.format_retries.
FormatDecision handle_format_error(const FormatError& error, std::size_t attempt, const EngineConfig& config);

/// Line appended to the unchanged prompt when re-asking after a format error.
std::string corrective_line(const FormatError& error);

/// Text outputs verbatim; images as their workspace path.
std::string observation_of(const ToolOutput& output);

inline constexpr std::string_view k_format_failure_answer =
    "Sorry, I could not produce a reply in the required format, so I have no result for this request. "
    "Please try rephrasing it.";

class Engine {
public:
  Engine(CompletionBackend& backend, ToolExecutor& executor, EngineConfig config = {});

  const EngineConfig& config() const noexcept { return config_; }

  /// One round: prompt, parse, dispatch, observe, until a final answer, the
  /// step limit or an unrecoverable format error. Backend errors raise
  /// RoundAborted.
  RoundResult run_round(const RoundContext& context, const UserQuery& query);

private:
  TraceStep dispatch(const RoundContext& context, std::string completion, ToolCall call);

  CompletionBackend& backend_;
  ToolExecutor& executor_;
  EngineConfig config_;
};

} // namespace vchat
