#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vchat/filename.hpp"

namespace vchat {

struct ToolCall {
  std::string thought;
  std::string tool_name;
  std::string tool_input;
};

enum class StepStatus { ok, unknown_tool, disabled_tool, bad_input, tool_error };

std::string_view to_string(StepStatus status) noexcept;

/// One tool step of a round: what the model wrote, what it asked for and
/// what came back.
struct TraceStep {
  std::string completion;
  ToolCall call;
  std::string observation;
  std::vector<WorkspacePath> files;
  StepStatus status = StepStatus::ok;

  /// True when the tool resolved and an executor ran.
  bool dispatched() const noexcept { return status == StepStatus::ok || status == StepStatus::tool_error; }
};

struct ReasoningTrace {
  std::vector<TraceStep> steps;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
};

/// `{j, thought, tool, input, observation, files}`
nlohmann::ordered_json export_step(std::size_t j, const TraceStep& step);
nlohmann::ordered_json export_trace(const ReasoningTrace& trace);
/// One compact JSON record per line, each line newline-terminated.
std::string export_trace_jsonl(const ReasoningTrace& trace);

} // namespace vchat
