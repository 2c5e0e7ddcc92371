#include "vchat/trace.hpp"

namespace vchat {

std::string_view to_string(StepStatus status) noexcept {
  switch (status) {
  case StepStatus::ok: return "ok";
  case StepStatus::unknown_tool: return "unknown-tool";
  case StepStatus::disabled_tool: return "disabled-tool";
  case StepStatus::bad_input: return "bad-input";
  case StepStatus::tool_error: return "tool-error";
  }
  return "ok";
}

nlohmann::ordered_json export_step(std::size_t j, const TraceStep& step) {
  nlohmann::ordered_json record;
  record["j"] = j;
  record["thought"] = step.call.thought;
  record["tool"] = step.call.tool_name;
  record["input"] = step.call.tool_input;
  record["observation"] = step.observation;
  record["files"] = nlohmann::ordered_json::array();
  for (const auto& file : step.files) record["files"].push_back(file.str());
  return record;
}

nlohmann::ordered_json export_trace(const ReasoningTrace& trace) {
  auto records = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < trace.steps.size(); ++j) records.push_back(export_step(j, trace.steps[j]));
  return records;
}

std::string export_trace_jsonl(const ReasoningTrace& trace) {
  std::string out;
  for (std::size_t j = 0; j < trace.steps.size(); ++j) {
    out += export_step(j, trace.steps[j]).dump();
    out += '\n';
  }
  return out;
}

} // namespace vchat
