#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "vchat/trace.hpp"

namespace vchat {

struct FinalAnswer {
  std::string text;
};

enum class FormatErrorReason {
  empty,
  no_terminal_marker,
  missing_action_input,
  missing_action_name,
  missing_decision,
  both_action_and_answer,
};

std::string_view to_string(FormatErrorReason reason) noexcept;
/// The grammar rule a reason violates, phrased for the corrective re-ask.
std::string_view rule_for(FormatErrorReason reason) noexcept;

struct FormatError {
  FormatErrorReason reason;
  std::string offending_text;
};

using AgentStep = std::variant<ToolCall, FinalAnswer, FormatError>;

/// Parses one model completion. The text is read as the continuation of
/// "Thought: Do I need to use a tool?", so a bare " No\nAI: ..." is a final
/// answer.
///
///   ToolCall    : a line `Action: <name>` followed by a line `Action Input: <raw>`;
///                 the thought is everything before the Action line and the
///                 input runs to the end of the text.
///   FinalAnswer : "Do I need to use a tool? No" (or a leading "No") and then a
///                 line starting `AI:`; the answer is everything after `AI:`.
///
/// Total: any other text yields a FormatError.
AgentStep parse_step(std::string_view model_text);

} // namespace vchat
