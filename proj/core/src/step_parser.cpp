#include "vchat/step_parser.hpp"

#include <optional>
#include <vector>

#include "vchat/kv_format.hpp"

namespace vchat {

std::string_view to_string(FormatErrorReason reason) noexcept {
  switch (reason) {
  case FormatErrorReason::empty: return "empty";
  case FormatErrorReason::no_terminal_marker: return "no-terminal-marker";
  case FormatErrorReason::missing_action_input: return "missing-action-input";
  case FormatErrorReason::missing_action_name: return "missing-action-name";
  case FormatErrorReason::missing_decision: return "missing-decision";
  case FormatErrorReason::both_action_and_answer: return "both-action-and-answer";
  }
  return "empty";
}

std::string_view rule_for(FormatErrorReason reason) noexcept {
  switch (reason) {
  case FormatErrorReason::empty:
    return "the reply was empty";
  case FormatErrorReason::no_terminal_marker:
    return "a reply must contain either an \"Action:\" line or an \"AI:\" line";
  case FormatErrorReason::missing_action_input:
    return "an \"Action:\" line must be followed by an \"Action Input:\" line";
  case FormatErrorReason::missing_action_name:
    return "the \"Action:\" line must name one of the listed tools";
  case FormatErrorReason::missing_decision:
    return "an \"AI:\" line must come after \"Do I need to use a tool? No\"";
  case FormatErrorReason::both_action_and_answer:
    return "a reply may contain an \"Action:\" line or an \"AI:\" line, not both";
  }
  return "";
}

namespace {

constexpr std::string_view k_question = "Do I need to use a tool?";

struct Line {
  std::string_view text;
  std::size_t offset;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back({text.substr(pos, end - pos), pos});
    pos = end + 1;
  }
  return lines;
}

std::string_view lstrip(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) {
    text.remove_prefix(1);
  }
  return text;
}

// Index of the first line that, after leading blanks, starts with `keyword`.
std::optional<std::size_t> find_line(const std::vector<Line>& lines, std::string_view keyword,
                                     std::size_t from = 0) {
  for (std::size_t i = from; i < lines.size(); ++i) {
    if (lstrip(lines[i].text).starts_with(keyword)) return i;
  }
  return std::nullopt;
}

std::string_view after_keyword(const Line& line, std::string_view keyword) {
  return lstrip(line.text).substr(keyword.size());
}

// "No" as the answer to the force-thinking question, written out or implied
// by the completion continuing the question itself.
bool declines_tool(std::string_view before_answer) {
  const auto explicit_pos = before_answer.find(k_question);
  std::string_view rest = explicit_pos == std::string_view::npos
                              ? before_answer
                              : before_answer.substr(explicit_pos + k_question.size());
  const auto word = trim(rest);
  return word == "No" || word.starts_with("No ") || word.starts_with("No,") || word.starts_with("No.") ||
         word.starts_with("No\n");
}

} // namespace

AgentStep parse_step(std::string_view model_text) {
  if (trim(model_text).empty()) return FormatError{FormatErrorReason::empty, std::string(model_text)};

  const auto lines = split_lines(model_text);
  const auto action = find_line(lines, "Action:");
  const auto answer = find_line(lines, "AI:");

  if (action && answer) {
    return FormatError{FormatErrorReason::both_action_and_answer, std::string(model_text)};
  }
  if (action) {
    const auto& action_line = lines[*action];
    const auto name = trim(after_keyword(action_line, "Action:"));
    std::optional<std::size_t> input;
    for (auto i = *action + 1; i < lines.size(); ++i) {
      if (trim(lines[i].text).empty()) continue;
      if (lstrip(lines[i].text).starts_with("Action Input:")) input = i;
      break;
    }
    if (!input) return FormatError{FormatErrorReason::missing_action_input, std::string(model_text)};
    if (name.empty()) return FormatError{FormatErrorReason::missing_action_name, std::string(model_text)};

    const auto& input_line = lines[*input];
    const auto input_start = input_line.offset + (input_line.text.size() - lstrip(input_line.text).size()) +
                             std::string_view("Action Input:").size();
    auto raw = trim(model_text.substr(input_start));
    if (raw.empty()) return FormatError{FormatErrorReason::missing_action_input, std::string(model_text)};

    ToolCall call;
    call.thought = trim(model_text.substr(0, action_line.offset));
    call.tool_name = name;
    call.tool_input = std::move(raw);
    return call;
  }
  if (answer) {
    const auto& answer_line = lines[*answer];
    if (!declines_tool(model_text.substr(0, answer_line.offset))) {
      return FormatError{FormatErrorReason::missing_decision, std::string(model_text)};
    }
    const auto start = answer_line.offset + (answer_line.text.size() - lstrip(answer_line.text).size()) + 3;
    return FinalAnswer{trim(model_text.substr(start))};
  }
  return FormatError{FormatErrorReason::no_terminal_marker, std::string(model_text)};
}

} // namespace vchat
