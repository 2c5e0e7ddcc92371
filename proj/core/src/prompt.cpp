#include "vchat/prompt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "embedded.hpp"
#include "vchat/error.hpp"
#include "vchat/kv_format.hpp"

namespace vchat {
namespace {

// Prompt files end with a newline that is not part of the prompt.
std::string strip_final_newline(std::string_view text) {
  if (text.ends_with('\n')) text.remove_suffix(1);
  return std::string(text);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read prompt file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++count;
  return count;
}

constexpr std::string_view k_tool_names_slot = "{tool_names}";

} // namespace

PrinciplePromptSet PrinciplePromptSet::builtin() {
  PrinciplePromptSet set{strip_final_newline(detail::embedded_file("prefix.txt")),
                         strip_final_newline(detail::embedded_file("format_instructions.txt")),
                         strip_final_newline(detail::embedded_file("suffix.txt"))};
  set.validate();
  return set;
}

PrinciplePromptSet PrinciplePromptSet::load(const std::filesystem::path& dir) {
  PrinciplePromptSet set{strip_final_newline(read_text(dir / "prefix.txt")),
                         strip_final_newline(read_text(dir / "format_instructions.txt")),
                         strip_final_newline(read_text(dir / "suffix.txt"))};
  set.validate();
  return set;
}

void PrinciplePromptSet::validate() const {
  if (prefix.empty()) throw Error(Errc::validation, "principle prefix is empty");
  if (count_occurrences(format_instructions, k_tool_names_slot) != 1) {
    throw Error(Errc::validation, "format instructions must contain {tool_names} exactly once");
  }
  if (!suffix_template.ends_with(k_force_thinking_marker)) {
    throw Error(Errc::validation, "suffix must end with \"" + std::string(k_force_thinking_marker) + "\"");
  }
}

std::string PrinciplePromptSet::render_format_instructions(const Registry& registry) const {
  std::string names;
  for (const auto& name : registry.enabled_names()) {
    if (!names.empty()) names += ", ";
    names += name;
  }
  auto out = format_instructions;
  out.replace(out.find(k_tool_names_slot), k_tool_names_slot.size(), names);
  return out;
}

std::string render_pair(std::string_view question, std::string_view answer) {
  std::string out = "Human: ";
  out += question;
  out += "\nAI: ";
  out += answer;
  out += '\n';
  return out;
}

TokenEstimator token_estimator(std::string_view id) {
  if (id == "chars4") {
    return [](std::string_view text) { return (text.size() + 3) / 4; };
  }
  if (id == "words") {
    return [](std::string_view text) {
      std::size_t words = 0;
      bool in_word = false;
      for (unsigned char c : text) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++words;
        in_word = !space;
      }
      return words;
    };
  }
  throw Error(Errc::config, "unknown token estimator \"" + std::string(id) + "\"");
}

std::size_t estimate_tokens(std::string_view text, std::string_view estimator_id) {
  return token_estimator(estimator_id)(text);
}

void DialogueHistory::append(std::string question, std::string answer, const TokenBudget& budget) {
  const auto tokens = estimate_tokens(render_pair(question, answer), budget.estimator);
  pairs.push_back({std::move(question), std::move(answer), tokens});
}

std::size_t DialogueHistory::total_tokens() const noexcept {
  std::size_t total = 0;
  for (const auto& pair : pairs) total += pair.tokens;
  return total;
}

std::string DialogueHistory::render() const {
  std::string out;
  for (const auto& pair : pairs) out += render_pair(pair.question, pair.answer);
  return out;
}

TruncationResult truncate_history(const DialogueHistory& history, const TokenBudget& budget) {
  if (budget.max_history_tokens == 0) throw Error(Errc::validation, "history budget must be positive");
  TruncationResult result;
  const auto& pairs = history.pairs;
  if (pairs.empty()) return result;

  std::size_t keep = 1;
  std::size_t total = pairs.back().tokens;
  result.overflow = total > budget.max_history_tokens;
  while (keep < pairs.size()) {
    const auto next = pairs[pairs.size() - keep - 1].tokens;
    if (total + next > budget.max_history_tokens) break;
    total += next;
    ++keep;
  }
  result.dropped = pairs.size() - keep;
  result.history.pairs.assign(pairs.end() - static_cast<std::ptrdiff_t>(keep), pairs.end());
  return result;
}

QaPair render_upload_event(const WorkspacePath& path, const std::filesystem::path& workspace_root,
                           const TokenBudget& budget) {
  if (!std::filesystem::is_regular_file(workspace_root / path.str())) {
    throw Error(Errc::missing_file, "uploaded image " + path.str() + " not found in workspace");
  }
  DialogueHistory scratch;
  scratch.append("Provide an image named " + path.str() + ".", "Received.", budget);
  return scratch.pairs.front();
}

WrappedQuery wrap_user_query(const UserQuery& query, const PrinciplePromptSet& principles) {
  WrappedQuery wrapped;
  std::string text = query.text;
  const auto& suffix = principles.suffix_template;
  for (auto pos = text.find(suffix); pos != std::string::npos; pos = text.find(suffix, pos)) {
    text.erase(pos, suffix.size());
  }
  if (trim(text).empty()) {
    wrapped.warnings.push_back("empty query text");
    wrapped.text = suffix;
  } else {
    wrapped.text = text + "\n" + suffix;
  }
  return wrapped;
}

std::string render_trace(const ReasoningTrace& trace) {
  std::string out;
  for (const auto& step : trace.steps) {
    out += step.completion;
    out += "\nObservation: ";
    out += step.observation;
    out += '\n';
    out += k_force_thinking_marker;
  }
  return out;
}

std::string PromptSections::str() const {
  return prefix + "\n\n" + tools + "\n\n" + instructions + "\n\n" + history + "\nNew input: " + query + trace;
}

PromptSections assemble_sections(const PrinciplePromptSet& principles, const Registry& registry,
                                 const DialogueHistory& history, const WrappedQuery& query,
                                 const ReasoningTrace& trace) {
  return PromptSections{principles.prefix,
                        render_tools_section(registry),
                        principles.render_format_instructions(registry),
                        "Previous conversation history:\n" + history.render(),
                        query.text,
                        render_trace(trace)};
}

std::string assemble(const PrinciplePromptSet& principles, const Registry& registry,
                     const DialogueHistory& history, const WrappedQuery& query, const ReasoningTrace& trace) {
  return assemble_sections(principles, registry, history, query, trace).str();
}

std::map<std::string, std::string> render_prompt_files(const PrinciplePromptSet& principles,
                                                       const Registry& registry) {
  std::map<std::string, std::string> files;
  for (std::size_t i = 0; i < registry.specs().size(); ++i) {
    const auto& spec = registry.specs()[i];
    files["tools/" + tool_file_stem(i, spec) + ".txt"] = render_tool_block(spec) + "\n";
  }
  files["prompts/prefix.txt"] = principles.prefix + "\n";
  files["prompts/format_instructions.txt"] = principles.format_instructions + "\n";
  files["prompts/suffix.txt"] = principles.suffix_template + "\n";
  const auto query = wrap_user_query(UserQuery{std::string(k_sample_query), std::nullopt}, principles);
  files["prompts/assembled_empty.txt"] = assemble(principles, registry, {}, query, {});
  return files;
}

} // namespace vchat
