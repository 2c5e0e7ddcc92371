#include "vchat/engine.hpp"

#include "vchat/kv_format.hpp"

namespace vchat {

std::string_view to_string(Termination termination) noexcept {
  switch (termination) {
  case Termination::normal: return "normal";
  case Termination::step_limit: return "step-limit";
  case Termination::format_failure: return "format-failure";
  case Termination::clarification: return "clarification";
  }
  return "normal";
}

Termination termination_from_string(std::string_view text) {
  for (auto t : {Termination::normal, Termination::step_limit, Termination::format_failure,
                 Termination::clarification}) {
    if (to_string(t) == text) return t;
  }
  throw Error(Errc::validation, "unknown termination \"" + std::string(text) + "\"");
}

void EngineConfig::validate() const {
  if (max_steps < 1) throw Error(Errc::validation, "max_steps must be at least 1");
  if (max_output_tokens <= 0) throw Error(Errc::validation, "max_output_tokens must be positive");
  if (!(temperature >= 0.0 && temperature <= 1.0)) throw Error(Errc::validation, "temperature must lie in [0, 1]");
}

RoundAborted::RoundAborted(const Error& cause, ReasoningTrace partial)
    : Error(cause.code(), std::string("round aborted: ") + cause.what()), partial_(std::move(partial)) {}

FormatDecision handle_format_error(const FormatError&, std::size_t attempt, const EngineConfig& config) {
  return attempt <= config.format_retries ? FormatDecision::retry : FormatDecision::give_up;
}

std::string corrective_line(const FormatError& error) {
  return "Your previous reply broke the required format (" + std::string(to_string(error.reason)) +
         "): " + std::string(rule_for(error.reason)) + ". Reply again using the format above.";
}

std::string observation_of(const ToolOutput& output) {
  if (const auto* text = std::get_if<TextOut>(&output)) return text->text;
  return std::get<ImageOut>(output).path.str();
}

namespace {

// A round that asks the user something back without touching a tool.
bool is_interrogative(std::string_view answer) {
  const auto trimmed = trim(answer);
  return !trimmed.empty() && trimmed.back() == '?';
}

std::string step_limit_answer(std::size_t max_steps, const std::vector<WorkspacePath>& files) {
  std::string answer = "I stopped after " + std::to_string(max_steps) +
                       " tool steps without finishing the request.";
  if (!files.empty()) {
    answer += " Files created so far:";
    for (std::size_t i = 0; i < files.size(); ++i) answer += (i ? ", " : " ") + files[i].str();
    answer += ".";
  }
  return answer;
}

} // namespace

Engine::Engine(CompletionBackend& backend, ToolExecutor& executor, EngineConfig config)
    : backend_(backend), executor_(executor), config_(std::move(config)) {
  config_.validate();
}

TraceStep Engine::dispatch(const RoundContext& context, std::string completion, ToolCall call) {
  TraceStep step;
  step.completion = std::move(completion);
  step.call = std::move(call);

  const ToolSpec* spec = nullptr;
  try {
    spec = &context.registry.lookup(step.call.tool_name);
  } catch (const Error& e) {
    step.status = e.code() == Errc::disabled_tool ? StepStatus::disabled_tool : StepStatus::unknown_tool;
    std::string valid;
    for (const auto& name : context.registry.enabled_names()) valid += (valid.empty() ? "" : ", ") + name;
    step.observation = std::string("Error: ") + e.what() + ". Use one of [" + valid + "].";
    return step;
  }

  std::vector<std::string> fields;
  try {
    fields = split_tool_input(step.call.tool_input, spec->input_arity);
  } catch (const Error& e) {
    step.status = StepStatus::bad_input;
    step.observation = std::string("Error: ") + e.what();
    return step;
  }

  try {
    const auto output = executor_.execute(*spec, fields, context.workspace);
    step.observation = observation_of(output);
    if (const auto* image = std::get_if<ImageOut>(&output)) step.files.push_back(image->path);
  } catch (const Error& e) {
    const bool input_problem = e.code() == Errc::missing_file || e.code() == Errc::arity_mismatch ||
                               e.code() == Errc::malformed_name;
    step.status = input_problem ? StepStatus::bad_input : StepStatus::tool_error;
    step.observation = std::string("Error: ") + e.what();
  } catch (const std::exception& e) {
    step.status = StepStatus::tool_error;
    step.observation = std::string("Error: executor-failure: ") + e.what();
  }
  return step;
}

RoundResult Engine::run_round(const RoundContext& context, const UserQuery& query) {
  RoundResult result;
  const auto history = truncate_history(context.history, context.budget).history;
  const auto wrapped = wrap_user_query(query, context.principles);

  auto ask = [&](const std::string& prompt) {
    CompletionRequest request{prompt, config_.stop_sequences, config_.max_output_tokens, config_.temperature};
    ++result.completions;
    try {
      return backend_.complete(request);
    } catch (const Error& e) {
      throw RoundAborted(e, result.trace);
    }
  };

  for (std::size_t j = 0; j < config_.max_steps; ++j) {
    const auto base = assemble(context.principles, context.registry, history, wrapped, result.trace);
    auto completion = ask(base);
    auto step = parse_step(completion);

    for (std::size_t attempt = 1; std::holds_alternative<FormatError>(step); ++attempt) {
      const auto& error = std::get<FormatError>(step);
      if (handle_format_error(error, attempt, config_) == FormatDecision::give_up) {
        result.final_answer = std::string(k_format_failure_answer);
        result.termination = Termination::format_failure;
        return result;
      }
      completion = ask(base + "\n" + corrective_line(error) + "\n" + std::string(k_force_thinking_marker));
      step = parse_step(completion);
    }

    if (auto* answer = std::get_if<FinalAnswer>(&step)) {
      result.final_answer = std::move(answer->text);
      result.termination = result.trace.empty() && is_interrogative(result.final_answer) ? Termination::clarification
                                                                                          : Termination::normal;
      return result;
    }

    auto traced = dispatch(context, std::move(completion), std::get<ToolCall>(std::move(step)));
    result.new_files.insert(result.new_files.end(), traced.files.begin(), traced.files.end());
    result.trace.steps.push_back(std::move(traced));
  }

  result.final_answer = step_limit_answer(config_.max_steps, result.new_files);
  result.termination = Termination::step_limit;
  return result;
}

} // namespace vchat
