#include "vchat/error.hpp"

namespace vchat {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
  case Errc::malformed_name: return "malformed-name";
  case Errc::invalid_slug: return "invalid-slug";
  case Errc::id_collision: return "id-collision";
  case Errc::unknown_tool: return "unknown-tool";
  case Errc::disabled_tool: return "disabled-tool";
  case Errc::arity_mismatch: return "arity-mismatch";
  case Errc::missing_file: return "missing-file";
  case Errc::io: return "io-error";
  case Errc::transport: return "transport-error";
  case Errc::transcript_exhausted: return "transcript-exhausted";
  case Errc::prompt_mismatch: return "prompt-mismatch";
  case Errc::transcript_parse: return "transcript-parse-error";
  case Errc::version_mismatch: return "version-mismatch";
  case Errc::executor_failure: return "executor-failure";
  case Errc::malformed_response: return "malformed-response";
  case Errc::payload_too_large: return "payload-too-large";
  case Errc::validation: return "validation-error";
  case Errc::unsupported_format: return "unsupported-format";
  case Errc::not_found: return "not-found";
  case Errc::busy: return "busy";
  case Errc::config: return "config-error";
  }
  return "unknown-error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace vchat
