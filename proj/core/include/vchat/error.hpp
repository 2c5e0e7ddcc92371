#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vchat {

enum class Errc {
  malformed_name,
  invalid_slug,
  id_collision,
  unknown_tool,
  disabled_tool,
  arity_mismatch,
  missing_file,
  io,
  transport,
  transcript_exhausted,
  prompt_mismatch,
  transcript_parse,
  version_mismatch,
  executor_failure,
  malformed_response,
  payload_too_large,
  validation,
  unsupported_format,
  not_found,
  busy,
  config,
};

/// Stable machine-readable token for an error code, e.g. "unknown-tool".
std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

} // namespace vchat
