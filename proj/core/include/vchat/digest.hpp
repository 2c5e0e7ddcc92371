#pragma once

#include <string>
#include <string_view>

namespace vchat {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view data);
/// Throws Error(malformed_response) on invalid input.
std::string base64_decode(std::string_view text);

} // namespace vchat
