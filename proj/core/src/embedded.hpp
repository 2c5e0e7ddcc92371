#pragma once

#include <string_view>

namespace vchat::detail {

/// Contents of a file from core/data compiled into the library; empty if unknown.
std::string_view embedded_file(std::string_view name);

} // namespace vchat::detail
