#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <httplib.h>

#include "vchat/error.hpp"

namespace vchat::detail {

struct SplitUrl {
  std::string origin;
  std::string path;
};

/// "http://host:port/prefix" -> {"http://host:port", "/prefix"}
inline SplitUrl split_url(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) throw Error(Errc::config, "URL needs a scheme: " + std::string(url));
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string_view::npos) return {std::string(url), ""};
  auto path = std::string(url.substr(slash));
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {std::string(url.substr(0, slash)), path};
}

inline std::unique_ptr<httplib::Client> make_client(const std::string& origin, int timeout_seconds) {
  auto client = std::make_unique<httplib::Client>(origin);
  if (!client->is_valid()) throw Error(Errc::config, "unsupported URL " + origin);
  client->set_connection_timeout(timeout_seconds, 0);
  client->set_read_timeout(timeout_seconds, 0);
  client->set_write_timeout(timeout_seconds, 0);
  return client;
}

} // namespace vchat::detail
