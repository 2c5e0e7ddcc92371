#pragma once

#include <memory>
#include <string>

#include "vchat/session.hpp"

namespace vchat {

/// JSON API over a session store:
///
///   POST /v1/sessions                      {enabled_tools?} -> 201 {id, enabled_tools}
///   POST /v1/sessions/{id}/messages        {text, image?:{filename, data}} or multipart
///                                          (text, image, caption) -> MessageResponse
///   GET  /v1/sessions/{id}/history
///   GET  /v1/sessions/{id}/provenance
///   GET  /v1/files/{session}/{path}        image bytes, workspace-scoped
///   GET  /v1/tools
///
/// Errors are `{error, message}` with 400 (bad request), 404 (unknown session
/// or file), 409 (round already running), 413 (upload too large) or 502
/// (backend failure, with the partial trace).
class HttpService {
public:
  explicit HttpService(SessionStore& store);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds and serves until the process is stopped.
void serve(const std::string& host, int port, SessionStore& store);

} // namespace vchat
