#include "vchat/service.hpp"

#include <httplib.h>

#include "vchat/digest.hpp"
#include "vchat/error.hpp"

namespace vchat {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* k_json = "application/json";

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), k_json);
}

int status_for(Errc code) {
  switch (code) {
  case Errc::not_found:
  case Errc::missing_file: return 404;
  case Errc::busy: return 409;
  case Errc::payload_too_large: return 413;
  case Errc::transport:
  case Errc::transcript_exhausted:
  case Errc::prompt_mismatch: return 502;
  case Errc::io:
  case Errc::config: return 500;
  default: return 400;
  }
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const RoundAborted& e) {
      send_json(res, status_for(e.code()),
                {{"error", to_string(e.code())}, {"message", e.what()}, {"trace", export_trace(e.partial_trace())}});
    } catch (const Error& e) {
      send_json(res, status_for(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}});
    } catch (const json::exception& e) {
      send_json(res, 400, {{"error", to_string(Errc::validation)}, {"message", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
    }
  };
}

std::string content_type_for(const WorkspacePath& path) {
  return path.extension == "png" ? "image/png" : "image/jpeg";
}

ordered_json tools_json(const Registry& catalog) {
  ordered_json tools = ordered_json::array();
  for (const auto& spec : catalog.specs()) {
    ordered_json inputs = ordered_json::array();
    for (auto role : spec.input_roles) inputs.push_back(to_string(role));
    tools.push_back({{"name", spec.name},
                     {"arity", spec.input_arity},
                     {"inputs", std::move(inputs)},
                     {"output", to_string(spec.output_kind)},
                     {"slug", spec.operation_slug},
                     {"enabled", catalog.is_enabled(spec.name)}});
  }
  return tools;
}

struct ParsedMessage {
  std::string text;
  std::optional<UploadRequest> upload;
};

ParsedMessage parse_message(const httplib::Request& req) {
  ParsedMessage message;
  if (req.is_multipart_form_data()) {
    if (req.has_file("text")) message.text = req.get_file_value("text").content;
    if (req.has_file("image")) {
      const auto file = req.get_file_value("image");
      message.upload = UploadRequest{file.filename, file.content, std::nullopt};
      if (req.has_file("caption")) message.upload->caption = req.get_file_value("caption").content;
    }
    return message;
  }
  const auto body = json::parse(req.body);
  if (!body.is_object()) throw Error(Errc::validation, "message body must be a JSON object");
  message.text = body.value("text", "");
  if (body.contains("image")) {
    const auto& image = body.at("image");
    message.upload = UploadRequest{image.at("filename").get<std::string>(),
                                   base64_decode(image.at("data").get<std::string>()), std::nullopt};
    if (image.contains("caption")) message.upload->caption = image.at("caption").get<std::string>();
  }
  return message;
}

} // namespace

struct HttpService::Impl {
  SessionStore& store;
  httplib::Server server;

  explicit Impl(SessionStore& s) : store(s) { routes(); }

  void routes() {
    server.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  std::optional<std::vector<std::string>> enabled;
                  if (!req.body.empty()) {
                    const auto body = json::parse(req.body);
                    if (body.contains("enabled_tools")) {
                      enabled = body.at("enabled_tools").get<std::vector<std::string>>();
                    }
                  }
                  const auto session = store.create(std::move(enabled));
                  send_json(res, 201,
                            {{"id", session->id()}, {"enabled_tools", session->registry().enabled_names()}});
                }));

    server.Post(R"(/v1/sessions/([^/]+)/messages)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto session = store.get(req.matches[1].str());
                  auto message = parse_message(req);
                  const auto response = session->post_message(std::move(message.text), std::move(message.upload));
                  send_json(res, 200, response.to_json());
                }));

    server.Get(R"(/v1/sessions/([^/]+)/history)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, store.get(req.matches[1].str())->history_json());
               }));

    server.Get(R"(/v1/sessions/([^/]+)/provenance)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, store.get(req.matches[1].str())->provenance().to_json());
               }));

    server.Get(R"(/v1/files/(.*))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto rest = req.matches[1].str();
                 const auto slash = rest.find('/');
                 const auto session_id = rest.substr(0, slash);
                 const auto path = slash == std::string::npos ? std::nullopt
                                                              : WorkspacePath::try_parse(rest.substr(slash + 1));
                 if (!is_valid_id(session_id) || !path || !is_image_extension(path->extension)) {
                   throw Error(Errc::validation, "bad file path \"" + rest + "\"");
                 }
                 const auto session = store.get(session_id);
                 if (!session->workspace().exists(*path)) throw Error(Errc::not_found, "no file " + path->str());
                 res.status = 200;
                 res.set_content(session->workspace().read_bytes(*path), content_type_for(*path));
               }));

    server.Get("/v1/tools", guarded([this](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, tools_json(store.resources().catalog));
               }));
  }
};

HttpService::HttpService(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(Errc::io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error(Errc::io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpService::listen() {
  if (!impl_->server.listen_after_bind()) throw Error(Errc::io, "server stopped unexpectedly");
}

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

void serve(const std::string& host, int port, SessionStore& store) {
  HttpService service(store);
  service.bind(host, port);
  service.listen();
}

} // namespace vchat
