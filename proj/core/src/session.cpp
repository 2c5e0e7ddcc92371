#include "vchat/session.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "vchat/digest.hpp"
#include "vchat/error.hpp"

namespace vchat {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t k_session_id_salt = 0x5e5510a1d5ULL;

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error(Errc::io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot replace " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ordered_json upload_json(std::string_view filename, std::string_view bytes, const std::optional<std::string>& caption) {
  ordered_json doc{{"filename", filename}, {"data", base64_encode(bytes)}};
  if (caption) doc["caption"] = *caption;
  return doc;
}

} // namespace

ordered_json SessionConfig::to_json() const {
  ordered_json doc;
  doc["engine"] = {{"max_steps", engine.max_steps},
                   {"format_retries", engine.format_retries},
                   {"stop_sequences", engine.stop_sequences},
                   {"max_output_tokens", engine.max_output_tokens},
                   {"temperature", engine.temperature}};
  doc["history"] = {{"max_tokens", budget.max_history_tokens}, {"estimator", budget.estimator}};
  if (enabled_tools) doc["enabled_tools"] = *enabled_tools;
  doc["seed"] = seed;
  doc["id_length"] = id_length;
  doc["max_upload_bytes"] = max_upload_bytes;
  return doc;
}

SessionConfig SessionConfig::from_json(const json& doc) {
  try {
    SessionConfig config;
    if (doc.contains("engine")) {
      const auto& e = doc.at("engine");
      config.engine.max_steps = e.value("max_steps", config.engine.max_steps);
      config.engine.format_retries = e.value("format_retries", config.engine.format_retries);
      config.engine.stop_sequences = e.value("stop_sequences", config.engine.stop_sequences);
      config.engine.max_output_tokens = e.value("max_output_tokens", config.engine.max_output_tokens);
      config.engine.temperature = e.value("temperature", config.engine.temperature);
    }
    if (doc.contains("history")) {
      const auto& h = doc.at("history");
      config.budget.max_history_tokens = h.value("max_tokens", config.budget.max_history_tokens);
      config.budget.estimator = h.value("estimator", config.budget.estimator);
    }
    if (doc.contains("enabled_tools")) config.enabled_tools = doc.at("enabled_tools").get<std::vector<std::string>>();
    config.seed = doc.value("seed", config.seed);
    config.id_length = doc.value("id_length", config.id_length);
    config.max_upload_bytes = doc.value("max_upload_bytes", config.max_upload_bytes);
    config.engine.validate();
    token_estimator(config.budget.estimator);
    return config;
  } catch (const json::exception& e) {
    throw Error(Errc::validation, std::string("bad session config: ") + e.what());
  }
}

SessionConfig SessionConfig::from_app(const AppConfig& app) {
  SessionConfig config;
  config.engine = app.engine;
  config.budget = app.budget;
  if (app.session_seed) {
    config.seed = *app.session_seed;
  } else {
    std::random_device device;
    config.seed = (std::uint64_t{device()} << 32) | device();
  }
  config.id_length = app.session_id_length;
  return config;
}

ordered_json MessageResponse::to_json() const {
  ordered_json files_json = ordered_json::array();
  for (const auto& file : files) files_json.push_back({{"path", file.path.str()}, {"kind", to_string(file.kind)}});
  return {{"round", round},
          {"final_answer", final_answer},
          {"files", std::move(files_json)},
          {"trace", export_trace(trace)},
          {"termination", to_string(termination)}};
}

Session::Session(std::string id, std::filesystem::path dir, SessionConfig config,
                 std::shared_ptr<const Resources> resources, std::shared_ptr<CompletionBackend> backend,
                 std::shared_ptr<ToolExecutor> executor, std::unique_ptr<Workspace> workspace)
    : id_(std::move(id)),
      dir_(std::move(dir)),
      config_(std::move(config)),
      resources_(std::move(resources)),
      registry_(config_.enabled_tools ? resources_->catalog.with_enabled(*config_.enabled_tools)
                                      : resources_->catalog),
      backend_(std::move(backend)),
      executor_(std::move(executor)),
      workspace_(std::move(workspace)) {
  if (!backend_ || !executor_) throw Error(Errc::validation, "session needs a backend and an executor");
  if (!config_.enabled_tools) config_.enabled_tools = registry_.enabled_names();
}

std::shared_ptr<Session> Session::create(std::string id, const std::filesystem::path& dir, SessionConfig config,
                                         std::shared_ptr<const Resources> resources,
                                         std::shared_ptr<CompletionBackend> backend,
                                         std::shared_ptr<ToolExecutor> executor,
                                         std::shared_ptr<TranscriptWriter> recorder) {
  if (!is_valid_id(id)) throw Error(Errc::validation, "bad session id \"" + id + "\"");
  config.engine.validate();
  token_estimator(config.budget.estimator);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());

  auto ids = std::make_unique<RandomIdSource>(config.seed, config.id_length);
  auto workspace = std::make_unique<Workspace>(dir, std::move(ids));
  if (recorder) backend = std::make_shared<RecordingBackend>(std::move(backend), recorder);
  std::shared_ptr<Session> session(new Session(std::move(id), dir, std::move(config), std::move(resources),
                                               std::move(backend), std::move(executor), std::move(workspace)));
  if (recorder) {
    session->recorder_ = std::move(recorder);
    session->recorder_->write({{"kind", "header"}, {"version", k_transcript_version},
                               {"config", session->config_.to_json()}});
  }
  session->save();
  return session;
}

std::shared_ptr<Session> Session::load(const std::filesystem::path& dir, std::shared_ptr<const Resources> resources,
                                       std::shared_ptr<CompletionBackend> backend,
                                       std::shared_ptr<ToolExecutor> executor) {
  json doc;
  try {
    doc = json::parse(read_file(dir / "session.json"));
  } catch (const json::exception& e) {
    throw Error(Errc::validation, "bad session.json in " + dir.string() + ": " + e.what());
  }
  try {
    auto config = SessionConfig::from_json(doc.at("config"));
    const auto& ids_doc = doc.at("ids");
    auto ids = std::make_unique<RandomIdSource>(ids_doc.at("seed").get<std::uint64_t>(),
                                                ids_doc.at("length").get<std::size_t>(),
                                                ids_doc.at("draws").get<std::uint64_t>());
    auto workspace = std::make_unique<Workspace>(dir, std::move(ids));
    std::shared_ptr<Session> session(new Session(doc.at("id").get<std::string>(), dir, std::move(config),
                                                 std::move(resources), std::move(backend), std::move(executor),
                                                 std::move(workspace)));
    session->round_counter_ = doc.at("round_counter").get<std::size_t>();

    std::istringstream lines(read_file(dir / "history.jsonl"));
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      const auto pair = json::parse(line);
      session->history_.pairs.push_back(
          {pair.at("question").get<std::string>(), pair.at("answer").get<std::string>(),
           pair.at("tokens").get<std::size_t>()});
    }
    return session;
  } catch (const json::exception& e) {
    throw Error(Errc::validation, "bad session state in " + dir.string() + ": " + e.what());
  }
}

Session::~Session() {
  if (recorder_ && !recorder_->sealed()) {
    try {
      recorder_->seal();
    } catch (...) {
    }
  }
}

DialogueHistory Session::history() const {
  std::lock_guard lock(state_mutex_);
  return history_;
}

std::size_t Session::round_counter() const {
  std::lock_guard lock(state_mutex_);
  return round_counter_;
}

void Session::append_pair(std::string question, std::string answer) {
  std::lock_guard lock(state_mutex_);
  history_.append(std::move(question), std::move(answer), config_.budget);
  history_ = truncate_history(history_, config_.budget).history;
}

WorkspacePath Session::add_upload(std::string_view bytes, std::string_view filename,
                                  std::optional<std::string> caption) {
  if (bytes.empty()) throw Error(Errc::validation, "empty upload");
  auto path = workspace_->add_upload(bytes, filename, caption.value_or("uploaded image"), config_.max_upload_bytes);
  const auto pair = render_upload_event(path, workspace_->root(), config_.budget);
  append_pair(pair.question, pair.answer);
  return path;
}

WorkspacePath Session::upload_image(std::string_view bytes, std::string_view original_filename,
                                    std::optional<std::string> caption) {
  std::unique_lock busy(round_mutex_, std::try_to_lock);
  if (!busy.owns_lock()) throw Error(Errc::busy, "session " + id_ + " is running a round");
  if (recorder_) {
    ordered_json record{{"kind", "upload"}};
    record.update(upload_json(original_filename, bytes, caption));
    recorder_->write(record);
  }
  auto path = add_upload(bytes, original_filename, std::move(caption));
  save();
  return path;
}

MessageResponse Session::post_message(std::string text, std::optional<UploadRequest> upload) {
  std::unique_lock busy(round_mutex_, std::try_to_lock);
  if (!busy.owns_lock()) throw Error(Errc::busy, "session " + id_ + " is running a round");
  if (recorder_) {
    ordered_json record{{"kind", "message"}, {"text", text}};
    if (upload) record["upload"] = upload_json(upload->filename, upload->bytes, upload->caption);
    recorder_->write(record);
  }

  MessageResponse response;
  std::optional<WorkspacePath> uploaded;
  if (upload) {
    uploaded = add_upload(upload->bytes, upload->filename, upload->caption);
    response.files.push_back({*uploaded, ImageSource::upload});
  }

  const auto snapshot = history();
  Engine engine(*backend_, *executor_, config_.engine);
  const RoundContext context{resources_->principles, registry_, snapshot, config_.budget, *workspace_};
  RoundResult result;
  try {
    result = engine.run_round(context, UserQuery{text, uploaded});
  } catch (...) {
    save();
    throw;
  }

  append_pair(text, result.final_answer);
  {
    std::lock_guard lock(state_mutex_);
    response.round = ++round_counter_;
  }
  save();

  for (const auto& path : result.new_files) {
    response.files.push_back({path, workspace_->read_sidecar(path).source});
  }
  response.final_answer = std::move(result.final_answer);
  response.trace = std::move(result.trace);
  response.termination = result.termination;

  if (recorder_) {
    recorder_->write({{"kind", "round"},
                      {"round", response.round},
                      {"termination", to_string(response.termination)},
                      {"final_answer", response.final_answer},
                      {"trace_digest", sha256_hex(export_trace_jsonl(response.trace))}});
  }
  return response;
}

ProvenanceGraph Session::provenance() const {
  const auto images = workspace_->list_images();
  return build_provenance(images);
}

ordered_json Session::history_json() const {
  std::lock_guard lock(state_mutex_);
  ordered_json pairs = ordered_json::array();
  for (const auto& pair : history_.pairs) pairs.push_back({{"question", pair.question}, {"answer", pair.answer}});
  return {{"round_counter", round_counter_}, {"pairs", std::move(pairs)}};
}

void Session::save() const {
  ordered_json doc;
  doc["id"] = id_;
  {
    std::lock_guard lock(state_mutex_);
    doc["round_counter"] = round_counter_;
    std::string lines;
    for (const auto& pair : history_.pairs) {
      lines += ordered_json{{"question", pair.question}, {"answer", pair.answer}, {"tokens", pair.tokens}}.dump();
      lines += '\n';
    }
    write_file_atomically(dir_ / "history.jsonl", lines);
  }
  doc["config"] = config_.to_json();
  const auto* ids = dynamic_cast<const RandomIdSource*>(&workspace_->ids());
  if (!ids) throw Error(Errc::validation, "session workspace must use a seeded id source");
  doc["ids"] = {{"seed", ids->seed()}, {"draws", ids->draws()}, {"length", ids->length()}};
  write_file_atomically(dir_ / "session.json", doc.dump(2) + "\n");
}

SessionStore::SessionStore(std::filesystem::path root, std::shared_ptr<const Resources> resources,
                           SessionConfig defaults, BackendFactory backends, std::shared_ptr<ToolExecutor> executor,
                           RecorderFactory recorders)
    : root_(std::move(root)),
      resources_(std::move(resources)),
      defaults_(std::move(defaults)),
      backends_(std::move(backends)),
      executor_(std::move(executor)),
      recorders_(std::move(recorders)),
      session_ids_(defaults_.seed ^ k_session_id_salt, 12) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error(Errc::io, "cannot create " + root_.string() + ": " + ec.message());
}

std::shared_ptr<Session> SessionStore::create(std::optional<std::vector<std::string>> enabled_tools) {
  auto config = defaults_;
  if (enabled_tools) {
    resources_->catalog.with_enabled(*enabled_tools);
    config.enabled_tools = std::move(enabled_tools);
  }

  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = session_ids_.next();
  } while (sessions_.count(id) || std::filesystem::exists(root_ / id));

  const auto dir = root_ / id;
  auto recorder = recorders_ ? recorders_(id, dir) : nullptr;
  auto session = Session::create(id, dir, std::move(config), resources_, backends_(id), executor_, std::move(recorder));
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<Session> SessionStore::get(std::string_view id) {
  std::lock_guard lock(mutex_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  const std::string key(id);
  if (!is_valid_id(key) || !std::filesystem::exists(root_ / key / "session.json")) {
    throw Error(Errc::not_found, "no session \"" + key + "\"");
  }
  auto session = Session::load(root_ / key, resources_, backends_(key), executor_);
  sessions_.emplace(key, session);
  return session;
}

} // namespace vchat
