#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "vchat/config.hpp"
#include "vchat/error.hpp"
#include "vchat/provenance.hpp"
#include "vchat/replay.hpp"
#include "vchat/service.hpp"
#include "vchat/session.hpp"
#include "vchat/transcript.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string backend;
  std::string transcript;
  std::string tools;
  std::string workspace;
  int port = -1;
  std::string seed;
};

vchat::AppConfig resolve_config(const GlobalOptions& options) {
  auto config = options.config_path.empty() ? vchat::AppConfig{} : vchat::load_config(options.config_path);
  if (!options.backend.empty()) config.set("backend.kind", options.backend);
  if (!options.transcript.empty()) config.set("backend.transcript", options.transcript);
  if (!options.tools.empty()) config.set("tools.enabled", options.tools);
  if (!options.workspace.empty()) config.set("workspace.dir", options.workspace);
  if (options.port >= 0) config.set("server.port", std::to_string(options.port));
  if (!options.seed.empty()) config.set("session.seed", options.seed);
  config.validate();
  return config;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vchat::Error(vchat::Errc::io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_work_dir(const std::string& requested, const char* label) {
  if (!requested.empty()) return requested;
  auto dir = fs::temp_directory_path() / ("vchat-" + std::string(label) + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

vchat::SessionStore make_store(const vchat::AppConfig& config) {
  auto resources = std::make_shared<const vchat::Resources>(vchat::load_resources(config));
  vchat::SessionStore::RecorderFactory recorders;
  if (config.backend_kind == "recording") {
    recorders = [](const std::string&, const fs::path& dir) {
      fs::create_directories(dir);
      return vchat::TranscriptWriter::to_file(dir / "transcript.jsonl");
    };
  }
  return vchat::SessionStore(
      config.workspace_dir, std::move(resources), vchat::SessionConfig::from_app(config),
      [config](const std::string&) { return vchat::make_backend(config); }, vchat::make_executor(config),
      std::move(recorders));
}

void print_response(const vchat::MessageResponse& response) {
  std::cout << "AI: " << response.final_answer << "\n";
  for (const auto& file : response.files) {
    if (file.kind != vchat::ImageSource::upload) std::cout << "saved: " << file.path.str() << "\n";
  }
  if (response.termination != vchat::Termination::normal) {
    std::cout << "(" << vchat::to_string(response.termination) << ")\n";
  }
}

int run_repl(const vchat::AppConfig& config) {
  auto store = make_store(config);
  const auto session = store.create();
  std::cout << "session " << session->id() << " in " << session->dir().string() << "\n"
            << "commands: :upload <file> [caption], :quit\n";
  std::optional<vchat::UploadRequest> pending;
  for (std::string line; std::cout << "> " << std::flush, std::getline(std::cin, line);) {
    if (line == ":quit") break;
    if (line.rfind(":upload ", 0) == 0) {
      std::istringstream args(line.substr(8));
      std::string file;
      args >> file;
      std::string caption;
      std::getline(args >> std::ws, caption);
      try {
        const auto path = session->upload_image(read_file(file), fs::path(file).filename().string(),
                                                caption.empty() ? std::nullopt : std::optional(caption));
        std::cout << "uploaded: " << path.str() << "\n";
      } catch (const vchat::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
      }
      continue;
    }
    if (line.empty()) continue;
    try {
      print_response(session->post_message(line));
    } catch (const vchat::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

int run_serve(const vchat::AppConfig& config) {
  auto store = make_store(config);
  vchat::HttpService service(store);
  const int port = service.bind(config.server_host, config.server_port);
  std::cout << "listening on " << config.server_host << ":" << port << std::endl;
  service.listen();
  return 0;
}

int run_replay(const vchat::AppConfig& config, const fs::path& transcript_path, const std::string& work) {
  const auto transcript = vchat::read_transcript(transcript_path);
  const auto dir = fresh_work_dir(work, "replay");
  auto resources = std::make_shared<const vchat::Resources>(vchat::load_resources(config));
  const auto report = vchat::replay_transcript(transcript, resources, dir);
  if (work.empty()) fs::remove_all(dir);
  for (const auto& mismatch : report.mismatches) std::cerr << "mismatch: " << mismatch << "\n";
  std::cout << (report.matched() ? "MATCH" : "MISMATCH") << " (" << report.rounds << " rounds, "
            << report.completions << " completions)\n";
  return report.matched() ? 0 : 1;
}

int run_record(const vchat::AppConfig& config, const fs::path& scenario_path, const fs::path& out,
               const std::string& work) {
  const auto scenario = vchat::read_transcript(scenario_path);
  const auto dir = fresh_work_dir(work, "record");
  auto resources = std::make_shared<const vchat::Resources>(vchat::load_resources(config));
  const auto responses = vchat::record_scenario(scenario, resources, dir, vchat::TranscriptWriter::to_file(out));
  if (work.empty()) fs::remove_all(dir);
  for (const auto& response : responses) {
    std::cout << "round " << response.round << ": " << vchat::to_string(response.termination) << ", "
              << response.trace.size() << " steps\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int run_render_prompts(const vchat::AppConfig& config, const fs::path& out) {
  const auto resources = vchat::load_resources(config);
  for (const auto& [relative, contents] : vchat::render_prompt_files(resources.principles, resources.catalog)) {
    const auto path = out / relative;
    fs::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << contents;
    if (!file) throw vchat::Error(vchat::Errc::io, "cannot write " + path.string());
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int run_provenance(const fs::path& dir) {
  const auto images = dir / "image";
  if (!fs::is_directory(images)) throw vchat::Error(vchat::Errc::not_found, "no image directory in " + dir.string());
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(images)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && !ext.empty() && vchat::is_image_extension(ext.substr(1))) {
      paths.push_back("image/" + entry.path().filename().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  const auto graph = vchat::build_provenance(paths);
  for (const auto& note : graph.diagnostics) std::cerr << "note: " << note << "\n";
  std::cout << graph.to_json().dump(2) << "\n";
  return 0;
}

int run_tools_list(const vchat::AppConfig& config) {
  const auto resources = vchat::load_resources(config);
  for (const auto& spec : resources.catalog.specs()) std::cout << spec.name << "\t" << spec.input_arity << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual dialogue orchestrator: chain image tools through a completion model"};
  app.require_subcommand(1);

  GlobalOptions options;
  app.add_option("--config", options.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--backend", options.backend, "remote, scripted or recording");
  app.add_option("--transcript", options.transcript, "transcript file for the scripted backend");
  app.add_option("--tools", options.tools, "comma separated tool names to enable");
  app.add_option("--workspace", options.workspace, "directory holding session workspaces");
  app.add_option("--port", options.port, "HTTP port (0 picks a free one)");
  app.add_option("--seed", options.seed, "seed for file ids");

  auto* repl = app.add_subcommand("repl", "interactive chat on a new session");
  auto* serve = app.add_subcommand("serve", "run the HTTP API");

  std::string transcript_path;
  std::string work_dir;
  auto* replay = app.add_subcommand("replay", "re-run a recorded transcript and verify it");
  replay->add_option("transcript", transcript_path)->required()->check(CLI::ExistingFile);
  replay->add_option("--work", work_dir, "scratch directory (default: a temporary one)");

  std::string scenario_path;
  std::string record_out;
  auto* record = app.add_subcommand("record", "play a scenario and write a sealed transcript");
  record->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
  record->add_option("--out", record_out)->required();
  record->add_option("--work", work_dir, "scratch directory (default: a temporary one)");

  std::string render_out = "rendered";
  auto* render = app.add_subcommand("render-prompts", "write every rendered prompt artifact");
  render->add_option("--out", render_out);

  std::string provenance_dir;
  auto* provenance = app.add_subcommand("provenance", "print the derivation graph of a session directory");
  provenance->add_option("dir", provenance_dir)->required()->check(CLI::ExistingDirectory);

  auto* tools = app.add_subcommand("tools", "tool catalog");
  tools->require_subcommand(1);
  auto* tools_list = tools->add_subcommand("list", "name and arity of every tool");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*provenance) return run_provenance(provenance_dir);
    const auto config = resolve_config(options);
    if (*repl) return run_repl(config);
    if (*serve) return run_serve(config);
    if (*replay) return run_replay(config, transcript_path, work_dir);
    if (*record) return run_record(config, scenario_path, record_out, work_dir);
    if (*render) return run_render_prompts(config, render_out);
    if (*tools_list) return run_tools_list(config);
  } catch (const std::exception& e) {
    std::cerr << "vchat: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
