#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <thread>

#include <httplib.h>

#include "support.hpp"
#include "vchat/digest.hpp"
#include "vchat/engine.hpp"
#include "vchat/error.hpp"
#include "vchat/provenance.hpp"
#include "vchat/replay.hpp"
#include "vchat/service.hpp"
#include "vchat/step_parser.hpp"

namespace vchat {
namespace {

using nlohmann::json;
using testing::FlowerScript;
using testing::TempDir;

// Fixed thresholds of the acceptance suite.
constexpr std::size_t k_catalog_size = 22;
constexpr std::size_t k_flower_steps = 3;
constexpr std::size_t k_flower_nodes = 4;
constexpr std::size_t k_round_trip_cases = 1000;
constexpr std::size_t k_fuzz_cases = 10000;
constexpr std::size_t k_history_default = 2000;
constexpr std::size_t k_max_format_retries = 2;
constexpr std::size_t k_step_limit = 10;
constexpr std::size_t k_tamper_trials = 64;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  std::string name;
  std::function<void(Check&)> body;
};

/// One depth-to-cartoon round on a fresh engine; every prompt sent is kept.
struct FlowerRun {
  RoundResult result;
  std::vector<std::string> prompts;
  std::vector<std::string> files;
  std::string upload;
};

FlowerRun run_flower(const std::filesystem::path& dir) {
  Workspace workspace(dir, std::make_unique<RandomIdSource>(testing::k_seed));
  const auto principles = PrinciplePromptSet::builtin();
  const auto registry = builtin_catalog();
  const TokenBudget budget;
  DialogueHistory history;
  FlowerRun run;
  run.upload = workspace.add_upload(testing::flower_bytes(), "flower.png", "a yellow flower").str();
  const auto pair = render_upload_event(WorkspacePath::parse(run.upload), dir, budget);
  history.append(pair.question, pair.answer, budget);

  testing::SpyBackend backend(testing::scripted(FlowerScript().responses));
  MockExecutor executor;
  Engine engine(backend, executor, {});
  run.result = engine.run_round({principles, registry, history, budget, workspace}, {testing::k_flower_query, {}});
  run.prompts = backend.prompts;
  run.files = workspace.list_images();
  return run;
}

RoundResult run_script(std::vector<std::string> responses, std::vector<std::string>* prompts = nullptr,
                       EngineConfig config = {}) {
  TempDir dir;
  Workspace workspace(dir.path(), std::make_unique<RandomIdSource>(testing::k_seed));
  const auto principles = PrinciplePromptSet::builtin();
  const auto registry = builtin_catalog();
  const TokenBudget budget;
  const DialogueHistory history;
  testing::SpyBackend backend(testing::scripted(std::move(responses)));
  MockExecutor executor;
  Engine engine(backend, executor, std::move(config));
  auto result = engine.run_round({principles, registry, history, budget, workspace}, {"make the sky purple", {}});
  if (prompts) *prompts = backend.prompts;
  return result;
}

void catalog_fidelity(Check& check) {
  const auto registry = builtin_catalog();
  check.require(registry.size() == k_catalog_size, "catalog has " + std::to_string(registry.size()) + " tools");
  const auto files = render_prompt_files(PrinciplePromptSet::builtin(), registry);
  std::size_t tools = 0;
  std::size_t seperated = 0;
  for (const auto& [name, text] : files) {
    if (!name.starts_with("tools/")) continue;
    ++tools;
    check.require(text == testing::golden(name), name + " differs from its golden file");
    if (text.find("comma seperated string of") != std::string::npos) ++seperated;
  }
  check.require(tools == k_catalog_size, "rendered " + std::to_string(tools) + " tool files");
  check.require(seperated > 0, "no \"comma seperated\" phrasing survived");
  check.detail = check.ok ? std::to_string(tools) + " tool prompts byte-exact, " + std::to_string(seperated) +
                                " with \"comma seperated\""
                          : check.detail;
}

void pipeline_replay(Check& check) {
  TempDir first_dir;
  TempDir second_dir;
  const auto first = run_flower(first_dir.path());
  const auto second = run_flower(second_dir.path());
  const auto& trace = first.result.trace;
  check.require(trace.size() == k_flower_steps, std::to_string(trace.size()) + " tool steps");
  const std::vector<std::string> slugs{"depth-of", "depth2image", "pix2pix"};
  const auto registry = builtin_catalog();
  for (std::size_t j = 0; j < std::min(trace.size(), slugs.size()); ++j) {
    const auto* spec = registry.find(trace.steps[j].call.tool_name);
    check.require(spec && spec->operation_slug == slugs[j], "step " + std::to_string(j) + " used the wrong tool");
  }
  check.require(first.result.new_files.size() == k_flower_steps, "expected 3 chained files");

  const auto graph = build_provenance(first.files);
  check.require(graph.nodes.size() == k_flower_nodes && graph.edges.size() == k_flower_nodes - 1,
                "provenance graph has " + std::to_string(graph.nodes.size()) + " nodes");
  if (!first.result.new_files.empty()) {
    const auto last = first.result.new_files.back();
    const auto last_id = leading_id(parse_name(last)).str();
    const auto upload_id = leading_id(parse_name(first.upload)).str();
    check.require(graph.root_of(last_id) == upload_id, "chain is not rooted at the upload");
    check.require(graph.lineage(last_id) == slugs, "lineage is not depth-of, depth2image, pix2pix");
    check.require(first.result.final_answer.find(last.str()) != std::string::npos,
                  "final answer does not name " + last.str());
  }
  check.require(export_trace_jsonl(first.result.trace) == export_trace_jsonl(second.result.trace),
                "trace exports differ between runs");
  if (check.ok) check.detail = "3 steps, 4-node path, answer names the last file, 2 runs byte-identical";
}

void filename_protocol(Check& check) {
  const auto parsed = parse_name("image/ui3c_edge-of_o0ec_nji9dcgf.png");
  const auto* chained = std::get_if<ChainedName>(&parsed);
  check.require(chained && chained->name.str() == "ui3c" && chained->operation == "edge-of" &&
                    chained->prev.str() == "o0ec" && chained->org == "nji9dcgf",
                "worked example did not parse to ui3c / edge-of / o0ec / nji9dcgf");

  std::mt19937_64 rng(20230308);
  RandomIdSource ids(1);
  const std::vector<std::string> slugs{"edge-of", "depth-of", "pix2pix", "canny2image", "replace-something"};
  std::size_t round_trips = 0;
  for (std::size_t i = 0; i < k_round_trip_cases; ++i) {
    const ChainedName name{FileId::parse(ids.next()), slugs[rng() % slugs.size()], FileId::parse(ids.next()),
                           sanitize_org("Org " + std::to_string(rng() % 100000))};
    const auto path = "image/" + name.stem() + ".png";
    try {
      round_trips += parse_name(path) == ParsedName{name} ? 1 : 0;
    } catch (const Error&) {
    }
  }
  check.require(round_trips == k_round_trip_cases,
                std::to_string(k_round_trip_cases - round_trips) + " round trips failed");

  std::string alphabet = "abz09_-./\\ %image.png";
  alphabet += '\0';
  alphabet += '\xff';
  std::size_t fuzzed = 0;
  for (std::size_t i = 0; i < k_fuzz_cases; ++i) {
    std::string text;
    const auto length = rng() % 48;
    for (std::size_t k = 0; k < length; ++k) text += alphabet[rng() % alphabet.size()];
    if (rng() % 2) text = "image/" + text + ".png";
    try {
      parse_name(text);
    } catch (const Error& e) {
      check.require(e.code() == Errc::malformed_name, "fuzz raised " + std::string(to_string(e.code())));
    } catch (...) {
      check.require(false, "fuzz raised a non-library exception");
    }
    ++fuzzed;
  }
  if (check.ok) {
    check.detail = std::to_string(round_trips) + " round trips, " + std::to_string(fuzzed) +
                   " fuzz strings without a crash, worked example parsed";
  }
}

void force_thinking(Check& check) {
  std::vector<std::pair<std::string, std::vector<std::string>>> runs;
  {
    TempDir dir;
    runs.emplace_back(testing::k_flower_query, run_flower(dir.path()).prompts);
  }
  std::vector<std::string> prompts;
  run_script({" Yes\nAction: Paint Sky\nAction Input: purple", " No\nAI: I have no such tool."}, &prompts);
  runs.emplace_back("make the sky purple", prompts);
  run_script({"garbage", " No\nAI: fine"}, &prompts);
  runs.emplace_back("make the sky purple", prompts);
  run_script(std::vector<std::string>(k_step_limit, " Yes\nAction: Get Photo Description\nAction Input: x"), &prompts);
  runs.emplace_back("make the sky purple", prompts);

  std::size_t total = 0;
  std::size_t good = 0;
  for (const auto& [query, sent] : runs) {
    for (const auto& prompt : sent) {
      ++total;
      const auto q = prompt.rfind("New input: " + query);
      if (q == std::string::npos) continue;
      const auto marker = prompt.find(k_force_thinking_marker, q);
      if (marker == std::string::npos) continue;
      const auto trace = prompt.find("\nObservation: ", q);
      if (trace != std::string::npos && trace < marker) continue;
      ++good;
    }
  }
  check.require(total > 0 && good == total,
                std::to_string(good) + "/" + std::to_string(total) + " prompts carry the marker in place");
  if (check.ok) check.detail = std::to_string(total) + "/" + std::to_string(total) + " prompts (100%)";
}

void history_budget(Check& check) {
  check.require(TokenBudget{}.max_history_tokens == k_history_default, "default budget is not 2000");
  AppConfig app;
  check.require(app.budget.max_history_tokens == k_history_default, "app default budget is not 2000");
  app.set("history.max_tokens", "500");
  check.require(app.budget.max_history_tokens == 500, "history.max_tokens did not override the budget");

  for (const auto limit : {k_history_default, std::size_t{500}}) {
    const TokenBudget budget{limit, "chars4"};
    DialogueHistory history;
    for (int i = 0; i < 60; ++i) {
      history.append("question " + std::to_string(i), std::string(static_cast<std::size_t>(150 + 13 * i), 'a'), budget);
    }
    check.require(history.total_tokens() > limit, "constructed history is not over budget");
    const auto truncated = truncate_history(history, budget);
    const auto kept = truncated.history.pairs.size();
    check.require(estimate_tokens(truncated.history.render()) <= limit, "rendered history exceeds the budget");
    check.require(kept + truncated.dropped == history.pairs.size(), "pairs were split or lost");
    check.require(kept > 0 && truncated.history.pairs.back().question == "question 59", "newest pair was dropped");
    check.require(truncated.history.pairs.front().question == "question " + std::to_string(60 - kept),
                  "pairs were not dropped oldest first");
    if (kept < history.pairs.size()) {
      const auto next = history.pairs[history.pairs.size() - kept - 1].tokens;
      check.require(truncated.history.total_tokens() + next > limit, "dropped more pairs than needed");
    }
  }
  if (check.ok) check.detail = "default 2000, override to 500 honoured, whole oldest pairs dropped";
}

void strictness(Check& check) {
  const auto unknown =
      run_script({" Yes\nAction: Paint Sky\nAction Input: purple", " No\nAI: I have no such tool."});
  check.require(unknown.trace.size() == 1 && unknown.trace.steps[0].status == StepStatus::unknown_tool &&
                    unknown.trace.steps[0].observation.starts_with("Error: unknown-tool"),
                "unknown tool was not reported as an observation");
  check.require(unknown.termination == Termination::normal, "unknown tool ended the round abnormally");

  std::vector<std::string> malformed(k_max_format_retries + 4, "I would rather chat about the weather.");
  EngineConfig config;
  config.format_retries = k_max_format_retries;
  const auto failed = run_script(malformed, nullptr, config);
  check.require(failed.termination == Termination::format_failure, "malformed steps did not end in format-failure");
  check.require(failed.completions == 1 + k_max_format_retries,
                std::to_string(failed.completions - 1) + " corrective re-asks");
  check.require(failed.final_answer == k_format_failure_answer && failed.final_answer.find("image/") == std::string::npos,
                "format-failure answer is not the fixed non-fabricating text");

  const auto looping = run_script(
      std::vector<std::string>(k_step_limit + 5, " Yes\nAction: Get Photo Description\nAction Input: image/x.png"));
  check.require(EngineConfig{}.max_steps == k_step_limit, "default max_steps is not 10");
  check.require(looping.termination == Termination::step_limit, "always-tool script did not hit the step limit");
  check.require(looping.trace.size() == k_step_limit && looping.completions == k_step_limit,
                "step limit hit after " + std::to_string(looping.trace.size()) + " steps");
  if (check.ok) check.detail = "unknown-tool observed, 2 re-asks then format-failure, step-limit at exactly 10";
}

void http_parity(Check& check) {
  TempDir root;
  SessionStore store(root.path(), testing::builtin_resources(), testing::seeded_config(),
                     [](const std::string&) { return testing::scripted(FlowerScript().responses); },
                     std::make_shared<MockExecutor>());
  HttpService service(store);
  const auto port = service.bind("127.0.0.1", 0);
  std::thread runner([&] { service.listen(); });
  service.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto created = client.Post("/v1/sessions", "", "application/json");
  check.require(created && created->status == 201, "session creation failed");
  nlohmann::ordered_json over_http;
  std::string id;
  if (check.ok) {
    id = json::parse(created->body).at("id").get<std::string>();
    const auto body = json{{"text", testing::k_flower_query},
                           {"image",
                            {{"filename", "flower.png"},
                             {"data", base64_encode(testing::flower_bytes())},
                             {"caption", "a yellow flower"}}}};
    const auto res = client.Post("/v1/sessions/" + id + "/messages", body.dump(), "application/json");
    check.require(res && res->status == 200, "message request failed");
    if (res && res->status == 200) over_http = nlohmann::ordered_json::parse(res->body);
  }

  std::size_t rejected = 0;
  const std::vector<std::string> attacks{"/v1/files/../secret",
                                         "/v1/files/" + id + "/../secret.png",
                                         "/v1/files/" + id + "/image/../../secret.png",
                                         "/v1/files/" + id + "/%2e%2e/%2e%2e/secret.png",
                                         "/v1/files/" + id + "/session.json",
                                         "/v1/files/../../etc/passwd"};
  std::ofstream(root / "secret.png") << "secret";
  for (const auto& path : attacks) {
    const auto res = client.Get(path);
    if (res && (res->status == 400 || res->status == 404) && res->body != "secret") ++rejected;
  }
  service.stop();
  runner.join();
  check.require(rejected == attacks.size(),
                std::to_string(attacks.size() - rejected) + " traversal requests were not rejected");

  TempDir direct_root;
  const auto direct = Session::create("direct", direct_root.path(), testing::seeded_config(),
                                      testing::builtin_resources(), testing::scripted(FlowerScript().responses),
                                      std::make_shared<MockExecutor>());
  const auto expected = direct->post_message(
      testing::k_flower_query, UploadRequest{"flower.png", testing::flower_bytes(), std::string("a yellow flower")});
  if (check.ok) {
    check.require(over_http.at("trace").dump() == export_trace(expected.trace).dump(), "trace exports differ");
    check.require(over_http.dump() == expected.to_json().dump(), "message responses differ");
  }
  if (check.ok) {
    check.detail = "identical trace export over HTTP and library, " + std::to_string(rejected) +
                   " traversal requests rejected";
  }
}

void record_replay(Check& check) {
  TempDir dir;
  auto writer = TranscriptWriter::in_memory();
  {
    const auto session = Session::create("recorded", dir / "recorded", testing::seeded_config(),
                                         testing::builtin_resources(), testing::scripted(FlowerScript().responses),
                                         std::make_shared<MockExecutor>(), writer);
    session->post_message(testing::k_flower_query,
                          UploadRequest{"flower.png", testing::flower_bytes(), std::string("a yellow flower")});
  }
  const auto recorded = writer->contents();
  const auto transcript = parse_transcript(recorded);
  check.require(transcript.seal_valid, "recording is not sealed");
  bool verified = !transcript.completions.empty();
  for (const auto& entry : transcript.completions) verified = verified && entry.verified();
  check.require(verified, "recorded completions lack prompt digests");

  const auto report = replay_transcript(transcript, testing::builtin_resources(), dir / "replay");
  check.require(report.matched(), report.mismatches.empty() ? "" : report.mismatches.front());
  check.require(report.completions == transcript.completions.size(), "replay did not use every completion");

  auto rewriter = TranscriptWriter::in_memory();
  record_scenario(transcript, testing::builtin_resources(), dir / "rerecord", rewriter);
  check.require(rewriter->contents() == recorded, "re-recording is not bit-identical");

  std::mt19937_64 rng(42);
  std::size_t detected = 0;
  for (std::size_t t = 0; t < k_tamper_trials; ++t) {
    auto tampered = recorded;
    const auto pos = rng() % tampered.size();
    tampered[pos] = static_cast<char>(tampered[pos] ^ (1 + rng() % 255));
    try {
      const auto report = replay_transcript(parse_transcript(tampered), testing::builtin_resources(),
                                            dir / ("tamper" + std::to_string(t)));
      if (!report.matched()) ++detected;
    } catch (const Error&) {
      ++detected;
    }
  }
  check.require(detected == k_tamper_trials,
                std::to_string(k_tamper_trials - detected) + " single-byte tampers went unnoticed");
  if (check.ok) {
    check.detail = std::to_string(report.completions) + " digest-verified completions replayed, re-recording identical, " +
                   std::to_string(detected) + "/" + std::to_string(k_tamper_trials) + " single-byte tampers detected";
  }
}

} // namespace
} // namespace vchat

int main() {
  using namespace vchat;
  const std::vector<Criterion> criteria{
      {"catalog-fidelity", catalog_fidelity}, {"pipeline-replay", pipeline_replay},
      {"filename-protocol", filename_protocol}, {"force-thinking", force_thinking},
      {"history-budget", history_budget},   {"strictness-ablations", strictness},
      {"http-library-parity", http_parity},  {"record-replay", record_replay},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    Check check;
    try {
      criterion.body(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("threw: ") + e.what());
    }
    std::printf("%s %s: %s\n", check.ok ? "PASS" : "FAIL", criterion.name.c_str(), check.detail.c_str());
    if (!check.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
