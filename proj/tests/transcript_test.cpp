#include <gtest/gtest.h>

#include "support.hpp"
#include "vchat/backend.hpp"
#include "vchat/digest.hpp"
#include "vchat/engine.hpp"
#include "vchat/error.hpp"
#include "vchat/transcript.hpp"

namespace vchat {
namespace {

using testing::FlowerScript;
using testing::TempDir;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::validation;
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

CompletionRequest request(std::string prompt) { return {std::move(prompt), {"\nObservation:"}}; }

// A fresh workspace holding the flower upload, ready for the depth-to-cartoon round.
struct FlowerStage {
  TempDir dir;
  Workspace workspace{dir.path(), std::make_unique<RandomIdSource>(testing::k_seed)};
  PrinciplePromptSet principles = PrinciplePromptSet::builtin();
  Registry registry = builtin_catalog();
  TokenBudget budget;
  DialogueHistory history;
  MockExecutor executor;

  FlowerStage() {
    const auto upload = workspace.add_upload(testing::flower_bytes(), "flower.png", "a yellow flower");
    const auto pair = render_upload_event(upload, workspace.root());
    history.append(pair.question, pair.answer);
  }

  RoundResult run(CompletionBackend& backend) {
    Engine engine(backend, executor);
    return engine.run_round({principles, registry, history, budget, workspace}, {testing::k_flower_query, {}});
  }
};

TEST(Backend, StopSequencesTruncate) {
  const std::vector<std::string> stops{"\nObservation:"};
  EXPECT_EQ(truncate_at_stop("a\nObservation: made up\nmore", stops), "a");
  EXPECT_EQ(truncate_at_stop("no stop here", stops), "no stop here");
  auto backend = ScriptedBackend::from_responses({" Yes\nAction: X\nAction Input: y\nObservation: invented"});
  EXPECT_EQ(backend.complete(request("p")).find("\nObservation:"), std::string::npos);
}

TEST(Backend, RequestValidation) {
  EXPECT_THROW(CompletionRequest{}.validate(), Error);
  CompletionRequest hot{"p", {}, 16, 2.0};
  EXPECT_THROW(hot.validate(), Error);
  EXPECT_NO_THROW(request("p").validate());
}

TEST(Backend, RecordingWritesOneEntryPerCall) {
  FlowerStage stage;
  auto writer = TranscriptWriter::in_memory();
  auto recorder = record(testing::scripted(FlowerScript().responses), writer);
  const auto result = stage.run(*recorder);
  EXPECT_EQ(result.trace.size(), 3u);
  EXPECT_EQ(writer->count("completion"), 4u);

  auto idle = TranscriptWriter::in_memory();
  record(testing::scripted({}), idle);
  EXPECT_EQ(idle->contents(), "");
}

TEST(Backend, RecordedRunReplaysIdentically) {
  TempDir dir;
  const auto path = dir / "flower.jsonl";
  RoundResult recorded;
  {
    FlowerStage stage;
    auto recorder = record(testing::scripted(FlowerScript().responses), TranscriptWriter::to_file(path));
    recorded = stage.run(*recorder);
  }
  auto backend = load_transcript(path);
  EXPECT_EQ(backend.remaining(), 4u);
  FlowerStage stage;
  const auto replayed = stage.run(backend);
  EXPECT_EQ(export_trace_jsonl(replayed.trace), export_trace_jsonl(recorded.trace));
  EXPECT_EQ(replayed.final_answer, recorded.final_answer);
  EXPECT_EQ(backend.served(), 4u);
  EXPECT_EQ(code_of([&] { backend.complete(request("more")); }), Errc::transcript_exhausted);
}

TEST(Backend, EmptyTranscriptFailsOnFirstCall) {
  TempDir dir;
  std::ofstream(dir / "empty.jsonl").flush();
  auto backend = load_transcript(dir / "empty.jsonl");
  EXPECT_EQ(code_of([&] { backend.complete(request("p")); }), Errc::transcript_exhausted);
}

TEST(Backend, TamperedResponseDivergesOnTheFollowingStep) {
  auto writer = TranscriptWriter::in_memory();
  {
    FlowerStage stage;
    auto recorder = record(testing::scripted(FlowerScript().responses), writer);
    stage.run(*recorder);
  }
  auto entries = parse_transcript(writer->contents()).completions;
  ASSERT_EQ(entries.size(), 4u);
  entries[0].response.replace(entries[0].response.find("Predict Depth"), 13, "Edge Detection");

  ScriptedBackend tampered(entries);
  FlowerStage stage;
  try {
    stage.run(tampered);
    FAIL();
  } catch (const RoundAborted& e) {
    EXPECT_EQ(e.code(), Errc::prompt_mismatch);
    EXPECT_NE(std::string(e.what()).find("call 2"), std::string::npos);
    EXPECT_EQ(e.partial_trace().size(), 1u);
  }
}

TEST(Backend, MismatchNamesTheDivergentOffset) {
  const std::string prompt = std::string(1000, 'x') + "tail of the prompt";
  ScriptedBackend late({TranscriptEntry::recorded(prompt, "r")});
  auto changed = prompt;
  changed[1005] = 'Y';
  EXPECT_NE(error_text([&] { late.complete(request(changed)); }).find("at byte offset 1005"), std::string::npos);

  ScriptedBackend early({TranscriptEntry::recorded(prompt, "r")});
  auto head = prompt;
  head[3] = 'Y';
  EXPECT_NE(error_text([&] { early.complete(request(head)); }).find("before byte offset 818"), std::string::npos);

  ScriptedBackend shorter({TranscriptEntry::recorded(prompt, "r")});
  EXPECT_EQ(code_of([&] { shorter.complete(request(prompt.substr(0, 500))); }), Errc::prompt_mismatch);

  ScriptedBackend same({TranscriptEntry::recorded(prompt, "r")});
  EXPECT_EQ(same.complete(request(prompt)), "r");
}

TEST(Transcript, ParseErrors) {
  EXPECT_EQ(code_of([] { parse_transcript("{\"kind\":\"header\",\"version\":2}\n"); }), Errc::version_mismatch);
  EXPECT_EQ(code_of([] { parse_transcript("not json\n"); }), Errc::transcript_parse);
  EXPECT_EQ(code_of([] { parse_transcript("{\"kind\":\"telemetry\"}\n"); }), Errc::transcript_parse);
  EXPECT_EQ(code_of([] { parse_transcript("{\"kind\":\"completion\"}\n"); }), Errc::transcript_parse);
  EXPECT_EQ(code_of([] { parse_transcript("{\"kind\":\"message\",\"text\":\"a\"}\n{\"kind\":\"header\",\"version\":1}\n"); }),
            Errc::transcript_parse);
  EXPECT_TRUE(parse_transcript("").records.empty());
}

TEST(Transcript, SealDetectsAnyChangedByte) {
  auto writer = TranscriptWriter::in_memory();
  writer->write({{"kind", "header"}, {"version", 1}});
  writer->write_completion(TranscriptEntry::recorded("prompt", " No\nAI: hello"));
  writer->seal();
  EXPECT_THROW(writer->write({{"kind", "message"}, {"text", "late"}}), Error);

  const auto text = writer->contents();
  const auto good = parse_transcript(text);
  EXPECT_TRUE(good.sealed);
  EXPECT_TRUE(good.seal_valid);
  ASSERT_EQ(good.completions.size(), 1u);

  auto tampered = text;
  tampered[tampered.find("hello")] = 'j';
  const auto bad = parse_transcript(tampered);
  EXPECT_TRUE(bad.sealed);
  EXPECT_FALSE(bad.seal_valid);

  EXPECT_EQ(code_of([&] { parse_transcript(text + "{\"kind\":\"message\",\"text\":\"x\"}\n"); }),
            Errc::transcript_parse);
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  for (const std::string sample : {"", "f", "fo", "foo", "foob", "fooba", "foobar"}) {
    EXPECT_EQ(base64_decode(base64_encode(sample)), sample);
  }
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(base64_encode("fo"), "Zm8=");
  EXPECT_EQ(base64_decode("Zm8="), "fo");
  EXPECT_THROW(base64_decode("@@@"), Error);
  const auto png = std::string(placeholder_png());
  EXPECT_EQ(base64_decode(base64_encode(png)), png);
}

} // namespace
} // namespace vchat
