#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vchat/backend.hpp"
#include "vchat/config.hpp"
#include "vchat/executors.hpp"
#include "vchat/filename.hpp"
#include "vchat/session.hpp"

namespace vchat::testing {

class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device device;
    path_ = std::filesystem::temp_directory_path() /
            ("vchat-test-" + std::to_string(device()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string golden(const std::string& relative) {
  return read_file(std::filesystem::path(VCHAT_GOLDEN_DIR) / relative);
}

/// Forwards to another backend and keeps every prompt it was sent.
class SpyBackend final : public CompletionBackend {
public:
  explicit SpyBackend(std::shared_ptr<CompletionBackend> inner) : inner_(std::move(inner)) {}

  std::string complete(const CompletionRequest& request) override {
    prompts.push_back(request.prompt);
    return inner_->complete(request);
  }

  std::vector<std::string> prompts;

private:
  std::shared_ptr<CompletionBackend> inner_;
};

inline std::shared_ptr<ScriptedBackend> scripted(std::vector<std::string> responses) {
  return std::make_shared<ScriptedBackend>(ScriptedBackend::from_responses(std::move(responses)));
}

inline std::shared_ptr<const Resources> builtin_resources() {
  static const auto resources =
      std::make_shared<const Resources>(Resources{PrinciplePromptSet::builtin(), builtin_catalog()});
  return resources;
}

inline constexpr std::uint64_t k_seed = 7;

inline SessionConfig seeded_config(std::uint64_t seed = k_seed) {
  SessionConfig config;
  config.seed = seed;
  return config;
}

/// The ids a fresh RandomIdSource(seed) hands out, in order.
inline std::vector<std::string> predicted_ids(std::uint64_t seed, std::size_t count) {
  RandomIdSource ids(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(ids.next());
  return out;
}

inline constexpr const char* k_flower_query =
    "generate a red flower conditioned on the predicted depth of this image and then make it like a cartoon, "
    "step by step";

/// The depth -> depth2image -> pix2pix walkthrough on an upload named
/// flower.png, scripted against the ids a fresh session with `seed` draws.
struct FlowerScript {
  std::string upload;
  std::string depth;
  std::string generated;
  std::string cartoon;
  std::vector<std::string> responses;

  explicit FlowerScript(std::uint64_t seed = k_seed) {
    const auto ids = predicted_ids(seed, 4);
    upload = "image/" + ids[0] + ".png";
    depth = "image/" + ids[1] + "_depth-of_" + ids[0] + "_flower.png";
    generated = "image/" + ids[2] + "_depth2image_" + ids[1] + "_flower.png";
    cartoon = "image/" + ids[3] + "_pix2pix_" + ids[2] + "_flower.png";
    responses = {
        " Yes\nAction: Predict Depth On Image\nAction Input: " + upload,
        " Yes\nAction: Generate Image Condition On Depth\nAction Input: " + depth + ", a red flower",
        " Yes\nAction: Instruct Image Using Text\nAction Input: " + generated + ", make it like a cartoon",
        " No\nAI: Here is the red flower drawn as a cartoon: " + cartoon,
    };
  }
};

inline std::string flower_bytes() { return std::string(placeholder_png()); }

} // namespace vchat::testing
