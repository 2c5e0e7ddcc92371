#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "vchat/registry.hpp"
#include "vchat/workspace.hpp"

namespace vchat {

struct TextOut {
  std::string text;
};

struct ImageOut {
  WorkspacePath path;
};

using ToolOutput = std::variant<TextOut, ImageOut>;

/// Runs one tool invocation against a workspace.
class ToolExecutor {
public:
  virtual ~ToolExecutor() = default;
  virtual ToolOutput execute(const ToolSpec& spec, std::span<const std::string> fields, Workspace& workspace) = 0;
};

/// Checks arity and that every image-path field names an existing file.
/// Throws Error(arity_mismatch) or Error(missing_file).
void check_fields(const ToolSpec& spec, std::span<const std::string> fields, const Workspace& workspace);

/// A 1x1 PNG written for every mock image.
std::string_view placeholder_png() noexcept;

/// Writes a placeholder image at a chained path and derives its sidecar:
/// caption `{annotation} ({slug} of {input caption})`, operations extended by
/// `slug`.
WorkspacePath mock_image_transform(Workspace& workspace, const WorkspacePath& input, std::string_view slug,
                                   std::string_view annotation);

/// Deterministic stand-ins for every built-in tool. Description tools echo
/// the sidecar caption, question answering prefixes it with
/// "Based on the image: ", image tools produce placeholder files.
class MockExecutor final : public ToolExecutor {
public:
  ToolOutput execute(const ToolSpec& spec, std::span<const std::string> fields, Workspace& workspace) override;
};

/// Sends each tool to the executor registered for its name, or to the fallback.
class ExecutorRouter final : public ToolExecutor {
public:
  explicit ExecutorRouter(std::shared_ptr<ToolExecutor> fallback);

  void route(std::string tool_name, std::shared_ptr<ToolExecutor> executor);
  ToolOutput execute(const ToolSpec& spec, std::span<const std::string> fields, Workspace& workspace) override;

private:
  std::shared_ptr<ToolExecutor> fallback_;
  std::map<std::string, std::shared_ptr<ToolExecutor>, std::less<>> routes_;
};

} // namespace vchat
