#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vchat/filename.hpp"

namespace vchat {

inline constexpr std::size_t k_default_max_upload_bytes = 16u * 1024u * 1024u;

enum class ImageSource { upload, derived, generated };

std::string_view to_string(ImageSource source) noexcept;

/// Metadata stored beside each image as `{path}.meta.json`.
struct ImageSidecar {
  std::string caption;
  /// Slugs applied since the chain root, oldest first.
  std::vector<std::string> applied_operations;
  ImageSource source = ImageSource::upload;
  /// Org token used when this file is chained.
  std::string org;

  nlohmann::ordered_json to_json() const;
  static ImageSidecar from_json(const nlohmann::json& doc);
};

/// A session-private directory of images. Name allocation is serialized by
/// an internal lock; everything else is the caller's to serialize.
class Workspace {
public:
  Workspace(std::filesystem::path root, std::unique_ptr<IdSource> ids, NameConfig config = {});

  const std::filesystem::path& root() const noexcept { return root_; }
  const NameConfig& name_config() const noexcept { return config_; }
  IdSource& ids() noexcept { return *ids_; }
  const IdSource& ids() const noexcept { return *ids_; }

  bool exists(const WorkspacePath& path) const;
  std::filesystem::path absolute(const WorkspacePath& path) const;

  /// Stores uploaded bytes under a fresh upload name. The extension must be
  /// png, jpg or jpeg; the org token comes from the original file stem.
  WorkspacePath add_upload(std::string_view bytes, std::string_view original_filename,
                           std::string caption = "uploaded image",
                           std::size_t max_bytes = k_default_max_upload_bytes);

  /// Fresh chained name for an image derived from `prev`.
  WorkspacePath allocate_chained(std::string_view operation, const WorkspacePath& prev);
  /// Fresh root name for an image made from text alone.
  WorkspacePath allocate_root();

  void write_bytes(const WorkspacePath& path, std::string_view bytes);
  std::string read_bytes(const WorkspacePath& path) const;

  /// Throws Error(missing_file) when the image is absent. A missing sidecar
  /// yields defaults derived from the file name.
  ImageSidecar read_sidecar(const WorkspacePath& path) const;
  void write_sidecar(const WorkspacePath& path, const ImageSidecar& sidecar);

  /// Relative paths of all image files, sorted.
  std::vector<std::string> list_images() const;

private:
  std::filesystem::path root_;
  std::unique_ptr<IdSource> ids_;
  NameConfig config_;
  std::mutex allocation_mutex_;
};

bool is_image_extension(std::string_view extension) noexcept;

} // namespace vchat
