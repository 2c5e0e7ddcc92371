#include "vchat/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "vchat/error.hpp"

namespace vchat {

namespace fs = std::filesystem;

std::string_view to_string(ImageSource source) noexcept {
  switch (source) {
  case ImageSource::upload: return "upload";
  case ImageSource::derived: return "derived";
  case ImageSource::generated: return "generated";
  }
  return "upload";
}

nlohmann::ordered_json ImageSidecar::to_json() const {
  nlohmann::ordered_json doc;
  doc["caption"] = caption;
  doc["applied_operations"] = applied_operations;
  doc["source"] = to_string(source);
  doc["org"] = org;
  return doc;
}

ImageSidecar ImageSidecar::from_json(const nlohmann::json& doc) {
  ImageSidecar sidecar;
  sidecar.caption = doc.value("caption", std::string());
  sidecar.applied_operations = doc.value("applied_operations", std::vector<std::string>{});
  const auto source = doc.value("source", std::string("upload"));
  if (source == "derived") {
    sidecar.source = ImageSource::derived;
  } else if (source == "generated") {
    sidecar.source = ImageSource::generated;
  } else {
    sidecar.source = ImageSource::upload;
  }
  sidecar.org = doc.value("org", std::string());
  return sidecar;
}

bool is_image_extension(std::string_view extension) noexcept {
  return extension == "png" || extension == "jpg" || extension == "jpeg";
}

Workspace::Workspace(fs::path root, std::unique_ptr<IdSource> ids, NameConfig config)
    : root_(std::move(root)), ids_(std::move(ids)), config_(std::move(config)) {
  if (!ids_) throw Error(Errc::validation, "workspace needs an id source");
  std::error_code ec;
  fs::create_directories(root_ / config_.directory, ec);
  if (ec) throw Error(Errc::io, "cannot create workspace " + root_.string() + ": " + ec.message());
}

bool Workspace::exists(const WorkspacePath& path) const { return fs::is_regular_file(absolute(path)); }

fs::path Workspace::absolute(const WorkspacePath& path) const {
  // Round-trip through the parser so hand-built paths get the same checks.
  return root_ / WorkspacePath::parse(path.str()).str();
}

WorkspacePath Workspace::add_upload(std::string_view bytes, std::string_view original_filename, std::string caption,
                                    std::size_t max_bytes) {
  if (bytes.empty()) throw Error(Errc::validation, "uploaded image is empty");
  if (bytes.size() > max_bytes) {
    throw Error(Errc::payload_too_large, "upload of " + std::to_string(bytes.size()) + " bytes exceeds the cap of " +
                                             std::to_string(max_bytes));
  }
  const fs::path original(original_filename);
  auto extension = original.extension().string();
  if (!extension.empty()) extension.erase(0, 1);
  std::transform(extension.begin(), extension.end(), extension.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (extension.empty()) extension = "png";
  if (!is_image_extension(extension)) {
    throw Error(Errc::unsupported_format, "unsupported image type \"." + extension + "\" (png, jpg, jpeg)");
  }
  const auto stem = original.stem().string();

  UploadAllocation allocation;
  {
    std::lock_guard lock(allocation_mutex_);
    allocation = new_upload_name(
        *ids_, [this](const WorkspacePath& p) { return exists(p); },
        stem.empty() ? std::nullopt : std::optional<std::string_view>(stem), config_, extension);
    write_bytes(allocation.path, bytes);
  }
  write_sidecar(allocation.path, ImageSidecar{std::move(caption), {}, ImageSource::upload, allocation.org});
  return allocation.path;
}

WorkspacePath Workspace::allocate_chained(std::string_view operation, const WorkspacePath& prev) {
  std::lock_guard lock(allocation_mutex_);
  auto lookup_org = [this](const FileId& id) -> std::optional<std::string> {
    for (const auto& ext : {"png", "jpg", "jpeg"}) {
      const WorkspacePath candidate{config_.directory, id.str(), ext};
      if (exists(candidate)) return read_sidecar(candidate).org;
    }
    return std::nullopt;
  };
  auto path = chain_name(operation, prev, *ids_, [this](const WorkspacePath& p) { return exists(p); }, lookup_org,
                         config_);
  // Reserve the name until the executor writes the real bytes.
  write_bytes(path, "");
  return path;
}

WorkspacePath Workspace::allocate_root() {
  std::lock_guard lock(allocation_mutex_);
  auto allocation = new_upload_name(*ids_, [this](const WorkspacePath& p) { return exists(p); }, std::nullopt, config_);
  write_bytes(allocation.path, "");
  return allocation.path;
}

void Workspace::write_bytes(const WorkspacePath& path, std::string_view bytes) {
  const auto target = absolute(path);
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "cannot write " + path.str());
}

std::string Workspace::read_bytes(const WorkspacePath& path) const {
  std::ifstream in(absolute(path), std::ios::binary);
  if (!in) throw Error(Errc::missing_file, path.str() + " does not exist in the workspace");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ImageSidecar Workspace::read_sidecar(const WorkspacePath& path) const {
  if (!exists(path)) throw Error(Errc::missing_file, path.str() + " does not exist in the workspace");
  std::ifstream in(absolute(path).string() + ".meta.json", std::ios::binary);
  if (!in) {
    ImageSidecar fallback;
    const auto parsed = parse_name(path);
    if (const auto* chained = std::get_if<ChainedName>(&parsed)) {
      fallback.source = ImageSource::derived;
      fallback.org = chained->org;
    } else {
      fallback.org = path.stem;
    }
    return fallback;
  }
  try {
    return ImageSidecar::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, "corrupt sidecar for " + path.str() + ": " + e.what());
  }
}

void Workspace::write_sidecar(const WorkspacePath& path, const ImageSidecar& sidecar) {
  std::ofstream out(absolute(path).string() + ".meta.json", std::ios::binary | std::ios::trunc);
  out << sidecar.to_json().dump(2) << '\n';
  if (!out) throw Error(Errc::io, "cannot write sidecar for " + path.str());
}

std::vector<std::string> Workspace::list_images() const {
  std::vector<std::string> out;
  const auto dir = root_ / config_.directory;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext.empty() || !is_image_extension(std::string_view(ext).substr(1))) continue;
    out.push_back(config_.directory + "/" + entry.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace vchat
