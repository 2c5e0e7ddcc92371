#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vchat {

enum class NodeKind { upload, derived };

std::string_view to_string(NodeKind kind) noexcept;

struct ProvenanceNode {
  std::string id;
  std::string path;
  NodeKind kind = NodeKind::upload;
};

struct ProvenanceEdge {
  std::string from;
  std::string to;
  std::string operation;
};

/// Derivation graph reconstructed purely from workspace file names.
struct ProvenanceGraph {
  std::vector<ProvenanceNode> nodes;
  std::vector<ProvenanceEdge> edges;
  /// Prev ids referenced by an edge but absent from `nodes`.
  std::vector<std::string> dangling;
  /// Input paths that did not parse.
  std::vector<std::string> unparseable;
  /// Duplicate ids and cycle-breaking notes.
  std::vector<std::string> diagnostics;

  const ProvenanceNode* find(std::string_view id) const noexcept;
  const ProvenanceEdge* incoming(std::string_view id) const noexcept;
  /// Operation slugs from the chain root down to `id`.
  std::vector<std::string> lineage(std::string_view id) const;
  /// Id of the chain root `id` descends from.
  std::string root_of(std::string_view id) const;

  /// `{nodes:[{id,path,kind}], edges:[{from,to,operation}]}`
  nlohmann::ordered_json to_json() const;
};

ProvenanceGraph build_provenance(std::span<const std::string> paths);

} // namespace vchat
