#include "vchat/provenance.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "vchat/error.hpp"
#include "vchat/filename.hpp"

namespace vchat {

std::string_view to_string(NodeKind kind) noexcept {
  return kind == NodeKind::upload ? "upload" : "derived";
}

const ProvenanceNode* ProvenanceGraph::find(std::string_view id) const noexcept {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

const ProvenanceEdge* ProvenanceGraph::incoming(std::string_view id) const noexcept {
  for (const auto& edge : edges) {
    if (edge.to == id) return &edge;
  }
  return nullptr;
}

std::vector<std::string> ProvenanceGraph::lineage(std::string_view id) const {
  std::vector<std::string> slugs;
  std::string current(id);
  // Edges are acyclic after build_provenance; the bound guards hand-built graphs.
  for (std::size_t guard = 0; guard <= edges.size(); ++guard) {
    const auto* edge = incoming(current);
    if (edge == nullptr) break;
    slugs.push_back(edge->operation);
    current = edge->from;
  }
  std::reverse(slugs.begin(), slugs.end());
  return slugs;
}

std::string ProvenanceGraph::root_of(std::string_view id) const {
  std::string current(id);
  for (std::size_t guard = 0; guard <= edges.size(); ++guard) {
    const auto* edge = incoming(current);
    if (edge == nullptr) break;
    current = edge->from;
  }
  return current;
}

nlohmann::ordered_json ProvenanceGraph::to_json() const {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& node : nodes) {
    doc["nodes"].push_back({{"id", node.id}, {"path", node.path}, {"kind", to_string(node.kind)}});
  }
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& edge : edges) {
    doc["edges"].push_back({{"from", edge.from}, {"to", edge.to}, {"operation", edge.operation}});
  }
  return doc;
}

ProvenanceGraph build_provenance(std::span<const std::string> paths) {
  ProvenanceGraph graph;
  std::map<std::string, std::size_t> index;

  for (const auto& raw : paths) {
    std::optional<ParsedName> maybe;
    try {
      maybe = parse_name(raw);
    } catch (const Error&) {
      graph.unparseable.push_back(raw);
      continue;
    }
    const auto& parsed = *maybe;
    const auto& id = leading_id(parsed).str();
    if (index.contains(id)) {
      graph.diagnostics.push_back("duplicate id " + id + " at " + raw + " (kept " +
                                  graph.nodes[index[id]].path + ")");
      continue;
    }
    index[id] = graph.nodes.size();
    if (const auto* chained = std::get_if<ChainedName>(&parsed)) {
      graph.nodes.push_back({id, raw, NodeKind::derived});
      graph.edges.push_back({chained->prev.str(), id, chained->operation});
    } else {
      graph.nodes.push_back({id, raw, NodeKind::upload});
    }
  }

  // Every derived node has one parent pointer, so a cycle shows up as a
  // parent walk revisiting a node. Break each cycle at its smallest id.
  std::map<std::string, std::size_t> edge_of;
  for (std::size_t i = 0; i < graph.edges.size(); ++i) edge_of[graph.edges[i].to] = i;
  std::set<std::size_t> dropped;
  for (const auto& node : graph.nodes) {
    std::vector<std::string> walk;
    std::set<std::string> seen;
    std::string current = node.id;
    while (true) {
      if (seen.contains(current)) {
        auto start = std::find(walk.begin(), walk.end(), current);
        const auto smallest = *std::min_element(start, walk.end());
        const auto edge = edge_of.find(smallest);
        if (edge != edge_of.end() && !dropped.contains(edge->second)) {
          dropped.insert(edge->second);
          graph.diagnostics.push_back("cycle broken at " + smallest);
        }
        break;
      }
      seen.insert(current);
      walk.push_back(current);
      const auto edge = edge_of.find(current);
      if (edge == edge_of.end() || dropped.contains(edge->second)) break;
      current = graph.edges[edge->second].from;
    }
  }
  if (!dropped.empty()) {
    std::vector<ProvenanceEdge> kept;
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
      if (!dropped.contains(i)) kept.push_back(graph.edges[i]);
    }
    graph.edges = std::move(kept);
  }

  std::set<std::string> dangling;
  for (const auto& edge : graph.edges) {
    if (!index.contains(edge.from)) dangling.insert(edge.from);
  }
  graph.dangling.assign(dangling.begin(), dangling.end());
  return graph;
}

} // namespace vchat
