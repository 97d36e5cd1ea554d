#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hemb {

using NodeId = uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct TaxonomyNode {
  NodeId id = 0;
  std::string name;            // last path segment; "Global" for the root
  std::string path;            // full slash-delimited path; "Global" for the root
  NodeId parent = kNoNode;     // kNoNode for the root only
  int level = 0;               // root is 0
  uint64_t sentence_count = 0; // data directly assigned, plus counts merged in
  std::vector<NodeId> children;
};

// Rooted domain tree. Node ids are dense, assigned level by level (root is
// id 0), children ordered by path. The path index maps every path seen at
// build time - including paths of nodes merged away - to the surviving
// node. Immutable after construction.
class Taxonomy {
 public:
  // Builds the prefix tree of all paths, then recursively merges leaves
  // with sentence_count < min_node_size into their parent, deepest level
  // first, within a level by ascending count then path.
  static Taxonomy build(const std::vector<std::pair<std::string, uint64_t>>& path_counts,
                        uint64_t min_node_size);

  // Reconstructs a taxonomy from serialized parts (checkpoint loading).
  static Taxonomy from_parts(std::vector<TaxonomyNode> nodes,
                             std::map<std::string, NodeId> path_index);

  NodeId resolve(std::string_view path) const;  // throws on unknown path
  bool can_resolve(std::string_view path) const;

  // Merges every node deeper than depth into its depth-level ancestor.
  // depth 0 gives a root-only tree. Throws if depth is out of [0, H].
  Taxonomy flatten(int depth) const;
  Taxonomy flatten(int depth, std::vector<NodeId>& remap) const;

  NodeId root() const { return 0; }
  size_t size() const { return nodes_.size(); }
  const TaxonomyNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<TaxonomyNode>& nodes() const { return nodes_; }
  const std::map<std::string, NodeId>& path_index() const { return path_index_; }
  int height() const;  // H: deepest level present
  uint64_t total_count() const;

  // Walks parents until the node's level is <= level.
  NodeId ancestor_at_level(NodeId id, int level) const;

 private:
  std::vector<TaxonomyNode> nodes_;
  std::map<std::string, NodeId> path_index_;
};

}  // namespace hemb
