#include "hemb/taxonomy.hpp"

#include <algorithm>
#include <stdexcept>

namespace hemb {

namespace {

constexpr const char* kRootName = "Global";

std::vector<std::string> split_path(std::string_view path) {
  if (path.empty()) throw std::invalid_argument("empty taxonomy path");
  std::vector<std::string> segments;
  size_t start = 0;
  while (start <= path.size()) {
    size_t slash = path.find('/', start);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash == start) throw std::invalid_argument("empty segment in taxonomy path: " + std::string(path));
    segments.emplace_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return segments;
}

// Mutable build-time representation.
struct ProtoNode {
  std::string name;
  std::string path;
  int parent = -1;
  int level = 0;
  uint64_t count = 0;
  std::vector<int> children;
  bool dead = false;
  int merged_into = -1;
};

int find_surviving(const std::vector<ProtoNode>& nodes, int id) {
  while (nodes[id].dead) id = nodes[id].merged_into;
  return id;
}

Taxonomy densify(std::vector<ProtoNode>& nodes,
                 const std::vector<std::pair<std::string, int>>& original_paths,
                 std::vector<NodeId>* remap_out) {
  // Dense ids assigned level by level, within a level by path.
  std::vector<int> alive;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (!nodes[i].dead) alive.push_back(i);
  }
  std::sort(alive.begin(), alive.end(), [&](int a, int b) {
    if (nodes[a].level != nodes[b].level) return nodes[a].level < nodes[b].level;
    return nodes[a].path < nodes[b].path;
  });

  std::vector<NodeId> new_id(nodes.size(), kNoNode);
  for (size_t i = 0; i < alive.size(); ++i) new_id[alive[i]] = static_cast<NodeId>(i);

  std::vector<TaxonomyNode> out(alive.size());
  for (size_t i = 0; i < alive.size(); ++i) {
    const ProtoNode& p = nodes[alive[i]];
    TaxonomyNode& n = out[i];
    n.id = static_cast<NodeId>(i);
    n.name = p.name;
    n.path = p.path;
    n.parent = p.parent < 0 ? kNoNode : new_id[find_surviving(nodes, p.parent)];
    n.level = p.level;
    n.sentence_count = p.count;
  }
  for (auto& n : out) {
    if (n.parent != kNoNode) out[n.parent].children.push_back(n.id);
  }

  std::map<std::string, NodeId> index;
  for (const auto& [path, proto_id] : original_paths) {
    index[path] = new_id[find_surviving(nodes, proto_id)];
  }
  index[kRootName] = 0;

  if (remap_out) {
    remap_out->assign(nodes.size(), kNoNode);
    for (size_t i = 0; i < nodes.size(); ++i) {
      (*remap_out)[i] = new_id[find_surviving(nodes, static_cast<int>(i))];
    }
  }
  return Taxonomy::from_parts(std::move(out), std::move(index));
}

}  // namespace

Taxonomy Taxonomy::build(const std::vector<std::pair<std::string, uint64_t>>& path_counts,
                         uint64_t min_node_size) {
  std::vector<ProtoNode> nodes(1);
  nodes[0].name = kRootName;
  nodes[0].path = kRootName;
  nodes[0].parent = -1;

  std::map<std::string, int> proto_index;  // ordered: insertion independent of input order
  std::vector<std::pair<std::string, int>> original_paths;

  // Aggregate duplicate paths before inserting, for input-order independence.
  std::map<std::string, uint64_t> counts;
  for (const auto& [path, count] : path_counts) counts[path] += count;

  for (const auto& [path, count] : counts) {
    if (path == kRootName) throw std::invalid_argument("taxonomy path 'Global' is reserved for the root");
    auto segments = split_path(path);
    int current = 0;
    std::string prefix;
    for (const auto& seg : segments) {
      if (!prefix.empty()) prefix += '/';
      prefix += seg;
      auto it = proto_index.find(prefix);
      if (it == proto_index.end()) {
        int id = static_cast<int>(nodes.size());
        ProtoNode node;
        node.name = seg;
        node.path = prefix;
        node.parent = current;
        node.level = nodes[current].level + 1;
        nodes.push_back(std::move(node));
        nodes[current].children.push_back(id);
        proto_index.emplace(prefix, id);
        current = id;
      } else {
        current = it->second;
      }
    }
    nodes[current].count += count;
  }
  for (const auto& [path, id] : proto_index) original_paths.emplace_back(path, id);

  // Recursive leaf merging, deepest level first.
  int max_level = 0;
  for (const auto& n : nodes) max_level = std::max(max_level, n.level);
  for (int level = max_level; level >= 1; --level) {
    std::vector<int> candidates;
    for (int i = 1; i < static_cast<int>(nodes.size()); ++i) {
      if (!nodes[i].dead && nodes[i].level == level && nodes[i].children.empty() &&
          nodes[i].count < min_node_size) {
        candidates.push_back(i);
      }
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      if (nodes[a].count != nodes[b].count) return nodes[a].count < nodes[b].count;
      return nodes[a].path < nodes[b].path;
    });
    for (int id : candidates) {
      int parent = nodes[id].parent;
      nodes[parent].count += nodes[id].count;
      auto& siblings = nodes[parent].children;
      siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
      nodes[id].dead = true;
      nodes[id].merged_into = parent;
    }
  }

  return densify(nodes, original_paths, nullptr);
}

Taxonomy Taxonomy::from_parts(std::vector<TaxonomyNode> nodes,
                              std::map<std::string, NodeId> path_index) {
  if (nodes.empty()) throw std::invalid_argument("taxonomy must contain a root");
  if (nodes[0].parent != kNoNode || nodes[0].level != 0) {
    throw std::invalid_argument("taxonomy node 0 must be the root");
  }
  for (const auto& n : nodes) {
    if (n.id != static_cast<NodeId>(&n - nodes.data())) {
      throw std::invalid_argument("taxonomy node ids must be dense");
    }
    if (n.parent != kNoNode && nodes.at(n.parent).level != n.level - 1) {
      throw std::invalid_argument("taxonomy parent level mismatch at node " + n.path);
    }
  }
  Taxonomy tax;
  tax.nodes_ = std::move(nodes);
  tax.path_index_ = std::move(path_index);
  return tax;
}

NodeId Taxonomy::resolve(std::string_view path) const {
  auto it = path_index_.find(std::string(path));
  if (it == path_index_.end()) {
    throw std::runtime_error("unknown taxonomy path: '" + std::string(path) + "'");
  }
  return it->second;
}

bool Taxonomy::can_resolve(std::string_view path) const {
  return path_index_.count(std::string(path)) > 0;
}

int Taxonomy::height() const {
  int h = 0;
  for (const auto& n : nodes_) h = std::max(h, n.level);
  return h;
}

uint64_t Taxonomy::total_count() const {
  uint64_t total = 0;
  for (const auto& n : nodes_) total += n.sentence_count;
  return total;
}

NodeId Taxonomy::ancestor_at_level(NodeId id, int level) const {
  NodeId current = id;
  while (nodes_.at(current).level > level) current = nodes_.at(current).parent;
  return current;
}

Taxonomy Taxonomy::flatten(int depth) const {
  std::vector<NodeId> remap;
  return flatten(depth, remap);
}

Taxonomy Taxonomy::flatten(int depth, std::vector<NodeId>& remap) const {
  if (depth < 0 || depth > height()) {
    throw std::invalid_argument("flatten depth " + std::to_string(depth) +
                                " out of range [0, " + std::to_string(height()) + "]");
  }
  std::vector<ProtoNode> protos(nodes_.size());
  for (const auto& n : nodes_) {
    ProtoNode& p = protos[n.id];
    p.name = n.name;
    p.path = n.path;
    p.parent = n.parent == kNoNode ? -1 : static_cast<int>(n.parent);
    p.level = n.level;
    p.count = n.sentence_count;
    for (NodeId c : n.children) p.children.push_back(static_cast<int>(c));
  }
  for (const auto& n : nodes_) {
    if (n.level > depth) {
      ProtoNode& p = protos[n.id];
      NodeId target = ancestor_at_level(n.id, depth);
      p.dead = true;
      p.merged_into = static_cast<int>(target);
      protos[target].count += n.sentence_count;
      p.count = 0;
    }
  }
  for (auto& p : protos) {
    p.children.erase(std::remove_if(p.children.begin(), p.children.end(),
                                    [&](int c) { return protos[c].dead; }),
                     p.children.end());
  }
  std::vector<std::pair<std::string, int>> original_paths;
  for (const auto& [path, id] : path_index_) {
    if (path == kRootName) continue;
    original_paths.emplace_back(path, static_cast<int>(id));
  }
  return densify(protos, original_paths, &remap);
}

}  // namespace hemb
