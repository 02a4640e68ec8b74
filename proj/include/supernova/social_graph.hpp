#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "supernova/errors.hpp"
#include "supernova/random.hpp"

namespace supernova {

using NodeId = std::uint32_t;

enum class Role : std::uint8_t { Regular, SuperPeer };

/// Undirected friendship graph with per-node role and new-joinee flags.
///
/// Adjacency lists are sorted and symmetric with no self-loops. The new-joinee
/// flag marks the 10% lowest-degree nodes (ties broken towards higher ids) and
/// is recomputed by every constructor.
class SocialGraph {
 public:
  static constexpr double kNewJoineeShare = 0.10;

  SocialGraph() = default;

  // Builds from an edge list over ids 0..node_count-1. Self-loops and
  // duplicates are dropped.
  static SocialGraph from_edges(std::size_t node_count,
                                std::span<const std::pair<NodeId, NodeId>> edges) {
    SocialGraph g;
    g.adjacency_.assign(node_count, {});
    for (auto [u, v] : edges) {
      if (u >= node_count || v >= node_count) {
        throw ContractError("edge endpoint out of range");
      }
      if (u == v) continue;
      g.adjacency_[u].push_back(v);
      g.adjacency_[v].push_back(u);
    }
    for (auto& adj : g.adjacency_) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    g.roles_.assign(node_count, Role::Regular);
    g.mark_new_joinees();
    return g;
  }

  std::size_t node_count() const noexcept { return adjacency_.size(); }

  std::size_t edge_count() const noexcept {
    std::size_t twice = 0;
    for (const auto& adj : adjacency_) twice += adj.size();
    return twice / 2;
  }

  double average_degree() const noexcept {
    return node_count() == 0 ? 0.0
                             : 2.0 * static_cast<double>(edge_count()) /
                                   static_cast<double>(node_count());
  }

  std::span<const NodeId> neighbors(NodeId i) const { return adjacency_[i]; }
  std::size_t degree(NodeId i) const { return adjacency_[i].size(); }

  bool are_friends(NodeId i, NodeId j) const {
    const auto& adj = adjacency_[i];
    return std::binary_search(adj.begin(), adj.end(), j);
  }

  Role role(NodeId i) const { return roles_[i]; }
  bool is_super_peer(NodeId i) const { return roles_[i] == Role::SuperPeer; }
  bool is_new_joinee(NodeId i) const { return new_joinee_[i] != 0; }

  std::vector<NodeId> super_peers() const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < node_count(); ++i) {
      if (is_super_peer(i)) out.push_back(i);
    }
    return out;
  }

  // Returns a copy whose super-peers are exactly `ids`; everyone else Regular.
  SocialGraph with_super_peers(std::span<const NodeId> ids) const {
    SocialGraph g = *this;
    std::fill(g.roles_.begin(), g.roles_.end(), Role::Regular);
    for (NodeId id : ids) {
      if (id >= node_count()) throw ContractError("super-peer id out of range");
      g.roles_[id] = Role::SuperPeer;
    }
    return g;
  }

  SocialGraph without_roles() const { return with_super_peers({}); }

  friend bool operator==(const SocialGraph&, const SocialGraph&) = default;

 private:
  void mark_new_joinees() {
    const std::size_t n = node_count();
    new_joinee_.assign(n, 0);
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::sort(order.begin(), order.end(), [this](NodeId a, NodeId b) {
      if (degree(a) != degree(b)) return degree(a) < degree(b);
      return a > b;
    });
    const auto count = static_cast<std::size_t>(std::floor(kNewJoineeShare * static_cast<double>(n)));
    for (std::size_t k = 0; k < count; ++k) new_joinee_[order[k]] = 1;
  }

  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<Role> roles_;
  std::vector<std::uint8_t> new_joinee_;
};

/// Parses a whitespace-separated "u v" edge list. Blank lines and lines whose
/// first non-blank character is '#' are skipped. Original ids are compacted to
/// 0..n-1 in ascending order.
inline SocialGraph load_edge_list(std::string_view text) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') {
      if (eol == text.size()) break;
      continue;
    }
    std::istringstream in(line);
    std::string a, b, extra;
    in >> a >> b;
    if (a.empty() || b.empty() || (in >> extra)) {
      throw ParseError(line_no, "expected two node ids");
    }
    auto parse_id = [line_no](const std::string& tok) {
      if (tok.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(line_no, "node id is not a non-negative integer: " + tok);
      }
      try {
        return static_cast<std::uint64_t>(std::stoull(tok));
      } catch (const std::out_of_range&) {
        throw ParseError(line_no, "node id out of range: " + tok);
      }
    };
    raw.emplace_back(parse_id(a), parse_id(b));
    if (eol == text.size()) break;
  }

  std::map<std::uint64_t, NodeId> compact;
  for (auto [u, v] : raw) {
    if (u == v) continue;
    compact.emplace(u, 0);
    compact.emplace(v, 0);
  }
  if (compact.empty()) throw ParseError(line_no, "edge list contains no edges");
  NodeId next = 0;
  for (auto& [orig, id] : compact) id = next++;

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(raw.size());
  for (auto [u, v] : raw) {
    if (u == v) continue;
    edges.emplace_back(compact[u], compact[v]);
  }
  return SocialGraph::from_edges(compact.size(), edges);
}

inline SocialGraph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_edge_list(buf.str());
}

inline std::string write_edge_list(const SocialGraph& g) {
  std::ostringstream out;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) out << u << ' ' << v << '\n';
    }
  }
  return out.str();
}

/// Shape of the synthetic co-authorship stand-in.
struct SyntheticShape {
  // Share of arriving nodes that link to exactly one existing node.
  double single_link_share = 0.65;
  // Additive attractiveness in the preferential-attachment weight
  // (degree + offset). Negative values concentrate links on hubs.
  double attachment_offset = -0.8;
};

/// Connected preferential-attachment graph with mean degree near the target.
///
/// Nodes arrive one at a time after a small seed clique. Each arrival draws a
/// link count m (one with probability `single_link_share`, otherwise a
/// geometric tail sized so that E[m] tracks the remaining edge budget) and
/// attaches to m distinct existing nodes chosen with weight degree + offset.
inline SocialGraph generate_synthetic(std::size_t n, double target_avg_degree, std::uint64_t seed,
                                      const SyntheticShape& shape = {}) {
  if (n < 10) throw ParameterError("synthetic graph needs at least 10 nodes");
  if (target_avg_degree < 2.0) throw ParameterError("target average degree must be >= 2");
  if (target_avg_degree > static_cast<double>(n - 1)) {
    throw ParameterError("target average degree exceeds n - 1");
  }
  if (shape.attachment_offset <= -1.0) {
    throw ParameterError("attachment offset must exceed -1");
  }

  auto rng = make_stream(seed, Domain::kGraph);
  const auto edge_budget =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * target_avg_degree / 2.0));
  const std::size_t clique =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(target_avg_degree / 2.0)) + 1);

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(edge_budget + n);
  std::vector<double> degree(n, 0.0);
  for (NodeId u = 0; u < clique; ++u) {
    for (NodeId v = u + 1; v < clique; ++v) {
      edges.emplace_back(u, v);
      degree[u] += 1;
      degree[v] += 1;
    }
  }

  // Fenwick tree over attachment weights for O(log n) weighted sampling.
  std::vector<double> tree(n + 1, 0.0);
  auto tree_add = [&](std::size_t i, double delta) {
    for (++i; i <= n; i += i & (~i + 1)) tree[i] += delta;
  };
  auto tree_find = [&](double target) {
    std::size_t pos = 0;
    std::size_t step = std::bit_floor(n);
    for (; step > 0; step >>= 1) {
      if (pos + step <= n && tree[pos + step] <= target) {
        pos += step;
        target -= tree[pos];
      }
    }
    return std::min(pos, n - 1);
  };
  double total_weight = 0.0;
  for (NodeId u = 0; u < clique; ++u) {
    const double w = degree[u] + shape.attachment_offset;
    tree_add(u, w);
    total_weight += w;
  }

  std::vector<NodeId> picked;
  for (NodeId v = static_cast<NodeId>(clique); v < n; ++v) {
    const double remaining_nodes = static_cast<double>(n - v);
    const double remaining_edges =
        static_cast<double>(edge_budget) - static_cast<double>(edges.size());
    const double mean_links = std::max(1.0, remaining_edges / remaining_nodes);

    std::size_t links = 1;
    if (mean_links > 1.0 && draw_unit(rng) >= shape.single_link_share) {
      const double tail_mean =
          std::max(2.0, (mean_links - shape.single_link_share) / (1.0 - shape.single_link_share));
      const double p = 1.0 / (tail_mean - 1.0);  // 2 + Geometric(p) failures has mean tail_mean
      links = 2;
      while (draw_unit(rng) >= p) ++links;
    }
    links = std::min<std::size_t>(links, v);

    picked.clear();
    std::size_t attempts = 0;
    while (picked.size() < links) {
      NodeId u;
      if (attempts++ < 32 * links) {
        u = static_cast<NodeId>(tree_find(draw_unit(rng) * total_weight));
        if (u >= v) u = v - 1;
      } else {
        u = static_cast<NodeId>(draw_below(rng, v));
      }
      if (std::find(picked.begin(), picked.end(), u) == picked.end()) picked.push_back(u);
    }
    for (NodeId u : picked) {
      edges.emplace_back(u, v);
      degree[u] += 1;
      tree_add(u, 1.0);
      total_weight += 1.0;
    }
    degree[v] = static_cast<double>(picked.size());
    const double w = degree[v] + shape.attachment_offset;
    tree_add(v, w);
    total_weight += w;
  }
  return SocialGraph::from_edges(n, edges);
}

/// Connected component sizes, labelled per node. Returns (labels, sizes).
inline std::pair<std::vector<std::uint32_t>, std::vector<std::size_t>> connected_components(
    const SocialGraph& g) {
  constexpr auto kUnset = ~std::uint32_t{0};
  std::vector<std::uint32_t> label(g.node_count(), kUnset);
  std::vector<std::size_t> sizes;
  std::queue<NodeId> frontier;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (label[s] != kUnset) continue;
    const auto c = static_cast<std::uint32_t>(sizes.size());
    sizes.push_back(0);
    label[s] = c;
    frontier.push(s);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      ++sizes[c];
      for (NodeId v : g.neighbors(u)) {
        if (label[v] == kUnset) {
          label[v] = c;
          frontier.push(v);
        }
      }
    }
  }
  return {std::move(label), std::move(sizes)};
}

/// Induced subgraph on the largest connected component (lowest label on
/// ties), ids recompacted preserving order. Roles carry over.
inline SocialGraph giant_component(const SocialGraph& g) {
  if (g.node_count() == 0) return g;
  auto [label, sizes] = connected_components(g);
  const auto best = static_cast<std::uint32_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> remap(g.node_count(), 0);
  NodeId next = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (label[u] == best) remap[u] = next++;
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<NodeId> promoted;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (label[u] != best) continue;
    if (g.is_super_peer(u)) promoted.push_back(remap[u]);
    for (NodeId v : g.neighbors(u)) {
      if (u < v) edges.emplace_back(remap[u], remap[v]);
    }
  }
  return SocialGraph::from_edges(next, edges).with_super_peers(promoted);
}

/// Number of super-peers elected for a graph of n nodes.
inline std::size_t super_peer_count(std::size_t n, double fraction) {
  return std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
}

/// Flags the max(5, ceil(fraction * n)) highest-degree nodes as super-peers,
/// ties broken by lower id. Only the role mapping changes.
inline SocialGraph elect_super_peers(const SocialGraph& g, double fraction,
                                     [[maybe_unused]] std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ParameterError("super-peer fraction must lie in (0, 1)");
  }
  const std::size_t n = g.node_count();
  const std::size_t count = super_peer_count(n, fraction);
  if (count >= n) throw ParameterError("super-peer count would cover every node");

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&g](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
  order.resize(count);
  return g.with_super_peers(order);
}

}  // namespace supernova
