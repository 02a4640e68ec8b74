#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "supernova/errors.hpp"
#include "supernova/random.hpp"
#include "supernova/slot_set.hpp"
#include "supernova/social_graph.hpp"

namespace supernova {

enum class Mode : std::uint8_t { SuperPeer, Flat };

enum class Strategy : std::uint8_t { Snns, Snn, Sns, Snsp };

inline constexpr std::size_t kStrategyCount = 4;

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Snns: return "S_nns";
    case Strategy::Snn: return "S_nn";
    case Strategy::Sns: return "S_ns";
    case Strategy::Snsp: return "S_nsp";
  }
  return "?";
}

inline std::string_view to_string(Mode m) { return m == Mode::SuperPeer ? "sp" : "flat"; }

/// Behavioral percentages plus protocol limits for one placement pass.
struct PlacementParameters {
  double p_fd = 50.0;  // friend accepts a storage request, percent
  double p_sd = 50.0;  // node joins the stranger pool, percent
  double p_as = 40.0;  // pool member accepts strangers, percent
  double coverage_target = 0.95;
  std::size_t max_friend_keepers = 8;
  std::size_t keeper_capacity = 8;  // owners served per keeper
  std::size_t max_stranger_keepers = 5;
  Mode mode = Mode::SuperPeer;
  // Flat mode: each side of a reciprocal pair must cover at least this share
  // of the other's uncovered slots.
  double pairing_threshold = 0.10;

  void validate() const {
    for (double p : {p_fd, p_sd, p_as}) {
      if (!(p >= 0.0 && p <= 100.0)) throw ParameterError("percentages must lie in [0, 100]");
    }
    if (!(coverage_target > 0.0 && coverage_target <= 1.0)) {
      throw ParameterError("coverage target must lie in (0, 1]");
    }
    if (max_friend_keepers < 1 || keeper_capacity < 1 || max_stranger_keepers < 1) {
      throw ParameterError("keeper caps must be >= 1");
    }
  }
};

/// Outcome of the behavioral draws for one (graph, parameters, seed).
struct AcceptanceTables {
  // accepting_friends[i]: friends of i that agreed to store i's data, sorted.
  std::vector<std::vector<NodeId>> accepting_friends;
  std::vector<std::uint8_t> in_pool;
  std::vector<std::uint8_t> willing;  // pool member that accepts strangers
};

/// Draws every acceptance decision from keyed hashes of (seed, ids), so the
/// same seed yields nested outcomes as percentages grow. Super-peers never
/// serve as friend keepers and never join the stranger pool.
inline AcceptanceTables sample_acceptances(const SocialGraph& g, const PlacementParameters& params,
                                           std::uint64_t seed) {
  params.validate();
  const std::size_t n = g.node_count();
  AcceptanceTables t;
  t.accepting_friends.resize(n);
  t.in_pool.assign(n, 0);
  t.willing.assign(n, 0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId f : g.neighbors(i)) {
      if (g.is_super_peer(f)) continue;
      if (key_chance(params.p_fd, seed, Domain::kFriendAccept, {i, f})) {
        t.accepting_friends[i].push_back(f);
      }
    }
    if (g.is_super_peer(i)) continue;
    t.in_pool[i] = key_chance(params.p_sd, seed, Domain::kStrangerPool, {i}) ? 1 : 0;
    t.willing[i] =
        t.in_pool[i] && key_chance(params.p_as, seed, Domain::kStrangerWilling, {i}) ? 1 : 0;
  }
  return t;
}

/// Owners currently served by each node, against a shared cap.
class KeeperLoad {
 public:
  KeeperLoad(std::size_t n, std::size_t capacity) : served_(n, 0), capacity_(capacity) {}

  bool has_room(NodeId k) const { return served_[k] < capacity_; }
  void add(NodeId k) {
    if (!has_room(k)) throw ContractError("keeper capacity exceeded");
    ++served_[k];
  }
  std::size_t served(NodeId k) const { return served_[k]; }
  std::size_t capacity() const { return capacity_; }

 private:
  std::vector<std::size_t> served_;
  std::size_t capacity_;
};

inline bool coverage_reached(std::size_t covered, std::size_t week_slots, double target) {
  return static_cast<double>(covered) + 1e-9 >= target * static_cast<double>(week_slots);
}

/// Groups stranger candidates by identical week-1 pattern so greedy selection
/// scores each distinct pattern once. Buckets keep ids ascending.
class StrangerIndex {
 public:
  StrangerIndex() = default;

  StrangerIndex(std::span<const NodeId> candidates, std::span<const SlotSet> week1) {
    std::map<std::string, std::size_t> by_pattern;
    for (NodeId c : candidates) {
      auto [it, inserted] = by_pattern.emplace(week1[c].to_string(), buckets_.size());
      if (inserted) buckets_.push_back({week1[c], {}, 0});
      buckets_[it->second].members.push_back(c);
    }
    for (auto& b : buckets_) std::sort(b.members.begin(), b.members.end());
  }

  /// Greedy max-coverage over the indexed candidates. `covered` grows with
  /// each pick; `usable` filters per-owner exclusions.
  template <typename Usable>
  std::vector<NodeId> greedy(SlotSet& covered, std::size_t max_pick, double target,
                             KeeperLoad& load, Usable&& usable) {
    std::vector<NodeId> picks;
    const std::size_t week = covered.size();
    while (picks.size() < max_pick && !coverage_reached(covered.count(), week, target)) {
      std::size_t best_gain = 0;
      NodeId best_id = std::numeric_limits<NodeId>::max();
      const SlotSet* best_pattern = nullptr;
      for (auto& b : buckets_) {
        while (b.head < b.members.size() && !load.has_room(b.members[b.head])) ++b.head;
        if (b.head == b.members.size()) continue;
        const std::size_t gain = b.pattern.count() - SlotSet::count_and(b.pattern, covered);
        if (gain == 0 || gain < best_gain) continue;
        for (std::size_t k = b.head; k < b.members.size(); ++k) {
          const NodeId c = b.members[k];
          if (gain == best_gain && c >= best_id) break;
          if (!load.has_room(c) || !usable(c)) continue;
          if (std::find(picks.begin(), picks.end(), c) != picks.end()) continue;
          best_gain = gain;
          best_id = c;
          best_pattern = &b.pattern;
          break;
        }
      }
      if (best_gain == 0) break;
      picks.push_back(best_id);
      load.add(best_id);
      covered |= *best_pattern;
    }
    return picks;
  }

 private:
  struct Bucket {
    SlotSet pattern;
    std::vector<NodeId> members;
    std::size_t head;
  };
  std::vector<Bucket> buckets_;
};

/// Directory state shared by all super-peers.
struct SuperPeerRegistry {
  std::vector<NodeId> super_peer_ids;
  std::vector<std::size_t> super_peer_load;  // owners attached, parallel to super_peer_ids
  std::vector<std::size_t> tt_pool;          // week-1 online slots per tracked node
  std::vector<NodeId> stranger_pool;         // sorted
  std::vector<NodeId> user_list;
  std::vector<std::uint8_t> in_pool;
  std::vector<std::uint8_t> willing;
  StrangerIndex willing_index;

  bool is_pool_member(NodeId i) const { return in_pool[i] != 0; }
  // Stranger storage is reciprocal: only members that accept strangers may
  // ask the pool for keepers.
  bool can_request_strangers(NodeId i) const { return willing[i] != 0; }
};

inline SuperPeerRegistry build_registry(const SocialGraph& g, const AcceptanceTables& tables,
                                        std::span<const SlotSet> week1) {
  SuperPeerRegistry r;
  r.super_peer_ids = g.super_peers();
  r.super_peer_load.assign(r.super_peer_ids.size(), 0);
  r.user_list.resize(g.node_count());
  std::iota(r.user_list.begin(), r.user_list.end(), NodeId{0});
  r.tt_pool.resize(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) r.tt_pool[i] = week1[i].count();
  r.in_pool = tables.in_pool;
  r.willing = tables.willing;
  std::vector<NodeId> willing_ids;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (tables.in_pool[i]) r.stranger_pool.push_back(i);
    if (tables.willing[i]) willing_ids.push_back(i);
  }
  r.willing_index = StrangerIndex(willing_ids, week1);
  return r;
}

/// An owner's storekeepers (σ minus the owner itself).
struct StorekeeperSet {
  NodeId owner = 0;
  std::vector<NodeId> friend_keepers;
  std::vector<NodeId> stranger_keepers;
  std::optional<NodeId> super_peer_keeper;
  Strategy strategy = Strategy::Snn;

  std::vector<NodeId> holders() const {
    std::vector<NodeId> out = friend_keepers;
    out.insert(out.end(), stranger_keepers.begin(), stranger_keepers.end());
    if (super_peer_keeper) out.push_back(*super_peer_keeper);
    return out;
  }

  friend bool operator==(const StorekeeperSet&, const StorekeeperSet&) = default;
};

/// Strategy implied by keeper membership. An owner-only set is recorded as a
/// degenerate S_nn.
inline Strategy classify_strategy(const StorekeeperSet& s) {
  const bool friends = !s.friend_keepers.empty();
  const bool strangers = !s.stranger_keepers.empty();
  if (s.super_peer_keeper) {
    if (friends || strangers) {
      throw ContractError("super-peer keeper combined with friend or stranger keepers");
    }
    return Strategy::Snsp;
  }
  if (friends && strangers) return Strategy::Snns;
  if (strangers) return Strategy::Sns;
  return Strategy::Snn;
}

/// Greedy maximum coverage over a plain candidate list (ascending ids, lower
/// id wins ties). Shared by friend selection and the reference tests.
template <typename Usable>
std::vector<NodeId> greedy_cover(SlotSet& covered, std::span<const NodeId> candidates,
                                 std::span<const SlotSet> week1, std::size_t max_pick,
                                 double target, KeeperLoad& load, Usable&& usable) {
  std::vector<NodeId> picks;
  const std::size_t week = covered.size();
  while (picks.size() < max_pick && !coverage_reached(covered.count(), week, target)) {
    std::size_t best_gain = 0;
    NodeId best_id = 0;
    for (NodeId c : candidates) {
      if (!load.has_room(c) || !usable(c)) continue;
      if (std::find(picks.begin(), picks.end(), c) != picks.end()) continue;
      const std::size_t gain = week1[c].count() - SlotSet::count_and(week1[c], covered);
      if (gain > best_gain || (gain > 0 && gain == best_gain && c < best_id)) {
        best_gain = gain;
        best_id = c;
      }
    }
    if (best_gain == 0) break;
    picks.push_back(best_id);
    load.add(best_id);
    covered |= week1[best_id];
  }
  return picks;
}

/// Friend keepers for `owner` chosen greedily from its accepting friends by
/// coverage of the owner's week-1 offline slots.
inline std::vector<NodeId> friend_select(NodeId owner, std::span<const NodeId> accepting_friends,
                                         std::span<const SlotSet> week1,
                                         const PlacementParameters& params, KeeperLoad& load) {
  SlotSet covered = week1[owner];
  return greedy_cover(covered, accepting_friends, week1, params.max_friend_keepers,
                      params.coverage_target, load, [](NodeId) { return true; });
}

/// Stranger keepers suggested from the shared pool: willing members with
/// spare capacity that are neither the owner nor its friends.
inline std::vector<NodeId> stranger_suggest(SuperPeerRegistry& registry, const SocialGraph& g,
                                            NodeId owner, const SlotSet& uncovered,
                                            const PlacementParameters& params, KeeperLoad& load) {
  SlotSet covered = uncovered.complement();
  return registry.willing_index.greedy(covered, params.max_stranger_keepers,
                                       params.coverage_target, load, [&](NodeId c) {
                                         return c != owner && !g.are_friends(owner, c);
                                       });
}

/// Runs the storekeeper selection pipeline for one owner: friends, then the
/// stranger pool if still short of the target, then a super-peer as the
/// exclusive last resort.
inline StorekeeperSet build_placement(NodeId owner, const SocialGraph& g,
                                      SuperPeerRegistry& registry, const AcceptanceTables& tables,
                                      std::span<const SlotSet> week1,
                                      const PlacementParameters& params, KeeperLoad& load) {
  StorekeeperSet s;
  s.owner = owner;
  const std::size_t week = week1[owner].size();

  SlotSet covered = week1[owner];
  s.friend_keepers = greedy_cover(covered, tables.accepting_friends[owner], week1,
                                  params.max_friend_keepers, params.coverage_target, load,
                                  [](NodeId) { return true; });

  if (!coverage_reached(covered.count(), week, params.coverage_target) &&
      registry.can_request_strangers(owner) && params.mode == Mode::SuperPeer) {
    s.stranger_keepers = stranger_suggest(registry, g, owner, covered.complement(), params, load);
  }
  for (NodeId k : s.stranger_keepers) covered |= week1[k];

  if (params.mode == Mode::SuperPeer && s.friend_keepers.empty() && s.stranger_keepers.empty() &&
      !coverage_reached(covered.count(), week, params.coverage_target)) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < registry.super_peer_ids.size(); ++k) {
      if (registry.super_peer_ids[k] == owner) continue;
      if (!best || registry.super_peer_load[k] < registry.super_peer_load[*best]) best = k;
    }
    if (best) {
      s.super_peer_keeper = registry.super_peer_ids[*best];
      ++registry.super_peer_load[*best];
    }
  }
  std::sort(s.friend_keepers.begin(), s.friend_keepers.end());
  std::sort(s.stranger_keepers.begin(), s.stranger_keepers.end());
  s.strategy = classify_strategy(s);
  return s;
}

/// Super-peer mode placement for every node in ascending id order.
inline std::vector<StorekeeperSet> place_all(const SocialGraph& g, SuperPeerRegistry& registry,
                                             const AcceptanceTables& tables,
                                             std::span<const SlotSet> week1,
                                             const PlacementParameters& params) {
  params.validate();
  if (params.mode != Mode::SuperPeer) throw ContractError("place_all expects super-peer mode");
  KeeperLoad load(g.node_count(), params.keeper_capacity);
  std::vector<StorekeeperSet> out;
  out.reserve(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    out.push_back(build_placement(i, g, registry, tables, week1, params, load));
  }
  return out;
}

/// Placement without super-peers. Friends are selected as usual (ascending
/// ids); stranger storage comes only from one-to-one reciprocal pairs formed
/// greedily over a seeded random order. Eligible nodes are willing pool
/// members that are not new joinees and are still short of the target; a
/// pair needs each side to cover at least `pairing_threshold` of the other's
/// uncovered slots, and the partner adding most coverage wins (lower id on
/// ties).
inline std::vector<StorekeeperSet> flat_placement(const SocialGraph& g,
                                                  const AcceptanceTables& tables,
                                                  std::span<const SlotSet> week1,
                                                  const PlacementParameters& params,
                                                  std::uint64_t seed) {
  params.validate();
  const std::size_t n = g.node_count();
  KeeperLoad load(n, params.keeper_capacity);
  std::vector<StorekeeperSet> out(n);
  std::vector<SlotSet> covered(n);
  for (NodeId i = 0; i < n; ++i) {
    out[i].owner = i;
    covered[i] = week1[i];
    out[i].friend_keepers =
        greedy_cover(covered[i], tables.accepting_friends[i], week1, params.max_friend_keepers,
                     params.coverage_target, load, [](NodeId) { return true; });
  }

  std::vector<NodeId> eligible;
  for (NodeId i = 0; i < n; ++i) {
    if (tables.willing[i] && !g.is_new_joinee(i) &&
        !coverage_reached(covered[i].count(), covered[i].size(), params.coverage_target)) {
      eligible.push_back(i);
    }
  }
  std::vector<SlotSet> uncovered(n);
  for (NodeId i : eligible) uncovered[i] = covered[i].complement();

  std::vector<NodeId> order = eligible;
  auto rng = make_stream(seed, Domain::kPairingOrder);
  shuffle_in_place(order, rng);
  std::vector<std::uint8_t> paired(n, 0);
  for (NodeId i : order) {
    if (paired[i] || !load.has_room(i)) continue;
    const double need_i = params.pairing_threshold * static_cast<double>(uncovered[i].count());
    std::size_t best_gain = 0;
    std::optional<NodeId> best;
    for (NodeId j : eligible) {
      if (j == i || paired[j] || !load.has_room(j) || g.are_friends(i, j)) continue;
      const std::size_t gives = SlotSet::count_and(week1[j], uncovered[i]);
      if (gives == 0 || gives <= best_gain) continue;
      const std::size_t gets = SlotSet::count_and(week1[i], uncovered[j]);
      if (static_cast<double>(gives) + 1e-9 < need_i) continue;
      if (static_cast<double>(gets) + 1e-9 <
          params.pairing_threshold * static_cast<double>(uncovered[j].count())) {
        continue;
      }
      best_gain = gives;
      best = j;
    }
    if (!best) continue;
    const NodeId j = *best;
    paired[i] = paired[j] = 1;
    load.add(i);
    load.add(j);
    out[i].stranger_keepers.push_back(j);
    out[j].stranger_keepers.push_back(i);
  }
  for (auto& s : out) {
    std::sort(s.friend_keepers.begin(), s.friend_keepers.end());
    s.strategy = classify_strategy(s);
  }
  return out;
}

/// Strategy percentages over all sets, indexed by Strategy.
inline std::array<double, kStrategyCount> strategy_distribution(
    std::span<const StorekeeperSet> sets) {
  std::array<double, kStrategyCount> pct{};
  if (sets.empty()) return pct;
  for (const auto& s : sets) pct[static_cast<std::size_t>(s.strategy)] += 1.0;
  for (double& p : pct) p = 100.0 * p / static_cast<double>(sets.size());
  return pct;
}

namespace detail {
inline std::string join_ids(std::span<const NodeId> ids) {
  std::string s;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) s += ';';
    s += std::to_string(ids[k]);
  }
  return s;
}
}  // namespace detail

/// CSV "owner,strategy,friend_keepers,stranger_keepers,super_peer".
inline std::string write_placement_csv(std::span<const StorekeeperSet> sets) {
  std::ostringstream out;
  out << "owner,strategy,friend_keepers,stranger_keepers,super_peer\n";
  for (const auto& s : sets) {
    out << s.owner << ',' << to_string(s.strategy) << ',' << detail::join_ids(s.friend_keepers)
        << ',' << detail::join_ids(s.stranger_keepers) << ',';
    if (s.super_peer_keeper) out << *s.super_peer_keeper;
    out << '\n';
  }
  return out.str();
}

}  // namespace supernova
