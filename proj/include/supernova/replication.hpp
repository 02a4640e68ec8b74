#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "supernova/errors.hpp"
#include "supernova/placement.hpp"
#include "supernova/random.hpp"
#include "supernova/social_graph.hpp"
#include "supernova/trace_model.hpp"

namespace supernova {

/// Per-owner logical clock value; (counter, author) is a total order.
struct LogicalStamp {
  std::uint64_t counter = 0;
  NodeId author = 0;

  friend auto operator<=>(const LogicalStamp&, const LogicalStamp&) = default;
};

struct Item {
  LogicalStamp stamp;
  std::uint32_t size = 1;

  friend bool operator==(const Item&, const Item&) = default;
};

/// One holder's copy of an owner's data: latest stamp plus the newest items
/// that fit in `capacity_s` size units, ascending by stamp.
struct ReplicaState {
  NodeId holder = 0;
  NodeId owner = 0;
  LogicalStamp version;
  std::vector<Item> items;
  std::size_t capacity_s = std::numeric_limits<std::size_t>::max();
  // Newest stamp ever evicted here or in a merged copy. Anything at or below
  // it is outside the kept suffix, even if small enough to fit.
  std::optional<LogicalStamp> evicted;

  std::size_t used() const {
    std::size_t total = 0;
    for (const Item& it : items) total += it.size;
    return total;
  }
};

namespace detail {

inline void trim_to_capacity(ReplicaState& r) {
  std::size_t drop = 0;
  if (r.evicted) {
    while (drop < r.items.size() && r.items[drop].stamp <= *r.evicted) ++drop;
  }
  std::size_t total = 0;
  for (std::size_t k = drop; k < r.items.size(); ++k) total += r.items[k].size;
  while (total > r.capacity_s) {
    total -= r.items[drop].size;
    r.evicted = std::max(r.evicted.value_or(LogicalStamp{}), r.items[drop].stamp);
    ++drop;
  }
  if (drop) r.items.erase(r.items.begin(), r.items.begin() + static_cast<std::ptrdiff_t>(drop));
}

}  // namespace detail

/// Drops oldest items until the log fits in capacity_s.
inline ReplicaState evict(ReplicaState r) {
  for (const Item& it : r.items) {
    if (it.size > r.capacity_s) throw OversizeError("item larger than replica capacity");
  }
  detail::trim_to_capacity(r);
  return r;
}

/// Folds `from` into `into`: union of item logs by stamp, then eviction.
/// Commutative and associative, so delivery order never matters.
inline bool merge_into(ReplicaState& into, const ReplicaState& from) {
  if (from.items.empty() && from.version <= into.version) return false;
  if (from.version == into.version && from.items == into.items) return false;
  for (const Item& it : from.items) {
    if (it.size > into.capacity_s) throw OversizeError("item larger than replica capacity");
  }
  thread_local std::vector<Item> merged;
  merged.clear();
  merged.reserve(into.items.size() + from.items.size() + 8);
  std::set_union(into.items.begin(), into.items.end(), from.items.begin(), from.items.end(),
                 std::back_inserter(merged),
                 [](const Item& a, const Item& b) { return a.stamp < b.stamp; });
  const LogicalStamp version = std::max(into.version, from.version);
  const bool floor_moved = from.evicted && (!into.evicted || *into.evicted < *from.evicted);
  if (merged.size() == into.items.size() && version == into.version && !floor_moved) return false;
  if (floor_moved) into.evicted = from.evicted;
  merged.swap(into.items);
  const LogicalStamp before = into.version;
  into.version = version;
  detail::trim_to_capacity(into);
  return into.version != before || into.items != merged;
}

inline void add_item(ReplicaState& r, const Item& item) {
  if (item.size > r.capacity_s) throw OversizeError("item larger than replica capacity");
  auto pos = std::lower_bound(r.items.begin(), r.items.end(), item.stamp,
                              [](const Item& a, const LogicalStamp& s) { return a.stamp < s; });
  r.version = std::max(r.version, item.stamp);
  if (r.evicted && item.stamp <= *r.evicted) return;
  if (pos == r.items.end() || pos->stamp != item.stamp) r.items.insert(pos, item);
  detail::trim_to_capacity(r);
}

struct PendingUpdate {
  NodeId author = 0;
  NodeId owner = 0;
  LogicalStamp stamp;
  std::uint32_t size = 1;
  NodeId buffered_at = 0;
  std::size_t created_slot = 0;
};

struct ReplicationConfig {
  std::size_t capacity_s = 32;
  std::uint32_t item_size = 1;
  double post_percent = 5.0;  // per online friend, per owner, per slot
  bool rendezvous = true;
  std::uint64_t seed = 1;
};

/// Replication state for one owner: the owner's copy, one copy per keeper,
/// and an optional rendezvous copy at its designated super-peer.
struct OwnerReplicas {
  NodeId owner = 0;
  std::vector<NodeId> keepers;
  std::optional<NodeId> rendezvous_peer;
  ReplicaState owner_copy;
  std::vector<ReplicaState> keeper_copies;  // parallel to keepers
  std::optional<ReplicaState> rendezvous_copy;
  std::vector<PendingUpdate> pending;
  std::vector<std::pair<NodeId, std::uint64_t>> known_counter;  // author -> last seen counter
  LogicalStamp latest_produced;
  bool has_write = false;
  std::size_t first_write_slot = 0;
  std::size_t delivered = 0;
};

struct ReplicationState {
  std::vector<OwnerReplicas> owners;  // indexed by owner id
  std::size_t next_slot = 0;
  ReplicationConfig config;

  // Flat per-owner bookkeeping, kept apart from the replicas so that owners
  // with nothing happening cost a few sequential reads per slot.
  std::vector<std::size_t> holder_offset;  // CSR over owner + keepers
  std::vector<NodeId> holder_ids;
  std::vector<std::size_t> holds_offset;  // reverse CSR: node -> owners it holds for
  std::vector<NodeId> holds_ids;
  std::vector<std::uint8_t> touched;  // posted to, or holding buffered updates
  std::vector<std::uint8_t> stale_now;
  std::vector<std::size_t> stale_run_start;  // first counted slot of the current stale run
  std::vector<std::size_t> stale_closed;     // slots from finished stale runs

  std::vector<std::uint8_t> up_now;  // online flags of the last stepped slot
  std::vector<std::uint8_t> up_prev;

  /// Slots after the first write in which the best online replica lagged.
  std::size_t stale_slots(NodeId owner) const {
    std::size_t total = stale_closed[owner];
    if (stale_now[owner] && next_slot > stale_run_start[owner]) {
      total += next_slot - stale_run_start[owner];
    }
    return total;
  }

  /// Slots counted for staleness: those after the owner's first write.
  std::size_t observed_slots(NodeId owner) const {
    const OwnerReplicas& o = owners[owner];
    if (!o.has_write || next_slot <= o.first_write_slot + 1) return 0;
    return next_slot - o.first_write_slot - 1;
  }
};

/// Sets up empty replicas for each placement. `rendezvous_peers[i]` is the
/// designated super-peer of owner i, if any.
inline ReplicationState init_replication(std::span<const StorekeeperSet> placements,
                                         std::span<const std::optional<NodeId>> rendezvous_peers,
                                         const ReplicationConfig& config) {
  if (rendezvous_peers.size() != placements.size()) {
    throw ContractError("one rendezvous entry per placement required");
  }
  ReplicationState st;
  st.config = config;
  st.owners.resize(placements.size());
  st.touched.assign(placements.size(), 0);
  st.stale_now.assign(placements.size(), 0);
  st.stale_run_start.assign(placements.size(), 0);
  st.stale_closed.assign(placements.size(), 0);
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const StorekeeperSet& p = placements[i];
    if (p.owner != i) throw ContractError("placements must be indexed by owner id");
    OwnerReplicas& o = st.owners[i];
    o.owner = p.owner;
    o.keepers = p.holders();
    o.owner_copy.holder = o.owner_copy.owner = p.owner;
    o.owner_copy.capacity_s = config.capacity_s;
    for (NodeId k : o.keepers) {
      ReplicaState r;
      r.holder = k;
      r.owner = p.owner;
      r.capacity_s = config.capacity_s;
      o.keeper_copies.push_back(std::move(r));
    }
    if (config.rendezvous) o.rendezvous_peer = rendezvous_peers[i];
    st.holder_offset.push_back(st.holder_ids.size());
    st.holder_ids.push_back(o.owner);
    st.holder_ids.insert(st.holder_ids.end(), o.keepers.begin(), o.keepers.end());
  }
  st.holder_offset.push_back(st.holder_ids.size());

  std::size_t node_count = 0;
  for (NodeId x : st.holder_ids) node_count = std::max<std::size_t>(node_count, x + 1);
  st.holds_offset.assign(node_count + 1, 0);
  for (NodeId x : st.holder_ids) ++st.holds_offset[x + 1];
  std::partial_sum(st.holds_offset.begin(), st.holds_offset.end(), st.holds_offset.begin());
  st.holds_ids.resize(st.holder_ids.size());
  std::vector<std::size_t> fill(st.holds_offset.begin(), st.holds_offset.end() - 1);
  for (std::size_t i = 0; i < placements.size(); ++i) {
    for (std::size_t h = st.holder_offset[i]; h < st.holder_offset[i + 1]; ++h) {
      st.holds_ids[fill[st.holder_ids[h]]++] = static_cast<NodeId>(i);
    }
  }
  return st;
}

namespace detail {

inline bool online(std::span<const UptimeTrace> traces, NodeId x, std::size_t slot) {
  return slot < traces[x].bits.size() && traces[x].bits.test(slot);
}

inline bool was_online(std::span<const UptimeTrace> traces, NodeId x, std::size_t slot) {
  return slot > 0 && online(traces, x, slot - 1);
}

inline void note_known(OwnerReplicas& o, NodeId author, std::uint64_t counter) {
  for (auto& [a, c] : o.known_counter) {
    if (a == author) {
      c = std::max(c, counter);
      return;
    }
  }
  o.known_counter.emplace_back(author, counter);
}

inline std::uint64_t known(const OwnerReplicas& o, NodeId author) {
  for (const auto& [a, c] : o.known_counter) {
    if (a == author) return c;
  }
  return 0;
}

inline bool same_contents(const ReplicaState& a, const ReplicaState& b) {
  return a.version == b.version && a.items == b.items;
}

// Delivers one stamped item to the owner if online, else to every online
// keeper. Returns false when no replica is online.
inline bool deliver(OwnerReplicas& o, std::span<const UptimeTrace> traces, std::size_t slot,
                    const Item& item) {
  if (online(traces, o.owner, slot)) {
    add_item(o.owner_copy, item);
    return true;
  }
  bool any = false;
  for (std::size_t k = 0; k < o.keepers.size(); ++k) {
    if (online(traces, o.keepers[k], slot)) {
      add_item(o.keeper_copies[k], item);
      any = true;
    }
  }
  return any;
}

// Online flags for one slot and the one before it, indexed by node id.
struct SlotView {
  const std::uint8_t* now;
  const std::uint8_t* prev;
};

// Makes every replica in `up` hold the union of their logs (each trimmed to
// its own capacity).
inline void sync_all(std::span<ReplicaState* const> up) {
  bool uniform = true;
  for (std::size_t j = 1; j < up.size() && uniform; ++j) uniform = same_contents(*up[j], *up[0]);
  if (uniform) return;
  thread_local ReplicaState all;
  all.items.clear();
  all.version = {};
  all.evicted.reset();
  all.capacity_s = 0;
  for (ReplicaState* r : up) all.capacity_s = std::max(all.capacity_s, r->capacity_s);
  for (ReplicaState* r : up) merge_into(all, *r);
  for (ReplicaState* r : up) {
    if (same_contents(*r, all)) continue;
    // r's log is a subset of all's, so the merge result is all's suffix.
    r->version = all.version;
    r->items = all.items;
    if (all.evicted) r->evicted = std::max(r->evicted.value_or(LogicalStamp{}), *all.evicted);
    trim_to_capacity(*r);
  }
}

inline void step_owner(OwnerReplicas& o, SlotView v, std::size_t t, std::mt19937_64* shuffle) {
  const NodeId owner = o.owner;
  const std::size_t nk = o.keepers.size();
  const bool owner_up = v.now[owner];
  const bool owner_was = t > 0 && v.prev[owner];
  auto keeper_up = [&](std::size_t k) { return v.now[o.keepers[k]] != 0; };
  auto keeper_was = [&](std::size_t k) { return t > 0 && v.prev[o.keepers[k]] != 0; };
  thread_local std::vector<std::size_t> order;
  order.resize(nk);
  for (std::size_t k = 0; k < nk; ++k) order[k] = k;
  if (shuffle) shuffle_in_place(order, *shuffle);

  std::size_t up_count = owner_up ? 1 : 0;
  for (std::size_t k = 0; k < nk; ++k) up_count += keeper_up(k) ? 1 : 0;
  const bool sp_was = o.rendezvous_peer && t > 0 && v.prev[*o.rendezvous_peer];
  const bool sp_up = o.rendezvous_peer && v.now[*o.rendezvous_peer];

  // (a) departing owner pushes to keepers it shared the last slot with.
  if (owner_was && !owner_up) {
    for (std::size_t k : order) {
      if (keeper_was(k)) merge_into(o.keeper_copies[k], o.owner_copy);
    }
  }

  // (b) a departing keeper with no replica carrying on into this slot leaves
  // its copy at the rendezvous super-peer.
  if (sp_was) {
    bool carried = owner_was && owner_up;
    for (std::size_t j = 0; j < nk && !carried; ++j) carried = keeper_was(j) && keeper_up(j);
    if (!carried) {
      for (std::size_t k : order) {
        if (!keeper_was(k) || keeper_up(k)) continue;
        if (!o.rendezvous_copy) {
          o.rendezvous_copy = ReplicaState{*o.rendezvous_peer, owner, {}, {},
                                           o.keeper_copies[k].capacity_s, std::nullopt};
        }
        merge_into(*o.rendezvous_copy, o.keeper_copies[k]);
      }
    }
  }

  // (c)/(d) a replica coming up alone fetches the rendezvous copy. When others
  // are online it adopts their state in the sync below.
  if (up_count == 1 && sp_up && o.rendezvous_copy) {
    if (!owner_was && owner_up) merge_into(o.owner_copy, *o.rendezvous_copy);
    for (std::size_t k = 0; k < nk; ++k) {
      if (!keeper_was(k) && keeper_up(k)) merge_into(o.keeper_copies[k], *o.rendezvous_copy);
    }
  }

  // (e) buffered posts reach the first replica that is online.
  if (!o.pending.empty() && up_count > 0) {
    if (shuffle) shuffle_in_place(o.pending, *shuffle);
    for (const PendingUpdate& p : o.pending) {
      const Item item{p.stamp, p.size};
      if (owner_up) {
        add_item(o.owner_copy, item);
      } else {
        for (std::size_t k = 0; k < nk; ++k) {
          if (keeper_up(k)) add_item(o.keeper_copies[k], item);
        }
      }
      note_known(o, p.author, p.stamp.counter);
      ++o.delivered;
    }
    o.pending.clear();
  }

  // Online replicas (including arrivals) converge on the freshest state.
  if (up_count > 1) {
    thread_local std::vector<ReplicaState*> up;
    up.clear();
    if (owner_up) up.push_back(&o.owner_copy);
    for (std::size_t k : order) {
      if (keeper_up(k)) up.push_back(&o.keeper_copies[k]);
    }
    sync_all(up);
  }
}

}  // namespace detail

/// Advances every owner by one slot. `slot` must equal state.next_slot.
/// Passing `shuffle` permutes same-slot delivery and sync order.
inline void step(std::size_t slot, std::span<const UptimeTrace> traces, ReplicationState& state,
                 std::mt19937_64* shuffle = nullptr) {
  if (slot != state.next_slot) throw ContractError("replication slots must advance by one");
  const std::size_t n = traces.size();
  state.up_prev.swap(state.up_now);
  state.up_now.assign(n, 0);
  if (state.up_prev.size() != n) state.up_prev.assign(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    state.up_now[x] = detail::online(traces, static_cast<NodeId>(x), slot) ? 1 : 0;
  }
  const detail::SlotView v{state.up_now.data(), state.up_prev.data()};
  // Only owners with a holder changing state, or with fresh or buffered
  // posts, can change; everyone else keeps replicas and staleness flag.
  thread_local std::vector<std::uint8_t> visit;
  visit.assign(state.owners.size(), 0);
  for (std::size_t x = 0; x + 1 < state.holds_offset.size(); ++x) {
    if (v.now[x] == (slot > 0 ? v.prev[x] : 0)) continue;
    for (std::size_t h = state.holds_offset[x]; h < state.holds_offset[x + 1]; ++h) {
      visit[state.holds_ids[h]] = 1;
    }
  }
  for (std::size_t i = 0; i < state.owners.size(); ++i) {
    if (!visit[i] && !state.touched[i]) continue;
    OwnerReplicas& o = state.owners[i];
    detail::step_owner(o, v, slot, shuffle);
    state.touched[i] = o.pending.empty() ? 0 : 1;
    bool any = v.now[o.owner] != 0;
    LogicalStamp best = any ? o.owner_copy.version : LogicalStamp{};
    for (std::size_t k = 0; k < o.keepers.size(); ++k) {
      if (v.now[o.keepers[k]]) {
        best = std::max(best, o.keeper_copies[k].version);
        any = true;
      }
    }
    const bool stale = o.has_write && any && best < o.latest_produced;
    if (stale == (state.stale_now[i] != 0)) continue;
    if (stale) {
      state.stale_run_start[i] = std::max(slot, o.first_write_slot + 1);
    } else if (slot > state.stale_run_start[i]) {
      state.stale_closed[i] += slot - state.stale_run_start[i];
    }
    state.stale_now[i] = stale ? 1 : 0;
  }
  state.next_slot = slot + 1;
}

/// A friend (or the owner itself) posts `size` units on `owner`'s wall
/// during `slot`. The stamp extends the owner clock as seen by the receiving
/// replicas; with nobody online the post waits at the author, stamped from
/// the author's last known counter.
inline LogicalStamp post_update(NodeId author, NodeId owner, std::size_t slot, std::uint32_t size,
                                const SocialGraph& g, std::span<const UptimeTrace> traces,
                                ReplicationState& state) {
  if (author != owner && !g.are_friends(author, owner)) {
    throw ContractError("only friends may post on an owner's wall");
  }
  OwnerReplicas& o = state.owners[owner];
  LogicalStamp stamp;
  stamp.author = author;
  if (detail::online(traces, owner, slot)) {
    stamp.counter = o.owner_copy.version.counter + 1;
  } else {
    std::optional<std::uint64_t> seen;
    for (std::size_t k = 0; k < o.keepers.size(); ++k) {
      if (detail::online(traces, o.keepers[k], slot)) {
        seen = std::max(seen.value_or(0), o.keeper_copies[k].version.counter);
      }
    }
    stamp.counter = seen ? *seen + 1 : detail::known(o, author) + 1;
  }
  const Item item{stamp, size};
  state.touched[owner] = 1;
  if (detail::deliver(o, traces, slot, item)) {
    detail::note_known(o, author, stamp.counter);
  } else {
    o.pending.push_back(PendingUpdate{author, owner, stamp, size, author, slot});
  }
  if (!o.has_write) {
    o.has_write = true;
    o.first_write_slot = slot;
  }
  o.latest_produced = std::max(o.latest_produced, stamp);
  return stamp;
}

/// Designated rendezvous super-peer per owner: its own super-peer keeper if
/// it has one, otherwise super-peers are assigned round-robin by owner id.
inline std::vector<std::optional<NodeId>> designate_rendezvous(
    std::span<const StorekeeperSet> placements, std::span<const NodeId> super_peers) {
  std::vector<std::optional<NodeId>> out(placements.size());
  if (super_peers.empty()) return out;
  for (std::size_t i = 0; i < placements.size(); ++i) {
    if (placements[i].super_peer_keeper) {
      out[i] = placements[i].super_peer_keeper;
    } else {
      NodeId sp = super_peers[i % super_peers.size()];
      if (sp == placements[i].owner) sp = super_peers[(i + 1) % super_peers.size()];
      out[i] = sp;
    }
  }
  return out;
}

/// Runs the whole horizon with the synthetic workload: every slot, each
/// online friend of an owner (and the owner itself) posts with probability
/// `post_percent`.
inline ReplicationState simulate(const SocialGraph& g, std::span<const StorekeeperSet> placements,
                                 std::span<const UptimeTrace> traces,
                                 std::span<const std::optional<NodeId>> rendezvous_peers,
                                 const ReplicationConfig& config) {
  ReplicationState state = init_replication(placements, rendezvous_peers, config);
  const std::size_t horizon = traces.empty() ? 0 : traces[0].bits.size();
  const std::size_t n = g.node_count();
  std::vector<std::uint64_t> owner_key(n);
  for (NodeId owner = 0; owner < n; ++owner) {
    owner_key[owner] = key_hash(config.seed, Domain::kWorkload, {owner});
  }
  // Draw u = key_uniform(seed, kWorkload, {owner, author, slot}) for every
  // online author and each wall it can post on, then apply the posts in
  // (owner, owner-first, author) order.
  struct Post {
    NodeId owner;
    NodeId author;
    bool operator<(const Post& o) const {
      if (owner != o.owner) return owner < o.owner;
      if ((author == owner) != (o.author == o.owner)) return author == owner;
      return author < o.author;
    }
  };
  std::vector<Post> posts;
  for (std::size_t t = 0; t < horizon; ++t) {
    step(t, traces, state);
    posts.clear();
    auto draw = [&](NodeId owner, NodeId author) {
      const double u = hash_to_unit(key_extend(key_extend(owner_key[owner], author), t));
      if (u * 100.0 < config.post_percent) posts.push_back({owner, author});
    };
    for (NodeId author = 0; author < n; ++author) {
      if (!state.up_now[author]) continue;
      draw(author, author);
      for (NodeId owner : g.neighbors(author)) draw(owner, author);
    }
    std::sort(posts.begin(), posts.end());
    for (const Post& p : posts) post_update(p.author, p.owner, t, config.item_size, g, traces, state);
  }
  return state;
}

struct OwnerStaleness {
  NodeId owner = 0;
  double staleness = 0.0;
};

/// Share of slots after an owner's first write in which the freshest online
/// replica lagged the newest stamp produced. Owners never written score 0.
inline std::vector<OwnerStaleness> staleness_report(const ReplicationState& state) {
  std::vector<OwnerStaleness> out;
  out.reserve(state.owners.size());
  for (const OwnerReplicas& o : state.owners) {
    const std::size_t observed = state.observed_slots(o.owner);
    const double f = observed == 0 ? 0.0
                                   : static_cast<double>(state.stale_slots(o.owner)) /
                                         static_cast<double>(observed);
    out.push_back({o.owner, f});
  }
  return out;
}

inline std::string write_staleness_csv(std::span<const OwnerStaleness> rows) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << "owner,staleness_fraction\n";
  for (const auto& r : rows) out << r.owner << ',' << r.staleness << '\n';
  return out.str();
}

}  // namespace supernova
