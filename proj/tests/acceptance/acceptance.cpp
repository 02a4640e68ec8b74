// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../test_support.hpp"
#include "supernova/experiment.hpp"

using namespace supernova;

namespace {

constexpr std::size_t kNodes = 20000;
constexpr std::uint64_t kSeeds[] = {1, 2, 3};

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
  if (!ok) ++failures;
}

std::string fmt(double v, int digits = 1) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ExperimentConfig desk(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.nodes = kNodes;
  cfg.seed = seed;
  return cfg;
}

double share(const std::array<double, kStrategyCount>& d, Strategy s) {
  return d[static_cast<std::size_t>(s)];
}

double category(const AvailabilityReport& r, Category c) {
  return r.category_percent[static_cast<std::size_t>(c)];
}

const AvailabilityReport& series(const ComparisonResult& r, const std::string& label) {
  for (const Series& s : r.series) {
    if (s.label == label) return s.report;
  }
  throw std::runtime_error("missing series " + label);
}

// Everything criteria 1-5 need from one seed.
struct SeedRun {
  std::array<std::array<double, kStrategyCount>, 8> strategies{};
  std::vector<ComparisonResult> comparisons;
  AvailabilityReport c5_deviated_tt;
};

SeedRun run_seed(std::uint64_t seed) {
  ExperimentConfig cfg = desk(seed);
  cfg.replication = false;
  const World w = build_world(cfg);
  SeedRun r;
  for (std::size_t c = 0; c < kCombinations.size(); ++c) {
    auto placements = place(w, cfg, kCombinations[c], Mode::SuperPeer);
    r.strategies[c] = strategy_distribution(placements);
    if (kCombinations[c].name == "C5") {
      r.c5_deviated_tt =
          evaluate_bundle(w, cfg, "C5", std::move(placements), Mode::SuperPeer, true).tt;
    }
  }
  r.comparisons = run_comparisons(w, cfg);
  return r;
}

std::size_t index_of(std::string_view name) {
  for (std::size_t c = 0; c < kCombinations.size(); ++c) {
    if (kCombinations[c].name == name) return c;
  }
  throw std::runtime_error("unknown combination");
}

void criterion1(const std::vector<SeedRun>& runs) {
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::array<double, 8> nsp{};
    for (std::size_t c = 0; c < 8; ++c) nsp[c] = share(runs[i].strategies[c], Strategy::Snsp);
    const double c5 = nsp[index_of("C5")], c2 = nsp[index_of("C2")];
    bool max = true, min = true;
    for (std::size_t c = 0; c < 8; ++c) {
      if (c != index_of("C5")) max = max && c5 > nsp[c];
      if (c != index_of("C2")) min = min && c2 < nsp[c];
    }
    const double c3 = nsp[index_of("C3")], c6 = nsp[index_of("C6")], c7 = nsp[index_of("C7")];
    const bool seed_ok = max && min && c6 > c3 && c7 < c6;
    ok = ok && seed_ok;
    detail << "seed " << kSeeds[i] << " S_nsp C2=" << fmt(c2) << " C3=" << fmt(c3)
           << " C5=" << fmt(c5) << " C6=" << fmt(c6) << " C7=" << fmt(c7)
           << (seed_ok ? "" : " (order broken)") << "; ";
  }
  report(1, ok, "S_nsp orderings over seeds 1-3: " + detail.str());
}

void criterion2(const std::vector<SeedRun>& runs) {
  const std::array<Strategy, 4> order{Strategy::Snns, Strategy::Snn, Strategy::Sns, Strategy::Snsp};
  const std::array<double, 4> c2_ref{31.5, 27.7, 22.7, 18.1};
  const std::array<double, 4> c5_ref{4, 22, 12, 62};
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    detail << "seed " << kSeeds[i];
    for (auto [name, ref] : {std::pair{"C2", c2_ref}, std::pair{"C5", c5_ref}}) {
      const auto& d = runs[i].strategies[index_of(name)];
      detail << ' ' << name << '=';
      for (std::size_t s = 0; s < 4; ++s) {
        const double v = share(d, order[s]);
        ok = ok && std::abs(v - ref[s]) <= 15.0;
        detail << fmt(v) << (s < 3 ? "/" : "");
      }
    }
    detail << "; ";
  }
  report(2, ok, "C2/C5 strategy shares within 15 points (nns/nn/ns/nsp): " + detail.str());
}

void criterion3(const SeedRun& run) {
  const ComparisonResult& ft_tt = run.comparisons[0];
  const double ft_full = series(ft_tt, "FT_ND").individual[100];
  const double tt_full = series(ft_tt, "TT_ND").individual[100];
  const bool bounds = ft_full > 50.0 - 10.0 && tt_full < 20.0 + 10.0;
  report(3, bounds,
         "C8/ND nodes at 100% FT " + fmt(ft_full) + "% (need > 40), at 100% TT " + fmt(tt_full) +
             "% (need < 30)");
  const AvailabilityReport& ft_d = series(ft_tt, "FT_D");
  const double d_top = category(ft_d, Category::Excellent) + category(ft_d, Category::VeryGood);
  const double nd_excellent = category(series(ft_tt, "FT_ND"), Category::Excellent);
  report(3, d_top < nd_excellent,
         "FT deviation Excellent+VeryGood " + fmt(d_top) + "% below ND Excellent " +
             fmt(nd_excellent) + "%");
}

void criterion4(const std::vector<SeedRun>& runs) {
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ComparisonResult& cmp = runs[i].comparisons[1];
    const double flat_nd = category(series(cmp, "Flat_ND"), Category::Excellent);
    const double flat_d = category(series(cmp, "Flat_D"), Category::Excellent);
    const double sp_nd = category(series(cmp, "SP_ND"), Category::Excellent);
    const double sp_d = category(series(cmp, "SP_D"), Category::Excellent);
    const bool small = flat_nd <= 12.0;
    const bool halves = flat_d < 0.6 * flat_nd;
    const bool sp_wins = sp_nd > flat_nd && sp_d > flat_d;
    ok = ok && small && halves && sp_wins;
    detail << "seed " << kSeeds[i] << " flat Excellent ND=" << fmt(flat_nd) << (small ? "" : "(>12)")
           << " D=" << fmt(flat_d) << " ratio=" << fmt(flat_nd > 0 ? flat_d / flat_nd : 0.0, 2)
           << (halves ? "" : "(>=0.6)") << " SP ND=" << fmt(sp_nd) << " D=" << fmt(sp_d)
           << (sp_wins ? "" : "(SP not above flat)") << "; ";
  }
  report(4, ok, "flat vs super-peer: " + detail.str());
}

void criterion5(const SeedRun& run) {
  const auto& nodes = run.c5_deviated_tt.nodes;
  std::size_t low = 0;
  for (const NodeReport& r : nodes) low += r.avl_tt <= 0.60 ? 1 : 0;
  const double pct = 100.0 * static_cast<double>(low) / static_cast<double>(nodes.size());
  report(5, pct >= 50.0, "C5/D nodes with TT availability <= 60%: " + fmt(pct) + "% (need >= 50)");
}

// Criterion 6 ------------------------------------------------------------------

std::vector<std::vector<bool>> as_bools(const std::vector<UptimeTrace>& traces) {
  std::vector<std::vector<bool>> out;
  for (const auto& t : traces) {
    std::vector<bool> v(t.bits.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.bits.test(i);
    out.push_back(std::move(v));
  }
  return out;
}

void criterion6() {
  std::mt19937_64 rng(606);
  std::size_t mismatches = 0;
  for (int round = 0; round < 200; ++round) {
    const NodeId n = 9;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId j = 1; j < n; ++j) {
      if (rng() % 2) edges.emplace_back(0, j);
    }
    const SocialGraph g = SocialGraph::from_edges(n, edges);
    std::vector<UptimeTrace> traces;
    for (NodeId i = 0; i < n; ++i) {
      traces.push_back({i, oracle::random_bits(rng, 336, 0.05 + 0.08 * (rng() % 10))});
    }
    std::vector<NodeId> friends(g.neighbors(0).begin(), g.neighbors(0).end());
    StorekeeperSet s;
    s.owner = 0;
    if (rng() % 5 == 0) {
      s.super_peer_keeper = static_cast<NodeId>(1 + rng() % (n - 1));
    } else {
      for (NodeId j = 1; j < n; ++j) {
        if (rng() % 3 == 0) continue;
        (g.are_friends(0, j) ? s.friend_keepers : s.stranger_keepers).push_back(j);
      }
    }
    s.strategy = classify_strategy(s);
    std::vector<NodeId> holders = s.friend_keepers;
    holders.insert(holders.end(), s.stranger_keepers.begin(), s.stranger_keepers.end());
    if (s.super_peer_keeper) holders.push_back(*s.super_peer_keeper);
    const auto bools = as_bools(traces);
    if (availability_tt(s, traces) != oracle::tt_scan(bools, 0, holders, 168, 336)) ++mismatches;
    if (availability_ft(s, g, traces) != oracle::ft_scan(bools, 0, holders, friends, 168, 336)) {
      ++mismatches;
    }
  }

  const double bound = 1.0 - 1.0 / std::exp(1.0);
  double worst_friend = 1.0, worst_stranger = 1.0;
  for (int round = 0; round < 500; ++round) {
    const std::size_t m = 1 + rng() % 8;
    const std::size_t k = 1 + rng() % 4;
    std::vector<SlotSet> week1;
    for (std::size_t i = 0; i <= m; ++i) week1.push_back(oracle::random_bits(rng, 24, 0.1 + 0.1 * (rng() % 5)));
    const std::vector<SlotSet> cands(week1.begin() + 1, week1.end());
    const double best = static_cast<double>(oracle::best_coverage(week1[0], cands, k));

    PlacementParameters p;
    p.coverage_target = 1.0;
    p.max_friend_keepers = k;
    p.max_stranger_keepers = k;
    p.p_sd = 100;
    p.p_as = 100;
    std::vector<NodeId> friends;
    for (NodeId i = 1; i <= m; ++i) friends.push_back(i);
    KeeperLoad load(m + 1, 8);
    SlotSet got = week1[0];
    for (NodeId f : friend_select(0, friends, week1, p, load)) got |= week1[f];
    worst_friend = std::min(worst_friend, best == 0 ? 1.0 : got.count() / best);

    const SocialGraph strangers = SocialGraph::from_edges(m + 1, {});
    AcceptanceTables t;
    t.accepting_friends.resize(m + 1);
    t.in_pool.assign(m + 1, 1);
    t.willing.assign(m + 1, 1);
    SuperPeerRegistry registry = build_registry(strangers, t, week1);
    KeeperLoad load2(m + 1, 8);
    SlotSet got2 = week1[0];
    for (NodeId c : stranger_suggest(registry, strangers, 0, week1[0].complement(), p, load2)) {
      got2 |= week1[c];
    }
    worst_stranger = std::min(worst_stranger, best == 0 ? 1.0 : got2.count() / best);
  }
  report(6, mismatches == 0 && worst_friend >= bound && worst_stranger >= bound,
         std::to_string(mismatches) + " oracle mismatches over 200 TT+FT instances; worst greedy/optimal "
         "friend " + fmt(worst_friend, 3) + ", stranger " + fmt(worst_stranger, 3) + " (need >= " +
         fmt(bound, 3) + ")");
}

// Criterion 7 ------------------------------------------------------------------

ReplicationConfig rep_config(std::size_t cap, bool rendezvous = true) {
  ReplicationConfig c;
  c.capacity_s = cap;
  c.rendezvous = rendezvous;
  return c;
}

bool monotone(const oracle::Scenario& sc, const std::vector<std::vector<oracle::Post>>& posts) {
  std::vector<std::vector<LogicalStamp>> last(sc.placements.size());
  bool ok = true;
  oracle::drive(sc, posts, rep_config(4), nullptr, [&](const ReplicationState& st, std::size_t) {
    for (std::size_t i = 0; i < st.owners.size(); ++i) {
      std::vector<LogicalStamp> now{st.owners[i].owner_copy.version};
      for (const auto& k : st.owners[i].keeper_copies) now.push_back(k.version);
      if (st.owners[i].rendezvous_copy) now.push_back(st.owners[i].rendezvous_copy->version);
      if (!last[i].empty() && last[i].size() == now.size()) {
        for (std::size_t j = 0; j < now.size(); ++j) ok = ok && last[i][j] <= now[j];
      }
      last[i] = now;
    }
  });
  return ok;
}

bool order_free(const oracle::Scenario& sc, const std::vector<std::vector<oracle::Post>>& posts,
                std::uint64_t seed) {
  const ReplicationState base = oracle::drive(sc, posts, rep_config(5));
  std::mt19937_64 shuffle(seed + 1000);
  const ReplicationState mixed = oracle::drive(sc, posts, rep_config(5), &shuffle);
  for (std::size_t i = 0; i < base.owners.size(); ++i) {
    if (base.owners[i].owner_copy.items != mixed.owners[i].owner_copy.items) return false;
    for (std::size_t k = 0; k < base.owners[i].keeper_copies.size(); ++k) {
      if (base.owners[i].keeper_copies[k].items != mixed.owners[i].keeper_copies[k].items) return false;
      if (base.owners[i].keeper_copies[k].version != mixed.owners[i].keeper_copies[k].version) return false;
    }
  }
  return true;
}

// With room for everything, every stamp handed out survives on some replica
// or is still waiting at its author.
bool nothing_lost(const oracle::Scenario& sc, const std::vector<std::vector<oracle::Post>>& posts) {
  const ReplicationConfig config = rep_config(100000);
  auto st = init_replication(sc.placements, sc.rendezvous, config);
  std::vector<std::vector<LogicalStamp>> produced(sc.placements.size());
  for (std::size_t t = 0; t < posts.size(); ++t) {
    step(t, sc.traces, st, nullptr);
    for (const oracle::Post& p : posts[t]) {
      produced[p.owner].push_back(
          post_update(p.author, p.owner, t, config.item_size, sc.graph, sc.traces, st));
    }
  }
  for (std::size_t i = 0; i < st.owners.size(); ++i) {
    const OwnerReplicas& o = st.owners[i];
    std::set<LogicalStamp> held;
    auto take = [&held](const ReplicaState& r) {
      for (const Item& it : r.items) held.insert(it.stamp);
    };
    take(o.owner_copy);
    for (const auto& k : o.keeper_copies) take(k);
    if (o.rendezvous_copy) take(*o.rendezvous_copy);
    for (const PendingUpdate& p : o.pending) held.insert(p.stamp);
    for (const LogicalStamp& s : produced[i]) {
      if (!held.count(s)) return false;
    }
  }
  return true;
}

bool converges(oracle::Scenario sc, std::vector<std::vector<oracle::Post>> posts) {
  const std::size_t horizon = posts.size();
  for (std::size_t t = horizon - 12; t < horizon; ++t) posts[t].clear();
  for (auto& t : sc.traces) t.bits.set(horizon - 1);
  const ReplicationState st = oracle::drive(sc, posts, rep_config(8));
  for (const OwnerReplicas& o : st.owners) {
    if (o.owner_copy.version != o.latest_produced) return false;
    for (const ReplicaState& k : o.keeper_copies) {
      if (k.version != o.owner_copy.version || k.items != o.owner_copy.items) return false;
    }
  }
  return true;
}

void criterion7() {
  std::size_t bad_monotone = 0, bad_order = 0, bad_lost = 0, bad_converge = 0;
  std::size_t worse = 0, better = 0, owners = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const oracle::Scenario sc = oracle::random_scenario(seed, 10, 48);
    std::mt19937_64 rng(seed);
    const auto posts = oracle::random_posts(sc, rng, 0.1);
    bad_monotone += monotone(sc, posts) ? 0 : 1;
    bad_order += order_free(sc, posts, seed) ? 0 : 1;
    bad_lost += nothing_lost(sc, posts) ? 0 : 1;
    bad_converge += converges(sc, posts) ? 0 : 1;

    const auto with = staleness_report(
        simulate(sc.graph, sc.placements, sc.traces, sc.rendezvous, rep_config(32, true)));
    const auto without = staleness_report(
        simulate(sc.graph, sc.placements, sc.traces, sc.rendezvous, rep_config(32, false)));
    for (std::size_t i = 0; i < with.size(); ++i) {
      ++owners;
      if (with[i].staleness > without[i].staleness + 1e-12) ++worse;
      if (with[i].staleness < without[i].staleness - 1e-12) ++better;
    }
  }
  report(7, bad_monotone + bad_order + bad_lost + bad_converge == 0,
         "1000 scenarios: monotonicity failures " + std::to_string(bad_monotone) +
             ", order-dependence " + std::to_string(bad_order) + ", lost updates " +
             std::to_string(bad_lost) + ", non-convergence " + std::to_string(bad_converge));
  report(7, worse == 0,
         "rendezvous paired runs over " + std::to_string(owners) + " owners: " +
             std::to_string(worse) + " staler, " + std::to_string(better) + " fresher");
}

// Criterion 8 ------------------------------------------------------------------

void criterion8() {
  const ExperimentConfig cfg = desk(1);
  auto once = [&cfg] {
    const World w = build_world(cfg);
    OutputFiles files = matrix_files(run_matrix(w, cfg), cfg);
    files.merge(comparison_files(run_comparisons(w, cfg)));
    return files;
  };
  const auto start = std::chrono::steady_clock::now();
  const OutputFiles a = once();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const OutputFiles b = once();
  std::size_t differing = 0;
  for (const auto& [path, content] : a) {
    const auto it = b.find(path);
    if (it == b.end() || it->second != content) ++differing;
  }
  report(8, a.size() == b.size() && differing == 0,
         std::to_string(a.size()) + " output files, " + std::to_string(differing) +
             " differ between two full runs (seed 1, n=20000)");
  std::cout << "INFO full matrix + comparisons with replication: " << fmt(seconds) << " s"
            << std::endl;
}

}  // namespace

int main() {
  try {
    std::vector<SeedRun> runs;
    for (std::uint64_t seed : kSeeds) runs.push_back(run_seed(seed));
    criterion1(runs);
    criterion2(runs);
    criterion3(runs[0]);
    criterion4(runs);
    criterion5(runs[0]);
    criterion6();
    criterion7();
    criterion8();
  } catch (const std::exception& e) {
    std::cout << "FAIL aborted: " << e.what() << std::endl;
    return 1;
  }
  return failures;
}
