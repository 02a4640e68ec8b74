#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "supernova/errors.hpp"
#include "supernova/metrics.hpp"
#include "supernova/placement.hpp"
#include "supernova/replication.hpp"
#include "supernova/social_graph.hpp"
#include "supernova/trace_model.hpp"

namespace supernova {

struct Combination {
  std::string_view name;
  double p_fd;
  double p_sd;
  double p_as;
};

inline constexpr std::array<Combination, 8> kCombinations{{
    {"C1", 50, 50, 100},
    {"C2", 50, 70, 100},
    {"C3", 20, 70, 100},
    {"C4", 20, 50, 100},
    {"C5", 20, 50, 40},
    {"C6", 20, 70, 40},
    {"C7", 50, 70, 40},
    {"C8", 50, 50, 40},
}};

inline Combination lookup_combination(std::string_view name) {
  for (const Combination& c : kCombinations) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown combination '" + std::string(name) + "' (expected C1..C8 or custom)");
}

struct ExperimentConfig {
  // Graph source: an edge-list file, or a synthetic graph when empty.
  std::string graph_file;
  std::size_t nodes = 20000;
  double avg_degree = 6.0;
  SyntheticShape shape;
  double super_peer_fraction = 0.002;

  std::uint64_t seed = 1;
  TimeGrid grid;
  double minor_percent = 27.0;
  double major_percent = 3.0;

  // "custom" takes p_fd / p_sd / p_as below.
  std::string combination = "C8";
  double p_fd = 50.0;
  double p_sd = 50.0;
  double p_as = 40.0;
  Mode mode = Mode::SuperPeer;
  bool deviation = true;
  Metric metric = Metric::TotalTime;

  double coverage_target = 0.95;
  std::size_t max_friend_keepers = 8;
  std::size_t keeper_capacity = 8;
  std::size_t max_stranger_keepers = 5;
  double pairing_threshold = 0.10;

  bool replication = true;
  std::size_t replica_capacity = 32;
  double post_percent = 5.0;
  bool rendezvous = true;

  // Combinations used by the three comparisons.
  std::string ft_combination = "C8";
  std::string flat_combination = "C8";
  std::string best_combination = "C2";
  std::string worst_combination = "C5";

  bool write_node_reports = true;
  std::string out_dir = "out";

  PlacementParameters placement_parameters(const Combination& c, Mode m) const {
    PlacementParameters p;
    p.p_fd = c.p_fd;
    p.p_sd = c.p_sd;
    p.p_as = c.p_as;
    p.coverage_target = coverage_target;
    p.max_friend_keepers = max_friend_keepers;
    p.keeper_capacity = keeper_capacity;
    p.max_stranger_keepers = max_stranger_keepers;
    p.pairing_threshold = pairing_threshold;
    p.mode = m;
    return p;
  }

  Combination selected_combination() const {
    if (combination == "custom") return {"custom", p_fd, p_sd, p_as};
    return lookup_combination(combination);
  }

  ReplicationConfig replication_config() const {
    ReplicationConfig r;
    r.capacity_s = replica_capacity;
    r.post_percent = post_percent;
    r.rendezvous = rendezvous;
    r.seed = seed;
    return r;
  }

  void validate() const {
    try {
      grid.validate();
      (void)selected_combination();
      for (const std::string& name :
           {ft_combination, flat_combination, best_combination, worst_combination}) {
        (void)lookup_combination(name);
      }
      placement_parameters(selected_combination(), mode).validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    if (graph_file.empty() && nodes < 10) throw ConfigError("nodes must be >= 10");
    if (!(post_percent >= 0.0 && post_percent <= 100.0)) {
      throw ConfigError("post_percent must lie in [0, 100]");
    }
    if (replica_capacity == 0) throw ConfigError("replica_capacity must be >= 1");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value, std::size_t line) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("line " + std::to_string(line) + ": bad value for " + std::string(key) +
                      ": '" + std::string(value) + "'");
  }
  return out;
}

inline bool parse_flag(std::string_view key, std::string_view value, std::size_t line) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError("line " + std::to_string(line) + ": " + std::string(key) +
                    " expects on/off, got '" + std::string(value) + "'");
}

}  // namespace detail

inline Mode parse_mode(std::string_view v) {
  if (v == "sp") return Mode::SuperPeer;
  if (v == "flat") return Mode::Flat;
  throw ConfigError("mode must be sp or flat, got '" + std::string(v) + "'");
}

inline Metric parse_metric(std::string_view v) {
  if (v == "tt") return Metric::TotalTime;
  if (v == "ft") return Metric::FriendTime;
  throw ConfigError("metric must be tt or ft, got '" + std::string(v) + "'");
}

/// Applies one key=value setting. Unknown keys are configuration errors.
inline void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                          std::size_t line = 0) {
  using detail::parse_flag;
  using detail::parse_number;
  const std::string v(value);
  if (key == "graph_file") cfg.graph_file = v;
  else if (key == "nodes") cfg.nodes = parse_number<std::size_t>(key, value, line);
  else if (key == "avg_degree") cfg.avg_degree = parse_number<double>(key, value, line);
  else if (key == "single_link_share") cfg.shape.single_link_share = parse_number<double>(key, value, line);
  else if (key == "attachment_offset") cfg.shape.attachment_offset = parse_number<double>(key, value, line);
  else if (key == "super_peer_fraction") cfg.super_peer_fraction = parse_number<double>(key, value, line);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value, line);
  else if (key == "slot_minutes") cfg.grid.slot_minutes = parse_number<std::size_t>(key, value, line);
  else if (key == "slots_per_day") cfg.grid.slots_per_day = parse_number<std::size_t>(key, value, line);
  else if (key == "days_per_week") cfg.grid.days_per_week = parse_number<std::size_t>(key, value, line);
  else if (key == "minor_percent") cfg.minor_percent = parse_number<double>(key, value, line);
  else if (key == "major_percent") cfg.major_percent = parse_number<double>(key, value, line);
  else if (key == "combination") cfg.combination = v;
  else if (key == "p_fd") cfg.p_fd = parse_number<double>(key, value, line);
  else if (key == "p_sd") cfg.p_sd = parse_number<double>(key, value, line);
  else if (key == "p_as") cfg.p_as = parse_number<double>(key, value, line);
  else if (key == "mode") cfg.mode = parse_mode(value);
  else if (key == "deviation") cfg.deviation = parse_flag(key, value, line);
  else if (key == "metric") cfg.metric = parse_metric(value);
  else if (key == "coverage_target") cfg.coverage_target = parse_number<double>(key, value, line);
  else if (key == "max_friend_keepers") cfg.max_friend_keepers = parse_number<std::size_t>(key, value, line);
  else if (key == "keeper_capacity") cfg.keeper_capacity = parse_number<std::size_t>(key, value, line);
  else if (key == "max_stranger_keepers") cfg.max_stranger_keepers = parse_number<std::size_t>(key, value, line);
  else if (key == "pairing_threshold") cfg.pairing_threshold = parse_number<double>(key, value, line);
  else if (key == "replication") cfg.replication = parse_flag(key, value, line);
  else if (key == "replica_capacity") cfg.replica_capacity = parse_number<std::size_t>(key, value, line);
  else if (key == "post_percent") cfg.post_percent = parse_number<double>(key, value, line);
  else if (key == "rendezvous") cfg.rendezvous = parse_flag(key, value, line);
  else if (key == "ft_combination") cfg.ft_combination = v;
  else if (key == "flat_combination") cfg.flat_combination = v;
  else if (key == "best_combination") cfg.best_combination = v;
  else if (key == "worst_combination") cfg.worst_combination = v;
  else if (key == "write_node_reports") cfg.write_node_reports = parse_flag(key, value, line);
  else if (key == "out_dir") cfg.out_dir = v;
  else {
    throw ConfigError("line " + std::to_string(line) + ": unknown key '" + std::string(key) + "'");
  }
}

/// Flat key=value lines; '#' starts a comment.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig cfg = {}) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), line_no);
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Everything shared by the runs of one (config, seed): graph, behaviors and
/// both trace sets for each mode.
struct World {
  SocialGraph graph;       // super-peers elected
  SocialGraph flat_graph;  // same friendships, no roles
  std::vector<BehaviorAssignment> behaviors;
  std::vector<UptimeTrace> sp_base;
  std::vector<UptimeTrace> sp_deviated;
  std::vector<UptimeTrace> flat_base;
  std::vector<UptimeTrace> flat_deviated;
  std::vector<SlotSet> sp_week1;
  std::vector<SlotSet> flat_week1;

  const SocialGraph& graph_for(Mode m) const { return m == Mode::SuperPeer ? graph : flat_graph; }
  const std::vector<UptimeTrace>& traces(Mode m, bool deviation) const {
    if (m == Mode::SuperPeer) return deviation ? sp_deviated : sp_base;
    return deviation ? flat_deviated : flat_base;
  }
  const std::vector<SlotSet>& week1(Mode m) const {
    return m == Mode::SuperPeer ? sp_week1 : flat_week1;
  }
};

inline SocialGraph build_graph(const ExperimentConfig& cfg) {
  SocialGraph raw;
  if (cfg.graph_file.empty()) {
    try {
      raw = generate_synthetic(cfg.nodes, cfg.avg_degree, cfg.seed, cfg.shape);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  } else {
    if (!std::filesystem::exists(cfg.graph_file)) {
      throw ConfigError("graph file not found: " + cfg.graph_file);
    }
    raw = load_edge_list_file(cfg.graph_file);
  }
  return elect_super_peers(giant_component(raw), cfg.super_peer_fraction, cfg.seed);
}

inline World build_world(const ExperimentConfig& cfg) {
  cfg.validate();
  World w;
  w.graph = build_graph(cfg);
  w.flat_graph = w.graph.without_roles();
  const std::size_t n = w.graph.node_count();
  w.behaviors = assign_behaviors(n, cfg.seed, cfg.minor_percent, cfg.major_percent);

  std::vector<BehaviorAssignment> sp_behaviors = w.behaviors;
  for (NodeId i = 0; i < n; ++i) {
    w.flat_base.push_back(render_trace(w.behaviors[i], cfg.grid, i));
    if (w.graph.is_super_peer(i)) {
      w.sp_base.push_back(super_peer_trace(cfg.grid, w.behaviors[i].location, i));
      sp_behaviors[i].deviation = Deviation::None;
    } else {
      w.sp_base.push_back(w.flat_base.back());
    }
  }
  w.sp_deviated = apply_deviation(w.sp_base, sp_behaviors, cfg.seed, cfg.grid);
  w.flat_deviated = apply_deviation(w.flat_base, w.behaviors, cfg.seed, cfg.grid);
  for (NodeId i = 0; i < n; ++i) {
    w.sp_week1.push_back(w.sp_base[i].bits.slice(0, cfg.grid.week_slots()));
    w.flat_week1.push_back(w.flat_base[i].bits.slice(0, cfg.grid.week_slots()));
  }
  return w;
}

/// Placement uses week-1 traces only, so one pass serves both D and ND.
inline std::vector<StorekeeperSet> place(const World& w, const ExperimentConfig& cfg,
                                         const Combination& c, Mode m) {
  const PlacementParameters params = cfg.placement_parameters(c, m);
  const SocialGraph& g = w.graph_for(m);
  const AcceptanceTables tables = sample_acceptances(g, params, cfg.seed);
  if (m == Mode::Flat) return flat_placement(g, tables, w.week1(m), params, cfg.seed);
  SuperPeerRegistry registry = build_registry(g, tables, w.week1(m));
  return place_all(g, registry, tables, w.week1(m), params);
}

struct BundleResult {
  std::string name;
  std::string combination;
  Mode mode = Mode::SuperPeer;
  bool deviation = false;
  std::vector<StorekeeperSet> placements;
  std::array<double, kStrategyCount> strategy_percent{};
  AvailabilityReport tt;
  AvailabilityReport ft;
  std::vector<OwnerStaleness> staleness;

  const AvailabilityReport& report(Metric m) const { return m == Metric::TotalTime ? tt : ft; }
};

inline BundleResult evaluate_bundle(const World& w, const ExperimentConfig& cfg,
                                    std::string_view combination,
                                    std::vector<StorekeeperSet> placements, Mode m,
                                    bool deviation) {
  BundleResult b;
  b.combination = std::string(combination);
  b.name = b.combination + (m == Mode::Flat ? "_flat" : "") + (deviation ? "_D" : "_ND");
  b.mode = m;
  b.deviation = deviation;
  b.placements = std::move(placements);
  b.strategy_percent = strategy_distribution(b.placements);
  const SocialGraph& g = w.graph_for(m);
  const auto& traces = w.traces(m, deviation);
  b.tt = evaluate(g, b.placements, traces, Metric::TotalTime, cfg.grid);
  b.ft = evaluate(g, b.placements, traces, Metric::FriendTime, cfg.grid);
  if (cfg.replication) {
    const auto peers = designate_rendezvous(b.placements, g.super_peers());
    const ReplicationState state =
        simulate(g, b.placements, traces, peers, cfg.replication_config());
    b.staleness = staleness_report(state);
  }
  return b;
}

/// The single configured run (combination, mode, deviation flag).
inline BundleResult run_combination(const World& w, const ExperimentConfig& cfg) {
  const Combination c = cfg.selected_combination();
  return evaluate_bundle(w, cfg, c.name, place(w, cfg, c, cfg.mode), cfg.mode, cfg.deviation);
}

inline BundleResult run_combination(const ExperimentConfig& cfg) {
  return run_combination(build_world(cfg), cfg);
}

/// C1..C8 in super-peer mode, each with and without deviation.
inline std::vector<BundleResult> run_matrix(const World& w, const ExperimentConfig& cfg) {
  std::vector<BundleResult> out;
  out.reserve(2 * kCombinations.size());
  for (const Combination& c : kCombinations) {
    auto placements = place(w, cfg, c, Mode::SuperPeer);
    out.push_back(evaluate_bundle(w, cfg, c.name, placements, Mode::SuperPeer, true));
    out.push_back(evaluate_bundle(w, cfg, c.name, std::move(placements), Mode::SuperPeer, false));
  }
  return out;
}

struct Series {
  std::string label;
  AvailabilityReport report;
};

struct ComparisonResult {
  std::string name;
  std::vector<Series> series;
  std::vector<std::pair<std::string, std::string>> metadata;
};

/// FT vs TT, flat vs super-peer, and best vs worst combination, each under
/// both deviation settings. Replication is not needed for these panels.
inline std::vector<ComparisonResult> run_comparisons(const World& w, const ExperimentConfig& cfg) {
  ExperimentConfig quiet = cfg;
  quiet.replication = false;
  std::vector<ComparisonResult> out;

  {
    const Combination c = lookup_combination(cfg.ft_combination);
    const auto placements = place(w, quiet, c, Mode::SuperPeer);
    ComparisonResult r{"ft_vs_tt", {}, {{"combination", std::string(c.name)}}};
    for (bool dev : {false, true}) {
      BundleResult b = evaluate_bundle(w, quiet, c.name, placements, Mode::SuperPeer, dev);
      const std::string tag = dev ? "D" : "ND";
      r.series.push_back({"FT_" + tag, std::move(b.ft)});
      r.series.push_back({"TT_" + tag, std::move(b.tt)});
    }
    out.push_back(std::move(r));
  }
  {
    const Combination c = lookup_combination(cfg.flat_combination);
    const auto sp = place(w, quiet, c, Mode::SuperPeer);
    const auto flat = place(w, quiet, c, Mode::Flat);
    ComparisonResult r{"flat_vs_sp",
                       {},
                       {{"combination", std::string(c.name)},
                        {"metric", std::string(to_string(cfg.metric))},
                        {"assumption", "combination for this comparison is a configured choice"}}};
    for (bool dev : {false, true}) {
      const std::string tag = dev ? "D" : "ND";
      BundleResult s = evaluate_bundle(w, quiet, c.name, sp, Mode::SuperPeer, dev);
      BundleResult f = evaluate_bundle(w, quiet, c.name, flat, Mode::Flat, dev);
      r.series.push_back({"SP_" + tag, std::move(cfg.metric == Metric::TotalTime ? s.tt : s.ft)});
      r.series.push_back({"Flat_" + tag, std::move(cfg.metric == Metric::TotalTime ? f.tt : f.ft)});
    }
    out.push_back(std::move(r));
  }
  {
    const Combination best = lookup_combination(cfg.best_combination);
    const Combination worst = lookup_combination(cfg.worst_combination);
    const auto pb = place(w, quiet, best, Mode::SuperPeer);
    const auto pw = place(w, quiet, worst, Mode::SuperPeer);
    ComparisonResult r{"best_vs_worst",
                       {},
                       {{"best", std::string(best.name)},
                        {"worst", std::string(worst.name)},
                        {"metric", std::string(to_string(cfg.metric))}}};
    for (bool dev : {false, true}) {
      const std::string tag = dev ? "D" : "ND";
      BundleResult b = evaluate_bundle(w, quiet, best.name, pb, Mode::SuperPeer, dev);
      BundleResult x = evaluate_bundle(w, quiet, worst.name, pw, Mode::SuperPeer, dev);
      r.series.push_back(
          {std::string(best.name) + "_" + tag, std::move(cfg.metric == Metric::TotalTime ? b.tt : b.ft)});
      r.series.push_back(
          {std::string(worst.name) + "_" + tag, std::move(cfg.metric == Metric::TotalTime ? x.tt : x.ft)});
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---- CSV emission. Every output is a (relative path -> content) map so runs
// can be compared without touching the filesystem.

using OutputFiles = std::map<std::string, std::string>;

inline std::string strategy_csv(const BundleResult& b) {
  std::ostringstream out;
  out << "strategy,percent\n";
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    out << to_string(static_cast<Strategy>(s)) << ',' << format_number(b.strategy_percent[s])
        << '\n';
  }
  return out.str();
}

inline std::string category_csv(const BundleResult& b) {
  std::ostringstream out;
  out << "metric,category,percent\n";
  for (const AvailabilityReport* r : {&b.tt, &b.ft}) {
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      out << to_string(r->metric) << ',' << to_string(static_cast<Category>(c)) << ','
          << format_number(r->category_percent[c]) << '\n';
    }
  }
  return out.str();
}

inline double mean_staleness(const BundleResult& b) {
  if (b.staleness.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : b.staleness) total += s.staleness;
  return total / static_cast<double>(b.staleness.size());
}

inline void add_bundle_files(OutputFiles& files, const BundleResult& b, const ExperimentConfig& cfg) {
  const std::string dir = b.name + "/";
  files[dir + "strategies.csv"] = strategy_csv(b);
  files[dir + "categories.csv"] = category_csv(b);
  files[dir + "aggregate.csv"] = write_aggregate_csv(b.report(cfg.metric));
  if (cfg.write_node_reports) files[dir + "report.csv"] = write_report_csv(b.report(cfg.metric));
  if (cfg.replication) files[dir + "staleness.csv"] = write_staleness_csv(b.staleness);
}

inline std::string matrix_summary_csv(const std::vector<BundleResult>& bundles, Metric metric) {
  std::ostringstream out;
  out << "bundle,combination,deviation,metric";
  for (std::size_t s = 0; s < kStrategyCount; ++s) out << ',' << to_string(static_cast<Strategy>(s));
  for (std::size_t c = 0; c < kCategoryCount; ++c) out << ',' << to_string(static_cast<Category>(c));
  out << ",mean_staleness\n";
  for (const BundleResult& b : bundles) {
    out << b.name << ',' << b.combination << ',' << (b.deviation ? "D" : "ND") << ','
        << to_string(metric);
    for (double v : b.strategy_percent) out << ',' << format_number(v);
    for (double v : b.report(metric).category_percent) out << ',' << format_number(v);
    out << ',' << format_number(mean_staleness(b)) << '\n';
  }
  return out.str();
}

inline OutputFiles matrix_files(const std::vector<BundleResult>& bundles,
                                const ExperimentConfig& cfg) {
  OutputFiles files;
  for (const BundleResult& b : bundles) add_bundle_files(files, b, cfg);
  files["matrix_summary.csv"] = matrix_summary_csv(bundles, cfg.metric);
  return files;
}

inline OutputFiles comparison_files(const std::vector<ComparisonResult>& comparisons) {
  OutputFiles files;
  for (const ComparisonResult& r : comparisons) {
    std::ostringstream cumulative, individual, categories, meta;
    cumulative << "series,availability_percent,nodes_percent\n";
    individual << "series,availability_percent,nodes_percent\n";
    categories << "series,category,percent\n";
    meta << "key,value\n";
    for (const Series& s : r.series) {
      for (std::size_t x = 0; x <= 100; ++x) {
        cumulative << s.label << ',' << x << ',' << format_number(s.report.cumulative[x]) << '\n';
        individual << s.label << ',' << x << ',' << format_number(s.report.individual[x]) << '\n';
      }
      for (std::size_t c = 0; c < kCategoryCount; ++c) {
        categories << s.label << ',' << to_string(static_cast<Category>(c)) << ','
                   << format_number(s.report.category_percent[c]) << '\n';
      }
    }
    for (const auto& [k, v] : r.metadata) meta << k << ',' << v << '\n';
    const std::string dir = "compare/" + r.name + "/";
    files[dir + "cumulative.csv"] = cumulative.str();
    files[dir + "individual.csv"] = individual.str();
    files[dir + "categories.csv"] = categories.str();
    files[dir + "metadata.csv"] = meta.str();
  }
  return files;
}

inline void write_files(const std::string& out_dir, const OutputFiles& files) {
  namespace fs = std::filesystem;
  for (const auto& [rel, content] : files) {
    const fs::path p = fs::path(out_dir) / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << content;
  }
}

}  // namespace supernova
