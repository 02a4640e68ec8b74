#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "supernova/errors.hpp"
#include "supernova/placement.hpp"
#include "supernova/slot_set.hpp"
#include "supernova/social_graph.hpp"
#include "supernova/trace_model.hpp"

namespace supernova {

enum class Category : std::uint8_t { Excellent, VeryGood, Good, Mediocre, Poor, VeryBad };

inline constexpr std::size_t kCategoryCount = 6;

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::Excellent: return "Excellent";
    case Category::VeryGood: return "Very Good";
    case Category::Good: return "Good";
    case Category::Mediocre: return "Mediocre";
    case Category::Poor: return "Poor";
    case Category::VeryBad: return "Very Bad";
  }
  return "?";
}

enum class Metric : std::uint8_t { TotalTime, FriendTime };

inline std::string_view to_string(Metric m) { return m == Metric::TotalTime ? "tt" : "ft"; }

/// Six-way split of an availability percentage. Lower bounds are inclusive.
inline Category categorize(double avl_percent) {
  if (!(avl_percent >= 0.0 && avl_percent <= 100.0)) {
    throw ContractError("availability percent must lie in [0, 100]");
  }
  if (avl_percent >= 95.0) return Category::Excellent;
  if (avl_percent >= 80.0) return Category::VeryGood;
  if (avl_percent >= 65.0) return Category::Good;
  if (avl_percent >= 50.0) return Category::Mediocre;
  if (avl_percent >= 30.0) return Category::Poor;
  return Category::VeryBad;
}

namespace detail {

inline SlotSet sigma_union(const StorekeeperSet& keepers, std::span<const UptimeTrace> traces) {
  SlotSet u = traces[keepers.owner].bits;
  for (NodeId k : keepers.holders()) u |= traces[k].bits;
  return u;
}

}  // namespace detail

/// Share of week-2 slots in which the owner or any of its keepers is online.
inline double availability_tt(const StorekeeperSet& keepers, std::span<const UptimeTrace> traces,
                              const TimeGrid& grid = {}) {
  const SlotSet u = detail::sigma_union(keepers, traces);
  return static_cast<double>(u.count_range(grid.week_boundary(), grid.horizon_slots())) /
         static_cast<double>(grid.week_slots());
}

/// Share of the week-2 slots with at least one friend online in which the
/// owner's data is reachable. Owners with no friend online at all score 1.
inline double availability_ft(const StorekeeperSet& keepers, const SocialGraph& g,
                              std::span<const UptimeTrace> traces, const TimeGrid& grid = {}) {
  const SlotSet u = detail::sigma_union(keepers, traces);
  SlotSet demand(u.size());
  for (NodeId f : g.neighbors(keepers.owner)) demand |= traces[f].bits;
  const std::size_t begin = grid.week_boundary();
  const std::size_t end = grid.horizon_slots();
  const std::size_t wanted = demand.count_range(begin, end);
  if (wanted == 0) return 1.0;
  return static_cast<double>((u & demand).count_range(begin, end)) / static_cast<double>(wanted);
}

struct NodeReport {
  NodeId node = 0;
  Strategy strategy = Strategy::Snn;
  double avl_tt = 0.0;
  double avl_ft = 0.0;
  bool friendless = false;  // FT reported as 1 by convention
  Category category = Category::VeryBad;
};

/// Per-node availability plus aggregates, categorized by one chosen metric.
struct AvailabilityReport {
  Metric metric = Metric::TotalTime;
  std::vector<NodeReport> nodes;
  std::array<double, kCategoryCount> category_percent{};
  std::array<double, kStrategyCount> strategy_percent{};
  // cumulative[x]: percent of nodes with availability >= x %, x = 0..100.
  std::array<double, 101> cumulative{};
  // individual[b]: percent of nodes whose availability falls in 1% bin b
  // (b = floor(avl%); 100 holds exactly 100%).
  std::array<double, 101> individual{};

  double selected(const NodeReport& r) const {
    return metric == Metric::TotalTime ? r.avl_tt : r.avl_ft;
  }
};

// Integer percent bin for a fraction, robust to k/168 rounding noise.
inline std::size_t percent_bin(double fraction) {
  const double pct = fraction * 100.0;
  const auto b = static_cast<long>(std::floor(pct + 1e-9));
  return static_cast<std::size_t>(std::clamp(b, 0L, 100L));
}

/// Fills the aggregate tables of a report from its per-node values.
inline void distributions(AvailabilityReport& report) {
  report.category_percent.fill(0.0);
  report.strategy_percent.fill(0.0);
  report.cumulative.fill(0.0);
  report.individual.fill(0.0);
  const auto n = static_cast<double>(report.nodes.size());
  if (report.nodes.empty()) return;
  for (const NodeReport& r : report.nodes) {
    report.category_percent[static_cast<std::size_t>(r.category)] += 1.0;
    report.strategy_percent[static_cast<std::size_t>(r.strategy)] += 1.0;
    const double pct = report.selected(r) * 100.0;
    report.individual[percent_bin(report.selected(r))] += 1.0;
    for (std::size_t x = 0; x <= 100; ++x) {
      if (pct + 1e-9 >= static_cast<double>(x)) report.cumulative[x] += 1.0;
    }
  }
  for (double& v : report.category_percent) v = 100.0 * v / n;
  for (double& v : report.strategy_percent) v = 100.0 * v / n;
  for (double& v : report.cumulative) v = 100.0 * v / n;
  for (double& v : report.individual) v = 100.0 * v / n;
}

/// Evaluates every placement on the given (week-2) traces.
inline AvailabilityReport evaluate(const SocialGraph& g, std::span<const StorekeeperSet> placements,
                                   std::span<const UptimeTrace> traces, Metric metric,
                                   const TimeGrid& grid = {}) {
  AvailabilityReport report;
  report.metric = metric;
  report.nodes.reserve(placements.size());
  for (const StorekeeperSet& s : placements) {
    NodeReport r;
    r.node = s.owner;
    r.strategy = s.strategy;
    r.avl_tt = availability_tt(s, traces, grid);
    r.avl_ft = availability_ft(s, g, traces, grid);
    r.friendless = g.degree(s.owner) == 0;
    r.category = categorize(std::min(100.0, 100.0 * report.selected(r)));
    report.nodes.push_back(r);
  }
  distributions(report);
  return report;
}

inline std::string format_number(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << v;
  return out.str();
}

/// CSV "node,strategy,avl_tt,avl_ft,category".
inline std::string write_report_csv(const AvailabilityReport& report) {
  std::ostringstream out;
  out << "node,strategy,avl_tt,avl_ft,category\n";
  for (const auto& r : report.nodes) {
    out << r.node << ',' << to_string(r.strategy) << ',' << format_number(r.avl_tt) << ','
        << format_number(r.avl_ft) << ',' << to_string(r.category) << '\n';
  }
  return out.str();
}

/// CSV "metric,bucket,value" holding every aggregate table.
inline std::string write_aggregate_csv(const AvailabilityReport& report) {
  std::ostringstream out;
  out << "metric,bucket,value\n";
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    out << "category," << to_string(static_cast<Category>(c)) << ','
        << format_number(report.category_percent[c]) << '\n';
  }
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    out << "strategy," << to_string(static_cast<Strategy>(s)) << ','
        << format_number(report.strategy_percent[s]) << '\n';
  }
  for (std::size_t x = 0; x <= 100; ++x) {
    out << "cumulative," << x << ',' << format_number(report.cumulative[x]) << '\n';
  }
  for (std::size_t x = 0; x <= 100; ++x) {
    out << "individual," << x << ',' << format_number(report.individual[x]) << '\n';
  }
  return out.str();
}

}  // namespace supernova
