#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "supernova/errors.hpp"
#include "supernova/random.hpp"
#include "supernova/slot_set.hpp"
#include "supernova/social_graph.hpp"

namespace supernova {

/// Hour-granular two-week horizon. Day 0 is a Monday; days 5 and 6 of each
/// week are the weekend.
struct TimeGrid {
  std::size_t slot_minutes = 60;
  std::size_t slots_per_day = 24;
  std::size_t days_per_week = 7;

  std::size_t week_slots() const { return days_per_week * slots_per_day; }
  std::size_t horizon_slots() const { return 2 * week_slots(); }
  std::size_t week_boundary() const { return week_slots(); }

  static bool is_weekend(std::size_t day) { return day % 7 >= 5; }

  void validate() const {
    if (slot_minutes != 60 || slots_per_day != 24 || days_per_week != 7) {
      throw ParameterError("only the hourly 24x7 grid is supported");
    }
  }
};

inline constexpr std::size_t kLocations = 12;
inline constexpr std::size_t kWeekdayClasses = 6;
inline constexpr std::size_t kWeekendClasses = 4;

enum class Deviation : std::uint8_t { None, Minor, Major };

struct BehaviorAssignment {
  std::uint32_t location = 0;  // UTC offset is 2 * location hours
  std::uint32_t weekday_class = 0;
  std::uint32_t weekend_class = 0;
  Deviation deviation = Deviation::None;

  friend bool operator==(const BehaviorAssignment&, const BehaviorAssignment&) = default;
};

struct UptimeTrace {
  NodeId node = 0;
  SlotSet bits;

  friend bool operator==(const UptimeTrace&, const UptimeTrace&) = default;
};

using DaySchedule = std::array<bool, 24>;

namespace detail {

constexpr DaySchedule hours(std::initializer_list<std::pair<int, int>> spans) {
  DaySchedule d{};
  for (auto [from, to] : spans) {
    for (int h = from; h < to; ++h) d[static_cast<std::size_t>(h % 24)] = true;
  }
  return d;
}

}  // namespace detail

// Local-time weekday schedules W0..W5.
inline DaySchedule weekday_schedule(std::uint32_t cls) {
  switch (cls) {
    case 0: return detail::hours({{9, 17}});
    case 1: return detail::hours({{9, 23}});
    case 2: return detail::hours({{17, 24}});
    case 3: return detail::hours({{22, 30}});  // 22:00-06:00, wraps within the day
    case 4: return detail::hours({{8, 24}});
    case 5: return detail::hours({{10, 12}, {19, 22}});
    default: throw ParameterError("weekday class out of range");
  }
}

// Local-time weekend schedules E0..E3; E3 replays the weekday schedule.
inline DaySchedule weekend_schedule(std::uint32_t cls, std::uint32_t weekday_cls) {
  switch (cls) {
    case 0: return detail::hours({});
    case 1: return detail::hours({{10, 14}});
    case 2: return detail::hours({{17, 23}});
    case 3: return weekday_schedule(weekday_cls);
    default: throw ParameterError("weekend class out of range");
  }
}

inline void validate(const BehaviorAssignment& b) {
  if (b.location >= kLocations || b.weekday_class >= kWeekdayClasses ||
      b.weekend_class >= kWeekendClasses) {
    throw ContractError("behavior assignment out of range");
  }
}

/// Per-node location and behavior classes drawn uniformly, plus an exact
/// deviation split (largest-remainder rounding of the shares, in percent).
inline std::vector<BehaviorAssignment> assign_behaviors(std::size_t node_count, std::uint64_t seed,
                                                        double minor_percent = 27.0,
                                                        double major_percent = 3.0) {
  if (node_count == 0) throw ParameterError("node_count must be >= 1");
  std::vector<BehaviorAssignment> out(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    auto rng = make_stream(seed, Domain::kBehavior, i);
    out[i].location = static_cast<std::uint32_t>(draw_below(rng, kLocations));
    out[i].weekday_class = static_cast<std::uint32_t>(draw_below(rng, kWeekdayClasses));
    out[i].weekend_class = static_cast<std::uint32_t>(draw_below(rng, kWeekendClasses));
  }

  const std::array<double, 3> shares{100.0 - minor_percent - major_percent, minor_percent,
                                     major_percent};
  if (shares[0] < 0.0 || minor_percent < 0.0 || major_percent < 0.0) {
    throw ParameterError("deviation shares must be non-negative and sum to at most 100");
  }
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = shares[k] * static_cast<double>(node_count) / 100.0;
    counts[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  while (assigned < node_count) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (remainder[k] > remainder[best] + 1e-12) best = k;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }

  std::vector<std::size_t> order(node_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_stream(seed, Domain::kDeviationSplit);
  shuffle_in_place(order, rng);
  std::size_t k = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < counts[c]; ++j) out[order[k++]].deviation = static_cast<Deviation>(c);
  }
  return out;
}

/// One week of UTC slots for the given classes. Each local day is rotated
/// left by the timezone offset within that day.
inline SlotSet render_week(std::uint32_t location, std::uint32_t weekday_cls,
                           std::uint32_t weekend_cls, const TimeGrid& grid) {
  const DaySchedule weekday = weekday_schedule(weekday_cls);
  const DaySchedule weekend = weekend_schedule(weekend_cls, weekday_cls);
  const std::size_t offset = 2 * static_cast<std::size_t>(location);
  SlotSet week(grid.week_slots());
  for (std::size_t day = 0; day < grid.days_per_week; ++day) {
    const DaySchedule& local = TimeGrid::is_weekend(day) ? weekend : weekday;
    for (std::size_t h = 0; h < 24; ++h) {
      if (local[(h + offset) % 24]) week.set(day * 24 + h);
    }
  }
  return week;
}

/// Two-week trace with week 2 a copy of week 1.
inline UptimeTrace render_trace(const BehaviorAssignment& b, const TimeGrid& grid,
                                NodeId node = 0) {
  validate(b);
  grid.validate();
  const SlotSet week = render_week(b.location, b.weekday_class, b.weekend_class, grid);
  UptimeTrace t{node, SlotSet(grid.horizon_slots())};
  t.bits.assign_range(0, week);
  t.bits.assign_range(grid.week_boundary(), week);
  return t;
}

/// Always-available trace except local 04:00-06:00 each day; never deviates.
inline UptimeTrace super_peer_trace(const TimeGrid& grid, std::uint32_t location,
                                    NodeId node = 0) {
  grid.validate();
  const std::size_t offset = 2 * static_cast<std::size_t>(location % kLocations);
  UptimeTrace t{node, SlotSet(grid.horizon_slots())};
  for (std::size_t day = 0; day < 2 * grid.days_per_week; ++day) {
    for (std::size_t h = 0; h < 24; ++h) {
      const std::size_t local = (h + offset) % 24;
      if (local != 4 && local != 5) t.bits.set(day * 24 + h);
    }
  }
  return t;
}

/// Week-2 shift for a Minor deviation, in slots: one of -2, -1, +1, +2.
inline int minor_shift(std::uint64_t seed, NodeId node) {
  auto rng = make_stream(seed, Domain::kDeviation, node);
  static constexpr std::array<int, 4> kShifts{-2, -1, 1, 2};
  return kShifts[draw_below(rng, kShifts.size())];
}

/// Replaces week 2 of each trace according to its deviation class. Week 1 is
/// never touched; None leaves week 2 as is.
inline std::vector<UptimeTrace> apply_deviation(std::span<const UptimeTrace> traces,
                                                std::span<const BehaviorAssignment> assignments,
                                                std::uint64_t seed, const TimeGrid& grid = {}) {
  if (traces.size() != assignments.size()) {
    throw ContractError("trace and assignment counts differ");
  }
  const std::size_t week = grid.week_slots();
  std::vector<UptimeTrace> out(traces.begin(), traces.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    UptimeTrace& t = out[i];
    if (t.bits.size() != grid.horizon_slots()) throw ContractError("trace length mismatch");
    switch (assignments[i].deviation) {
      case Deviation::None:
        break;
      case Deviation::Minor: {
        const int shift = minor_shift(seed, t.node);
        const SlotSet first = t.bits.slice(0, week);
        SlotSet second(week);
        for (std::size_t s = 0; s < week; ++s) {
          if (first.test(s)) {
            const auto to = (static_cast<long>(s) + shift + static_cast<long>(week)) %
                            static_cast<long>(week);
            second.set(static_cast<std::size_t>(to));
          }
        }
        t.bits.assign_range(week, second);
        break;
      }
      case Deviation::Major: {
        auto rng = make_stream(seed, Domain::kDeviation, t.node);
        draw_below(rng, 4);  // the Minor draw, kept so streams line up
        const auto wd = static_cast<std::uint32_t>(draw_below(rng, kWeekdayClasses));
        const auto we = static_cast<std::uint32_t>(draw_below(rng, kWeekendClasses));
        const auto loc = static_cast<std::uint32_t>(draw_below(rng, kLocations));
        t.bits.assign_range(week, render_week(loc, wd, we, grid));
        break;
      }
    }
  }
  return out;
}

/// CSV export: header "node,bits", one 0/1 string per node.
inline std::string write_traces_csv(std::span<const UptimeTrace> traces) {
  std::ostringstream out;
  out << "node,bits\n";
  for (const auto& t : traces) out << t.node << ',' << t.bits.to_string() << '\n';
  return out.str();
}

}  // namespace supernova
