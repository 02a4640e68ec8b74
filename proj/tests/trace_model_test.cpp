#include <gtest/gtest.h>

#include <array>
#include <vector>

#include "supernova/trace_model.hpp"

using namespace supernova;

namespace {

const TimeGrid kGrid{};

std::array<std::size_t, 3> deviation_counts(const std::vector<BehaviorAssignment>& a) {
  std::array<std::size_t, 3> c{};
  for (const auto& b : a) ++c[static_cast<std::size_t>(b.deviation)];
  return c;
}

// Hand-written day renderer: local hour h is online iff it falls in one of
// the [from, to) spans (to may exceed 24 to wrap past midnight).
std::array<bool, 24> local_day(std::initializer_list<std::pair<int, int>> spans) {
  std::array<bool, 24> d{};
  for (auto [from, to] : spans) {
    for (int h = from; h < to; ++h) d[h % 24] = true;
  }
  return d;
}

}  // namespace

TEST(AssignBehaviors, ExactDeviationSplit) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    EXPECT_EQ(deviation_counts(assign_behaviors(100, seed)), (std::array<std::size_t, 3>{70, 27, 3}));
    EXPECT_EQ(deviation_counts(assign_behaviors(1000, seed)),
              (std::array<std::size_t, 3>{700, 270, 30}));
  }
  // 7 nodes: 4.9 / 1.89 / 0.21 -> floors 4/1/0, remainders go to None then Minor
  EXPECT_EQ(deviation_counts(assign_behaviors(7, 3)), (std::array<std::size_t, 3>{5, 2, 0}));
}

TEST(AssignBehaviors, SingleNodeGetsNone) {
  const auto a = assign_behaviors(1, 5);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].deviation, Deviation::None);
}

TEST(AssignBehaviors, DeterministicAndInRange) {
  const auto a = assign_behaviors(10000, 42);
  EXPECT_EQ(a, assign_behaviors(10000, 42));
  for (const auto& b : a) EXPECT_NO_THROW(validate(b));
  EXPECT_NE(a, assign_behaviors(10000, 43));
}

TEST(AssignBehaviors, RoughlyUniformClasses) {
  const auto a = assign_behaviors(12000, 8);
  std::array<std::size_t, kLocations> loc{};
  for (const auto& b : a) ++loc[b.location];
  for (std::size_t c : loc) {
    EXPECT_GT(c, 1000u - 150u);  // mean 1000, sd ~ 30
    EXPECT_LT(c, 1000u + 150u);
  }
}

TEST(RenderTrace, OfficeHoursOnMonday) {
  const UptimeTrace t = render_trace({0, 0, 0, Deviation::None}, kGrid);
  for (std::size_t h = 0; h < 24; ++h) EXPECT_EQ(t.bits.test(h), h >= 9 && h < 17) << h;
}

TEST(RenderTrace, TimezoneRotatesLeftWithinDay) {
  for (std::uint32_t wd = 0; wd < kWeekdayClasses; ++wd) {
    for (std::uint32_t we = 0; we < kWeekendClasses; ++we) {
      const UptimeTrace base = render_trace({0, wd, we, Deviation::None}, kGrid);
      const UptimeTrace east = render_trace({3, wd, we, Deviation::None}, kGrid);
      for (std::size_t day = 0; day < 14; ++day) {
        for (std::size_t h = 0; h < 24; ++h) {
          ASSERT_EQ(east.bits.test(day * 24 + h), base.bits.test(day * 24 + (h + 6) % 24));
        }
      }
      EXPECT_EQ(base.bits.count(), east.bits.count());
    }
  }
}

TEST(RenderTrace, SchedulesMatchTable) {
  const std::array<std::array<bool, 24>, 6> weekday{
      local_day({{9, 17}}),  local_day({{9, 23}}),  local_day({{17, 24}}),
      local_day({{22, 30}}), local_day({{8, 24}}),  local_day({{10, 12}, {19, 22}})};
  const std::array<std::array<bool, 24>, 3> weekend{local_day({}), local_day({{10, 14}}),
                                                     local_day({{17, 23}})};
  for (std::uint32_t wd = 0; wd < 6; ++wd) {
    for (std::uint32_t we = 0; we < 4; ++we) {
      const UptimeTrace t = render_trace({0, wd, we, Deviation::None}, kGrid);
      for (std::size_t day = 0; day < 14; ++day) {
        const bool weekend_day = day % 7 >= 5;
        const auto& want = weekend_day ? (we == 3 ? weekday[wd] : weekend[we]) : weekday[wd];
        for (std::size_t h = 0; h < 24; ++h) ASSERT_EQ(t.bits.test(day * 24 + h), want[h]);
      }
    }
  }
}

TEST(RenderTrace, OfflineWeekend) {
  const UptimeTrace t = render_trace({5, 4, 0, Deviation::None}, kGrid);
  for (std::size_t week = 0; week < 2; ++week) {
    EXPECT_EQ(t.bits.count_range(week * 168 + 120, week * 168 + 168), 0u);
  }
}

TEST(RenderTrace, WeekTwoCopiesWeekOne) {
  const UptimeTrace t = render_trace({7, 5, 2, Deviation::Minor}, kGrid);
  EXPECT_EQ(t.bits.slice(0, 168), t.bits.slice(168, 336));
}

TEST(RenderTrace, RejectsOutOfRangeClass) {
  EXPECT_THROW(render_trace({12, 0, 0, Deviation::None}, kGrid), ContractError);
  EXPECT_THROW(render_trace({0, 6, 0, Deviation::None}, kGrid), ContractError);
}

TEST(SuperPeerTrace, TwentyTwoHoursEveryDay) {
  for (std::uint32_t loc = 0; loc < kLocations; ++loc) {
    const UptimeTrace t = super_peer_trace(kGrid, loc);
    EXPECT_EQ(t.bits.count(), 14u * 22u);
    EXPECT_NEAR(static_cast<double>(t.bits.count()) / 336.0, 22.0 / 24.0, 1e-12);
    EXPECT_EQ(t.bits.slice(0, 168), t.bits.slice(168, 336));
  }
}

TEST(SuperPeerTrace, OppositeLocationsCoverEverything) {
  const SlotSet u = super_peer_trace(kGrid, 0).bits | super_peer_trace(kGrid, 6).bits;
  EXPECT_EQ(u.count(), 336u);
}

TEST(ApplyDeviation, NoneLeavesWeekTwo) {
  const UptimeTrace t = render_trace({2, 1, 3, Deviation::None}, kGrid);
  const std::vector<UptimeTrace> in{t};
  const std::vector<BehaviorAssignment> a{{2, 1, 3, Deviation::None}};
  EXPECT_EQ(apply_deviation(in, a, 1, kGrid)[0], t);
}

TEST(ApplyDeviation, MinorShiftMovesOfficeDay) {
  // find a node whose drawn shift is +1
  NodeId node = 0;
  while (minor_shift(5, node) != 1) ++node;
  const BehaviorAssignment b{0, 0, 3, Deviation::Minor};
  const UptimeTrace t = render_trace(b, kGrid, node);
  const std::vector<UptimeTrace> in{t};
  const auto out = apply_deviation(in, std::vector<BehaviorAssignment>{b}, 5, kGrid);
  for (std::size_t h = 0; h < 24; ++h) {
    EXPECT_EQ(out[0].bits.test(168 + h), h >= 10 && h < 18) << h;
  }
  EXPECT_EQ(out[0].bits.slice(0, 168), t.bits.slice(0, 168));
}

TEST(ApplyDeviation, MinorShiftWrapsWithinWeek) {
  NodeId node = 0;
  while (minor_shift(5, node) != -2) ++node;
  const BehaviorAssignment b{0, 3, 3, Deviation::Minor};  // 22-06 every day, wraps at week end
  const UptimeTrace t = render_trace(b, kGrid, node);
  const auto out = apply_deviation(std::vector<UptimeTrace>{t}, std::vector<BehaviorAssignment>{b},
                                   5, kGrid);
  for (std::size_t s = 0; s < 168; ++s) {
    ASSERT_EQ(out[0].bits.test(168 + s), t.bits.test((s + 2) % 168)) << s;
  }
}

TEST(ApplyDeviation, PopulationKeepsSeventyPercentIdentical) {
  const auto a = assign_behaviors(1000, 12);
  std::vector<UptimeTrace> traces;
  for (NodeId i = 0; i < 1000; ++i) traces.push_back(render_trace(a[i], kGrid, i));
  const auto out = apply_deviation(traces, a, 12, kGrid);
  std::size_t identical = 0;
  for (NodeId i = 0; i < 1000; ++i) {
    ASSERT_EQ(out[i].bits.slice(0, 168), traces[i].bits.slice(0, 168));
    const bool same = out[i].bits.slice(168, 336) == out[i].bits.slice(0, 168);
    if (a[i].deviation == Deviation::None) {
      ASSERT_TRUE(same);
    }
    if (a[i].deviation == Deviation::Minor) {
      ASSERT_FALSE(same);
      ASSERT_EQ(out[i].bits.count_range(168, 336), out[i].bits.count_range(0, 168));
    }
    identical += same ? 1 : 0;
  }
  EXPECT_EQ(identical, 700u);
}

TEST(ApplyDeviation, LengthMismatchIsContractError) {
  const std::vector<UptimeTrace> traces(2, render_trace({0, 0, 0, Deviation::None}, kGrid));
  EXPECT_THROW(apply_deviation(traces, assign_behaviors(3, 1), 1, kGrid), ContractError);
}

TEST(TraceCsv, HeaderAndBitString) {
  const std::vector<UptimeTrace> t{render_trace({0, 0, 0, Deviation::None}, kGrid, 4)};
  const std::string csv = write_traces_csv(t);
  EXPECT_EQ(csv.substr(0, 10), "node,bits\n");
  EXPECT_EQ(csv.size(), 10u + 2u + 336u + 1u);
}
