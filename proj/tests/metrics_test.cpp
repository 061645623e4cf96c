#include "gridresv/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "gridresv/error.hpp"
#include "oracle.hpp"

namespace gridresv {
namespace {

ResourceTimeline build(const std::vector<Task>& tasks) {
  ResourceTimeline timeline;
  for (const Task& t : tasks) timeline.place(t, SchedulerLimits{});
  return timeline;
}

// floor(s * 1000 / t + 1/2) tenths of a percent, in plain integers.
std::string expected_render(std::int64_t s, std::int64_t t) {
  const std::int64_t tenths = (2000 * s + t) / (2 * t);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

TEST(Indicator, Examples) {
  EXPECT_EQ(render_percent(performance_indicator(20, 20)), "100.0");
  EXPECT_EQ(render_percent(performance_indicator(0, 7)), "0.0");
  EXPECT_EQ(render_percent(performance_indicator(19, 20)), "95.0");
  EXPECT_EQ(performance_indicator(2, 3), Percent(200, 3));
  EXPECT_EQ(render_percent(performance_indicator(2, 3)), "66.7");
  EXPECT_EQ(render_percent(performance_indicator(1, 3)), "33.3");
  EXPECT_EQ(render_percent(performance_indicator(1, 16)), "6.3");  // 6.25 rounds up
}

TEST(Indicator, Errors) {
  try {
    performance_indicator(0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBatch);
  }
  EXPECT_THROW(performance_indicator(3, 2), Error);
  EXPECT_THROW(performance_indicator(-1, 2), Error);
}

TEST(IndicatorProperty, MatchesIntegerOracle) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t total = 1 + static_cast<std::int64_t>(rng() % 100000);
    const std::int64_t scheduled = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(total + 1));
    const Percent p = performance_indicator(scheduled, total);
    ASSERT_EQ(p * total, Percent(scheduled * 100));
    ASSERT_EQ(render_percent(p), expected_render(scheduled, total)) << scheduled << "/" << total;
  }
}

TEST(LoadTable, Examples) {
  EXPECT_EQ(agent_load_table({{"agent1", 10}, {"agent2", 10}}, 20, "2"),
            (std::vector<LoadRow>{{"2", "agent1", "10 (20)"}, {"2", "agent2", "10 (20)"}}));
  EXPECT_EQ(agent_load_table({{"agent1", 19}, {"agent2", 12}, {"agent3", 19}}, 50, "3"),
            (std::vector<LoadRow>{{"3", "agent1", "19 (50)"}, {"3", "agent2", "12 (50)"}, {"3", "agent3", "19 (50)"}}));
  EXPECT_EQ(agent_load_table({{"a1", 0}}, 5, "1"), (std::vector<LoadRow>{{"1", "a1", "0 (5)"}}));
}

TEST(TimelineExport, PristineNode) {
  DynamicTable table{{"n1", ResourceTimeline{}}};
  EXPECT_EQ(timeline_rows(table), std::vector<std::string>{"n1,0,INF,0,"});
}

TEST(TimelineExport, SingleTask) {
  DynamicTable table{{"n1", build({{"T1", 10, 20, 30}})}};
  EXPECT_EQ(timeline_rows(table), (std::vector<std::string>{"n1,0,10,0,", "n1,10,20,30,T1", "n1,20,INF,0,"}));
}

TEST(TimelineExport, SortedByNodeThenStart) {
  DynamicTable table{{"n2", build({{"b", 0, 5, 10}, {"a", 0, 5, 20}})}, {"n1", ResourceTimeline{}}};
  EXPECT_EQ(timeline_csv(table), "nodeId,start,end,usage,taskIds\nn1,0,INF,0,\nn2,0,5,30,a;b\nn2,5,INF,0,\n");
}

TEST(TimelineExport, ParseRejectsGarbage) {
  EXPECT_THROW(parse_timeline_csv("nodeId,start,end,usage,taskIds\nn1,0,INF\n"), Error);
  EXPECT_THROW(parse_timeline_csv("nodeId,start,end,usage,taskIds\nn1,x,INF,0,\n"), Error);
}

TEST(TimelineExportProperty, ParseBackReconstructsValidTimelines) {
  std::mt19937_64 rng(37);
  const SchedulerLimits limits;
  for (int trial = 0; trial < 100; ++trial) {
    DynamicTable table;
    const int nodes = 1 + static_cast<int>(rng() % 3);
    for (int n = 0; n < nodes; ++n) table["n" + std::to_string(n)] = ResourceTimeline{};
    for (int i = 0; i < 40; ++i) {
      const Task t = oracle::random_task(rng, "t" + std::to_string(i), 200, 60);
      auto& timeline = table["n" + std::to_string(rng() % nodes)];
      if (timeline.can_place(t, limits).feasible) timeline.place(t, limits);
    }
    const std::string csv = timeline_csv(table);
    const auto parsed = parse_timeline_csv(csv);
    ASSERT_EQ(parsed.size(), table.size());
    for (const auto& [node, intervals] : parsed) {
      EXPECT_TRUE(validate_intervals(intervals, limits).empty());
      EXPECT_EQ(intervals, table.at(node).intervals());
    }
    EXPECT_EQ(timeline_csv(table), csv);
  }
}

TEST(Timings, Summary) {
  CommTimings timings;
  EXPECT_FALSE(timings.summary().has_value());
  timings.record("b1", 100, 5500);
  timings.record("b2", 100, 6000);
  timings.record("b3", 100, 5000);
  const auto s = timings.summary();
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->min_ms, 5000);
  EXPECT_EQ(s->median_ms, 5500);
  EXPECT_EQ(s->max_ms, 6000);
  timings.record("b4", 100, 5700);
  EXPECT_EQ(timings.summary()->median_ms, 5600);
}

FinalSchedule sample_schedule() {
  FinalSchedule schedule;
  schedule.winners["t2"] = OfferRecord{"agent2", Offer{"t2", "station3", 40}};
  schedule.winners["t1"] = OfferRecord{"agent1", Offer{"t1", "station1", 30}};
  schedule.agent_counts = {{"agent1", 1}, {"agent2", 1}};
  return schedule;
}

TEST(ScheduleExport, Golden) {
  EXPECT_EQ(schedule_csv(sample_schedule()),
            "taskId,agentName,nodeId,projectedLoad\n"
            "t1,agent1,station1,30\n"
            "t2,agent2,station3,40\n");
}

TEST(AgentMetricsExport, Golden) {
  AgentMetrics metrics{{{"n1", Percent(15), 1}, {"n2", Percent(200, 3), 2}}, 3};
  EXPECT_EQ(agent_metrics_csv(metrics), "nodeId,averageLoad,committedTasks\nn1,15.0,1\nn2,66.7,2\nTOTAL,,3\n");
}

TEST(IndicatorsReport, Golden) {
  RoundResult result;
  result.schedule = sample_schedule();
  result.unscheduled = {"t3"};
  result.committed = {{"agent1", 1}, {"agent2", 1}};
  result.timings = {CommTiming{"b", 120, 1.5}, CommTiming{"b.retry1", 60, 0.5}};
  result.rounds = 2;
  EXPECT_EQ(indicators_report(result, 3),
            "performance: 66.7%\n"
            "scheduled: 2\n"
            "total: 3\n"
            "rounds: 2\n"
            "unscheduled: t3\n"
            "\n"
            "[agent load]\n"
            "test\tagent\tload\n"
            "1\tagent1\t1 (3)\n"
            "1\tagent2\t1 (3)\n"
            "\n"
            "[communication time]\n"
            "b\tbytes=120\tms=1.500\n"
            "b.retry1\tbytes=60\tms=0.500\n"
            "min_ms=0.500\tmedian_ms=1.000\tmax_ms=1.500\n");
}

TEST(IndicatorsReport, EmptyTimingsHaveNoSummary) {
  RoundResult result;
  result.rounds = 1;
  result.committed = {{"a", 0}};
  const std::string text = indicators_report(result, 4);
  EXPECT_NE(text.find("performance: 100.0%"), std::string::npos);
  EXPECT_EQ(text.find("min_ms"), std::string::npos);
  EXPECT_TRUE(text.ends_with("[communication time]\n"));
}

}  // namespace
}  // namespace gridresv
