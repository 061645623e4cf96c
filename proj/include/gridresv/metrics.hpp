#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridresv/agent.hpp"
#include "gridresv/broker.hpp"
#include "gridresv/channel.hpp"
#include "gridresv/timeline.hpp"

namespace gridresv {

/// scheduled / total * 100, exact. Throws Error(EmptyBatch) when total is
/// 0 and Error(InvalidArgument) unless 0 <= scheduled <= total.
Percent performance_indicator(std::int64_t scheduled, std::int64_t total);

/// One decimal place, half rounded up ("66.7", "100.0").
std::string render_percent(const Percent& value);

struct LoadRow {
  std::string test_label;
  AgentName agent;
  std::string load;  // "count (total)"

  bool operator==(const LoadRow&) const = default;
};

/// Rows in agent-name order, e.g. {"1", "agent1", "10 (20)"}.
std::vector<LoadRow> agent_load_table(const std::map<AgentName, std::int64_t>& counts,
                                      std::size_t batch_total, const std::string& test_label);

/// One row per interval, `nodeId,start,end,usage,taskIds`, sorted by node
/// then start; the last end is written as `INF` and task ids are joined
/// with ';'.
std::vector<std::string> timeline_rows(const DynamicTable& table);

/// Header line plus timeline_rows().
std::string timeline_csv(const DynamicTable& table);

/// Reads timeline_csv() output back into per-node interval lists. Throws
/// Error(InvalidValue) on malformed rows.
std::map<NodeId, std::vector<Interval>> parse_timeline_csv(std::string_view csv);

/// `taskId,agentName,nodeId,projectedLoad` rows in task id order.
std::string schedule_csv(const FinalSchedule& schedule);

/// `nodeId,averageLoad,committedTasks` plus a trailing `TOTAL` row.
std::string agent_metrics_csv(const AgentMetrics& metrics);

struct TimingSummary {
  double min_ms = 0.0;
  double median_ms = 0.0;
  double max_ms = 0.0;
};

class CommTimings {
 public:
  void record(std::string batch_id, std::size_t bytes, double milliseconds);
  void record(const CommTiming& timing) { entries_.push_back(timing); }

  const std::vector<CommTiming>& entries() const noexcept { return entries_; }
  /// Empty when nothing was recorded.
  std::optional<TimingSummary> summary() const;

 private:
  std::vector<CommTiming> entries_;
};

/// Text of indicators.txt: performance, unscheduled tasks, agent load
/// table and communication-time summary.
std::string indicators_report(const RoundResult& result, std::size_t batch_total,
                              const std::string& test_label = "1");

}  // namespace gridresv
