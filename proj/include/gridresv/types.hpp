#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace gridresv {

/// Seconds since the scheduling epoch.
using TimePoint = std::int64_t;

/// Upper limit of the last interval of every timeline. Nothing is ever
/// scheduled past it.
inline constexpr TimePoint kInfinite = std::numeric_limits<std::int64_t>::max();

/// Integer percentage points, 0..100.
using LoadPercent = int;

using TaskId = std::string;
using NodeId = std::string;
using AgentName = std::string;

struct Task {
  TaskId id;
  TimePoint start = 0;  // inclusive
  TimePoint end = 0;    // exclusive
  LoadPercent load = 0;

  auto operator<=>(const Task&) const = default;
};

/// Throws Error(InvalidValue) unless id is non-empty, 0 <= start < end <=
/// kInfinite and 0 < load <= 100.
void check_task(const Task& task);

struct NodeSpec {
  NodeId id;
  std::string node_name;
  std::string cluster_name;
  std::string farm_name;
  // Metadata only; placement never reads these.
  double cpu_power_mhz = 0.0;
  double memory_mb = 0.0;
  LoadPercent cpu_idle_percent = 0;

  bool operator==(const NodeSpec&) const = default;
};

struct SchedulerLimits {
  LoadPercent max_load = 85;
  int max_tasks = 5;

  bool operator==(const SchedulerLimits&) const = default;
};

/// Throws Error(InvalidArgument) unless 0 < max_load <= 100 and max_tasks >= 1.
void check_limits(const SchedulerLimits& limits);

/// An agent's proposed reservation of one task on one of its nodes.
struct Offer {
  TaskId task_id;
  NodeId node_id;
  LoadPercent projected_load = 0;

  auto operator<=>(const Offer&) const = default;
};

}  // namespace gridresv
