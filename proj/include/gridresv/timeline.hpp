#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "gridresv/error.hpp"
#include "gridresv/types.hpp"

namespace gridresv {

/// Exact percentage value.
using Percent = boost::rational<std::int64_t>;

/// A maximal span [start, end) during which the set of reserved tasks on a
/// resource does not change.
struct Interval {
  TimePoint start = 0;
  TimePoint end = kInfinite;
  std::set<TaskId> task_ids;
  LoadPercent usage = 0;

  bool operator==(const Interval&) const = default;
};

enum class CapRule { LoadCap, TaskCap };

std::string_view to_string(CapRule rule);

struct Feasibility {
  bool feasible = false;
  // Maximum post-insertion usage over the task window; only meaningful
  // when feasible.
  LoadPercent projected_peak = 0;
  // First violated rule, scanning intervals by start time.
  std::optional<CapRule> violated;
};

class InfeasiblePlacement : public Error {
 public:
  InfeasiblePlacement(CapRule rule, const TaskId& task);
  CapRule rule() const noexcept { return rule_; }

 private:
  CapRule rule_;
};

enum class ViolationRule {
  NoIntervals,
  StartNotZero,
  EndNotInfinite,
  EmptyInterval,
  Gap,
  Overlap,
  NonCanonical,
  LoadCap,
  TaskCap,
  UsageSum,
  UnknownTask,
  TaskCoverage,
};

std::string_view to_string(ViolationRule rule);

struct Violation {
  std::size_t interval_index = 0;
  ViolationRule rule = ViolationRule::NoIntervals;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

/// Per-resource reservation timeline: contiguous, sorted, disjoint
/// intervals covering [0, kInfinite). Adjacent intervals never carry the
/// same task set.
class ResourceTimeline {
 public:
  ResourceTimeline();

  /// Builds a timeline from raw parts without any checking. Used to load
  /// exported data and to build corrupt fixtures for validate().
  static ResourceTimeline from_parts(std::vector<Interval> intervals,
                                     std::map<TaskId, Task> tasks);

  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  const std::map<TaskId, Task>& tasks() const noexcept { return tasks_; }
  std::size_t task_count() const noexcept { return tasks_.size(); }
  bool contains(const TaskId& id) const { return tasks_.contains(id); }

  /// The interval holding time point `t`; requires 0 <= t < kInfinite.
  const Interval& interval_at(TimePoint t) const;

  /// Checks whether `task` fits under `limits` on every interval its window
  /// overlaps. Does not modify the timeline.
  Feasibility can_place(const Task& task, const SchedulerLimits& limits) const;

  /// Reserves `task`. Throws InfeasiblePlacement or Error(DuplicateTask);
  /// the timeline is untouched when it throws.
  void place(const Task& task, const SchedulerLimits& limits);

  /// Unweighted mean usage over all bounded intervals; 0 when only the
  /// unbounded tail exists.
  Percent average_load() const;

  std::vector<Violation> validate(const SchedulerLimits& limits) const;

  bool operator==(const ResourceTimeline&) const = default;

 private:
  void split_at(TimePoint t);
  void canonicalize();

  std::vector<Interval> intervals_;
  std::map<TaskId, Task> tasks_;
};

/// Structural checks that need only the intervals: coverage of
/// [0, kInfinite), contiguity, canonical form, caps, and every task id
/// occupying one contiguous run of intervals.
std::vector<Violation> validate_intervals(std::span<const Interval> intervals,
                                          const SchedulerLimits& limits);

/// Per-resource timelines of one agent, keyed by node id.
using DynamicTable = std::map<NodeId, ResourceTimeline>;

}  // namespace gridresv
