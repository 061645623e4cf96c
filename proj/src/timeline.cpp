#include "gridresv/timeline.hpp"

#include <algorithm>
#include <cassert>

namespace gridresv {

std::string_view to_string(CapRule rule) {
  switch (rule) {
    case CapRule::LoadCap: return "LoadCap";
    case CapRule::TaskCap: return "TaskCap";
  }
  return "Unknown";
}

std::string_view to_string(ViolationRule rule) {
  switch (rule) {
    case ViolationRule::NoIntervals: return "NoIntervals";
    case ViolationRule::StartNotZero: return "StartNotZero";
    case ViolationRule::EndNotInfinite: return "EndNotInfinite";
    case ViolationRule::EmptyInterval: return "EmptyInterval";
    case ViolationRule::Gap: return "GapViolation";
    case ViolationRule::Overlap: return "OverlapViolation";
    case ViolationRule::NonCanonical: return "NonCanonical";
    case ViolationRule::LoadCap: return "LoadCap";
    case ViolationRule::TaskCap: return "TaskCap";
    case ViolationRule::UsageSum: return "UsageSumViolation";
    case ViolationRule::UnknownTask: return "UnknownTask";
    case ViolationRule::TaskCoverage: return "TaskCoverage";
  }
  return "Unknown";
}

InfeasiblePlacement::InfeasiblePlacement(CapRule rule, const TaskId& task)
    : Error(ErrorCode::Infeasible, std::string(to_string(rule)) + " (" + task + ")"), rule_(rule) {}

ResourceTimeline::ResourceTimeline() : intervals_{Interval{}} {}

ResourceTimeline ResourceTimeline::from_parts(std::vector<Interval> intervals,
                                              std::map<TaskId, Task> tasks) {
  ResourceTimeline timeline;
  timeline.intervals_ = std::move(intervals);
  timeline.tasks_ = std::move(tasks);
  return timeline;
}

namespace {

// Index of the interval containing t in a valid timeline.
std::size_t index_at(const std::vector<Interval>& intervals, TimePoint t) {
  auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                             [](TimePoint value, const Interval& iv) { return value < iv.start; });
  assert(it != intervals.begin());
  return static_cast<std::size_t>(std::distance(intervals.begin(), it)) - 1;
}

}  // namespace

const Interval& ResourceTimeline::interval_at(TimePoint t) const {
  if (t < 0 || t >= kInfinite) throw Error(ErrorCode::InvalidArgument, "time point outside [0, INF)");
  return intervals_[index_at(intervals_, t)];
}

Feasibility ResourceTimeline::can_place(const Task& task, const SchedulerLimits& limits) const {
  check_task(task);
  if (tasks_.contains(task.id)) throw Error(ErrorCode::DuplicateTask, task.id);

  Feasibility result;
  LoadPercent peak = 0;
  for (std::size_t i = index_at(intervals_, task.start);
       i < intervals_.size() && intervals_[i].start < task.end; ++i) {
    const Interval& iv = intervals_[i];
    const LoadPercent projected = iv.usage + task.load;
    if (projected > limits.max_load) {
      result.violated = CapRule::LoadCap;
      return result;
    }
    if (static_cast<int>(iv.task_ids.size()) + 1 > limits.max_tasks) {
      result.violated = CapRule::TaskCap;
      return result;
    }
    peak = std::max(peak, projected);
  }
  result.feasible = true;
  result.projected_peak = peak;
  return result;
}

void ResourceTimeline::split_at(TimePoint t) {
  if (t <= 0 || t >= kInfinite) return;
  const std::size_t i = index_at(intervals_, t);
  if (intervals_[i].start == t) return;
  Interval tail = intervals_[i];
  tail.start = t;
  intervals_[i].end = t;
  intervals_.insert(intervals_.begin() + static_cast<std::ptrdiff_t>(i) + 1, std::move(tail));
}

void ResourceTimeline::canonicalize() {
  std::size_t out = 0;
  for (std::size_t i = 1; i < intervals_.size(); ++i) {
    if (intervals_[i].task_ids == intervals_[out].task_ids) {
      intervals_[out].end = intervals_[i].end;
    } else if (++out != i) {
      intervals_[out] = std::move(intervals_[i]);
    }
  }
  intervals_.resize(out + 1);
}

void ResourceTimeline::place(const Task& task, const SchedulerLimits& limits) {
  const Feasibility check = can_place(task, limits);
  if (!check.feasible) throw InfeasiblePlacement(*check.violated, task.id);

  split_at(task.start);
  split_at(task.end);
  for (std::size_t i = index_at(intervals_, task.start);
       i < intervals_.size() && intervals_[i].start < task.end; ++i) {
    intervals_[i].task_ids.insert(task.id);
    intervals_[i].usage += task.load;
  }
  tasks_.emplace(task.id, task);
  canonicalize();
}

Percent ResourceTimeline::average_load() const {
  std::int64_t sum = 0;
  std::int64_t bounded = 0;
  for (const Interval& iv : intervals_) {
    if (iv.end == kInfinite) continue;
    sum += iv.usage;
    ++bounded;
  }
  if (bounded == 0) return Percent(0);
  return Percent(sum, bounded);
}

std::vector<Violation> validate_intervals(std::span<const Interval> intervals,
                                          const SchedulerLimits& limits) {
  std::vector<Violation> out;
  auto report = [&out](std::size_t index, ViolationRule rule, std::string detail = {}) {
    out.push_back(Violation{index, rule, std::move(detail)});
  };

  if (intervals.empty()) {
    report(0, ViolationRule::NoIntervals);
    return out;
  }
  if (intervals.front().start != 0) report(0, ViolationRule::StartNotZero);
  if (intervals.back().end != kInfinite) report(intervals.size() - 1, ViolationRule::EndNotInfinite);

  // Per task: index of the last interval it was seen in.
  std::map<TaskId, std::size_t> last_seen;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const Interval& iv = intervals[i];
    if (iv.start >= iv.end) report(i, ViolationRule::EmptyInterval);
    if (i > 0) {
      const Interval& prev = intervals[i - 1];
      if (prev.end < iv.start) report(i, ViolationRule::Gap);
      if (prev.end > iv.start) report(i, ViolationRule::Overlap);
      if (prev.end == iv.start && prev.task_ids == iv.task_ids) report(i, ViolationRule::NonCanonical);
    }
    if (iv.usage < 0 || iv.usage > limits.max_load) {
      report(i, ViolationRule::LoadCap, std::to_string(iv.usage));
    }
    if (static_cast<int>(iv.task_ids.size()) > limits.max_tasks) {
      report(i, ViolationRule::TaskCap, std::to_string(iv.task_ids.size()));
    }
    for (const TaskId& id : iv.task_ids) {
      auto [it, first] = last_seen.try_emplace(id, i);
      if (!first) {
        if (it->second + 1 != i) report(i, ViolationRule::TaskCoverage, id + " not contiguous");
        it->second = i;
      }
    }
  }
  return out;
}

std::vector<Violation> ResourceTimeline::validate(const SchedulerLimits& limits) const {
  std::vector<Violation> out = validate_intervals(intervals_, limits);

  // First and last interval index per task.
  std::map<TaskId, std::pair<std::size_t, std::size_t>> span;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const Interval& iv = intervals_[i];
    LoadPercent sum = 0;
    for (const TaskId& id : iv.task_ids) {
      auto task = tasks_.find(id);
      if (task == tasks_.end()) {
        out.push_back({i, ViolationRule::UnknownTask, id});
        continue;
      }
      sum += task->second.load;
      auto [it, first] = span.try_emplace(id, i, i);
      if (!first) it->second.second = i;
    }
    if (sum != iv.usage) {
      out.push_back({i, ViolationRule::UsageSum,
                     "usage " + std::to_string(iv.usage) + " != " + std::to_string(sum)});
    }
  }
  for (const auto& [id, task] : tasks_) {
    auto it = span.find(id);
    if (it == span.end()) {
      out.push_back({0, ViolationRule::TaskCoverage, id + " not present"});
      continue;
    }
    const auto [first, last] = it->second;
    if (intervals_[first].start != task.start || intervals_[last].end != task.end) {
      out.push_back({first, ViolationRule::TaskCoverage, id + " window mismatch"});
    }
  }
  return out;
}

}  // namespace gridresv
