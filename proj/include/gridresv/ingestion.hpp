#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridresv/types.hpp"

namespace gridresv {

/// Parses `<tasks><task><taskId/><startTime/><endTime/><load/></task>...</tasks>`.
/// Throws Error(XmlMalformed | MissingTag | InvalidValue | DuplicateTaskId).
std::vector<Task> parse_task_file(std::string_view xml);

/// Parses `<nodes><node><Id/><nodeName/>...<CPU_idle/></node>...</nodes>`.
/// Throws Error(XmlMalformed | MissingTag | InvalidValue | DuplicateNodeId).
std::vector<NodeSpec> parse_resource_file(std::string_view xml);

std::string serialize_tasks(std::span<const Task> tasks);
std::string serialize_nodes(std::span<const NodeSpec> nodes);

enum class OverlapProfile { Uniform, PairedSymmetric };

struct ScenarioSpec {
  std::uint64_t seed = 0;
  int task_count = 20;
  TimePoint time_horizon = 86400;
  TimePoint duration_min = 60;
  TimePoint duration_max = 3600;
  LoadPercent load_min = 10;
  LoadPercent load_max = 60;
  OverlapProfile profile = OverlapProfile::Uniform;
};

/// Throws Error(InvalidArgument) when ranges are empty or out of bounds, or
/// PairedSymmetric is asked for an odd task count or slots shorter than
/// duration_min.
void check_scenario(const ScenarioSpec& spec);

/// Deterministic in `spec.seed`. Uniform draws start, duration and load
/// independently. PairedSymmetric emits identical twins (same window and
/// load) in time-disjoint slots, one pair per slot.
std::vector<Task> generate_scenario(const ScenarioSpec& spec);

/// Nodes `station<first>` .. `station<first + count - 1>` of one cluster.
std::vector<NodeSpec> make_stations(int first, int count, const std::string& cluster = "RudolfCluster",
                                    const std::string& farm = "farm1");

}  // namespace gridresv
