#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gridresv/timeline.hpp"
#include "gridresv/types.hpp"

namespace gridresv {

/// One pristine timeline per node. Throws Error(DuplicateNode).
DynamicTable init_table(std::span<const NodeSpec> nodes);

struct NodeMetrics {
  NodeId node_id;
  Percent average_load;
  std::size_t committed_tasks = 0;
};

struct AgentMetrics {
  std::vector<NodeMetrics> nodes;  // sorted by node id
  std::size_t total_tasks = 0;
};

/// Agent-side reservation logic. Offers are computed on a clone of the
/// dynamic table; only broker-accepted offers reach the committed table.
/// Not thread-safe: each agent is driven by one loop.
class Agent {
 public:
  Agent(AgentName name, std::vector<NodeSpec> nodes);

  const AgentName& name() const noexcept { return name_; }
  const std::vector<NodeSpec>& nodes() const noexcept { return nodes_; }
  const DynamicTable& table() const noexcept { return table_; }

  bool has_pending() const noexcept { return pending_.has_value(); }
  const std::string* pending_batch() const;
  const DynamicTable* pending_clone() const;

  /// Places tasks in the given order on a fresh clone, choosing per task
  /// the feasible node with minimum projected peak, then fewest tasks, then
  /// smallest node id. Tasks that fit nowhere get no offer.
  std::vector<Offer> propose(const std::string& batch_id, std::span<const Task> tasks,
                             const SchedulerLimits& limits);

  /// Applies the accepted subset of the pending offers to the committed
  /// table and drops the clone. Returns the number of tasks committed.
  std::size_t commit(const std::string& batch_id, const std::set<TaskId>& accepted);

  /// Drops a pending batch without committing anything.
  void abandon();

  AgentMetrics snapshot_metrics() const;

 private:
  struct Pending {
    std::string batch_id;
    DynamicTable clone;
    std::vector<Offer> offers;
    std::map<TaskId, Task> tasks;
    SchedulerLimits limits;
  };

  AgentName name_;
  std::vector<NodeSpec> nodes_;
  DynamicTable table_;
  std::optional<Pending> pending_;
};

}  // namespace gridresv
