#include "gridresv/agent.hpp"

#include <tuple>

namespace gridresv {

DynamicTable init_table(std::span<const NodeSpec> nodes) {
  DynamicTable table;
  for (const NodeSpec& node : nodes) {
    if (!table.try_emplace(node.id).second) throw Error(ErrorCode::DuplicateNode, node.id);
  }
  return table;
}

Agent::Agent(AgentName name, std::vector<NodeSpec> nodes)
    : name_(std::move(name)), nodes_(std::move(nodes)), table_(init_table(nodes_)) {}

const std::string* Agent::pending_batch() const {
  return pending_ ? &pending_->batch_id : nullptr;
}

const DynamicTable* Agent::pending_clone() const {
  return pending_ ? &pending_->clone : nullptr;
}

std::vector<Offer> Agent::propose(const std::string& batch_id, std::span<const Task> tasks,
                                  const SchedulerLimits& limits) {
  if (pending_) throw Error(ErrorCode::BatchInFlight, pending_->batch_id);
  check_limits(limits);

  Pending next{batch_id, table_, {}, {}, limits};
  for (const Task& task : tasks) {
    check_task(task);
    if (!next.tasks.emplace(task.id, task).second) throw Error(ErrorCode::DuplicateTask, task.id);
    for (const auto& [node, timeline] : table_) {
      if (timeline.contains(task.id)) throw Error(ErrorCode::DuplicateTask, task.id);
    }
  }

  for (const Task& task : tasks) {
    ResourceTimeline* best = nullptr;
    std::tuple<LoadPercent, std::size_t> best_key{};
    const NodeId* best_node = nullptr;
    // Map iteration is in node id order, so a strict comparison keeps the
    // smallest id on ties.
    for (auto& [node, timeline] : next.clone) {
      const Feasibility fit = timeline.can_place(task, limits);
      if (!fit.feasible) continue;
      std::tuple<LoadPercent, std::size_t> key{fit.projected_peak, timeline.task_count()};
      if (best == nullptr || key < best_key) {
        best = &timeline;
        best_key = key;
        best_node = &node;
      }
    }
    if (best == nullptr) continue;
    best->place(task, limits);
    next.offers.push_back(Offer{task.id, *best_node, std::get<0>(best_key)});
  }

  pending_ = std::move(next);
  return pending_->offers;
}

std::size_t Agent::commit(const std::string& batch_id, const std::set<TaskId>& accepted) {
  if (!pending_) throw Error(ErrorCode::NoPendingBatch, batch_id);
  if (pending_->batch_id != batch_id) {
    throw Error(ErrorCode::BatchIdMismatch, "expected " + pending_->batch_id + ", got " + batch_id);
  }
  std::map<TaskId, const Offer*> offered;
  for (const Offer& offer : pending_->offers) offered.emplace(offer.task_id, &offer);
  for (const TaskId& id : accepted) {
    if (!offered.contains(id)) throw Error(ErrorCode::UnknownTaskAccepted, id);
  }

  // Placement into the committed table cannot fail: it holds a subset of
  // what the clone already accommodated, and every cap is an upper bound.
  DynamicTable next = table_;
  for (const Offer& offer : pending_->offers) {
    if (!accepted.contains(offer.task_id)) continue;
    next.at(offer.node_id).place(pending_->tasks.at(offer.task_id), pending_->limits);
  }
  table_ = std::move(next);
  pending_.reset();
  return accepted.size();
}

void Agent::abandon() { pending_.reset(); }

AgentMetrics Agent::snapshot_metrics() const {
  if (pending_) throw Error(ErrorCode::BatchInFlight, pending_->batch_id);
  AgentMetrics metrics;
  for (const auto& [node, timeline] : table_) {
    metrics.nodes.push_back(NodeMetrics{node, timeline.average_load(), timeline.task_count()});
    metrics.total_tasks += timeline.task_count();
  }
  return metrics;
}

}  // namespace gridresv
