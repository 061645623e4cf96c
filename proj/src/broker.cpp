#include "gridresv/broker.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "gridresv/error.hpp"

namespace gridresv {

namespace {

std::size_t count_of(const AgentCounts& counts, const AgentName& agent) {
  auto it = counts.find(agent);
  return it == counts.end() ? 0 : it->second;
}

}  // namespace

Verdict decide(const OfferRecord& existing, const OfferRecord& candidate, const AgentCounts& counts) {
  if (existing.offer.task_id != candidate.offer.task_id) {
    throw Error(ErrorCode::TaskIdMismatch, existing.offer.task_id + " vs " + candidate.offer.task_id);
  }
  if (candidate.offer.projected_load < existing.offer.projected_load) return Verdict::Replace;
  if (candidate.offer.projected_load == existing.offer.projected_load &&
      count_of(counts, candidate.agent) < count_of(counts, existing.agent)) {
    return Verdict::Replace;
  }
  return Verdict::Keep;
}

FinalSchedule fold_offers(std::span<const Task> batch, std::vector<AgentReply> replies) {
  std::set<TaskId> known;
  for (const Task& task : batch) known.insert(task.id);

  std::sort(replies.begin(), replies.end(),
            [](const AgentReply& a, const AgentReply& b) { return a.agent < b.agent; });
  for (std::size_t i = 1; i < replies.size(); ++i) {
    if (replies[i].agent == replies[i - 1].agent) {
      throw Error(ErrorCode::DuplicateAgentReply, replies[i].agent);
    }
  }

  FinalSchedule schedule;
  for (const AgentReply& reply : replies) {
    schedule.agent_counts.try_emplace(reply.agent, 0);
    for (const Offer& offer : reply.offers) {
      if (!known.contains(offer.task_id)) throw Error(ErrorCode::OfferForUnknownTask, offer.task_id);
      OfferRecord candidate{reply.agent, offer};
      auto [it, inserted] = schedule.winners.try_emplace(offer.task_id, candidate);
      if (inserted) {
        ++schedule.agent_counts[reply.agent];
        continue;
      }
      if (decide(it->second, candidate, schedule.agent_counts) == Verdict::Replace) {
        --schedule.agent_counts[it->second.agent];
        ++schedule.agent_counts[reply.agent];
        it->second = std::move(candidate);
      }
    }
  }
  return schedule;
}

std::map<AgentName, std::set<TaskId>> partition_decision(const FinalSchedule& schedule,
                                                         std::span<const AgentName> agents) {
  std::map<AgentName, std::set<TaskId>> out;
  for (const AgentName& agent : agents) out[agent];
  for (const auto& [task, record] : schedule.winners) out[record.agent].insert(task);
  return out;
}

Broker::Broker(BrokerOptions options) : options_(options) {
  if (options_.max_retries < 0) throw Error(ErrorCode::InvalidArgument, "maxRetries must be >= 0");
}

RoundResult Broker::run_round(std::span<const Task> batch, std::span<const AgentLink> links,
                              const std::string& batch_id) {
  if (links.empty()) throw Error(ErrorCode::NoAgentsConnected, batch_id);

  const TaskBatch request{batch_id, std::vector<Task>(batch.begin(), batch.end())};
  CollectResult offers = timed_broadcast_collect(
      links, request, options_.timeout, [&](const AgentName& agent, const Message& msg) {
        const auto* reply = std::get_if<OfferReply>(&msg);
        return reply != nullptr && reply->batch_id == batch_id && reply->agent_name == agent;
      });

  std::set<TaskId> known;
  for (const Task& task : batch) known.insert(task.id);
  std::vector<AgentReply> replies;
  for (auto& [agent, msg] : offers.replies) {
    if (!msg) continue;
    AgentReply reply{agent, {}};
    for (Offer& offer : std::get<OfferReply>(*msg).offers) {
      if (known.contains(offer.task_id)) {
        reply.offers.push_back(std::move(offer));
      } else {
        spdlog::warn("agent {} offered unknown task {}", agent, offer.task_id);
      }
    }
    replies.push_back(std::move(reply));
  }

  RoundResult result;
  result.rounds = 1;
  result.timings.push_back(offers.timing);
  result.schedule = fold_offers(batch, std::move(replies));
  for (const Task& task : batch) {
    if (!result.schedule.winners.contains(task.id)) result.unscheduled.push_back(task.id);
  }

  std::vector<AgentName> names;
  for (const AgentLink& link : links) names.push_back(link.name);
  result.accepted = partition_decision(result.schedule, names);
  for (const AgentLink& link : links) {
    const auto& ids = result.accepted.at(link.name);
    try {
      link.channel->send(Decision{batch_id, std::vector<TaskId>(ids.begin(), ids.end())});
    } catch (const Error& e) {
      spdlog::warn("agent {}: decision not delivered: {}", link.name, e.what());
    }
  }

  CollectResult acks = collect_replies(links, options_.timeout, [&](const AgentName& agent, const Message& msg) {
    const auto* ack = std::get_if<CommitAck>(&msg);
    return ack != nullptr && ack->batch_id == batch_id && ack->agent_name == agent;
  });
  for (const auto& [agent, msg] : acks.replies) {
    result.committed[agent] = msg ? std::get<CommitAck>(*msg).committed_count : 0;
  }
  return result;
}

RoundResult Broker::run(std::span<const Task> batch, std::span<const AgentLink> links,
                        const std::string& batch_id) {
  RoundResult merged = run_round(batch, links, batch_id);
  for (int retry = 1; retry <= options_.max_retries && !merged.unscheduled.empty(); ++retry) {
    std::vector<Task> remaining;
    for (const Task& task : batch) {
      if (std::find(merged.unscheduled.begin(), merged.unscheduled.end(), task.id) !=
          merged.unscheduled.end()) {
        remaining.push_back(task);
      }
    }
    spdlog::info("rescheduling {} task(s), attempt {}", remaining.size(), retry);
    RoundResult next = run_round(remaining, links, batch_id + ".retry" + std::to_string(retry));

    for (auto& [task, record] : next.schedule.winners) merged.schedule.winners.emplace(task, record);
    for (const auto& [agent, count] : next.schedule.agent_counts) merged.schedule.agent_counts[agent] += count;
    for (auto& [agent, ids] : next.accepted) merged.accepted[agent].insert(ids.begin(), ids.end());
    for (const auto& [agent, count] : next.committed) merged.committed[agent] += count;
    merged.timings.insert(merged.timings.end(), next.timings.begin(), next.timings.end());
    merged.unscheduled = std::move(next.unscheduled);
    merged.rounds += next.rounds;
  }
  return merged;
}

}  // namespace gridresv
