#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gridresv/channel.hpp"
#include "gridresv/types.hpp"

namespace gridresv {

struct OfferRecord {
  AgentName agent;
  Offer offer;

  auto operator<=>(const OfferRecord&) const = default;
};

using AgentCounts = std::map<AgentName, std::size_t>;

/// The broker's task -> winning offer map. `agent_counts[a]` always equals
/// the number of winners held by agent a.
struct FinalSchedule {
  std::map<TaskId, OfferRecord> winners;
  AgentCounts agent_counts;

  bool operator==(const FinalSchedule&) const = default;
};

enum class Verdict { Keep, Replace };

/// Lower projected load wins; on equal load the agent holding fewer
/// reservations wins; a full tie keeps the existing offer.
Verdict decide(const OfferRecord& existing, const OfferRecord& candidate, const AgentCounts& counts);

struct AgentReply {
  AgentName agent;
  std::vector<Offer> offers;
};

/// Folds replies (sorted by agent name; offers in reply order) into a
/// schedule. Throws Error(DuplicateAgentReply) or Error(OfferForUnknownTask).
FinalSchedule fold_offers(std::span<const Task> batch, std::vector<AgentReply> replies);

/// Accepted task ids per agent. Every name in `agents` gets an entry, empty
/// if it won nothing.
std::map<AgentName, std::set<TaskId>> partition_decision(const FinalSchedule& schedule,
                                                         std::span<const AgentName> agents);

struct RoundResult {
  FinalSchedule schedule;
  std::vector<TaskId> unscheduled;  // batch order
  std::map<AgentName, std::set<TaskId>> accepted;
  std::map<AgentName, std::int64_t> committed;  // from CommitAck
  std::vector<CommTiming> timings;
  int rounds = 0;
};

struct BrokerOptions {
  Millis timeout{5000};
  int max_retries = 1;
};

/// Stateless with respect to resources: everything it knows about a round
/// comes from the agents' replies.
class Broker {
 public:
  explicit Broker(BrokerOptions options = {});

  const BrokerOptions& options() const noexcept { return options_; }

  /// One request/offer/decide/commit exchange. Throws
  /// Error(NoAgentsConnected) when `links` is empty.
  RoundResult run_round(std::span<const Task> batch, std::span<const AgentLink> links,
                        const std::string& batch_id);

  /// run_round, then retries the unscheduled remainder up to max_retries
  /// times. Winners and counts accumulate across rounds.
  RoundResult run(std::span<const Task> batch, std::span<const AgentLink> links,
                  const std::string& batch_id);

 private:
  BrokerOptions options_;
};

}  // namespace gridresv
