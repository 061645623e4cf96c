#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gridresv/agent.hpp"
#include "gridresv/broker.hpp"
#include "gridresv/channel.hpp"
#include "gridresv/socket.hpp"

namespace gridresv {

struct AgentServiceOptions {
  SchedulerLimits limits;
  std::filesystem::path out_dir;  // empty: write nothing
  Millis handshake_timeout{10000};
};

enum class ServeOutcome { Finished, Rejected, NoHandshake };

/// Registers with Hello, then answers task batches and decisions until
/// Shutdown or until the broker goes away. Each commit writes
/// timelines_round<k>.csv and metrics_round<k>.csv when out_dir is set.
ServeOutcome serve_agent(Agent& agent, Channel& channel, const AgentServiceOptions& options);

/// Connected agents by name. Safe to use from the accept thread and the
/// broker loop at once.
class AgentRegistry {
 public:
  /// Runs the Hello/HelloAck handshake; duplicate names are refused.
  std::optional<AgentName> admit(std::shared_ptr<Channel> channel, Millis timeout);

  /// Live links, ordered by name.
  std::vector<AgentLink> links() const;
  std::size_t size() const;
  bool wait_for(std::size_t count, Millis timeout) const;

  /// Sends Shutdown to every agent and closes the links.
  void shutdown_all();

 private:
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<AgentName, std::shared_ptr<Channel>> agents_;
};

/// TCP front of the broker: a background thread accepts and admits agents.
class BrokerServer {
 public:
  BrokerServer(const std::string& host, std::uint16_t port);
  ~BrokerServer();
  BrokerServer(const BrokerServer&) = delete;
  BrokerServer& operator=(const BrokerServer&) = delete;

  std::uint16_t port() const noexcept { return listener_.port(); }
  AgentRegistry& registry() noexcept { return registry_; }

 private:
  TcpListener listener_;
  AgentRegistry registry_;
  std::jthread acceptor_;
};

/// schedule.csv and indicators.txt.
void write_broker_reports(const std::filesystem::path& dir, const RoundResult& result,
                          std::size_t batch_total);

struct AgentSetup {
  AgentName name;
  std::vector<NodeSpec> nodes;
};

/// agent1..agentN with consecutive stations, `nodes_per_agent` each.
std::vector<AgentSetup> make_agent_setups(int agents, int nodes_per_agent);

struct SimulationConfig {
  std::vector<Task> tasks;
  std::vector<AgentSetup> agents;
  SchedulerLimits limits;
  BrokerOptions broker;
  std::string batch_id = "batch-1";
  std::filesystem::path out_dir;  // empty: write nothing
};

/// One broker and the configured agents over in-memory links, each agent
/// on its own thread.
RoundResult simulate(const SimulationConfig& config);

/// Same deployment over TCP on 127.0.0.1.
RoundResult run_loopback_deployment(const SimulationConfig& config);

}  // namespace gridresv
