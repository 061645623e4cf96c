#include "gridresv/runtime.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gridresv/error.hpp"
#include "gridresv/ingestion.hpp"
#include "gridresv/metrics.hpp"

namespace gridresv {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
}

void on_commit(const Agent& agent, int round, const AgentServiceOptions& options) {
  const AgentMetrics metrics = agent.snapshot_metrics();
  for (const NodeMetrics& node : metrics.nodes) {
    spdlog::info("metrics agent={} round={} node={} averageLoad={} tasks={}", agent.name(), round,
                 node.node_id, render_percent(node.average_load), node.committed_tasks);
  }
  spdlog::info("metrics agent={} round={} totalTasks={}", agent.name(), round, metrics.total_tasks);
  if (options.out_dir.empty()) return;
  std::filesystem::create_directories(options.out_dir);
  write_file(options.out_dir / fmt::format("timelines_round{}.csv", round), timeline_csv(agent.table()));
  write_file(options.out_dir / fmt::format("metrics_round{}.csv", round), agent_metrics_csv(metrics));
}

}  // namespace

ServeOutcome serve_agent(Agent& agent, Channel& channel, const AgentServiceOptions& options) {
  channel.send(Hello{agent.name()});
  std::optional<Message> ack;
  try {
    ack = channel.receive(options.handshake_timeout);
  } catch (const Error& e) {
    spdlog::error("agent {}: handshake failed: {}", agent.name(), e.what());
    return ServeOutcome::NoHandshake;
  }
  const auto* hello_ack = ack ? std::get_if<HelloAck>(&*ack) : nullptr;
  if (hello_ack == nullptr) return ServeOutcome::NoHandshake;
  if (!hello_ack->accepted) {
    spdlog::error("agent {}: rejected by broker: {}", agent.name(), hello_ack->reason.value_or(""));
    return ServeOutcome::Rejected;
  }
  spdlog::info("agent {}: registered with {} node(s)", agent.name(), agent.table().size());

  int round = 0;
  while (true) {
    std::optional<Message> msg;
    try {
      msg = channel.receive(kNoTimeout);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Transport) {
        spdlog::info("agent {}: broker went away", agent.name());
        return ServeOutcome::Finished;
      }
      spdlog::warn("agent {}: dropping frame: {}", agent.name(), e.what());
      continue;
    }
    if (!msg) continue;

    if (const auto* batch = std::get_if<TaskBatch>(&*msg)) {
      if (agent.has_pending()) {
        spdlog::warn("agent {}: abandoning undecided batch {}", agent.name(), *agent.pending_batch());
        agent.abandon();
      }
      OfferReply reply{batch->batch_id, agent.name(), {}};
      try {
        reply.offers = agent.propose(batch->batch_id, batch->tasks, options.limits);
      } catch (const Error& e) {
        spdlog::warn("agent {}: batch {} refused: {}", agent.name(), batch->batch_id, e.what());
      }
      channel.send(reply);
    } else if (const auto* decision = std::get_if<Decision>(&*msg)) {
      std::int64_t committed = 0;
      try {
        const std::set<TaskId> accepted(decision->accepted_task_ids.begin(), decision->accepted_task_ids.end());
        committed = static_cast<std::int64_t>(agent.commit(decision->batch_id, accepted));
        on_commit(agent, ++round, options);
      } catch (const Error& e) {
        spdlog::warn("agent {}: decision {} not applied: {}", agent.name(), decision->batch_id, e.what());
      }
      channel.send(CommitAck{decision->batch_id, agent.name(), committed});
    } else if (std::holds_alternative<Shutdown>(*msg)) {
      spdlog::info("agent {}: shutdown", agent.name());
      return ServeOutcome::Finished;
    } else {
      spdlog::debug("agent {}: ignoring {}", agent.name(), type_name(*msg));
    }
  }
}

std::optional<AgentName> AgentRegistry::admit(std::shared_ptr<Channel> channel, Millis timeout) {
  std::optional<Message> msg;
  try {
    msg = channel->receive(timeout);
  } catch (const Error& e) {
    spdlog::warn("registration failed: {}", e.what());
    return std::nullopt;
  }
  const auto* hello = msg ? std::get_if<Hello>(&*msg) : nullptr;
  if (hello == nullptr) {
    spdlog::warn("registration failed: expected hello");
    channel->close();
    return std::nullopt;
  }

  std::lock_guard lock(mutex_);
  auto existing = agents_.find(hello->agent_name);
  if (existing != agents_.end() && !existing->second->is_closed()) {
    try {
      channel->send(HelloAck{false, "duplicate agent name"});
    } catch (const Error&) {
    }
    channel->close();
    spdlog::warn("refused duplicate agent {}", hello->agent_name);
    return std::nullopt;
  }
  try {
    channel->send(HelloAck{true, std::nullopt});
  } catch (const Error& e) {
    spdlog::warn("registration of {} failed: {}", hello->agent_name, e.what());
    return std::nullopt;
  }
  agents_[hello->agent_name] = std::move(channel);
  changed_.notify_all();
  spdlog::info("agent {} connected", hello->agent_name);
  return hello->agent_name;
}

std::vector<AgentLink> AgentRegistry::links() const {
  std::lock_guard lock(mutex_);
  std::vector<AgentLink> out;
  for (const auto& [name, channel] : agents_) {
    if (!channel->is_closed()) out.push_back(AgentLink{name, channel});
  }
  return out;
}

std::size_t AgentRegistry::size() const {
  std::lock_guard lock(mutex_);
  return agents_.size();
}

bool AgentRegistry::wait_for(std::size_t count, Millis timeout) const {
  std::unique_lock lock(mutex_);
  return changed_.wait_for(lock, timeout, [&] { return agents_.size() >= count; });
}

void AgentRegistry::shutdown_all() {
  std::lock_guard lock(mutex_);
  for (auto& [name, channel] : agents_) {
    try {
      channel->send(Shutdown{});
    } catch (const Error&) {
    }
    channel->close();
  }
}

BrokerServer::BrokerServer(const std::string& host, std::uint16_t port) : listener_(host, port) {
  acceptor_ = std::jthread([this](std::stop_token stop) {
    while (!stop.stop_requested()) {
      std::unique_ptr<Channel> conn;
      try {
        conn = listener_.accept(Millis(100));
      } catch (const Error& e) {
        spdlog::warn("accept failed: {}", e.what());
        continue;
      }
      if (conn) registry_.admit(std::shared_ptr<Channel>(std::move(conn)), Millis(5000));
    }
  });
}

BrokerServer::~BrokerServer() {
  acceptor_.request_stop();
  if (acceptor_.joinable()) acceptor_.join();
}

void write_broker_reports(const std::filesystem::path& dir, const RoundResult& result,
                          std::size_t batch_total) {
  std::filesystem::create_directories(dir);
  write_file(dir / "schedule.csv", schedule_csv(result.schedule));
  write_file(dir / "indicators.txt", indicators_report(result, batch_total));
}

std::vector<AgentSetup> make_agent_setups(int agents, int nodes_per_agent) {
  if (agents < 1 || nodes_per_agent < 0) throw Error(ErrorCode::InvalidArgument, "need agents >= 1, nodes >= 0");
  std::vector<AgentSetup> out;
  for (int a = 0; a < agents; ++a) {
    out.push_back(AgentSetup{"agent" + std::to_string(a + 1),
                             make_stations(a * nodes_per_agent + 1, nodes_per_agent)});
  }
  return out;
}

namespace {

// Agents run on their own threads; `connect` yields the agent-side channel
// for agent i, `started` runs once every agent thread is up.
template <class Connect, class Started>
RoundResult run_deployment(const SimulationConfig& config, AgentRegistry& registry, Connect connect,
                           Started started) {
  std::vector<Agent> agents;
  for (const AgentSetup& setup : config.agents) agents.emplace_back(setup.name, setup.nodes);

  std::vector<std::jthread> threads;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentServiceOptions options;
    options.limits = config.limits;
    if (!config.out_dir.empty()) options.out_dir = config.out_dir / agents[i].name();
    std::shared_ptr<Channel> channel = connect(i);
    threads.emplace_back([&agent = agents[i], channel, options] { serve_agent(agent, *channel, options); });
  }
  started();
  if (!registry.wait_for(agents.size(), Millis(10000))) {
    registry.shutdown_all();
    throw Error(ErrorCode::NoAgentsConnected, "agents did not register");
  }

  Broker broker(config.broker);
  RoundResult result;
  try {
    const std::vector<AgentLink> links = registry.links();
    result = broker.run(config.tasks, links, config.batch_id);
  } catch (...) {
    registry.shutdown_all();
    throw;
  }
  registry.shutdown_all();
  threads.clear();
  if (!config.out_dir.empty()) write_broker_reports(config.out_dir, result, config.tasks.size());
  return result;
}

}  // namespace

RoundResult simulate(const SimulationConfig& config) {
  AgentRegistry registry;
  std::vector<std::shared_ptr<Channel>> pending;
  return run_deployment(
      config, registry,
      [&](std::size_t) {
        auto [broker_end, agent_end] = make_memory_link();
        pending.emplace_back(std::move(broker_end));
        return std::shared_ptr<Channel>(std::move(agent_end));
      },
      [&] {
        for (auto& channel : pending) registry.admit(channel, Millis(10000));
      });
}

RoundResult run_loopback_deployment(const SimulationConfig& config) {
  BrokerServer server("127.0.0.1", 0);
  return run_deployment(
      config, server.registry(),
      [&](std::size_t) { return std::shared_ptr<Channel>(tcp_connect("127.0.0.1", server.port())); }, [] {});
}

}  // namespace gridresv
