#include "gridresv/runtime.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "gridresv/error.hpp"
#include "gridresv/ingestion.hpp"
#include "gridresv/metrics.hpp"

namespace gridresv {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gridresv-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

SimulationConfig paired_config() {
  ScenarioSpec spec;
  spec.seed = 7;
  spec.profile = OverlapProfile::PairedSymmetric;
  SimulationConfig config;
  config.tasks = generate_scenario(spec);
  config.agents = make_agent_setups(2, 2);
  return config;
}

SimulationConfig uniform_config(int agents, int tasks, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.seed = seed;
  spec.task_count = tasks;
  spec.time_horizon = 20000;
  spec.load_min = 10;
  spec.load_max = 70;
  SimulationConfig config;
  config.tasks = generate_scenario(spec);
  config.agents = make_agent_setups(agents, 2);
  return config;
}

TEST(Setups, ConsecutiveStations) {
  const auto setups = make_agent_setups(2, 2);
  ASSERT_EQ(setups.size(), 2u);
  EXPECT_EQ(setups[0].name, "agent1");
  EXPECT_EQ(setups[1].name, "agent2");
  EXPECT_EQ(setups[0].nodes[1].id, "station2");
  EXPECT_EQ(setups[1].nodes[0].id, "station3");
}

TEST(Simulate, PairedScenarioSplitsEvenly) {
  const RoundResult result = simulate(paired_config());
  EXPECT_TRUE(result.unscheduled.empty());
  EXPECT_EQ(result.committed, (std::map<AgentName, std::int64_t>{{"agent1", 10}, {"agent2", 10}}));
  EXPECT_EQ(render_percent(performance_indicator(20, 20)), "100.0");
  EXPECT_EQ(result.rounds, 1);
}

TEST(Simulate, ConservationAcrossAgents) {
  const SimulationConfig config = uniform_config(3, 50, 3);
  const RoundResult result = simulate(config);
  const std::int64_t committed = std::accumulate(result.committed.begin(), result.committed.end(), std::int64_t{0},
                                                 [](std::int64_t acc, const auto& kv) { return acc + kv.second; });
  EXPECT_EQ(committed + static_cast<std::int64_t>(result.unscheduled.size()), 50);
  EXPECT_EQ(result.schedule.winners.size() + result.unscheduled.size(), 50u);
  for (const auto& [agent, count] : result.committed) {
    EXPECT_EQ(static_cast<std::size_t>(count), result.schedule.agent_counts.at(agent)) << agent;
    EXPECT_EQ(result.accepted.at(agent).size(), static_cast<std::size_t>(count)) << agent;
  }
  for (const auto& [task, record] : result.schedule.winners) {
    EXPECT_TRUE(result.accepted.at(record.agent).contains(task)) << task;
  }
}

TEST(Simulate, RepeatedRunsAreByteIdentical) {
  const SimulationConfig config = uniform_config(3, 60, 11);
  const std::string first = schedule_csv(simulate(config).schedule);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(schedule_csv(simulate(config).schedule), first);
}

TEST(Simulate, LoopbackMatchesInMemory) {
  const SimulationConfig config = uniform_config(3, 60, 13);
  const RoundResult memory = simulate(config);
  const RoundResult tcp = run_loopback_deployment(config);
  EXPECT_EQ(schedule_csv(tcp.schedule), schedule_csv(memory.schedule));
  EXPECT_EQ(tcp.committed, memory.committed);
  EXPECT_EQ(tcp.unscheduled, memory.unscheduled);
}

TEST(Simulate, WritesReportsAndValidTimelines) {
  SimulationConfig config = uniform_config(2, 40, 17);
  config.out_dir = fresh_dir("sim");
  const RoundResult result = simulate(config);

  EXPECT_EQ(slurp(config.out_dir / "schedule.csv"), schedule_csv(result.schedule));
  EXPECT_EQ(slurp(config.out_dir / "indicators.txt").substr(0, 13), "performance: ");

  // every agent commits once per round
  const std::string last = std::to_string(result.rounds) + ".csv";
  std::size_t placed = 0;
  for (const AgentSetup& setup : config.agents) {
    const fs::path csv = config.out_dir / setup.name / ("timelines_round" + last);
    ASSERT_TRUE(fs::exists(csv)) << csv;
    const auto parsed = parse_timeline_csv(slurp(csv));
    EXPECT_EQ(parsed.size(), setup.nodes.size());
    std::set<TaskId> ids;
    for (const auto& [node, intervals] : parsed) {
      EXPECT_TRUE(validate_intervals(intervals, config.limits).empty()) << node;
      for (const Interval& iv : intervals) ids.insert(iv.task_ids.begin(), iv.task_ids.end());
    }
    EXPECT_EQ(ids, result.accepted.at(setup.name));
    placed += ids.size();
    EXPECT_TRUE(fs::exists(config.out_dir / setup.name / ("metrics_round" + last)));
  }
  EXPECT_EQ(placed, result.schedule.winners.size());
  fs::remove_all(config.out_dir);
}

TEST(Simulate, HeavyTaskStaysUnscheduled) {
  SimulationConfig config = uniform_config(2, 9, 19);
  config.tasks.push_back(Task{"heavy", 0, 100, 90});
  const RoundResult result = simulate(config);
  EXPECT_EQ(result.rounds, 2);
  EXPECT_NE(std::find(result.unscheduled.begin(), result.unscheduled.end(), "heavy"), result.unscheduled.end());
}

TEST(Registry, RefusesDuplicateNames) {
  AgentRegistry registry;
  Agent first("dup", make_stations(1, 1));
  Agent second("dup", make_stations(2, 1));
  auto link1 = make_memory_link();
  auto link2 = make_memory_link();
  std::shared_ptr<Channel> broker1 = std::move(link1.first);
  std::shared_ptr<Channel> broker2 = std::move(link2.first);
  Channel& agent1 = *link1.second;
  Channel& agent2 = *link2.second;

  ServeOutcome outcome1{};
  std::jthread t1([&] { outcome1 = serve_agent(first, agent1, AgentServiceOptions{}); });
  EXPECT_EQ(registry.admit(broker1, Millis(2000)), std::optional<AgentName>("dup"));

  ServeOutcome outcome2{};
  std::jthread t2([&] { outcome2 = serve_agent(second, agent2, AgentServiceOptions{}); });
  EXPECT_EQ(registry.admit(broker2, Millis(2000)), std::nullopt);
  t2.join();
  EXPECT_EQ(outcome2, ServeOutcome::Rejected);
  EXPECT_EQ(registry.size(), 1u);

  registry.shutdown_all();
  t1.join();
  EXPECT_EQ(outcome1, ServeOutcome::Finished);
}

TEST(Registry, SilentPeerIsNotAdmitted) {
  AgentRegistry registry;
  auto link = make_memory_link();
  EXPECT_EQ(registry.admit(std::move(link.first), Millis(50)), std::nullopt);
  EXPECT_EQ(registry.size(), 0u);
  EXPECT_FALSE(registry.wait_for(1, Millis(10)));
}

TEST(ServeAgent, StaleDecisionCommitsNothing) {
  Agent agent("a1", make_stations(1, 1));
  auto link = make_memory_link();
  Channel& broker = *link.first;
  Channel& agent_end = *link.second;
  std::jthread worker([&] { serve_agent(agent, agent_end, AgentServiceOptions{}); });

  ASSERT_EQ(broker.receive(Millis(2000)), Message(Hello{"a1"}));
  broker.send(HelloAck{true, std::nullopt});
  broker.send(TaskBatch{"b2", {Task{"t1", 0, 10, 10}}});
  const auto reply = broker.receive(Millis(2000));
  ASSERT_TRUE(reply && std::holds_alternative<OfferReply>(*reply));
  EXPECT_EQ(std::get<OfferReply>(*reply).offers.size(), 1u);

  broker.send(Decision{"b1", {"t1"}});
  EXPECT_EQ(broker.receive(Millis(2000)), Message(CommitAck{"b1", "a1", 0}));
  ASSERT_NE(agent.pending_batch(), nullptr);
  EXPECT_EQ(*agent.pending_batch(), "b2");

  broker.send(Decision{"b2", {"t1"}});
  EXPECT_EQ(broker.receive(Millis(2000)), Message(CommitAck{"b2", "a1", 1}));
  broker.send(Shutdown{});
  worker.join();
  EXPECT_EQ(agent.snapshot_metrics().total_tasks, 1u);
}

TEST(BrokerServer, AdmitsTcpAgents) {
  BrokerServer server("127.0.0.1", 0);
  Agent agent("remote", make_stations(1, 1));
  std::jthread worker([&] {
    auto channel = tcp_connect("127.0.0.1", server.port());
    serve_agent(agent, *channel, AgentServiceOptions{});
  });
  ASSERT_TRUE(server.registry().wait_for(1, Millis(5000)));
  EXPECT_EQ(server.registry().links().front().name, "remote");
  server.registry().shutdown_all();
}

}  // namespace
}  // namespace gridresv
