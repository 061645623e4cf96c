// gridresv: broker, agent, in-process simulation and file utilities for
// advance reservation of grid resources.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "gridresv/agent.hpp"
#include "gridresv/broker.hpp"
#include "gridresv/error.hpp"
#include "gridresv/ingestion.hpp"
#include "gridresv/metrics.hpp"
#include "gridresv/runtime.hpp"
#include "gridresv/socket.hpp"

namespace fs = std::filesystem;
using namespace gridresv;

namespace {

// Exit codes are part of the command-line contract.
enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUnscheduled = 2,
  kNoAgents = 3,
  kConnectionRefused = 4,
  kBadResources = 5,
  kRejected = 6,
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
}

struct Common {
  bool quiet = false;
  SchedulerLimits limits;
  int timeout_ms = 5000;
  int max_retries = 1;
};

struct BrokerArgs {
  std::string host = "0.0.0.0";
  int port = 0;
  std::string tasks;
  bool once = false;
  int wait_agents = 1;
  int wait_ms = 10000;
  std::string out = ".";
};

struct AgentArgs {
  std::string broker;
  std::string resources;
  std::string name = "agent";
  std::string out;
};

struct SimArgs {
  int agents = 2;
  int nodes_per_agent = 2;
  std::string scenario = "uniform";
  int tasks = 20;
  std::uint64_t seed = 0;
  TimePoint horizon = 86400;
  TimePoint duration_min = 60;
  TimePoint duration_max = 3600;
  LoadPercent load_min = 10;
  LoadPercent load_max = 60;
  std::string task_file;
  std::vector<std::string> resources;
  std::string out = "sim-out";
};

struct GenArgs {
  std::string kind = "tasks";
  int count = 20;
  int first = 1;
  std::string out;
};

struct ValidateArgs {
  std::vector<std::string> files;
};

void add_limits(CLI::App* cmd, Common& common) {
  cmd->add_option("--max-load", common.limits.max_load, "Per-interval usage cap (percent)")
      ->envname("GRIDRESV_MAX_LOAD")
      ->check(CLI::Range(1, 100));
  cmd->add_option("--max-tasks", common.limits.max_tasks, "Per-interval task cap")
      ->envname("GRIDRESV_MAX_TASKS")
      ->check(CLI::PositiveNumber);
}

void add_broker_tuning(CLI::App* cmd, Common& common) {
  cmd->add_option("--timeout-ms", common.timeout_ms, "Reply timeout per round")
      ->envname("GRIDRESV_TIMEOUT_MS")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-retries", common.max_retries, "Reschedule attempts for leftover tasks")
      ->envname("GRIDRESV_MAX_RETRIES")
      ->check(CLI::NonNegativeNumber);
}

void add_scenario(CLI::App* cmd, SimArgs& sim) {
  cmd->add_option("--scenario", sim.scenario, "uniform | paired")
      ->check(CLI::IsMember({"uniform", "paired"}));
  cmd->add_option("--seed", sim.seed, "Generator seed")->envname("GRIDRESV_SEED");
  cmd->add_option("--horizon", sim.horizon, "Time horizon in seconds");
  cmd->add_option("--duration-min", sim.duration_min);
  cmd->add_option("--duration-max", sim.duration_max);
  cmd->add_option("--load-min", sim.load_min);
  cmd->add_option("--load-max", sim.load_max);
}

ScenarioSpec scenario_of(const SimArgs& sim, int count) {
  ScenarioSpec spec;
  spec.seed = sim.seed;
  spec.task_count = count;
  spec.time_horizon = sim.horizon;
  spec.duration_min = sim.duration_min;
  spec.duration_max = sim.duration_max;
  spec.load_min = sim.load_min;
  spec.load_max = sim.load_max;
  spec.profile = sim.scenario == "paired" ? OverlapProfile::PairedSymmetric : OverlapProfile::Uniform;
  return spec;
}

void print_summary(const RoundResult& result, std::size_t total) {
  const auto scheduled = static_cast<std::int64_t>(total - result.unscheduled.size());
  spdlog::info("performance {}% ({}/{}), rounds {}",
               render_percent(performance_indicator(scheduled, static_cast<std::int64_t>(total))), scheduled, total,
               result.rounds);
  for (const LoadRow& row : agent_load_table(result.committed, total, "1")) {
    spdlog::info("load {} {}", row.agent, row.load);
  }
}

int submit(Broker& broker, AgentRegistry& registry, const fs::path& task_file, const fs::path& out_dir,
           const std::string& batch_id) {
  const std::vector<Task> tasks = parse_task_file(read_file(task_file));
  const std::vector<AgentLink> links = registry.links();
  const RoundResult result = broker.run(tasks, links, batch_id);
  write_broker_reports(out_dir, result, tasks.size());
  print_summary(result, tasks.size());
  return result.unscheduled.empty() ? kOk : kUnscheduled;
}

int cmd_broker(const BrokerArgs& args, const Common& common) {
  std::unique_ptr<BrokerServer> server;
  try {
    server = std::make_unique<BrokerServer>(args.host, static_cast<std::uint16_t>(args.port));
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  spdlog::info("broker listening on {}:{}", args.host, server->port());
  Broker broker(BrokerOptions{Millis(common.timeout_ms), common.max_retries});

  if (args.once) {
    if (args.tasks.empty()) {
      spdlog::error("--once needs --tasks");
      return kFailure;
    }
    server->registry().wait_for(static_cast<std::size_t>(args.wait_agents), Millis(args.wait_ms));
    int code = kOk;
    try {
      code = submit(broker, server->registry(), args.tasks, args.out, "batch-1");
    } catch (const Error& e) {
      spdlog::error("{}", e.what());
      code = e.code() == ErrorCode::NoAgentsConnected ? kNoAgents : kFailure;
    }
    server->registry().shutdown_all();
    return code;
  }

  // Interactive: one task file path per line on stdin.
  int code = kOk;
  int submission = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    ++submission;
    const fs::path out = fs::path(args.out) / ("submission" + std::to_string(submission));
    try {
      const int rc = submit(broker, server->registry(), line, out, "batch-" + std::to_string(submission));
      if (rc != kOk) code = rc;
      spdlog::info("reports written to {}", out.string());
    } catch (const Error& e) {
      spdlog::error("submission {}: {}", line, e.what());
    }
  }
  server->registry().shutdown_all();
  return code;
}

int cmd_agent(const AgentArgs& args, const Common& common) {
  std::vector<NodeSpec> nodes;
  try {
    nodes = parse_resource_file(read_file(args.resources));
  } catch (const Error& e) {
    spdlog::error("resources {}: {}", args.resources, e.what());
    return kBadResources;
  }

  const auto colon = args.broker.rfind(':');
  if (colon == std::string::npos) {
    spdlog::error("--broker must be host:port");
    return kFailure;
  }
  std::unique_ptr<Channel> channel;
  try {
    channel = tcp_connect(args.broker.substr(0, colon),
                          static_cast<std::uint16_t>(std::stoi(args.broker.substr(colon + 1))));
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kConnectionRefused;
  }

  Agent agent(args.name, std::move(nodes));
  spdlog::info("agent {}: dynamic table initialized with {} timeline(s)", agent.name(), agent.table().size());
  AgentServiceOptions options;
  options.limits = common.limits;
  options.out_dir = args.out;
  switch (serve_agent(agent, *channel, options)) {
    case ServeOutcome::Finished: return kOk;
    case ServeOutcome::Rejected: return kRejected;
    case ServeOutcome::NoHandshake: return kConnectionRefused;
  }
  return kFailure;
}

int cmd_simulate(const SimArgs& args, const Common& common) {
  SimulationConfig config;
  config.limits = common.limits;
  config.broker = BrokerOptions{Millis(common.timeout_ms), common.max_retries};
  config.out_dir = args.out;
  config.tasks = args.task_file.empty() ? generate_scenario(scenario_of(args, args.tasks))
                                        : parse_task_file(read_file(args.task_file));
  if (args.resources.empty()) {
    config.agents = make_agent_setups(args.agents, args.nodes_per_agent);
  } else {
    for (std::size_t i = 0; i < args.resources.size(); ++i) {
      config.agents.push_back(
          AgentSetup{"agent" + std::to_string(i + 1), parse_resource_file(read_file(args.resources[i]))});
    }
  }
  const RoundResult result = simulate(config);
  print_summary(result, config.tasks.size());
  spdlog::info("reports written to {}", args.out);
  return kOk;
}

int cmd_gen(const GenArgs& args, const SimArgs& sim) {
  std::string text;
  if (args.kind == "nodes") {
    text = serialize_nodes(make_stations(args.first, args.count));
  } else {
    text = serialize_tasks(generate_scenario(scenario_of(sim, args.count)));
  }
  if (args.out.empty()) {
    std::cout << text;
  } else {
    write_file(args.out, text);
  }
  return kOk;
}

int validate_one(const fs::path& path, const Common& common) {
  const std::string text = read_file(path);
  if (path.extension() == ".csv") {
    int bad = 0;
    for (const auto& [node, intervals] : parse_timeline_csv(text)) {
      for (const Violation& v : validate_intervals(intervals, common.limits)) {
        std::cout << path.string() << ": node " << node << " interval " << v.interval_index << ": "
                  << to_string(v.rule) << (v.detail.empty() ? "" : " (" + v.detail + ")") << "\n";
        ++bad;
      }
    }
    return bad == 0 ? kOk : kFailure;
  }
  if (text.find("<nodes") != std::string::npos) {
    const auto nodes = parse_resource_file(text);
    std::cout << path.string() << ": " << nodes.size() << " node(s) ok\n";
  } else {
    const auto tasks = parse_task_file(text);
    std::cout << path.string() << ": " << tasks.size() << " task(s) ok\n";
  }
  return kOk;
}

int cmd_validate(const ValidateArgs& args, const Common& common) {
  int code = kOk;
  for (const std::string& file : args.files) {
    try {
      if (validate_one(file, common) != kOk) code = kFailure;
    } catch (const Error& e) {
      std::cout << file << ": " << e.what() << "\n";
      code = kFailure;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Advance reservation of grid resources: broker, agents and simulation"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--quiet,-q", common.quiet, "Only log warnings and errors");

  BrokerArgs broker_args;
  auto* broker = app.add_subcommand("broker", "Run the broker");
  broker->add_option("--host", broker_args.host, "Listen address");
  broker->add_option("--port", broker_args.port, "Listen port")->envname("GRIDRESV_PORT")->required();
  broker->add_option("--tasks", broker_args.tasks, "Task file for --once mode");
  broker->add_flag("--once", broker_args.once, "Schedule --tasks once and exit");
  broker->add_option("--wait-agents", broker_args.wait_agents, "Agents to wait for in --once mode");
  broker->add_option("--wait-ms", broker_args.wait_ms, "How long to wait for them");
  broker->add_option("--out", broker_args.out, "Report directory")->envname("GRIDRESV_OUT");
  add_broker_tuning(broker, common);

  AgentArgs agent_args;
  auto* agent = app.add_subcommand("agent", "Run an agent");
  agent->add_option("--broker", agent_args.broker, "Broker host:port")->envname("GRIDRESV_BROKER")->required();
  agent->add_option("--resources", agent_args.resources, "Resource file")->required();
  agent->add_option("--name", agent_args.name, "Agent name")->envname("GRIDRESV_AGENT_NAME");
  agent->add_option("--out", agent_args.out, "Directory for per-round snapshots");
  add_limits(agent, common);

  SimArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Broker and agents in one process");
  sim->add_option("--agents", sim_args.agents)->check(CLI::PositiveNumber);
  sim->add_option("--nodes-per-agent", sim_args.nodes_per_agent)->check(CLI::NonNegativeNumber);
  sim->add_option("--tasks", sim_args.tasks, "Number of generated tasks")->check(CLI::PositiveNumber);
  sim->add_option("--task-file", sim_args.task_file, "Use this task file instead of generating");
  sim->add_option("--resources", sim_args.resources, "Resource file per agent (repeatable)");
  sim->add_option("--out", sim_args.out, "Report directory")->envname("GRIDRESV_OUT");
  add_scenario(sim, sim_args);
  add_limits(sim, common);
  add_broker_tuning(sim, common);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a task or resource file");
  gen->add_option("--kind", gen_args.kind, "tasks | nodes")->check(CLI::IsMember({"tasks", "nodes"}));
  gen->add_option("--tasks,--count", gen_args.count, "Number of tasks or nodes")->check(CLI::PositiveNumber);
  gen->add_option("--first", gen_args.first, "First station index (nodes)");
  gen->add_option("--out", gen_args.out, "Output file (default: stdout)");
  add_scenario(gen, sim_args);

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Check task/resource files or timeline exports");
  validate->add_option("files", validate_args.files)->required();
  add_limits(validate, common);

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stdout_logger_mt("gridresv");
  logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(common.quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*broker) return cmd_broker(broker_args, common);
    if (*agent) return cmd_agent(agent_args, common);
    if (*sim) return cmd_simulate(sim_args, common);
    if (*gen) return cmd_gen(gen_args, sim_args);
    if (*validate) return cmd_validate(validate_args, common);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}
