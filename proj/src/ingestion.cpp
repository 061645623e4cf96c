#include "gridresv/ingestion.hpp"

#include <charconv>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "gridresv/error.hpp"

namespace gridresv {

namespace pt = boost::property_tree;

namespace {

pt::ptree read_document(std::string_view xml, const char* root_name) {
  pt::ptree doc;
  std::istringstream in{std::string(xml)};
  try {
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::XmlMalformed, e.what());
  }
  auto root = doc.get_child_optional(root_name);
  if (!root || doc.size() != 1) {
    throw Error(ErrorCode::XmlMalformed, std::string("expected a single <") + root_name + "> root");
  }
  return *root;
}

const std::string& tag_text(const pt::ptree& element, const char* tag) {
  auto child = element.get_child_optional(tag);
  if (!child) throw Error(ErrorCode::MissingTag, tag);
  return child->data();
}

std::int64_t tag_int(const pt::ptree& element, const char* tag, std::int64_t lo, std::int64_t hi) {
  const std::string& text = tag_text(element, tag);
  std::int64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw Error(ErrorCode::InvalidValue, std::string(tag) + ": not an integer: '" + text + "'");
  }
  if (value < lo || value > hi) {
    throw Error(ErrorCode::InvalidValue, std::string(tag) + ": out of range: " + text);
  }
  return value;
}

double tag_number(const pt::ptree& element, const char* tag) {
  const std::string& text = tag_text(element, tag);
  double value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty() || !(value >= 0.0)) {
    throw Error(ErrorCode::InvalidValue, std::string(tag) + ": not a non-negative number: '" + text + "'");
  }
  return value;
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

constexpr std::int64_t kMaxTime = kInfinite;

}  // namespace

std::vector<Task> parse_task_file(std::string_view xml) {
  const pt::ptree root = read_document(xml, "tasks");
  std::vector<Task> tasks;
  std::set<TaskId> seen;
  for (const auto& [name, element] : root) {
    if (name != "task") continue;
    Task task;
    task.id = tag_text(element, "taskId");
    if (task.id.empty()) throw Error(ErrorCode::InvalidValue, "taskId: empty");
    task.start = tag_int(element, "startTime", 0, kMaxTime);
    task.end = tag_int(element, "endTime", 0, kMaxTime);
    if (task.end <= task.start) {
      throw Error(ErrorCode::InvalidValue, "endTime: not after startTime (" + task.id + ")");
    }
    task.load = static_cast<LoadPercent>(tag_int(element, "load", 1, 100));
    if (!seen.insert(task.id).second) throw Error(ErrorCode::DuplicateTaskId, task.id);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<NodeSpec> parse_resource_file(std::string_view xml) {
  const pt::ptree root = read_document(xml, "nodes");
  std::vector<NodeSpec> nodes;
  std::set<NodeId> seen;
  for (const auto& [name, element] : root) {
    if (name != "node") continue;
    NodeSpec node;
    node.id = tag_text(element, "Id");
    if (node.id.empty()) throw Error(ErrorCode::InvalidValue, "Id: empty");
    node.node_name = tag_text(element, "nodeName");
    node.cluster_name = tag_text(element, "clusterName");
    node.farm_name = tag_text(element, "farmName");
    node.cpu_power_mhz = tag_number(element, "CPUPower");
    node.memory_mb = tag_number(element, "Memory");
    node.cpu_idle_percent = static_cast<LoadPercent>(tag_int(element, "CPU_idle", 0, 100));
    if (!seen.insert(node.id).second) throw Error(ErrorCode::DuplicateNodeId, node.id);
    nodes.push_back(std::move(node));
  }
  return nodes;
}

std::string serialize_tasks(std::span<const Task> tasks) {
  std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<tasks>\n";
  for (const Task& t : tasks) {
    out += "  <task>\n";
    out += "    <taskId>" + escape(t.id) + "</taskId>\n";
    out += "    <startTime>" + std::to_string(t.start) + "</startTime>\n";
    out += "    <endTime>" + std::to_string(t.end) + "</endTime>\n";
    out += "    <load>" + std::to_string(t.load) + "</load>\n";
    out += "  </task>\n";
  }
  out += "</tasks>\n";
  return out;
}

std::string serialize_nodes(std::span<const NodeSpec> nodes) {
  std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<nodes>\n";
  for (const NodeSpec& n : nodes) {
    out += "  <node>\n";
    out += "    <Id>" + escape(n.id) + "</Id>\n";
    out += "    <nodeName>" + escape(n.node_name) + "</nodeName>\n";
    out += "    <clusterName>" + escape(n.cluster_name) + "</clusterName>\n";
    out += "    <farmName>" + escape(n.farm_name) + "</farmName>\n";
    out += "    <CPUPower>" + format_number(n.cpu_power_mhz) + "</CPUPower>\n";
    out += "    <Memory>" + format_number(n.memory_mb) + "</Memory>\n";
    out += "    <CPU_idle>" + std::to_string(n.cpu_idle_percent) + "</CPU_idle>\n";
    out += "  </node>\n";
  }
  out += "</nodes>\n";
  return out;
}

void check_scenario(const ScenarioSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (spec.task_count < 1) fail("taskCount must be positive");
  if (spec.time_horizon < 1) fail("timeHorizon must be positive");
  if (spec.duration_min < 1 || spec.duration_min > spec.duration_max) fail("empty duration range");
  if (spec.duration_min > spec.time_horizon) fail("duration range exceeds the horizon");
  if (spec.load_min < 1 || spec.load_max > 100 || spec.load_min > spec.load_max) fail("empty load range");
  if (spec.profile == OverlapProfile::PairedSymmetric) {
    if (spec.task_count % 2 != 0) fail("pairedSymmetric needs an even taskCount");
    if (spec.time_horizon / (spec.task_count / 2) < spec.duration_min) fail("horizon too short for the pairs");
  }
}

namespace {

// Uniform in [lo, hi]. Rejection sampling on the raw engine output keeps
// the sequence identical on every standard library.
std::int64_t draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(rng());
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % span);
}

std::string task_name(int index, int count) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count).size());
  std::string digits = std::to_string(index);
  return "t" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

std::vector<Task> generate_scenario(const ScenarioSpec& spec) {
  check_scenario(spec);
  std::mt19937_64 rng(spec.seed);
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(spec.task_count));

  if (spec.profile == OverlapProfile::Uniform) {
    const TimePoint longest = std::min(spec.duration_max, spec.time_horizon);
    for (int i = 1; i <= spec.task_count; ++i) {
      const TimePoint duration = draw(rng, spec.duration_min, longest);
      const TimePoint start = draw(rng, 0, spec.time_horizon - duration);
      const auto load = static_cast<LoadPercent>(draw(rng, spec.load_min, spec.load_max));
      tasks.push_back(Task{task_name(i, spec.task_count), start, start + duration, load});
    }
    return tasks;
  }

  const int pairs = spec.task_count / 2;
  const TimePoint slot = spec.time_horizon / pairs;
  const TimePoint longest = std::min(spec.duration_max, slot);
  for (int k = 0; k < pairs; ++k) {
    const TimePoint duration = draw(rng, spec.duration_min, longest);
    const TimePoint start = k * slot + draw(rng, 0, slot - duration);
    const auto load = static_cast<LoadPercent>(draw(rng, spec.load_min, spec.load_max));
    for (int twin = 1; twin <= 2; ++twin) {
      tasks.push_back(Task{task_name(2 * k + twin, spec.task_count), start, start + duration, load});
    }
  }
  return tasks;
}

std::vector<NodeSpec> make_stations(int first, int count, const std::string& cluster,
                                    const std::string& farm) {
  std::vector<NodeSpec> nodes;
  for (int i = first; i < first + count; ++i) {
    const std::string name = "station" + std::to_string(i);
    nodes.push_back(NodeSpec{name, name, cluster, farm, 2400.0, 4096.0, 100});
  }
  return nodes;
}

}  // namespace gridresv
