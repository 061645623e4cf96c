#include "gridresv/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "gridresv/error.hpp"

namespace gridresv {

Percent performance_indicator(std::int64_t scheduled, std::int64_t total) {
  if (total == 0) throw Error(ErrorCode::EmptyBatch, "total is 0");
  if (total < 0 || scheduled < 0 || scheduled > total) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= scheduled <= total");
  }
  return Percent(scheduled) * 100 / total;
}

std::string render_percent(const Percent& value) {
  // tenths = floor(value * 10 + 1/2)
  const Percent shifted = value * 10 + Percent(1, 2);
  std::int64_t tenths = shifted.numerator() / shifted.denominator();
  if (shifted.numerator() < 0 && shifted.numerator() % shifted.denominator() != 0) --tenths;
  const char* sign = tenths < 0 ? "-" : "";
  const std::int64_t magnitude = tenths < 0 ? -tenths : tenths;
  return fmt::format("{}{}.{}", sign, magnitude / 10, magnitude % 10);
}

std::vector<LoadRow> agent_load_table(const std::map<AgentName, std::int64_t>& counts,
                                      std::size_t batch_total, const std::string& test_label) {
  std::vector<LoadRow> rows;
  for (const auto& [agent, count] : counts) {
    rows.push_back(LoadRow{test_label, agent, fmt::format("{} ({})", count, batch_total)});
  }
  return rows;
}

std::vector<std::string> timeline_rows(const DynamicTable& table) {
  std::vector<std::string> rows;
  for (const auto& [node, timeline] : table) {
    for (const Interval& iv : timeline.intervals()) {
      std::string ids;
      for (const TaskId& id : iv.task_ids) {
        if (!ids.empty()) ids += ';';
        ids += id;
      }
      const std::string end = iv.end == kInfinite ? std::string("INF") : std::to_string(iv.end);
      rows.push_back(fmt::format("{},{},{},{},{}", node, iv.start, end, iv.usage, ids));
    }
  }
  return rows;
}

std::string timeline_csv(const DynamicTable& table) {
  std::string out = "nodeId,start,end,usage,taskIds\n";
  for (const std::string& row : timeline_rows(table)) {
    out += row;
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t from = 0;
  while (true) {
    const std::size_t at = text.find(sep, from);
    parts.push_back(text.substr(from, at == std::string_view::npos ? std::string_view::npos : at - from));
    if (at == std::string_view::npos) return parts;
    from = at + 1;
  }
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidValue, fmt::format("{}: not an integer: '{}'", what, text));
  }
  return value;
}

}  // namespace

std::map<NodeId, std::vector<Interval>> parse_timeline_csv(std::string_view csv) {
  std::map<NodeId, std::vector<Interval>> out;
  bool header = true;
  for (std::string_view line : split(csv, '\n')) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line == "nodeId,start,end,usage,taskIds") continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 5 || cols[0].empty()) {
      throw Error(ErrorCode::InvalidValue, fmt::format("bad timeline row '{}'", line));
    }
    Interval iv;
    iv.start = parse_int(cols[1], "start");
    iv.end = cols[2] == "INF" ? kInfinite : parse_int(cols[2], "end");
    iv.usage = static_cast<LoadPercent>(parse_int(cols[3], "usage"));
    if (!cols[4].empty()) {
      for (std::string_view id : split(cols[4], ';')) iv.task_ids.emplace(id);
    }
    out[NodeId(cols[0])].push_back(std::move(iv));
  }
  return out;
}

std::string schedule_csv(const FinalSchedule& schedule) {
  std::string out = "taskId,agentName,nodeId,projectedLoad\n";
  for (const auto& [task, record] : schedule.winners) {
    out += fmt::format("{},{},{},{}\n", task, record.agent, record.offer.node_id, record.offer.projected_load);
  }
  return out;
}

std::string agent_metrics_csv(const AgentMetrics& metrics) {
  std::string out = "nodeId,averageLoad,committedTasks\n";
  for (const NodeMetrics& node : metrics.nodes) {
    out += fmt::format("{},{},{}\n", node.node_id, render_percent(node.average_load), node.committed_tasks);
  }
  out += fmt::format("TOTAL,,{}\n", metrics.total_tasks);
  return out;
}

void CommTimings::record(std::string batch_id, std::size_t bytes, double milliseconds) {
  entries_.push_back(CommTiming{std::move(batch_id), bytes, milliseconds});
}

std::optional<TimingSummary> CommTimings::summary() const {
  if (entries_.empty()) return std::nullopt;
  std::vector<double> ms;
  for (const CommTiming& t : entries_) ms.push_back(t.milliseconds);
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  const double median = n % 2 == 1 ? ms[n / 2] : (ms[n / 2 - 1] + ms[n / 2]) / 2.0;
  return TimingSummary{ms.front(), median, ms.back()};
}

std::string indicators_report(const RoundResult& result, std::size_t batch_total,
                              const std::string& test_label) {
  std::ostringstream out;
  const auto scheduled = static_cast<std::int64_t>(batch_total - result.unscheduled.size());
  out << "performance: " << render_percent(performance_indicator(scheduled, static_cast<std::int64_t>(batch_total)))
      << "%\n";
  out << "scheduled: " << scheduled << "\n";
  out << "total: " << batch_total << "\n";
  out << "rounds: " << result.rounds << "\n";
  out << "unscheduled:";
  for (const TaskId& id : result.unscheduled) out << ' ' << id;
  out << "\n\n";

  out << "[agent load]\n";
  out << "test\tagent\tload\n";
  for (const LoadRow& row : agent_load_table(result.committed, batch_total, test_label)) {
    out << row.test_label << '\t' << row.agent << '\t' << row.load << '\n';
  }
  out << '\n';

  out << "[communication time]\n";
  CommTimings timings;
  for (const CommTiming& t : result.timings) timings.record(t);
  for (const CommTiming& t : timings.entries()) {
    out << fmt::format("{}\tbytes={}\tms={:.3f}\n", t.batch_id, t.bytes, t.milliseconds);
  }
  if (auto summary = timings.summary()) {
    out << fmt::format("min_ms={:.3f}\tmedian_ms={:.3f}\tmax_ms={:.3f}\n", summary->min_ms,
                       summary->median_ms, summary->max_ms);
  }
  return out.str();
}

}  // namespace gridresv
