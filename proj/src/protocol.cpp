#include "gridresv/protocol.hpp"

#include <json.hpp>

#include "gridresv/error.hpp"

namespace gridresv {

using Json = nlohmann::ordered_json;

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

Json task_to_json(const Task& task) {
  Json j = Json::object();
  j["endTime"] = task.end;
  j["load"] = task.load;
  j["startTime"] = task.start;
  j["taskId"] = task.id;
  return j;
}

Json offer_to_json(const Offer& offer) {
  Json j = Json::object();
  j["nodeId"] = offer.node_id;
  j["projectedLoad"] = offer.projected_load;
  j["taskId"] = offer.task_id;
  return j;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedFrame, what); }

const Json& field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw Error(ErrorCode::MissingField, name);
  return *it;
}

std::string get_string(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_string()) malformed(std::string(name) + " is not a string");
  return v.get<std::string>();
}

std::string get_id(const Json& obj, const char* name) {
  std::string value = get_string(obj, name);
  if (value.empty()) malformed(std::string(name) + " is empty");
  return value;
}

std::int64_t get_int(const Json& obj, const char* name, std::int64_t lo, std::int64_t hi) {
  const Json& v = field(obj, name);
  std::int64_t value = 0;
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(hi)) malformed(std::string(name) + " out of range");
    value = static_cast<std::int64_t>(u);
  } else if (v.is_number_integer()) {
    value = v.get<std::int64_t>();
  } else {
    malformed(std::string(name) + " is not an integer");
  }
  if (value < lo || value > hi) malformed(std::string(name) + " out of range");
  return value;
}

const Json& get_array(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_array()) malformed(std::string(name) + " is not an array");
  return v;
}

constexpr std::int64_t kMaxInt = std::numeric_limits<std::int64_t>::max();

Task task_from_json(const Json& j) {
  if (!j.is_object()) malformed("task is not an object");
  Task task;
  task.end = get_int(j, "endTime", 0, kMaxInt);
  task.load = static_cast<LoadPercent>(get_int(j, "load", 0, 100));
  task.start = get_int(j, "startTime", 0, kMaxInt);
  task.id = get_string(j, "taskId");
  try {
    check_task(task);
  } catch (const Error& e) {
    malformed(e.detail());
  }
  return task;
}

Offer offer_from_json(const Json& j) {
  if (!j.is_object()) malformed("offer is not an object");
  Offer offer;
  offer.node_id = get_id(j, "nodeId");
  offer.projected_load = static_cast<LoadPercent>(get_int(j, "projectedLoad", 0, 100));
  offer.task_id = get_id(j, "taskId");
  return offer;
}

}  // namespace

std::string_view type_name(const Message& msg) {
  return std::visit(Overloaded{
                        [](const Hello&) { return "hello"; },
                        [](const HelloAck&) { return "hello_ack"; },
                        [](const TaskBatch&) { return "task_batch"; },
                        [](const OfferReply&) { return "offer_reply"; },
                        [](const Decision&) { return "decision"; },
                        [](const CommitAck&) { return "commit_ack"; },
                        [](const Shutdown&) { return "shutdown"; },
                    },
                    msg);
}

std::string encode(const Message& msg) {
  Json j = Json::object();
  j["type"] = type_name(msg);
  std::visit(Overloaded{
                 [&](const Hello& m) { j["agentName"] = m.agent_name; },
                 [&](const HelloAck& m) {
                   j["accepted"] = m.accepted;
                   if (m.reason) j["reason"] = *m.reason;
                 },
                 [&](const TaskBatch& m) {
                   j["batchId"] = m.batch_id;
                   Json tasks = Json::array();
                   for (const Task& t : m.tasks) tasks.push_back(task_to_json(t));
                   j["tasks"] = std::move(tasks);
                 },
                 [&](const OfferReply& m) {
                   j["agentName"] = m.agent_name;
                   j["batchId"] = m.batch_id;
                   Json offers = Json::array();
                   for (const Offer& o : m.offers) offers.push_back(offer_to_json(o));
                   j["offers"] = std::move(offers);
                 },
                 [&](const Decision& m) {
                   j["acceptedTaskIds"] = m.accepted_task_ids;
                   j["batchId"] = m.batch_id;
                 },
                 [&](const CommitAck& m) {
                   j["agentName"] = m.agent_name;
                   j["batchId"] = m.batch_id;
                   j["committedCount"] = m.committed_count;
                 },
                 [](const Shutdown&) {},
             },
             msg);
  std::string line;
  try {
    line = j.dump();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }
  line.push_back('\n');
  return line;
}

Message decode(std::string_view line) {
  if (line.empty() || line.back() != '\n') malformed("frame not LF-terminated");
  line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) malformed("interior LF");

  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception& e) {
    malformed(e.what());
  }
  if (!j.is_object()) malformed("frame is not an object");

  const std::string type = get_string(j, "type");
  if (type == "hello") return Hello{get_id(j, "agentName")};
  if (type == "hello_ack") {
    const Json& accepted = field(j, "accepted");
    if (!accepted.is_boolean()) malformed("accepted is not a boolean");
    HelloAck ack{accepted.get<bool>(), std::nullopt};
    if (j.contains("reason")) ack.reason = get_string(j, "reason");
    return ack;
  }
  if (type == "task_batch") {
    TaskBatch batch{get_id(j, "batchId"), {}};
    const Json& tasks = get_array(j, "tasks");
    batch.tasks.reserve(tasks.size());
    for (const Json& t : tasks) batch.tasks.push_back(task_from_json(t));
    return batch;
  }
  if (type == "offer_reply") {
    OfferReply reply{get_id(j, "batchId"), get_id(j, "agentName"), {}};
    for (const Json& o : get_array(j, "offers")) reply.offers.push_back(offer_from_json(o));
    return reply;
  }
  if (type == "decision") {
    Decision decision{get_id(j, "batchId"), {}};
    for (const Json& id : get_array(j, "acceptedTaskIds")) {
      if (!id.is_string() || id.get_ref<const std::string&>().empty()) {
        malformed("acceptedTaskIds entry is not a task id");
      }
      decision.accepted_task_ids.push_back(id.get<std::string>());
    }
    return decision;
  }
  if (type == "commit_ack") {
    return CommitAck{get_id(j, "batchId"), get_id(j, "agentName"),
                     get_int(j, "committedCount", 0, kMaxInt)};
  }
  if (type == "shutdown") return Shutdown{};
  throw Error(ErrorCode::UnknownType, type);
}

void LineFramer::feed(std::string_view chunk) {
  if (consumed_ > 0 && consumed_ * 2 >= buffer_.size()) {
    buffer_.erase(0, consumed_);
    scanned_ -= consumed_;
    consumed_ = 0;
  }
  buffer_.append(chunk);
}

std::optional<std::string> LineFramer::next() {
  const std::size_t pos = buffer_.find('\n', scanned_);
  if (pos == std::string::npos) {
    scanned_ = buffer_.size();
    return std::nullopt;
  }
  std::string frame = buffer_.substr(consumed_, pos + 1 - consumed_);
  consumed_ = pos + 1;
  scanned_ = consumed_;
  return frame;
}

void LineFramer::finish() const {
  if (has_partial()) throw Error(ErrorCode::MalformedFrame, "stream ended inside a frame");
}

}  // namespace gridresv
