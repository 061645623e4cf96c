#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gridresv/types.hpp"

namespace gridresv {

struct Hello {
  AgentName agent_name;
  bool operator==(const Hello&) const = default;
};

struct HelloAck {
  bool accepted = false;
  std::optional<std::string> reason;
  bool operator==(const HelloAck&) const = default;
};

struct TaskBatch {
  std::string batch_id;
  std::vector<Task> tasks;
  bool operator==(const TaskBatch&) const = default;
};

struct OfferReply {
  std::string batch_id;
  AgentName agent_name;
  std::vector<Offer> offers;
  bool operator==(const OfferReply&) const = default;
};

struct Decision {
  std::string batch_id;
  std::vector<TaskId> accepted_task_ids;
  bool operator==(const Decision&) const = default;
};

struct CommitAck {
  std::string batch_id;
  AgentName agent_name;
  std::int64_t committed_count = 0;
  bool operator==(const CommitAck&) const = default;
};

struct Shutdown {
  bool operator==(const Shutdown&) const = default;
};

using Message = std::variant<Hello, HelloAck, TaskBatch, OfferReply, Decision, CommitAck, Shutdown>;

/// Wire discriminator ("hello", "task_batch", ...).
std::string_view type_name(const Message& msg);

/// One LF-terminated JSON object per message: "type" first, remaining
/// keys (including nested objects) in alphabetical order.
std::string encode(const Message& msg);

/// Decodes one LF-terminated line. Throws Error(MalformedFrame),
/// Error(UnknownType) or Error(MissingField); unknown keys are ignored.
Message decode(std::string_view line);

/// Reassembles LF-delimited frames from arbitrary transport chunks.
class LineFramer {
 public:
  void feed(std::string_view chunk);
  /// Next complete frame including its LF, if one is buffered.
  std::optional<std::string> next();
  /// Call at end of stream; throws Error(MalformedFrame) if a partial frame
  /// is left over.
  void finish() const;
  bool has_partial() const noexcept { return buffer_.size() > consumed_; }

 private:
  std::string buffer_;
  std::size_t consumed_ = 0;
  std::size_t scanned_ = 0;
};

}  // namespace gridresv
