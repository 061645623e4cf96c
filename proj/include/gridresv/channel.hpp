#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridresv/protocol.hpp"

namespace gridresv {

using Millis = std::chrono::milliseconds;

/// Bidirectional message pipe carrying encoded frames. One thread sends
/// and one thread receives on each end.
class Channel {
 public:
  virtual ~Channel() = default;

  /// Throws Error(Transport) if the peer is gone.
  virtual void send_frame(std::string_view frame) = 0;

  /// Next complete frame, or nullopt when `timeout` elapses first. Throws
  /// Error(Transport) once the peer has closed and nothing is buffered.
  virtual std::optional<std::string> receive_frame(Millis timeout) = 0;

  virtual void close() = 0;
  virtual bool is_closed() const = 0;

  void send(const Message& msg) { send_frame(encode(msg)); }
  std::optional<Message> receive(Millis timeout);
};

/// Waits practically forever.
inline constexpr Millis kNoTimeout{std::chrono::hours(24 * 365)};

/// Two connected in-memory endpoints.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_memory_link();

struct AgentLink {
  AgentName name;
  std::shared_ptr<Channel> channel;
};

/// Wall-clock cost of delivering one task batch and collecting the replies.
struct CommTiming {
  std::string batch_id;
  std::size_t bytes = 0;
  double milliseconds = 0.0;
};

struct CollectResult {
  std::map<AgentName, std::optional<Message>> replies;  // nullopt = absent
  CommTiming timing;
};

/// Accepts a reply from the named agent; anything rejected is dropped.
using ReplyFilter = std::function<bool(const AgentName&, const Message&)>;

/// Waits until every link has produced one accepted reply or `timeout`
/// elapses. Transport faults mark the link absent and never abort.
CollectResult collect_replies(std::span<const AgentLink> links, Millis timeout,
                              const ReplyFilter& accept);

/// Sends `msg` on every link, then collects as above. The timing covers
/// encoding, delivery and the replies.
CollectResult timed_broadcast_collect(std::span<const AgentLink> links, const Message& msg,
                                      Millis timeout, const ReplyFilter& accept);

}  // namespace gridresv
