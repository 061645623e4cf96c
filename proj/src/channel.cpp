#include "gridresv/channel.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>

#include <spdlog/spdlog.h>

#include "gridresv/error.hpp"

namespace gridresv {

std::optional<Message> Channel::receive(Millis timeout) {
  auto frame = receive_frame(timeout);
  if (!frame) return std::nullopt;
  return decode(*frame);
}

namespace {

struct Pipe {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::string> frames;
  bool closed = false;
};

class MemoryChannel final : public Channel {
 public:
  MemoryChannel(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~MemoryChannel() override { close(); }

  void send_frame(std::string_view frame) override {
    std::lock_guard lock(out_->mutex);
    if (out_->closed) throw Error(ErrorCode::Transport, "peer closed");
    out_->frames.emplace_back(frame);
    out_->ready.notify_one();
  }

  std::optional<std::string> receive_frame(Millis timeout) override {
    std::unique_lock lock(in_->mutex);
    const bool woke = in_->ready.wait_for(lock, timeout, [this] { return !in_->frames.empty() || in_->closed; });
    if (!woke) return std::nullopt;
    if (in_->frames.empty()) throw Error(ErrorCode::Transport, "peer closed");
    std::string frame = std::move(in_->frames.front());
    in_->frames.pop_front();
    return frame;
  }

  void close() override {
    for (Pipe* pipe : {in_.get(), out_.get()}) {
      std::lock_guard lock(pipe->mutex);
      pipe->closed = true;
      pipe->ready.notify_all();
    }
  }

  bool is_closed() const override {
    std::lock_guard lock(out_->mutex);
    return out_->closed;
  }

 private:
  std::shared_ptr<Pipe> in_;
  std::shared_ptr<Pipe> out_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_memory_link() {
  auto a_to_b = std::make_shared<Pipe>();
  auto b_to_a = std::make_shared<Pipe>();
  return {std::make_unique<MemoryChannel>(b_to_a, a_to_b),
          std::make_unique<MemoryChannel>(a_to_b, b_to_a)};
}

CollectResult collect_replies(std::span<const AgentLink> links, Millis timeout,
                              const ReplyFilter& accept) {
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + timeout;
  CollectResult result;
  for (const AgentLink& link : links) {
    auto& slot = result.replies[link.name];
    try {
      while (!slot) {
        const auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
        if (left.count() <= 0) break;
        auto frame = link.channel->receive_frame(left);
        if (!frame) break;
        Message msg = decode(*frame);
        if (accept(link.name, msg)) {
          slot = std::move(msg);
        } else {
          spdlog::debug("dropping unexpected {} from {}", type_name(msg), link.name);
        }
      }
    } catch (const Error& e) {
      spdlog::warn("agent {}: {}", link.name, e.what());
    }
    if (!slot) spdlog::warn("agent {}: no reply", link.name);
  }
  return result;
}

CollectResult timed_broadcast_collect(std::span<const AgentLink> links, const Message& msg,
                                      Millis timeout, const ReplyFilter& accept) {
  const auto started = std::chrono::steady_clock::now();
  const std::string frame = encode(msg);
  for (const AgentLink& link : links) {
    try {
      link.channel->send_frame(frame);
    } catch (const Error& e) {
      spdlog::warn("agent {}: send failed: {}", link.name, e.what());
    }
  }
  CollectResult result = collect_replies(links, timeout, accept);
  const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
  result.timing.bytes = frame.size();
  result.timing.milliseconds = elapsed.count();
  if (const auto* batch = std::get_if<TaskBatch>(&msg)) result.timing.batch_id = batch->batch_id;
  return result;
}

}  // namespace gridresv
