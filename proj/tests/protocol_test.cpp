#include "gridresv/protocol.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <thread>

#include "gridresv/channel.hpp"
#include "gridresv/error.hpp"
#include "gridresv/socket.hpp"

namespace gridresv {
namespace {

const std::vector<Message>& golden_messages() {
  static const std::vector<Message> messages{
      Hello{"a1"},
      HelloAck{false, "duplicate agent name"},
      TaskBatch{"b1", {Task{"t1", 10, 20, 30}}},
      OfferReply{"b1", "a1", {Offer{"t1", "n1", 30}}},
      Decision{"b1", {"t1", "t2"}},
      CommitAck{"b1", "a1", 2},
      Shutdown{},
  };
  return messages;
}

ErrorCode decode_error(std::string_view line) {
  try {
    decode(line);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decoded: " << line;
  return ErrorCode::InvalidArgument;
}

TEST(Codec, MatchesGoldenFile) {
  std::ifstream in(std::string(GRIDRESV_TEST_DATA_DIR) + "/golden/messages.jsonl", std::ios::binary);
  ASSERT_TRUE(in);
  std::string line;
  for (const Message& msg : golden_messages()) {
    ASSERT_TRUE(std::getline(in, line));
    line.push_back('\n');
    EXPECT_EQ(encode(msg), line);
    EXPECT_EQ(decode(line), msg);
  }
}

TEST(Codec, ShutdownIsMinimal) { EXPECT_EQ(encode(Shutdown{}), "{\"type\":\"shutdown\"}\n"); }

TEST(Codec, DecodeExamples) {
  EXPECT_EQ(decode("{\"type\":\"hello\",\"agentName\":\"a1\"}\n"), Message(Hello{"a1"}));
  try {
    decode("{\"type\":\"hello\"}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingField);
    EXPECT_EQ(e.detail(), "agentName");
  }
  EXPECT_EQ(decode_error("{\"type\":\"hello\",\"agentName\":\"a1\"}"), ErrorCode::MalformedFrame);
  EXPECT_EQ(decode_error("{\"type\":\"bogus\"}\n"), ErrorCode::UnknownType);
  EXPECT_EQ(decode_error("{\"agentName\":\"a\"}\n"), ErrorCode::MissingField);
  EXPECT_EQ(decode_error("[1,2]\n"), ErrorCode::MalformedFrame);
  EXPECT_EQ(decode_error("{\"type\":\"hello\"\n,\"agentName\":\"a\"}\n"), ErrorCode::MalformedFrame);
}

TEST(Codec, IgnoresUnknownFields) {
  EXPECT_EQ(decode("{\"type\":\"hello\",\"agentName\":\"a1\",\"extra\":[1,{}]}\n"), Message(Hello{"a1"}));
}

TEST(Codec, RejectsInvalidValues) {
  EXPECT_EQ(decode_error(R"({"type":"task_batch","batchId":"b","tasks":[{"endTime":5,"load":30,"startTime":10,"taskId":"t"}]})"
                         "\n"),
            ErrorCode::MalformedFrame);
  EXPECT_EQ(decode_error(R"({"type":"task_batch","batchId":"b","tasks":[{"endTime":20,"load":30.5,"startTime":10,"taskId":"t"}]})"
                         "\n"),
            ErrorCode::MalformedFrame);
  EXPECT_EQ(decode_error(R"({"type":"task_batch","batchId":"","tasks":[]})"
                         "\n"),
            ErrorCode::MalformedFrame);
  EXPECT_EQ(decode_error(R"({"type":"commit_ack","agentName":"a","batchId":"b","committedCount":-1})"
                         "\n"),
            ErrorCode::MalformedFrame);
  EXPECT_EQ(decode_error(R"({"type":"hello_ack","accepted":"yes"})"
                         "\n"),
            ErrorCode::MalformedFrame);
}

TEST(Codec, EncodeRejectsInvalidUtf8) {
  try {
    encode(Hello{"\xff"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Codec, InfiniteEndSurvives) {
  const Message msg = TaskBatch{"b", {Task{"t", 0, kInfinite, 1}}};
  EXPECT_EQ(decode(encode(msg)), msg);
}

std::string random_id(std::mt19937_64& rng) {
  static const std::vector<std::string> alphabet{"a", "b", "x", "z", "0", "9", "-", "_", ".", ":",
                                                 "/", "\"", "\\", " ", "\t", "\u00fc", "\u20ac"};
  std::string s;
  const int n = 1 + static_cast<int>(rng() % 8);
  for (int i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

Message random_message(std::mt19937_64& rng) {
  switch (rng() % 7) {
    case 0: return Hello{random_id(rng)};
    case 1: return HelloAck{rng() % 2 == 0, rng() % 2 == 0 ? std::optional<std::string>(random_id(rng)) : std::nullopt};
    case 2: {
      TaskBatch b{random_id(rng), {}};
      for (int i = static_cast<int>(rng() % 4); i > 0; --i) {
        const TimePoint start = static_cast<TimePoint>(rng() % 1000);
        b.tasks.push_back(Task{random_id(rng), start, start + 1 + static_cast<TimePoint>(rng() % 1000),
                               1 + static_cast<LoadPercent>(rng() % 100)});
      }
      return b;
    }
    case 3: {
      OfferReply r{random_id(rng), random_id(rng), {}};
      for (int i = static_cast<int>(rng() % 4); i > 0; --i) {
        r.offers.push_back(Offer{random_id(rng), random_id(rng), static_cast<LoadPercent>(rng() % 101)});
      }
      return r;
    }
    case 4: {
      Decision d{random_id(rng), {}};
      for (int i = static_cast<int>(rng() % 4); i > 0; --i) d.accepted_task_ids.push_back(random_id(rng));
      return d;
    }
    case 5: return CommitAck{random_id(rng), random_id(rng), static_cast<std::int64_t>(rng() % 1000)};
    default: return Shutdown{};
  }
}

TEST(CodecProperty, RoundTripIsExact) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const Message msg = random_message(rng);
    const std::string line = encode(msg);
    ASSERT_EQ(line.find('\n'), line.size() - 1);
    ASSERT_EQ(decode(line), msg);
    ASSERT_EQ(encode(decode(line)), line);
  }
}

TEST(CodecProperty, FuzzedLinesNeverCrash) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 5000; ++i) {
    std::string line = encode(random_message(rng));
    line.pop_back();
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits && !line.empty(); ++e) {
      const std::size_t at = rng() % line.size();
      switch (rng() % 3) {
        case 0: line[at] = static_cast<char>(rng() % 256); break;
        case 1: line.erase(at, 1 + rng() % 5); break;
        default: line.insert(at, 1, static_cast<char>(rng() % 256)); break;
      }
    }
    line.push_back('\n');
    try {
      decode(line);
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::MalformedFrame || e.code() == ErrorCode::UnknownType ||
                  e.code() == ErrorCode::MissingField)
          << to_string(e.code());
    }
  }
}

TEST(Framer, ReassemblesArbitraryChunks) {
  std::mt19937_64 rng(29);
  std::vector<std::string> lines;
  std::string stream;
  for (int i = 0; i < 200; ++i) {
    lines.push_back(encode(random_message(rng)));
    stream += lines.back();
  }
  for (int trial = 0; trial < 20; ++trial) {
    LineFramer framer;
    std::vector<std::string> got;
    std::size_t pos = 0;
    while (pos < stream.size()) {
      const std::size_t n = std::min<std::size_t>(stream.size() - pos, 1 + rng() % 97);
      framer.feed(std::string_view(stream).substr(pos, n));
      pos += n;
      while (auto frame = framer.next()) got.push_back(*frame);
    }
    EXPECT_EQ(got, lines);
    EXPECT_NO_THROW(framer.finish());
  }
}

TEST(Framer, TruncatedStreamIsMalformed) {
  LineFramer framer;
  framer.feed("{\"type\":\"shutdown\"}\n{\"type\":\"hel");
  ASSERT_TRUE(framer.next().has_value());
  EXPECT_FALSE(framer.next().has_value());
  try {
    framer.finish();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedFrame);
  }
}

TEST(MemoryLink, DeliversBothWays) {
  auto [a, b] = make_memory_link();
  a->send(Hello{"x"});
  EXPECT_EQ(b->receive(Millis(100)), Message(Hello{"x"}));
  b->send(Shutdown{});
  EXPECT_EQ(a->receive(Millis(100)), Message(Shutdown{}));
  EXPECT_FALSE(a->receive(Millis(10)).has_value());
  b->close();
  EXPECT_TRUE(a->is_closed());
  EXPECT_THROW(a->receive(Millis(10)), Error);
  EXPECT_THROW(a->send(Shutdown{}), Error);
}

TEST(MemoryLink, FramesQueuedBeforeCloseAreDelivered) {
  auto [a, b] = make_memory_link();
  a->send(Shutdown{});
  a->close();
  EXPECT_EQ(b->receive(Millis(10)), Message(Shutdown{}));
  EXPECT_THROW(b->receive(Millis(10)), Error);
}

ReplyFilter any_hello() {
  return [](const AgentName&, const Message& m) { return std::holds_alternative<Hello>(m); };
}

TEST(BroadcastCollect, AllResponsive) {
  std::vector<std::unique_ptr<Channel>> agent_ends;
  std::vector<AgentLink> links;
  for (const char* name : {"a", "b"}) {
    auto [broker_end, agent_end] = make_memory_link();
    links.push_back(AgentLink{name, std::move(broker_end)});
    agent_ends.push_back(std::move(agent_end));
  }
  std::vector<std::jthread> echo;
  for (auto& end : agent_ends) {
    echo.emplace_back([&end] {
      if (end->receive(Millis(2000))) end->send(Hello{"reply"});
    });
  }
  const CollectResult result = timed_broadcast_collect(links, TaskBatch{"b1", {}}, Millis(2000), any_hello());
  EXPECT_EQ(result.replies.size(), 2u);
  for (const auto& [name, reply] : result.replies) EXPECT_TRUE(reply.has_value()) << name;
  EXPECT_EQ(result.timing.batch_id, "b1");
  EXPECT_EQ(result.timing.bytes, encode(TaskBatch{"b1", {}}).size());
}

TEST(BroadcastCollect, SilentAgentIsAbsent) {
  auto live = make_memory_link();
  auto silent = make_memory_link();
  std::vector<AgentLink> links{{"live", std::move(live.first)}, {"silent", std::move(silent.first)}};
  Channel& live_agent = *live.second;
  std::jthread echo([&live_agent] {
    if (live_agent.receive(Millis(2000))) live_agent.send(Hello{"reply"});
  });
  const auto started = std::chrono::steady_clock::now();
  const CollectResult result = timed_broadcast_collect(links, Shutdown{}, Millis(100), any_hello());
  EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::milliseconds(1000));
  EXPECT_TRUE(result.replies.at("live").has_value());
  EXPECT_FALSE(result.replies.at("silent").has_value());
}

TEST(BroadcastCollect, ClosedLinkIsAbsent) {
  auto [b1, a1] = make_memory_link();
  a1->close();
  std::vector<AgentLink> links{{"gone", std::move(b1)}};
  const CollectResult result = timed_broadcast_collect(links, Shutdown{}, Millis(100), any_hello());
  EXPECT_FALSE(result.replies.at("gone").has_value());
}

TEST(Socket, LoopbackRoundTrip) {
  TcpListener listener("127.0.0.1", 0);
  ASSERT_NE(listener.port(), 0);
  std::unique_ptr<Channel> server_side;
  std::jthread acceptor([&] { server_side = listener.accept(Millis(5000)); });
  auto client = tcp_connect("127.0.0.1", listener.port());
  acceptor.join();
  ASSERT_TRUE(server_side);

  for (const Message& msg : golden_messages()) {
    client->send(msg);
    EXPECT_EQ(server_side->receive(Millis(2000)), msg);
  }
  EXPECT_FALSE(server_side->receive(Millis(20)).has_value());
  client->close();
  EXPECT_THROW(server_side->receive(Millis(2000)), Error);
}

TEST(Socket, ConnectRefused) {
  std::uint16_t port = 0;
  {
    TcpListener probe("127.0.0.1", 0);
    port = probe.port();
  }
  EXPECT_THROW(tcp_connect("127.0.0.1", port), Error);
}

TEST(Socket, AcceptTimesOut) {
  TcpListener listener("127.0.0.1", 0);
  EXPECT_EQ(listener.accept(Millis(20)), nullptr);
}

}  // namespace
}  // namespace gridresv
