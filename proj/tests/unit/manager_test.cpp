#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "../support/message_fuzz.hpp"
#include "seit/error.hpp"
#include "seit/graph_io.hpp"
#include "seit/manager.hpp"
#include "seit/proxy_config.hpp"
#include "seit/server.hpp"

#include <set>

using namespace seit;
using namespace seit::protocol;

namespace {

TenantId T(const char* s) { return TenantId(s); }

std::vector<Delivery> send(Manager& m, const char* sender, Message msg, Tick tick = 0) {
  return m.handle(T(sender), msg, tick);
}

// A..D registered with the trust chain A -> B -> C -> D:
// B scores A, C scores B, D scores C.
Manager ibr_manager() {
  Manager m;
  for (const char* t : {"A", "B", "C", "D"}) m.handle(std::nullopt, Register{T(t), std::nullopt, std::nullopt}, 0);
  ReputationGraph g = m.graph();
  g.restore_edge(Edge{T("B"), T("A"), 0.9, {}, 0});
  g.restore_edge(Edge{T("C"), T("B"), 0.8, {}, 0});
  g.restore_edge(Edge{T("D"), T("C"), 0.8, {}, 0});
  m.load(g, {});
  return m;
}

bool is_error(const std::vector<Delivery>& d) {
  return d.size() == 1 && std::holds_alternative<ErrorMsg>(d[0].message);
}

}  // namespace

TEST(Codec, ExactRoundTrip) {
  const std::string frame = R"({"type":"feedback","reporter":"T1","subject":"T2","q":-0.5})";
  const Message m = decode(frame);
  EXPECT_EQ(encode(m), frame);
  EXPECT_EQ(std::get<Feedback>(m).q, -0.5);
  EXPECT_EQ(decode(frame + "\n"), m);
}

TEST(Codec, Rejections) {
  auto code = [](const std::string& s) {
    try {
      decode(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidParameter;
  };
  EXPECT_EQ(code(R"({"type":"feedback","reporter":"T1","subject":"T2","q":-1.5})"), ErrorCode::SchemaViolation);
  EXPECT_EQ(code(R"({"type":"feedback","reporter":"T1","subj)"), ErrorCode::MalformedFrame);
  EXPECT_EQ(code(R"({"type":"gossip"})"), ErrorCode::UnknownMessageType);
  EXPECT_EQ(code(R"({"reporter":"T1"})"), ErrorCode::UnknownMessageType);
  EXPECT_EQ(code(R"({"type":"connect_request","src":"A","dst":"B","extra":1})"), ErrorCode::SchemaViolation);
  EXPECT_EQ(code(R"({"type":"connect_request","src":"A"})"), ErrorCode::SchemaViolation);
  EXPECT_EQ(code(R"({"type":"connect_request","src":"","dst":"B"})"), ErrorCode::SchemaViolation);
  EXPECT_EQ(code("[]"), ErrorCode::MalformedFrame);
  EXPECT_EQ(code("{\"type\":\"register\",\"tenant\":\"\xff\"}"), ErrorCode::MalformedFrame);
}

TEST(Codec, FuzzedRoundTrips) {
  fuzz::MessageFuzzer fuzz(1);
  for (int i = 0; i < 2000; ++i) {
    const Message m = fuzz.valid();
    const std::string bytes = encode(m);
    ASSERT_EQ(decode(bytes), m) << bytes;
    ASSERT_EQ(encode(decode(bytes)), bytes);
  }
}

TEST(Codec, FuzzedGarbageIsRejected) {
  fuzz::MessageFuzzer fuzz(2);
  for (int i = 0; i < 2000; ++i) {
    const std::string bytes = fuzz.invalid();
    EXPECT_THROW(decode(bytes), Error) << bytes;
  }
}

TEST(Manager, IbrIntroductionApprovesBothEnds) {
  Manager m = ibr_manager();
  auto out = send(m, "A", ConnectRequest{T("A"), T("D"), std::string("r1")}, 7);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].to, T("A"));
  EXPECT_EQ(out[1].to, T("D"));
  const auto& approve = std::get<ConnectApprove>(out[0].message);
  EXPECT_EQ(approve.path, (std::vector<TenantId>{T("B"), T("C")}));
  EXPECT_DOUBLE_EQ(approve.score, 0.4);
  EXPECT_EQ(approve.request_id, "r1");
  EXPECT_DOUBLE_EQ(*m.graph().reputation_of(T("D"), T("A")), 0.4);
  EXPECT_EQ(m.graph().find_edge(T("D"), T("A"))->intro.chain, (std::vector<TenantId>{T("C"), T("B")}));
}

TEST(Manager, NoPathRejectsToSourceOnly) {
  Manager m = ibr_manager();
  const Manager before = m;
  auto out = send(m, "D", ConnectRequest{T("D"), T("A"), std::nullopt});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].to, T("D"));
  EXPECT_TRUE(std::holds_alternative<ConnectReject>(out[0].message));
  EXPECT_EQ(m, before);
}

TEST(Manager, FeedbackCrossingNotifiesSubscriber) {
  Manager m = ibr_manager();
  send(m, "A", ConnectRequest{T("A"), T("D"), std::nullopt});
  send(m, "D", Configure{T("D"), std::nullopt, std::nullopt, SubscriptionSetting{std::nullopt, {0.2}}, std::nullopt});
  // R(D,A) = 0.4; one port-scan report (q = -1, step 0.2) lands on 0.2.
  auto out = send(m, "D", Feedback{T("D"), T("A"), -1.0, std::string("port-scan"), std::nullopt}, 9);
  ASSERT_GE(out.size(), 1u);
  const auto& up = std::get<ReputationUpdateMsg>(out[0].message);
  EXPECT_EQ(out[0].to, T("D"));
  EXPECT_EQ(up.subject, T("A"));
  EXPECT_EQ(up.direction, "falling");
  EXPECT_EQ(up.threshold, 0.2);
  EXPECT_EQ(up.tick, 9);
}

TEST(Manager, FeedbackCascadesThroughIntroducers) {
  Manager m = ibr_manager();
  // Give the intermediaries edges to A so there is something to lower.
  send(m, "A", ConnectRequest{T("A"), T("C"), std::nullopt});  // C scores A via B
  send(m, "A", ConnectRequest{T("A"), T("D"), std::nullopt});
  const auto before = m.graph().edges();
  send(m, "D", Feedback{T("D"), T("A"), -1.0, std::nullopt, std::nullopt});
  const auto after = m.graph().edges();
  std::set<std::pair<std::string, std::string>> lowered;
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (after[i].score < before[i].score) lowered.insert({after[i].owner.str(), after[i].subject.str()});
    EXPECT_LE(after[i].score, before[i].score);
  }
  const std::set<std::pair<std::string, std::string>> expected{
      {"D", "A"}, {"D", "C"}, {"C", "A"}, {"C", "B"}, {"B", "A"}};
  EXPECT_EQ(lowered, expected);
}

TEST(Manager, ErrorsLeaveStateUntouched) {
  Manager m = ibr_manager();
  const Manager before = m;
  EXPECT_TRUE(is_error(m.handle(std::nullopt, ConnectRequest{T("A"), T("D"), std::nullopt}, 0)));
  EXPECT_TRUE(is_error(send(m, "A", ConnectRequest{T("B"), T("D"), std::nullopt})));
  EXPECT_TRUE(is_error(send(m, "A", ConnectRequest{T("A"), T("Z"), std::nullopt})));
  EXPECT_TRUE(is_error(send(m, "A", Feedback{T("A"), T("D"), -1.0, std::nullopt, std::nullopt})));
  EXPECT_TRUE(is_error(send(m, "A", Configure{T("A"), 0.5, RateLimitSetting{1, 0}, std::nullopt, std::nullopt})));
  EXPECT_TRUE(is_error(send(m, "A", Configure{T("A"), 0.5, std::nullopt,
                                              SubscriptionSetting{T("Z"), {0.1}}, std::nullopt})));
  EXPECT_TRUE(is_error(send(m, "A", ErrorMsg{"x", "y", std::nullopt})));
  EXPECT_TRUE(is_error(m.handle_frame(T("A"), "{nope", 0)));
  EXPECT_EQ(m, before);

  fuzz::MessageFuzzer fuzz(3);
  for (int i = 0; i < 500; ++i) {
    EXPECT_TRUE(is_error(m.handle_frame(T("A"), fuzz.invalid(), 0)));
  }
  EXPECT_EQ(m, before);
}

TEST(Manager, ConfigureUpdatesQueryPolicy) {
  Manager m = ibr_manager();
  send(m, "C", Configure{T("C"), 0.95, RateLimitSetting{3, 60}, std::nullopt, std::nullopt});
  EXPECT_EQ(m.queries().config_for(T("C")).selectivity_threshold, 0.95);
  EXPECT_EQ(m.queries().config_for(T("C")).rate_limit, (RateLimit{3, 60}));
  // C now refuses B's introduction (0.8 < 0.95).
  auto out = send(m, "A", ConnectRequest{T("A"), T("D"), std::nullopt});
  EXPECT_TRUE(std::holds_alternative<ConnectReject>(out.at(0).message));
}

TEST(ProxyConfig, LoadsAndRejects) {
  const char* ok = R"({
    "components": [{"name": "snort", "address": "10.0.0.5:9000", "kind": "sensor",
                    "description": "IDS", "tasks": ["alerts"]}],
    "edge_selectivity_threshold": 0.3,
    "query_rate_limit": {"max": 5, "window_ticks": 60}
  })";
  const ProxyConfig c = load_proxy_config(ok);
  ASSERT_EQ(c.components.size(), 1u);
  EXPECT_EQ(c.components[0].kind, ComponentRole::Sensor);
  EXPECT_EQ(c.query_rate_limit, (RateLimit{5, 60}));

  auto message_of = [](const std::string& text) {
    try {
      load_proxy_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigParseError);
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  std::string missing = ok;
  missing.replace(missing.find("\"edge_selectivity_threshold\": 0.3,"), 34, "");
  EXPECT_NE(message_of(missing).find("edge_selectivity_threshold"), std::string::npos);
  const std::string dup = R"({"components": [
      {"name": "a", "address": "", "kind": "service", "description": "", "tasks": []},
      {"name": "a", "address": "", "kind": "executor", "description": "", "tasks": []}],
    "edge_selectivity_threshold": 0.3, "query_rate_limit": {"max": 5, "window_ticks": 60}})";
  EXPECT_NE(message_of(dup).find("duplicate"), std::string::npos);
  EXPECT_NE(message_of("{\n\"components\": [\n}").find("line 3"), std::string::npos);
}

TEST(ProxyConfig, BootstrapRegistersAndConfigures) {
  Manager m;
  const ProxyConfig c = load_proxy_config(R"({"components": [
      {"name": "lb", "address": "", "kind": "executor", "description": "", "tasks": []}],
    "edge_selectivity_threshold": 0.4, "query_rate_limit": {"max": 2, "window_ticks": 10}})");
  for (const auto& msg : bootstrap_messages(c, T("T1"))) {
    EXPECT_TRUE(m.handle(T("T1"), msg, 0).empty());
  }
  EXPECT_TRUE(m.graph().has_tenant(T("T1")));
  EXPECT_EQ(m.components().at(T("T1")).at("lb").kind, ComponentRole::Executor);
  EXPECT_EQ(m.queries().config_for(T("T1")).selectivity_threshold, 0.4);
}

TEST(GraphIo, SnapshotRoundTrip) {
  Manager m = ibr_manager();
  send(m, "A", ConnectRequest{T("A"), T("D"), std::nullopt}, 3);
  const std::vector<QueryConfig> qc{QueryConfig{T("C"), 0.25, RateLimit{4, 9}}};
  const std::string text = snapshot_to_json(m.graph(), qc);
  const GraphSnapshot snap = snapshot_from_json(text);
  EXPECT_EQ(snap.graph.edges(), m.graph().edges());
  EXPECT_EQ(snap.query_configs, qc);
  EXPECT_EQ(snapshot_to_json(snap.graph, snap.query_configs), text);
  EXPECT_THROW(snapshot_from_json("{\"tenants\": 3}"), Error);
}

namespace {

class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &sa.sin_addr);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) throw std::runtime_error("connect");
    timeval tv{5, 0};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  }
  ~Client() { ::close(fd_); }
  void send_line(const std::string& s) {
    const std::string line = s + "\n";
    ::send(fd_, line.data(), line.size(), MSG_NOSIGNAL);
  }
  std::string read_line() {
    while (true) {
      if (auto nl = buf_.find('\n'); nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      char chunk[1024];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) return {};
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_ = -1;
  std::string buf_;
};

}  // namespace

TEST(Server, RoutesApprovalsToBothSessions) {
  ManagerServer server(ibr_manager(), ListenAddress{"127.0.0.1", 0});
  server.start();
  Client a(server.port()), d(server.port()), x(server.port());
  x.send_line(R"({"type":"feedback","reporter":"A","subject":"B","q":0.1})");
  EXPECT_NE(x.read_line().find("NotRegistered"), std::string::npos);
  x.send_line("not json");
  EXPECT_NE(x.read_line().find("MalformedFrame"), std::string::npos);

  a.send_line(encode(Register{T("A"), std::nullopt, std::nullopt}));
  d.send_line(encode(Register{T("D"), std::nullopt, std::nullopt}));
  // Registration is silent; a ping-style bad request confirms ordering.
  d.send_line(R"({"type":"connect_approve","src":"A","dst":"D","path":[],"score":0.5})");
  EXPECT_NE(d.read_line().find("SchemaViolation"), std::string::npos);
  a.send_line(encode(ConnectRequest{T("A"), T("D"), std::string("req-7")}));
  const auto to_a = decode(a.read_line());
  const auto to_d = decode(d.read_line());
  EXPECT_EQ(std::get<ConnectApprove>(to_a).request_id, "req-7");
  EXPECT_EQ(to_a, to_d);
  server.stop();
  EXPECT_DOUBLE_EQ(*server.snapshot().graph().reputation_of(T("D"), T("A")), 0.4);
}

TEST(Server, ListenAddressParsing) {
  EXPECT_EQ(parse_listen_address("0.0.0.0:7000").port, 7000);
  EXPECT_EQ(parse_listen_address(":7001").host, "127.0.0.1");
  EXPECT_THROW(parse_listen_address("nohost"), Error);
  EXPECT_THROW(parse_listen_address("h:99999"), Error);
}
