#include <gtest/gtest.h>

#include <thread>

#include "tmw/service/http.hpp"

using namespace tmw;
using nlohmann::json;

namespace {

const char* sample_source = "IN\nSTO A\nIN\nADD A\nOUT\nHLT\nA DAT\n";

class HttpService : public ::testing::Test {
 protected:
  void SetUp() override {
    service::mount(server_, manager_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(5, 0);
    return c;
  }

  std::string create() {
    auto c = client();
    auto res = c.Post("/sessions");
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body).at("id");
  }

  json post(const std::string& path, const json& body, int expect = 200) {
    auto c = client();
    auto res = c.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  json get(const std::string& path, int expect = 200) {
    auto c = client();
    auto res = c.Get(path);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  service::SessionManager manager_{service::ServiceConfig{.max_sessions = 4}};
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_F(HttpService, SampleProgramEndToEnd) {
  auto id = create();
  auto base = "/sessions/" + id;
  auto loaded = post(base + "/load", {{"source", sample_source}});
  EXPECT_EQ(loaded.at("length"), 7);
  EXPECT_EQ(loaded.at("symbols").at("A"), 6);

  auto step = post(base + "/step", json::object());
  EXPECT_EQ(step.at("mode"), "awaiting_input");

  auto conflict = post(base + "/step", json::object(), 409);
  EXPECT_EQ(conflict.at("mode"), "awaiting_input");

  EXPECT_EQ(post(base + "/input", {{"value", 5}}).at("queued"), 1);
  step = post(base + "/step", json::object());
  EXPECT_EQ(step.at("delta").at("value"), 5);
  EXPECT_FALSE(step.at("records").empty());

  post(base + "/input", {{"values", {7}}});
  auto run = post(base + "/run", json::object());
  EXPECT_EQ(run.at("mode"), "halted");

  auto state = get(base + "/state");
  EXPECT_EQ(state.at("snapshot").at("output"), json({12}));
  EXPECT_EQ(state.at("mode"), "halted");

  auto halted = post(base + "/step", json::object(), 409);
  EXPECT_EQ(halted.at("error"), "session halted");
  EXPECT_EQ(halted.at("mode"), "halted");
}

TEST_F(HttpService, PlainTextLoadAndDiagnostics) {
  auto id = create();
  auto c = client();
  auto res = c.Post("/sessions/" + id + "/load", sample_source, "text/plain");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = c.Post("/sessions/" + id + "/load", "JMP 5\n", "text/plain");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  auto body = json::parse(res->body);
  EXPECT_EQ(body.at("diagnostics")[0].at("line"), 1);
}

TEST_F(HttpService, ImageLoad) {
  auto id = create();
  auto r = post("/sessions/" + id + "/load", {{"image", {901, 902, 0}}});
  EXPECT_EQ(r.at("cells"), json({901, 902, 0}));
}

TEST_F(HttpService, ErrorsMapToStatusCodes) {
  get("/sessions/deadbeef/state", 404);
  auto id = create();
  post("/sessions/" + id + "/input", {{"value", 1000}}, 400);
  post("/sessions/" + id + "/input", json::object(), 400);
  auto c = client();
  auto res = c.Post("/sessions/" + id + "/run", "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
}

TEST_F(HttpService, CapacityAnswers503WithRetryAfter) {
  for (int i = 0; i < 4; ++i) create();
  auto c = client();
  auto res = c.Post("/sessions");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(res->get_header_value("Retry-After"), "30");
}

TEST_F(HttpService, Exports) {
  auto id = create();
  auto base = "/sessions/" + id + "/export/";
  EXPECT_EQ(get(base + "events").size(), 32u);
  EXPECT_EQ(get(base + "behavior?format=json").at("nodes").size(), 32u);
  auto c = client();
  auto dot = c.Get(base + "static");
  ASSERT_TRUE(dot);
  EXPECT_NE(dot->body.find("style=dashed"), std::string::npos);
  auto simplified = get(base + "static?format=json&simplified=1");
  EXPECT_EQ(simplified.at("mode"), "simplified");
  get(base + "nothing", 404);
  get(base + "events?format=dot", 400);
}

TEST_F(HttpService, MessagesPolling) {
  auto id = create();
  post("/sessions/" + id + "/run", json::object());
  auto all = get("/sessions/" + id + "/messages");
  ASSERT_FALSE(all.empty());
  auto last = all.back().at("seq").get<std::uint64_t>();
  EXPECT_TRUE(get("/sessions/" + id + "/messages?since=" + std::to_string(last)).empty());
  for (const auto& m : all) {
    EXPECT_TRUE(m.at("type") == "delta" || m.at("type") == "occurrence" || m.at("type") == "mode");
  }
}

TEST_F(HttpService, ServerSentEventsStream) {
  auto id = create();
  post("/sessions/" + id + "/run", json::object());
  auto c = client();
  std::string received;
  auto res = c.Get("/sessions/" + id + "/events", [&](const char* data, std::size_t n) {
    received.append(data, n);
    return received.find("\"halted\"") == std::string::npos;
  });
  EXPECT_NE(received.find("event: occurrence"), std::string::npos);
  EXPECT_NE(received.find("event: mode"), std::string::npos);
  EXPECT_NE(received.find("id: 1\n"), std::string::npos);
}
