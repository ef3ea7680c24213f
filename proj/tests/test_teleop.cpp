#include <gtest/gtest.h>

#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <filesystem>
#include <fstream>

#include "fbench/teleop_server.hpp"

using namespace fbench;
namespace fs = std::filesystem;
namespace beast = boost::beast;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fbench_teleop_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig one_leg() {
  RunConfig c;
  c.furniture = "one_leg";
  return c;
}

Command move(double dx, int gripper = 0) {
  Command c;
  c.delta_position = Vec3(dx, 0, 0);
  c.gripper = gripper;
  return c;
}

Command control(Control k) {
  Command c;
  c.control = k;
  return c;
}

}  // namespace

TEST(TeleopCodec, CommandRoundTrip) {
  Command c;
  c.delta_position = Vec3(0.01, -0.02, 0.1 / 3);
  c.wrist_yaw_delta = -0.3;
  c.gripper = 1;
  c.control = Control::StartRecord;
  EXPECT_EQ(decode_command(encode_command(c)), c);
}

TEST(TeleopCodec, MissingFieldsDefault) {
  const Command c = decode_command(R"({"type":"command"})");
  EXPECT_EQ(c, Command{});
  const Action a = command_to_action(c);
  EXPECT_EQ(a, Action::zero());
}

TEST(TeleopCodec, BadCommandsRejected) {
  EXPECT_THROW(decode_command(R"({"gripper":2})"), FormatError);
  EXPECT_THROW(decode_command(R"({"delta_position":[1.5,0,0]})"), FormatError);
  EXPECT_THROW(decode_command(R"({"wrist_yaw_delta":4})"), FormatError);
  EXPECT_THROW(decode_command(R"({"control":"explode"})"), FormatError);
  EXPECT_THROW(decode_command(R"({"speed":1})"), FormatError);
  EXPECT_THROW(decode_command("not json"), FormatError);
}

TEST(TeleopCodec, SnapshotRoundTrip) {
  Env env(one_leg());
  env.reset(3);
  const Snapshot s = make_snapshot(env, true);
  EXPECT_EQ(s.parts.size(), env.graph().parts.size());
  EXPECT_EQ(decode_snapshot(encode_snapshot(s)), s);
  const Json j = Json::parse(encode_snapshot(s));
  EXPECT_EQ(j["type"], "snapshot");
  EXPECT_EQ(j["version"], kTeleopProtocolVersion);
}

TEST(TeleopCodec, YawIsAboutTheGripperAxis) {
  Command c;
  c.wrist_yaw_delta = 0.25;
  const Action a = command_to_action(c);
  EXPECT_NEAR(geodesic_angle(a.delta_orientation, Quat::Identity()), 0.25, 1e-12);
  EXPECT_NEAR(std::abs(a.delta_orientation.z()), std::sin(0.125), 1e-12);
}

TEST(TeleopSession, NoCommandMeansZeroAction) {
  TeleopSession s(one_leg(), 0, temp_dir("zero"));
  const Pose before = s.env().world().ee.pose;
  const Snapshot snap = s.tick();
  EXPECT_EQ(snap.tick, 99);
  EXPECT_LT((s.env().world().ee.pose.position - before.position).norm(), 1e-3);
}

TEST(TeleopSession, LastWriteWins) {
  TeleopSession a(one_leg(), 0, temp_dir("lww_a"));
  TeleopSession b(one_leg(), 0, temp_dir("lww_b"));
  a.put(move(-0.05));
  a.put(move(0.05));
  b.put(move(0.05));
  a.tick();
  b.tick();
  EXPECT_EQ(a.env().world(), b.env().world());
}

TEST(TeleopSession, ControlSurvivesLaterMotion) {
  TeleopSession s(one_leg(), 0, temp_dir("latch"));
  for (int i = 0; i < 3; ++i) {
    s.put(move(0.03));
    s.tick();
  }
  s.put(control(Control::Reset));
  s.put(move(0.03));
  const Snapshot snap = s.tick();
  EXPECT_EQ(snap.tick, 0);
  EXPECT_EQ(s.env().seed(), 1u);
}

TEST(TeleopSession, RecordingReplaysWithZeroDivergence) {
  const fs::path dir = temp_dir("rec");
  TeleopSession s(one_leg(), 7, dir);
  s.put(control(Control::StartRecord));
  EXPECT_TRUE(s.tick().recording);
  for (int i = 0; i < 12; ++i) {
    s.put(move(i % 2 ? 0.02 : -0.01, i > 6 ? 1 : -1));
    s.tick();
  }
  s.put(control(Control::StopRecord));
  EXPECT_FALSE(s.tick().recording);
  ASSERT_EQ(s.written().size(), 1u);
  const Episode ep = read_episode(s.written()[0]);
  EXPECT_EQ(ep.header.op, Operator::Teleop);
  EXPECT_EQ(ep.steps.size(), 12u);
  const ReplayReport r = replay_episode(ep);
  EXPECT_EQ(r.max_deviation, 0.0);
  EXPECT_FALSE(r.first_divergent_step.has_value());
}

TEST(TeleopSession, EmptyRecordingWritesNothing) {
  TeleopSession s(one_leg(), 0, temp_dir("empty"));
  s.put(control(Control::StartRecord));
  s.tick();
  s.put(control(Control::StopRecord));
  s.tick();
  EXPECT_TRUE(s.written().empty());
}

TEST(TeleopStatic, PathsStayInsideRoot) {
  const fs::path root = temp_dir("root");
  EXPECT_FALSE(teleop_net::resolve_static(root, "/../etc/passwd").has_value());
  EXPECT_FALSE(teleop_net::resolve_static(root, "/a/../../x").has_value());
  EXPECT_TRUE(teleop_net::resolve_static(root, "/index.html?x=1").has_value());
  EXPECT_EQ(teleop_net::mime_type("app.js"), "application/javascript");
}

TEST(TeleopServer, WebsocketAndStaticFiles) {
  const fs::path ui = temp_dir("ui");
  std::ofstream(ui / "index.html") << "<html>teleop</html>";
  TeleopSession session(one_leg(), 0, temp_dir("srv_out"));
  TeleopServerConfig cfg;
  cfg.port = 0;
  cfg.ui_dir = ui;
  TeleopServer server(session, cfg);
  server.start(std::nullopt);
  const auto port = std::to_string(server.port());

  asio::io_context io;
  tcp::resolver resolver(io);
  const auto endpoints = resolver.resolve("127.0.0.1", port);

  {  // static GET
    beast::tcp_stream stream(io);
    stream.connect(endpoints);
    beast::http::request<beast::http::empty_body> req(beast::http::verb::get, "/", 11);
    req.set(beast::http::field::host, "127.0.0.1");
    beast::http::write(stream, req);
    beast::flat_buffer buf;
    beast::http::response<beast::http::string_body> res;
    beast::http::read(stream, buf, res);
    EXPECT_EQ(res.result(), beast::http::status::ok);
    EXPECT_EQ(res.body(), "<html>teleop</html>");
  }
  {  // missing file
    beast::tcp_stream stream(io);
    stream.connect(endpoints);
    beast::http::request<beast::http::empty_body> req(beast::http::verb::get, "/nope.js", 11);
    req.set(beast::http::field::host, "127.0.0.1");
    beast::http::write(stream, req);
    beast::flat_buffer buf;
    beast::http::response<beast::http::string_body> res;
    beast::http::read(stream, buf, res);
    EXPECT_EQ(res.result(), beast::http::status::not_found);
  }

  beast::websocket::stream<tcp::socket> ws(io);
  asio::connect(ws.next_layer(), endpoints);
  ws.handshake("127.0.0.1", "/teleop");
  for (int i = 0; i < 200 && server.clients() == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  ASSERT_EQ(server.clients(), 1u);

  // A bad command gets an error message back; a good one moves the arm.
  ws.write(asio::buffer(std::string(R"({"gripper":5})")));
  beast::flat_buffer buf;
  ws.read(buf);
  const Json err = Json::parse(beast::buffers_to_string(buf.data()));
  EXPECT_EQ(err["type"], "error");
  buf.consume(buf.size());

  ws.write(asio::buffer(encode_command(move(0.05))));
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  const Pose before = session.env().world().ee.pose;
  const Snapshot local = server.tick_once();
  EXPECT_GT(session.env().world().ee.pose.position.x(), before.position.x() + 0.01);
  ws.read(buf);
  const Snapshot remote = decode_snapshot(beast::buffers_to_string(buf.data()));
  EXPECT_EQ(remote, local);

  ws.close(beast::websocket::close_code::normal);
  server.stop();
}
