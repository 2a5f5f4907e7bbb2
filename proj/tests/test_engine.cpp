#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace triad;

namespace {

const std::string scenario_dir = std::string(TRIAD_SOURCE_DIR) + "/scenarios/cnh";

EngineSetup cnh_setup() { return load_engine_setup(load_engine_config(scenario_dir + "/engine.json")); }

struct Harness {
    std::int64_t now = 0;
    Engine engine{cnh_setup(), [this] { return at_ms(now); }};

    std::vector<Outgoing> send(const std::string& conn, const json& msg) { return engine.receive(conn, msg.dump()); }

    /// HELLO plus a zero-delay handshake for a device whose clock runs `offset` ahead.
    void connect(const std::string& conn, const std::string& device, std::int64_t offset = 0) {
        EXPECT_TRUE(send(conn, {{"type", "HELLO"}, {"device", device}}).empty());
        const auto resp = send(conn, {{"type", "TIME_SYNC_REQ"}, {"client_send_ts", now + offset}});
        ASSERT_EQ(resp.size(), 1u);
        json report = resp[0].message;
        report["type"] = "TIME_SYNC_REQ";
        report["client_recv_ts"] = now + offset;
        const auto done = send(conn, report);
        ASSERT_EQ(done.size(), 1u);
        EXPECT_EQ(done[0].message.at("offset_ms"), -offset);
    }

    std::vector<Outgoing> snapshot(const std::string& conn, double lat, std::int64_t device_ts, std::uint64_t seq) {
        return send(conn, {{"type", "SNAPSHOT"}, {"object", "Player-1"}, {"lat", lat}, {"lon", 18.06}, {"device_ts_ms", device_ts}, {"seq", seq}});
    }
};

std::string error_code(const std::vector<Outgoing>& out) {
    if (out.size() != 1 || out[0].message.value("type", "") != "ERROR") return "";
    return out[0].message.at("code").get<std::string>();
}

} // namespace

TEST(EngineProtocol, RequiresHelloAndTimeSync) {
    Harness h;
    EXPECT_EQ(error_code(h.snapshot("c1", 59.328, 0, 1)), "ProtocolError");
    EXPECT_EQ(error_code(h.send("c1", {{"type", "TIME_SYNC_REQ"}, {"client_send_ts", 0}})), "ProtocolError");
    h.send("c1", {{"type", "HELLO"}, {"device", "phone-1"}});
    EXPECT_EQ(error_code(h.send("c1", {{"type", "HELLO"}, {"device", "phone-1"}})), "ProtocolError");
    EXPECT_EQ(error_code(h.snapshot("c1", 59.328, 0, 1)), "ProtocolError");
    EXPECT_EQ(error_code(h.engine.receive("c1", "{not json")), "MalformedMessage");
    EXPECT_EQ(error_code(h.send("c1", {{"no", "type"}})), "MalformedMessage");
}

TEST(EngineProtocol, DeviceMayHoldOneSession) {
    Harness h;
    h.connect("c1", "phone-1");
    EXPECT_EQ(error_code(h.send("c2", {{"type", "HELLO"}, {"device", "phone-1"}})), "ProtocolError");
    h.engine.disconnect("c1");
    EXPECT_TRUE(h.send("c2", {{"type", "HELLO"}, {"device", "phone-1"}}).empty());
}

TEST(EngineProtocol, OffsetEstimateAppliedToSnapshots) {
    Harness h;
    h.now = 1000;
    h.connect("c1", "phone-1", 2000);
    EXPECT_EQ(h.engine.session("c1")->estimated_offset, Duration{-2000});
    h.snapshot("c1", 59.328, 3000, 1);
    const json r = h.engine.query({{"form", "where"}, {"object", "Player-1"}, {"from", 0}, {"to", 5000}});
    EXPECT_EQ(r["result"]["points"][0]["t_ms"], 1000);
}

TEST(EngineProtocol, SnapshotErrors) {
    Harness h;
    h.connect("c1", "phone-1");
    h.snapshot("c1", 59.328, 0, 5);
    EXPECT_EQ(error_code(h.snapshot("c1", 59.328, 10, 5)), "StaleSequence");
    EXPECT_EQ(error_code(h.snapshot("c1", 95.0, 10, 6)), "MalformedMessage");
    EXPECT_EQ(error_code(h.send("c1", {{"type", "SNAPSHOT"}, {"object", "Player-1"}})), "MalformedMessage");
    EXPECT_EQ(error_code(h.send("c1", {{"type", "SNAPSHOT"}, {"object", "ghost"}, {"lat", 0}, {"lon", 0}, {"device_ts_ms", 1}, {"seq", 1}})),
              "UnknownObject");
    EXPECT_EQ(error_code(h.send("c1", {{"type", "SUBSCRIBE"}, {"objects", {"ghost"}}})), "UnknownObject");
    EXPECT_EQ(error_code(h.send("c1", {{"type", "NOPE"}})), "ProtocolError");
}

TEST(EngineProtocol, CnhQuestAdvancesAndDisseminates) {
    Harness h;
    h.connect("gm", "game-master");
    const auto state = h.send("gm", {{"type", "SUBSCRIBE"}, {"objects", {"Player-1", "team-1"}}});
    ASSERT_EQ(state.size(), 1u);
    EXPECT_EQ(state[0].message.at("type"), "STATE");
    ReplicaClient gm;
    gm.apply(state[0].message);

    h.connect("p1", "phone-1");
    auto feed = [&](const std::vector<Outgoing>& out) {
        for (const auto& o : out) {
            if (o.to == "gm") gm.apply(o.message);
        }
    };
    h.now = 0;
    feed(h.snapshot("p1", 59.3280, 0, 1));
    EXPECT_EQ(h.engine.quests()->current_stage(ObjectId("team-1")), "Start");
    h.now = 60000;
    const auto out = h.snapshot("p1", 59.3295, 60000, 2);
    feed(out);
    // One UPDATE for Player-1, one for team-1 after the stage change.
    EXPECT_EQ(out.size(), 2u);
    EXPECT_EQ(h.engine.quests()->current_stage(ObjectId("team-1")), "Zone-A");
    EXPECT_TRUE(replica_check(gm, h.engine));
    EXPECT_EQ(json::parse(gm.replicas().at(ObjectId("team-1")).payload)["where"]["zone"], "Zone-A");

    bool saw_enter = false;
    for (const auto& e : h.engine.events()) {
        if (e.at("kind") == "zone_event" && e.at("event").at("zone") == "Zone-A") {
            EXPECT_EQ(e.at("event").at("time_ms"), 44028);
            saw_enter = true;
        }
    }
    EXPECT_TRUE(saw_enter);

    const auto q = h.send("gm", {{"type", "QUERY"}, {"id", 7}, {"query", {{"form", "stage"}, {"group", "team-1"}}}});
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q[0].message.at("type"), "RESULT");
    EXPECT_EQ(q[0].message.at("id"), 7);
    EXPECT_EQ(q[0].message.at("result").at("current"), "Zone-A");
}

TEST(EngineSetupTest, RejectsQuestStageWithoutZone) {
    EngineSetup s = cnh_setup();
    s.quest->graph.stages.insert("Zone-Z");
    s.quest->graph.edges.insert({"Zone-A", "Zone-Z"});
    EXPECT_THROW(Engine(std::move(s), [] { return at_ms(0); }), error);
}

TEST(Replica, GapAndStaleDetection) {
    TriadState s;
    s.create_object(ObjectId("a"), std::nullopt, {});
    ReplicaClient c;
    c.apply({{"type", "STATE"}, {"objects", {{{"object", "a"}, {"version", 1}, {"payload", codec::canonical_state(s, ObjectId("a"))}}}}});
    EXPECT_TRUE(replica_check(c, s));
    s.set_attribute(ObjectId("a"), "x", 1.0);
    EXPECT_FALSE(replica_check(c, s));
    s.set_attribute(ObjectId("a"), "x", 2.0);
    c.apply({{"type", "UPDATE"}, {"object", "a"}, {"version", 3}, {"payload", codec::canonical_state(s, ObjectId("a"))}});
    EXPECT_TRUE(c.replicas().at(ObjectId("a")).gap);
    EXPECT_FALSE(replica_check(c, s));
    EXPECT_EQ(c.observed_versions().at(ObjectId("a")), (std::vector<std::uint64_t>{1, 3}));
}

TEST(SimNet, LinksStayFifoUnderJitter) {
    EventQueue q(at_ms(0));
    SimTransport net(q, 5);
    net.set_default_link(LinkModel{Duration{10}, Duration{200}});
    std::vector<int> got;
    net.attach("b", [&](const std::string&, const std::string& line) { got.push_back(json::parse(line).at("n").get<int>()); });
    for (int i = 0; i < 100; ++i) {
        q.schedule(at_ms(i), [&net, i] { net.send("a", "b", {{"n", i}}); });
    }
    q.run();
    ASSERT_EQ(got.size(), 100u);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(got[i], i);
    EXPECT_EQ(net.delivered(), 100u);
}

TEST(SimNet, DropRuleAndDeterministicDelays) {
    auto delays = [](std::uint64_t seed) {
        EventQueue q;
        SimTransport net(q, seed);
        net.set_default_link(LinkModel{Duration{50}, Duration{30}});
        std::vector<std::int64_t> d;
        for (int i = 0; i < 20; ++i) d.push_back(net.draw_delay("x", "y").count());
        return d;
    };
    EXPECT_EQ(delays(1), delays(1));
    EXPECT_NE(delays(1), delays(2));
    EventQueue q;
    SimTransport net(q, 1);
    net.set_drop_rule([](const std::string&, const std::string&, const json& m) { return m.at("n") == 1; });
    int n = 0;
    net.attach("b", [&](const std::string&, const std::string&) { ++n; });
    net.send("a", "b", {{"n", 0}});
    net.send("a", "b", {{"n", 1}});
    q.run();
    EXPECT_EQ(n, 1);
    EXPECT_EQ(net.dropped(), 1u);
    EXPECT_EQ(net.sent(), 2u);
}

TEST(Tcp, LoopbackSession) {
    Engine engine(cnh_setup(), [] { return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now()); });
    TcpServer server(engine, "127.0.0.1", 0);
    server.start();
    ASSERT_NE(server.port(), 0);

    TcpClient gm("127.0.0.1", server.port());
    TcpClient phone("127.0.0.1", server.port());
    auto handshake = [](TcpClient& c, const std::string& device) {
        c.send({{"type", "HELLO"}, {"device", device}});
        c.send({{"type", "TIME_SYNC_REQ"}, {"client_send_ts", 1000}});
        json resp = c.receive();
        EXPECT_EQ(resp.at("type"), "TIME_SYNC_RESP");
        resp["type"] = "TIME_SYNC_REQ";
        resp["client_recv_ts"] = 1000;
        c.send(resp);
        EXPECT_TRUE(c.receive().at("established").get<bool>());
    };
    handshake(gm, "game-master");
    handshake(phone, "phone-1");
    gm.send({{"type", "SUBSCRIBE"}, {"objects", {"Player-1"}}});
    ReplicaClient replica;
    replica.apply(gm.receive());
    phone.send({{"type", "SNAPSHOT"}, {"object", "Player-1"}, {"lat", 59.3295}, {"lon", 18.06}, {"device_ts_ms", 1000}, {"seq", 1}});
    const json update = gm.receive();
    EXPECT_EQ(update.at("type"), "UPDATE");
    replica.apply(update);
    EXPECT_TRUE(replica_check(replica, engine));
    phone.send({{"type", "BOGUS"}});
    EXPECT_EQ(phone.receive().at("code"), "ProtocolError");
    server.stop();
}
