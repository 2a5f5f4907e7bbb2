#pragma once

// Deterministic scenario runner. Scripted players walk waypoint paths in
// physical truth; their devices sample, perturb and transmit snapshots to an
// engine over the simulated transport, and observer clients keep replicas.
// Ground truth is retained next to everything the engine saw.

#include "triad/client.hpp"
#include "triad/codec.hpp"
#include "triad/engine.hpp"
#include "triad/sensing.hpp"
#include "triad/simnet.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace triad {

struct Waypoint {
    GeoPoint point;
    Timestamp arrival;
};

struct PlayerScript {
    ObjectId object;
    std::string device;
    std::vector<Waypoint> waypoints;
    ClockModel clock;
    std::optional<LinkModel> uplink;
    std::optional<LinkModel> downlink;
    std::vector<ObjectId> subscribe;
};

struct ObserverScript {
    std::string device;
    std::vector<ObjectId> subscribe;
    ClockModel clock;
};

/// Drops the UPDATE for (to, object, version).
struct DroppedUpdate {
    std::string to;
    ObjectId object;
    std::uint64_t version = 0;
};

struct Scenario {
    std::uint64_t seed = 0;
    Timestamp start = at_ms(0);
    Duration duration{0};
    Duration sampling_interval{1000};
    MeasurementModel measurement;
    LinkModel link;
    json taxonomy;
    json zones;
    std::optional<json> quest;
    std::vector<PlayerScript> players;
    std::vector<ObserverScript> observers;
    std::vector<DroppedUpdate> dropped_updates;
};

/// Constant-speed linear motion in (lat, lon); holds at the ends.
inline GeoPoint truth_position(const std::vector<Waypoint>& path, Timestamp t) {
    if (t <= path.front().arrival) return path.front().point;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const auto& a = path[i - 1];
        const auto& b = path[i];
        if (t <= b.arrival) {
            const double f = static_cast<double>((t - a.arrival).count()) / static_cast<double>((b.arrival - a.arrival).count());
            return GeoPoint{a.point.lat + f * (b.point.lat - a.point.lat),
                            normalize_lon(a.point.lon + f * normalize_lon(b.point.lon - a.point.lon)), a.point.layer};
        }
    }
    return path.back().point;
}

struct TruthSample {
    ObjectId object;
    std::string device;
    std::uint64_t seq = 0;
    Timestamp physical_time;
    GeoPoint truth;
    GeoPoint measured;
    double displacement_m = 0.0;
    Timestamp device_time;
};

/// Physical-time view of one device's clock handshake.
struct HandshakeTruth {
    std::string device;
    std::int64_t true_offset_ms = 0; ///< Device minus physical.
    Duration uplink_delay{0};
    Duration downlink_delay{0};
    std::int64_t estimated_offset_ms = 0; ///< Engine minus device, as estimated.
};

struct ScenarioResult {
    std::unique_ptr<Engine> engine;
    std::map<std::string, ReplicaClient> clients;
    std::vector<TruthSample> truth;
    std::vector<HandshakeTruth> handshakes;
    std::size_t messages_sent = 0;
    std::size_t messages_dropped = 0;

    const std::vector<json>& events() const { return engine->events(); }

    /// Event log as JSON lines; byte-identical across runs with the same seed.
    std::string event_log() const {
        std::string out;
        for (const auto& e : engine->events()) {
            out += e.dump();
            out.push_back('\n');
        }
        return out;
    }
};

namespace detail {

inline json load_ref(const json& value, const std::filesystem::path& base) {
    if (value.is_string()) return codec::read_json_file((base / value.get<std::string>()).string());
    return value;
}

inline ClockModel clock_from_json(const json& j) {
    return ClockModel{j.value("offset_ms", std::int64_t{0}), j.value("jitter_ms", std::int64_t{0})};
}

inline LinkModel link_from_json(const json& j) {
    return LinkModel{Duration{j.value("base_delay_ms", std::int64_t{50})}, Duration{j.value("jitter_ms", std::int64_t{0})}};
}

} // namespace detail

/// Parses a scenario document. File references ("zones": "zones.json", ...)
/// resolve against `base`.
inline Scenario scenario_from_json(const json& doc, const std::filesystem::path& base = {}) {
    try {
        Scenario s;
        s.seed = doc.value("seed", std::uint64_t{0});
        s.start = at_ms(doc.value("start_ms", std::int64_t{0}));
        s.duration = Duration{doc.at("duration_ms").get<std::int64_t>()};
        s.sampling_interval = Duration{doc.at("sampling_interval_ms").get<std::int64_t>()};
        if (doc.contains("measurement")) {
            const auto& m = doc.at("measurement");
            s.measurement = MeasurementModel{m.value("noise_sigma_m", 0.0), m.value("quant_decimals", storage_decimals)};
        }
        if (doc.contains("link")) s.link = detail::link_from_json(doc.at("link"));
        s.taxonomy = detail::load_ref(doc.at("taxonomy"), base);
        s.zones = detail::load_ref(doc.at("zones"), base);
        if (doc.contains("quest") && !doc.at("quest").is_null()) s.quest = detail::load_ref(doc.at("quest"), base);
        for (const auto& p : doc.at("players")) {
            PlayerScript ps;
            ps.object = ObjectId(p.at("object").get<std::string>());
            ps.device = p.at("device").get<std::string>();
            for (const auto& w : p.at("waypoints")) {
                ps.waypoints.push_back({codec::point_from_json(w), at_ms(w.at("t_ms").get<std::int64_t>())});
            }
            if (p.contains("clock")) ps.clock = detail::clock_from_json(p.at("clock"));
            if (p.contains("uplink")) ps.uplink = detail::link_from_json(p.at("uplink"));
            if (p.contains("downlink")) ps.downlink = detail::link_from_json(p.at("downlink"));
            for (const auto& id : p.value("subscribe", json::array())) ps.subscribe.emplace_back(id.get<std::string>());
            s.players.push_back(std::move(ps));
        }
        for (const auto& o : doc.value("observers", json::array())) {
            ObserverScript os;
            os.device = o.at("device").get<std::string>();
            for (const auto& id : o.value("subscribe", json::array())) os.subscribe.emplace_back(id.get<std::string>());
            if (o.contains("clock")) os.clock = detail::clock_from_json(o.at("clock"));
            s.observers.push_back(std::move(os));
        }
        if (doc.contains("faults")) {
            for (const auto& d : doc.at("faults").value("drop_updates", json::array())) {
                s.dropped_updates.push_back({d.at("to").get<std::string>(), ObjectId(d.at("object").get<std::string>()),
                                             d.at("version").get<std::uint64_t>()});
            }
        }
        return s;
    } catch (const json::exception& e) {
        throw error(errc::invalid_scenario, e.what());
    } catch (const error& e) {
        if (e.code() == errc::invalid_scenario) throw;
        throw error(errc::invalid_scenario, e.what());
    }
}

inline Scenario load_scenario(const std::string& path) {
    const std::filesystem::path p(path);
    return scenario_from_json(codec::read_json_file(path), p.parent_path());
}

inline void validate_scenario(const Scenario& s) {
    auto fail = [](const std::string& why) { throw error(errc::invalid_scenario, why); };
    if (s.sampling_interval <= Duration{0}) fail("sampling_interval_ms must be positive");
    if (s.duration < Duration{0}) fail("duration_ms must be non-negative");
    std::set<std::string> devices;
    for (const auto& p : s.players) {
        if (p.waypoints.empty()) fail(p.object.str() + " has no waypoints");
        for (std::size_t i = 1; i < p.waypoints.size(); ++i) {
            if (p.waypoints[i].arrival <= p.waypoints[i - 1].arrival) fail(p.object.str() + ": waypoint times must increase");
        }
        if (!devices.insert(p.device).second) fail("duplicate device '" + p.device + "'");
    }
    for (const auto& o : s.observers) {
        if (!devices.insert(o.device).second) fail("duplicate device '" + o.device + "'");
    }
    if (devices.contains("engine")) fail("'engine' is a reserved endpoint name");
}

namespace detail {

inline const std::string engine_endpoint = "engine";

/// Device-side protocol driver shared by players and observers.
class SimDevice {
public:
    SimDevice(std::string device, ClockModel clock, EventQueue& queue, SimTransport& net)
        : device_(std::move(device)), clock_(clock), queue_(queue), net_(net) {}

    virtual ~SimDevice() = default;

    const std::string& device() const noexcept { return device_; }

    /// Device clock reading used for the handshake: offset without jitter.
    Timestamp device_now() const { return queue_.now() + Duration{clock_.offset_ms}; }

    void start() {
        send({{"type", "HELLO"}, {"device", device_}});
        handshake_send_physical_ = queue_.now();
        send({{"type", "TIME_SYNC_REQ"}, {"client_send_ts", to_ms(device_now())}});
    }

    void on_message(const json& msg) {
        const std::string type = msg.value("type", "");
        if (type == "TIME_SYNC_RESP" && !msg.contains("offset_ms")) {
            handshake_recv_physical_ = queue_.now();
            server_recv_ = at_ms(msg.at("server_recv_ts").get<std::int64_t>());
            server_send_ = at_ms(msg.at("server_send_ts").get<std::int64_t>());
            json report = msg;
            report["type"] = "TIME_SYNC_REQ";
            report["client_recv_ts"] = to_ms(device_now());
            send(report);
        } else if (type == "TIME_SYNC_RESP") {
            established_ = true;
            estimated_offset_ms_ = msg.at("offset_ms").get<std::int64_t>();
            on_established();
        } else {
            on_other(msg);
        }
    }

    HandshakeTruth handshake_truth() const {
        // Engine time equals physical time, so server stamps are physical.
        return {device_, clock_.offset_ms, server_recv_ - handshake_send_physical_, handshake_recv_physical_ - server_send_,
                estimated_offset_ms_};
    }

    bool established() const noexcept { return established_; }

protected:
    virtual void on_established() {}
    virtual void on_other(const json&) {}

    void send(const json& msg) { net_.send(device_, engine_endpoint, msg); }

    std::string device_;
    ClockModel clock_;
    EventQueue& queue_;
    SimTransport& net_;

private:
    bool established_ = false;
    std::int64_t estimated_offset_ms_ = 0;
    Timestamp handshake_send_physical_{};
    Timestamp handshake_recv_physical_{};
    Timestamp server_recv_{};
    Timestamp server_send_{};
};

class SimObserver : public SimDevice {
public:
    SimObserver(std::string device, ClockModel clock, std::vector<ObjectId> subscribe, ReplicaClient& replica,
                EventQueue& queue, SimTransport& net)
        : SimDevice(std::move(device), clock, queue, net), subscribe_(std::move(subscribe)), replica_(replica) {}

protected:
    void on_established() override {
        if (subscribe_.empty()) return;
        json ids = json::array();
        for (const auto& id : subscribe_) ids.push_back(id.str());
        send({{"type", "SUBSCRIBE"}, {"objects", ids}});
    }

    void on_other(const json& msg) override { replica_.apply(msg); }

    std::vector<ObjectId> subscribe_;
    ReplicaClient& replica_;
};

/// Samples its player's true path, perturbs it, keeps the measurements in
/// device storage and forwards them once the session is established.
class SimPlayer : public SimObserver {
public:
    SimPlayer(const PlayerScript& script, const Scenario& scenario, ReplicaClient& replica, std::vector<TruthSample>& truth,
              EventQueue& queue, SimTransport& net)
        : SimObserver(script.device, script.clock, script.subscribe, replica, queue, net),
          script_(script),
          scenario_(scenario),
          truth_(truth) {}

    void schedule_samples() {
        const Timestamp first = std::max(scenario_.start, script_.waypoints.front().arrival);
        const Timestamp last = scenario_.start + scenario_.duration;
        std::uint64_t k = 0;
        for (Timestamp t = first; t <= last; t += scenario_.sampling_interval, ++k) {
            queue_.schedule(t, [this, k] { sample(k); });
        }
    }

protected:
    void on_established() override {
        SimObserver::on_established();
        flush();
    }

private:
    void sample(std::uint64_t k) {
        const Timestamp t = queue_.now();
        const std::uint64_t base = mix_seed(scenario_.seed, device_);
        const GeoPoint truth = truth_position(script_.waypoints, t);
        const PositionSample pos = sample_position(truth, scenario_.measurement, mix_seed(base, 2 * k));
        const Timestamp device_ts = measure_time(t, clock_, mix_seed(base, 2 * k + 1));
        const std::uint64_t seq = k + 1;
        truth_.push_back({script_.object, device_, seq, t, truth, pos.measured, pos.displacement_m, device_ts});
        json msg{{"type", "SNAPSHOT"},
                 {"object", script_.object.str()},
                 {"lat", pos.measured.lat},
                 {"lon", pos.measured.lon},
                 {"device_ts_ms", to_ms(device_ts)},
                 {"seq", seq}};
        if (pos.measured.layer) msg["layer"] = *pos.measured.layer;
        storage_.push_back(std::move(msg));
        if (established()) flush();
    }

    void flush() {
        while (!storage_.empty()) {
            send(storage_.front());
            storage_.pop_front();
        }
    }

    const PlayerScript& script_;
    const Scenario& scenario_;
    std::vector<TruthSample>& truth_;
    std::deque<json> storage_;
};

} // namespace detail

/// Runs a scenario to quiescence. Fully deterministic per seed.
inline ScenarioResult run_scenario(const Scenario& s) {
    validate_scenario(s);
    EventQueue queue(s.start);
    SimTransport net(queue, s.seed);
    net.set_default_link(s.link);

    ScenarioResult result;
    try {
        EngineSetup setup{codec::taxonomy_from_json(s.taxonomy), codec::zones_from_json(s.zones), std::nullopt};
        if (s.quest) setup.quest = codec::quest_from_json(*s.quest);
        for (const auto& p : s.players) {
            if (!setup.state.has_object(p.object)) throw error(errc::invalid_scenario, "unknown player object " + p.object.str());
        }
        result.engine = std::make_unique<Engine>(std::move(setup), [&queue] { return queue.now(); });
    } catch (const error& e) {
        if (e.code() == errc::invalid_scenario) throw;
        throw error(errc::invalid_scenario, e.what());
    }
    Engine& engine = *result.engine;

    if (!s.dropped_updates.empty()) {
        net.set_drop_rule([&s](const std::string&, const std::string& to, const json& msg) {
            if (msg.value("type", "") != "UPDATE") return false;
            for (const auto& d : s.dropped_updates) {
                if (d.to == to && d.object.str() == msg.at("object").get<std::string>() &&
                    d.version == msg.at("version").get<std::uint64_t>()) {
                    return true;
                }
            }
            return false;
        });
    }

    std::vector<std::unique_ptr<detail::SimDevice>> devices;
    for (const auto& p : s.players) {
        if (p.uplink) net.set_link(p.device, detail::engine_endpoint, *p.uplink);
        if (p.downlink) net.set_link(detail::engine_endpoint, p.device, *p.downlink);
        auto player = std::make_unique<detail::SimPlayer>(p, s, result.clients[p.device], result.truth, queue, net);
        player->schedule_samples();
        devices.push_back(std::move(player));
    }
    for (const auto& o : s.observers) {
        devices.push_back(std::make_unique<detail::SimObserver>(o.device, o.clock, o.subscribe, result.clients[o.device], queue, net));
    }

    net.attach(detail::engine_endpoint, [&](const std::string& from, const std::string& line) {
        for (auto& out : engine.receive(from, line)) net.send(detail::engine_endpoint, out.to, out.message);
    });
    for (auto& d : devices) {
        detail::SimDevice* dev = d.get();
        net.attach(dev->device(), [dev](const std::string&, const std::string& line) { dev->on_message(json::parse(line)); });
        queue.schedule(s.start, [dev] { dev->start(); });
    }

    queue.run();

    for (const auto& d : devices) result.handshakes.push_back(d->handshake_truth());
    result.messages_sent = net.sent();
    result.messages_dropped = net.dropped();
    return result;
}

/// Writes the run's artifacts: events.jsonl, observations.jsonl, truth.jsonl,
/// taxonomy.json, zones.json, quest.json and replicas.json.
inline void write_outputs(const ScenarioResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path out(dir);
    codec::write_text_file((out / "events.jsonl").string(), r.event_log());

    const Engine& engine = *r.engine;
    engine.store().read([&](const TriadState& s) {
        std::ostringstream obs;
        codec::write_observations(obs, s.log());
        codec::write_text_file((out / "observations.jsonl").string(), obs.str());
        codec::write_text_file((out / "taxonomy.json").string(), codec::taxonomy_to_json(s).dump(2) + "\n");
        json replicas = json::object();
        for (const auto& [device, client] : r.clients) replicas[device] = replica_check(client, s);
        codec::write_text_file((out / "replicas.json").string(), replicas.dump(2) + "\n");
    });

    std::string truth;
    for (const auto& t : r.truth) {
        truth += json{{"object", t.object.str()},
                      {"device", t.device},
                      {"seq", t.seq},
                      {"physical_ts_ms", to_ms(t.physical_time)},
                      {"truth", codec::point_to_json(t.truth)},
                      {"measured", codec::point_to_json(t.measured)},
                      {"displacement_m", t.displacement_m},
                      {"device_ts_ms", to_ms(t.device_time)}}
                     .dump();
        truth.push_back('\n');
    }
    codec::write_text_file((out / "truth.jsonl").string(), truth);
    codec::write_text_file((out / "zones.json").string(), codec::zones_to_json(engine.zones()).dump(2) + "\n");

    json quest = nullptr;
    if (const QuestTracker* q = engine.quests()) {
        std::vector<ObjectId> groups;
        json progress = json::array();
        for (const auto& [g, p] : q->all()) {
            groups.push_back(g);
            progress.push_back(codec::progress_to_json(p));
        }
        quest = codec::quest_to_json(q->graph(), groups);
        quest["progress"] = progress;
    }
    codec::write_text_file((out / "quest.json").string(), quest.dump(2) + "\n");
}

} // namespace triad
