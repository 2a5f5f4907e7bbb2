#pragma once

// Game engine server. Holds the primary copy of every object; devices feed
// it snapshots, and subscribed clients receive UPDATE messages that keep
// their redundant copies current.
//
// Wire protocol: one JSON object per line, "type" selects the kind.
//   HELLO          {device}
//   TIME_SYNC_REQ  {client_send_ts}                  -> TIME_SYNC_RESP {client_send_ts, server_recv_ts, server_send_ts}
//   TIME_SYNC_REQ  {client_send_ts, server_recv_ts,
//                   server_send_ts, client_recv_ts}  -> TIME_SYNC_RESP {offset_ms, established:true}
//   SNAPSHOT       {object, lat, lon, layer?, device_ts_ms, seq}
//   SUBSCRIBE      {objects:[id...]}                 -> STATE {objects:[{object, version, payload}]}
//   QUERY          {query:{form, ...}, id?}          -> RESULT {id?, form, result}
//   UPDATE         {object, version, payload}        (server -> client)
//   ERROR          {code, message}                   (server -> client)
// `payload` is the canonical object state (see codec::canonical_state).

#include "triad/codec.hpp"
#include "triad/error.hpp"
#include "triad/query_api.hpp"
#include "triad/quest.hpp"
#include "triad/sensing.hpp"
#include "triad/stquery.hpp"
#include "triad/triad_store.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace triad {

struct Outgoing {
    std::string to; ///< Connection id.
    json message;
};

enum class SessionPhase { fresh, greeted, established };

struct SessionState {
    std::string connection;
    std::string device;
    SessionPhase phase = SessionPhase::fresh;
    Duration estimated_offset{0}; ///< Engine time minus device time.
    std::set<ObjectId> subscriptions;
    std::map<ObjectId, std::uint64_t> last_seq;
};

struct EngineSetup {
    TriadState state;
    codec::ZoneMap zones;
    std::optional<codec::QuestDocument> quest;
};

class Engine {
public:
    using Clock = std::function<Timestamp()>;
    using EventSink = std::function<void(const json&)>;

    Engine(EngineSetup setup, Clock clock) : store_(std::move(setup.state)), zones_(std::move(setup.zones)), clock_(std::move(clock)) {
        if (setup.quest) {
            for (const auto& stage : setup.quest->graph.stages) {
                if (!zones_.contains(stage)) throw error(errc::invalid_zone, "quest stage '" + stage + "' has no zone");
            }
            quest_.emplace(setup.quest->graph);
            const Timestamp now = clock_();
            store_.write([&](TriadState& s) {
                for (const auto& group : setup.quest->groups) {
                    if (!s.is_group(group)) throw error(errc::not_a_group, group.str());
                    quest_->enroll(group, now);
                    s.bind_zone(group, quest_->graph().start);
                }
            });
        }
    }

    void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

    /// Parses one framed line and handles it; module errors become an ERROR
    /// reply to the sender.
    std::vector<Outgoing> receive(const std::string& connection, const std::string& line) {
        try {
            json msg;
            try {
                msg = json::parse(line);
            } catch (const json::exception& e) {
                throw error(errc::malformed_message, e.what());
            }
            return handle_message(connection, msg);
        } catch (const error& e) {
            return {{connection, {{"type", "ERROR"}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
        }
    }

    /// Handles one decoded message. Throws triad::error.
    std::vector<Outgoing> handle_message(const std::string& connection, const json& msg) {
        if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
            throw error(errc::malformed_message, "message without type");
        }
        const std::string type = msg.at("type").get<std::string>();
        SessionState& session = sessions_[connection];
        session.connection = connection;
        if (type == "HELLO") return on_hello(session, msg);
        if (type == "TIME_SYNC_REQ") return on_time_sync(session, msg);
        if (session.phase != SessionPhase::established) {
            throw error(errc::protocol_error, type + " before HELLO and TIME_SYNC completed");
        }
        if (type == "SNAPSHOT") return on_snapshot(session, msg);
        if (type == "SUBSCRIBE") return on_subscribe(session, msg);
        if (type == "QUERY") return on_query(session, msg);
        throw error(errc::protocol_error, "unexpected message type '" + type + "'");
    }

    /// Drops a connection and its subscriptions.
    void disconnect(const std::string& connection) {
        auto it = sessions_.find(connection);
        if (it == sessions_.end()) return;
        for (const auto& id : it->second.subscriptions) subscribers_[id].erase(connection);
        if (!it->second.device.empty()) devices_.erase(it->second.device);
        sessions_.erase(it);
    }

    /// UPDATE messages for the object's current primary state, one per subscriber.
    std::vector<Outgoing> disseminate(const ObjectId& id) {
        std::vector<Outgoing> out;
        auto it = subscribers_.find(id);
        if (it == subscribers_.end() || it->second.empty()) return out;
        const json update = store_.read([&](const TriadState& s) { return update_message(s, id); });
        for (const auto& conn : it->second) {
            out.push_back({conn, update});
            log_event({{"kind", "update"}, {"object", id.str()}, {"version", update.at("version")}, {"to", conn}});
        }
        return out;
    }

    json query(const json& request) const {
        return store_.read([&](const TriadState& s) {
            return evaluate_query(QueryContext{s, zones_, quest_ ? &*quest_ : nullptr}, request);
        });
    }

    std::string canonical(const ObjectId& id) const {
        return store_.read([&](const TriadState& s) { return codec::canonical_state(s, id); });
    }

    const TriadStore& store() const noexcept { return store_; }
    const codec::ZoneMap& zones() const noexcept { return zones_; }
    const QuestTracker* quests() const noexcept { return quest_ ? &*quest_ : nullptr; }
    const std::vector<json>& events() const noexcept { return events_; }

    const SessionState* session(const std::string& connection) const {
        auto it = sessions_.find(connection);
        return it == sessions_.end() ? nullptr : &it->second;
    }

private:
    static json update_message(const TriadState& s, const ObjectId& id) {
        return {{"type", "UPDATE"},
                {"object", id.str()},
                {"version", s.object(id).version},
                {"payload", codec::canonical_state(s, id)}};
    }

    std::vector<Outgoing> on_hello(SessionState& session, const json& msg) {
        if (session.phase != SessionPhase::fresh) throw error(errc::protocol_error, "duplicate HELLO");
        const std::string device = detail::string_field(msg, "device");
        if (device.empty()) throw error(errc::malformed_message, "empty device id");
        if (auto it = devices_.find(device); it != devices_.end() && it->second != session.connection) {
            throw error(errc::protocol_error, "device '" + device + "' already has a session");
        }
        devices_[device] = session.connection;
        session.device = device;
        session.phase = SessionPhase::greeted;
        log_event({{"kind", "hello"}, {"conn", session.connection}, {"device", device}});
        return {};
    }

    std::vector<Outgoing> on_time_sync(SessionState& session, const json& msg) {
        if (session.phase == SessionPhase::fresh) throw error(errc::protocol_error, "TIME_SYNC_REQ before HELLO");
        const Timestamp client_send = detail::time_field(msg, "client_send_ts");
        if (!msg.contains("client_recv_ts")) {
            const Timestamp recv = clock_();
            const Timestamp send = clock_();
            return {{session.connection,
                     {{"type", "TIME_SYNC_RESP"},
                      {"client_send_ts", to_ms(client_send)},
                      {"server_recv_ts", to_ms(recv)},
                      {"server_send_ts", to_ms(send)}}}};
        }
        const Handshake h{client_send, detail::time_field(msg, "server_recv_ts"), detail::time_field(msg, "server_send_ts"),
                          detail::time_field(msg, "client_recv_ts")};
        session.estimated_offset = estimate_offset(h);
        session.phase = SessionPhase::established;
        log_event({{"kind", "time_sync"}, {"conn", session.connection}, {"device", session.device},
                   {"offset_ms", session.estimated_offset.count()}});
        return {{session.connection,
                 {{"type", "TIME_SYNC_RESP"}, {"offset_ms", session.estimated_offset.count()}, {"established", true}}}};
    }

    std::vector<Outgoing> on_snapshot(SessionState& session, const json& msg) {
        DeviceSnapshot raw;
        try {
            raw.object = ObjectId(detail::string_field(msg, "object"));
            raw.lat = detail::field(msg, "lat").get<double>();
            raw.lon = detail::field(msg, "lon").get<double>();
            if (msg.contains("layer") && !msg.at("layer").is_null()) raw.layer = msg.at("layer").get<int>();
            raw.device_timestamp = detail::time_field(msg, "device_ts_ms");
            raw.seq = detail::field(msg, "seq").get<std::uint64_t>();
        } catch (const json::exception& e) {
            throw error(errc::malformed_message, e.what());
        } catch (const error& e) {
            if (e.code() == errc::invalid_argument) throw error(errc::malformed_message, e.what());
            throw;
        }
        raw.device = session.device;

        std::vector<ZoneEvent> fresh_events;
        std::vector<StageChange> changes;
        const ObservationRecord rec = store_.write([&](TriadState& s) {
            // Device offset is device minus engine: the negated estimate.
            ObservationRecord r = ingest(raw, -session.estimated_offset, s);
            fresh_events = detect_zone_events(s, r.object);
            if (quest_) {
                for (const auto& e : fresh_events) {
                    for (auto& c : quest_->on_event(e, s)) {
                        s.bind_zone(c.group, c.to);
                        changes.push_back(std::move(c));
                    }
                }
            }
            return r;
        });
        session.last_seq[rec.object] = rec.seq;

        log_event({{"kind", "snapshot"}, {"record", codec::record_to_json(rec)}});
        for (const auto& e : fresh_events) log_event({{"kind", "zone_event"}, {"event", codec::event_to_json(e)}});
        for (const auto& c : changes) {
            log_event({{"kind", "quest_advance"},
                       {"group", c.group.str()},
                       {"from", c.from},
                       {"to", c.to},
                       {"time_ms", to_ms(c.time)},
                       {"trigger", c.trigger.str()}});
        }

        std::vector<Outgoing> out = disseminate(rec.object);
        std::set<ObjectId> groups;
        for (const auto& c : changes) groups.insert(c.group);
        for (const auto& g : groups) {
            auto more = disseminate(g);
            out.insert(out.end(), more.begin(), more.end());
        }
        return out;
    }

    std::vector<ZoneEvent> detect_zone_events(const TriadState& s, const ObjectId& object) {
        std::vector<ZoneEvent> fresh;
        for (const auto& [zone_id, zone] : zones_) {
            auto events = when_of(s, object, zone);
            std::size_t& seen = emitted_[{object, zone_id}];
            for (std::size_t i = seen; i < events.size(); ++i) fresh.push_back(events[i]);
            seen = std::max(seen, events.size());
        }
        std::stable_sort(fresh.begin(), fresh.end(), [](const ZoneEvent& a, const ZoneEvent& b) { return a.time < b.time; });
        return fresh;
    }

    std::vector<Outgoing> on_subscribe(SessionState& session, const json& msg) {
        const json& ids = detail::field(msg, "objects");
        if (!ids.is_array()) throw error(errc::malformed_message, "objects must be an array");
        std::vector<ObjectId> wanted;
        for (const auto& j : ids) {
            if (!j.is_string()) throw error(errc::malformed_message, "object ids must be strings");
            wanted.emplace_back(j.get<std::string>());
        }
        json states = json::array();
        store_.read([&](const TriadState& s) {
            for (const auto& id : wanted) s.object(id);
            for (const auto& id : wanted) {
                const json u = update_message(s, id);
                states.push_back({{"object", id.str()}, {"version", u.at("version")}, {"payload", u.at("payload")}});
            }
        });
        for (const auto& id : wanted) {
            session.subscriptions.insert(id);
            subscribers_[id].insert(session.connection);
        }
        return {{session.connection, {{"type", "STATE"}, {"objects", states}}}};
    }

    std::vector<Outgoing> on_query(SessionState& session, const json& msg) {
        json result = query(detail::field(msg, "query"));
        result["type"] = "RESULT";
        if (msg.contains("id")) result["id"] = msg.at("id");
        return {{session.connection, result}};
    }

    void log_event(json e) {
        e["seq"] = events_.size();
        e["t_ms"] = to_ms(clock_());
        events_.push_back(e);
        if (sink_) sink_(events_.back());
    }

    TriadStore store_;
    codec::ZoneMap zones_;
    std::optional<QuestTracker> quest_;
    Clock clock_;
    EventSink sink_;
    std::map<std::string, SessionState> sessions_;
    std::map<std::string, std::string> devices_;
    std::map<ObjectId, std::set<std::string>> subscribers_;
    std::map<std::pair<ObjectId, std::string>, std::size_t> emitted_;
    std::vector<json> events_;
};

} // namespace triad
