#pragma once

// JSON documents and JSON-lines logs: zone files, quest graphs, taxonomy
// configs, observation logs and the canonical object state used for
// replication.

#include "triad/chronos.hpp"
#include "triad/error.hpp"
#include "triad/geo.hpp"
#include "triad/observation.hpp"
#include "triad/quest.hpp"
#include "triad/snapshot_log.hpp"
#include "triad/stquery.hpp"
#include "triad/triad_store.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace triad {

using json = nlohmann::json;

namespace codec {

template <class F>
decltype(auto) guarded(errc code, const std::string& what, F&& f) {
    try {
        return std::forward<F>(f)();
    } catch (const json::exception& e) {
        throw error(code, what + ": " + e.what());
    }
}

inline json point_to_json(const GeoPoint& p) {
    json j{{"lat", p.lat}, {"lon", p.lon}};
    if (p.layer) j["layer"] = *p.layer;
    return j;
}

inline GeoPoint point_from_json(const json& j) {
    std::optional<int> layer;
    if (j.contains("layer") && !j.at("layer").is_null()) layer = j.at("layer").get<int>();
    return GeoPoint::make(j.at("lat").get<double>(), j.at("lon").get<double>(), layer);
}

inline json zone_to_json(const Zone& z) {
    if (const auto* c = std::get_if<CircleShape>(&z.shape)) {
        return {{"id", z.id}, {"type", "circle"}, {"center", point_to_json(c->center)}, {"radius_m", c->radius_m}};
    }
    json ring = json::array();
    for (const auto& p : std::get<PolygonShape>(z.shape).boundary) ring.push_back(point_to_json(p));
    return {{"id", z.id}, {"type", "polygon"}, {"boundary", ring}};
}

inline Zone zone_from_json(const json& j) {
    return guarded(errc::invalid_zone, "zone", [&] {
        Zone z;
        z.id = j.at("id").get<std::string>();
        const auto type = j.at("type").get<std::string>();
        if (type == "circle") {
            z.shape = CircleShape{point_from_json(j.at("center")), j.at("radius_m").get<double>()};
        } else if (type == "polygon") {
            PolygonShape poly;
            for (const auto& p : j.at("boundary")) poly.boundary.push_back(point_from_json(p));
            z.shape = std::move(poly);
        } else {
            throw error(errc::invalid_zone, "unknown zone type '" + type + "'");
        }
        validate_zone(z);
        return z;
    });
}

using ZoneMap = std::map<std::string, Zone>;

inline ZoneMap zones_from_json(const json& doc) {
    ZoneMap out;
    const json& arr = doc.is_array() ? doc : doc.at("zones");
    for (const auto& j : arr) {
        Zone z = zone_from_json(j);
        const std::string id = z.id;
        if (!out.emplace(id, std::move(z)).second) throw error(errc::invalid_zone, "duplicate zone id '" + id + "'");
    }
    return out;
}

inline json zones_to_json(const ZoneMap& zones) {
    json arr = json::array();
    for (const auto& [_, z] : zones) arr.push_back(zone_to_json(z));
    return {{"zones", arr}};
}

struct QuestDocument {
    QuestGraph graph;
    std::vector<ObjectId> groups;
};

inline QuestDocument quest_from_json(const json& j) {
    return guarded(errc::invalid_argument, "quest graph", [&] {
        QuestDocument doc;
        for (const auto& s : j.at("stages")) doc.graph.stages.insert(s.get<std::string>());
        for (const auto& e : j.value("edges", json::array())) {
            doc.graph.edges.emplace(e.at("from").get<std::string>(), e.at("to").get<std::string>());
        }
        doc.graph.start = j.at("start").get<std::string>();
        for (const auto& g : j.value("groups", json::array())) doc.groups.emplace_back(g.get<std::string>());
        validate_graph(doc.graph);
        return doc;
    });
}

inline json quest_to_json(const QuestGraph& g, const std::vector<ObjectId>& groups = {}) {
    json edges = json::array();
    for (const auto& [from, to] : g.edges) edges.push_back({{"from", from}, {"to", to}});
    json gs = json::array();
    for (const auto& id : groups) gs.push_back(id.str());
    return {{"stages", g.stages}, {"edges", edges}, {"start", g.start}, {"groups", gs}};
}

inline json attribute_to_json(const AttributeValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

inline AttributeValue attribute_from_json(const json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw error(errc::invalid_argument, "attribute values must be string, number or boolean");
}

/// Builds a taxonomy from `{"objects":[{"id","parent","attributes","members"}]}`.
/// Parents may appear after their children in the document.
inline TriadState taxonomy_from_json(const json& doc) {
    return guarded(errc::invalid_argument, "taxonomy", [&] {
        struct Entry {
            ObjectId id;
            std::optional<ObjectId> parent;
            AttributeMap attributes;
            std::vector<ObjectId> members;
        };
        std::vector<Entry> pending;
        for (const auto& j : doc.at("objects")) {
            Entry e{ObjectId(j.at("id").get<std::string>()), std::nullopt, {}, {}};
            if (j.contains("parent") && !j.at("parent").is_null()) e.parent = ObjectId(j.at("parent").get<std::string>());
            const json attrs = j.value("attributes", json::object());
            for (const auto& [k, v] : attrs.items()) e.attributes[k] = attribute_from_json(v);
            for (const auto& m : j.value("members", json::array())) e.members.emplace_back(m.get<std::string>());
            pending.push_back(std::move(e));
        }
        TriadState state;
        std::vector<Entry> deferred;
        while (!pending.empty()) {
            deferred.clear();
            for (auto& e : pending) {
                if (e.parent && !state.has_object(*e.parent) && *e.parent != e.id) {
                    deferred.push_back(std::move(e));
                    continue;
                }
                state.create_object(e.id, e.parent, e.attributes);
            }
            if (deferred.size() == pending.size()) {
                // Nothing resolved in a full pass: a missing parent or a cycle.
                const auto& e = deferred.front();
                const bool cyclic = std::any_of(deferred.begin(), deferred.end(),
                                                [&](const Entry& d) { return d.id == *e.parent; });
                throw error(cyclic ? errc::cycle_detected : errc::unknown_parent, e.id.str() + " -> " + e.parent->str());
            }
            std::swap(pending, deferred);
        }
        for (const auto& j : doc.at("objects")) {
            const ObjectId group(j.at("id").get<std::string>());
            for (const auto& m : j.value("members", json::array())) state.add_member(group, ObjectId(m.get<std::string>()));
        }
        return state;
    });
}

inline json object_to_config_json(const GameObject& obj) {
    json attrs = json::object();
    for (const auto& [k, v] : obj.attributes) attrs[k] = attribute_to_json(v);
    json members = json::array();
    for (const auto& m : obj.members) members.push_back(m.str());
    return {{"id", obj.id.str()},
            {"parent", obj.parent ? json(obj.parent->str()) : json(nullptr)},
            {"attributes", attrs},
            {"members", members}};
}

inline json taxonomy_to_json(const TriadState& state) {
    json arr = json::array();
    for (const auto& [_, obj] : state.objects()) arr.push_back(object_to_config_json(obj));
    return {{"objects", arr}};
}

inline json location_to_json(const std::optional<Location>& loc) {
    if (!loc) return nullptr;
    if (const auto* z = std::get_if<ZoneRef>(&*loc)) return {{"zone", z->zone}};
    return point_to_json(std::get<GeoPoint>(*loc));
}

/// Canonical replicated state of one object. Keys are sorted, so equal
/// states always serialize to identical bytes.
inline json object_state_json(const TriadState& state, const ObjectId& id) {
    const GameObject& obj = state.object(id);
    json j = object_to_config_json(obj);
    j["version"] = obj.version;
    j["where"] = location_to_json(state.locate(id));
    return j;
}

inline std::string canonical_state(const TriadState& state, const ObjectId& id) { return object_state_json(state, id).dump(); }

inline json record_to_json(const ObservationRecord& r) {
    return {{"object", r.object.str()},
            {"lat", r.point.lat},
            {"lon", r.point.lon},
            {"layer", r.point.layer ? json(*r.point.layer) : json(nullptr)},
            {"device_ts_ms", to_ms(r.device_timestamp)},
            {"virtual_ts_ms", to_ms(r.virtual_timestamp)},
            {"device", r.device},
            {"seq", r.seq}};
}

inline ObservationRecord record_from_json(const json& j) {
    return guarded(errc::malformed_message, "observation", [&] {
        std::optional<int> layer;
        if (j.contains("layer") && !j.at("layer").is_null()) layer = j.at("layer").get<int>();
        return ObservationRecord{ObjectId(j.at("object").get<std::string>()),
                                 GeoPoint::make(j.at("lat").get<double>(), j.at("lon").get<double>(), layer),
                                 at_ms(j.at("device_ts_ms").get<std::int64_t>()),
                                 at_ms(j.at("virtual_ts_ms").get<std::int64_t>()),
                                 j.at("device").get<std::string>(),
                                 j.at("seq").get<std::uint64_t>()};
    });
}

/// One record per line, in insertion order.
inline void write_observations(std::ostream& out, const SnapshotLog& log) {
    for (const auto& r : log.raw()) out << record_to_json(r).dump() << '\n';
}

inline std::vector<ObservationRecord> read_observations(std::istream& in) {
    std::vector<ObservationRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw error(errc::malformed_message, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline json event_to_json(const ZoneEvent& e) {
    return {{"object", e.object.str()},
            {"zone", e.zone},
            {"kind", std::string(to_string(e.kind))},
            {"time_ms", to_ms(e.time)},
            {"interpolated", e.interpolated}};
}

inline json trajectory_to_json(const Trajectory& t) {
    json pts = json::array();
    for (const auto& p : t.points) {
        json j = point_to_json(p.point);
        j["t_ms"] = to_ms(p.time);
        pts.push_back(j);
    }
    return {{"object", t.object.str()}, {"points", pts}};
}

inline json progress_to_json(const GroupProgress& p) {
    json hist = json::array();
    for (const auto& v : p.history) hist.push_back({{"zone", v.zone}, {"time_ms", to_ms(v.time)}});
    return {{"group", p.group.str()}, {"current", p.current}, {"history", hist}};
}

inline GroupProgress progress_from_json(const json& j) {
    GroupProgress p{ObjectId(j.at("group").get<std::string>()), j.at("current").get<std::string>(), {}};
    for (const auto& v : j.at("history")) p.history.push_back({v.at("zone").get<std::string>(), at_ms(v.at("time_ms").get<std::int64_t>())});
    return p;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw error(errc::io_error, path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_error, "cannot write " + path);
    out << text;
}

} // namespace codec
} // namespace triad
