#pragma once

// JSON request/response surface for triad queries, shared by the engine's
// QUERY message and the command-line tool.
//
// Request shapes ("form" selects the query):
//   {"form":"where","object":ID,"from":MS,"to":MS}
//   {"form":"what","zone":ZONE,"from":MS,"to":MS}
//   {"form":"when","object":ID,"zone":ZONE}
//   {"form":"dist","a":ID,"b":ID|ZONE,"at":MS}
//   {"form":"locate","object":ID}
//   {"form":"occupants","zone":ZONE}
//   {"form":"stage","group":ID}

#include "triad/codec.hpp"
#include "triad/quest.hpp"
#include "triad/stquery.hpp"
#include "triad/triad_store.hpp"

#include <string>

namespace triad {

struct QueryContext {
    const TriadState& state;
    const codec::ZoneMap& zones;
    const QuestTracker* quests = nullptr;
};

namespace detail {

inline const Zone& zone_by_id(const codec::ZoneMap& zones, const std::string& id) {
    auto it = zones.find(id);
    if (it == zones.end()) throw error(errc::invalid_zone, "unknown zone '" + id + "'");
    return it->second;
}

inline const json& field(const json& req, const char* name) {
    if (!req.is_object() || !req.contains(name)) throw error(errc::malformed_message, std::string("missing field '") + name + "'");
    return req.at(name);
}

inline std::string string_field(const json& req, const char* name) {
    const json& v = field(req, name);
    if (!v.is_string()) throw error(errc::malformed_message, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

inline Timestamp time_field(const json& req, const char* name) {
    const json& v = field(req, name);
    if (!v.is_number_integer()) throw error(errc::malformed_message, std::string("field '") + name + "' must be integer ms");
    return at_ms(v.get<std::int64_t>());
}

} // namespace detail

/// Evaluates one query against a consistent state. Throws triad::error.
inline json evaluate_query(const QueryContext& ctx, const json& req) {
    using detail::string_field;
    using detail::time_field;
    const std::string form = string_field(req, "form");
    json out{{"form", form}};
    if (form == "where") {
        const auto traj = where_of(ctx.state, ObjectId(string_field(req, "object")),
                                   Interval::make(time_field(req, "from"), time_field(req, "to")));
        out["result"] = codec::trajectory_to_json(traj);
    } else if (form == "what") {
        const auto objects = what_at(ctx.state, detail::zone_by_id(ctx.zones, string_field(req, "zone")),
                                     Interval::make(time_field(req, "from"), time_field(req, "to")));
        json arr = json::array();
        for (const auto& id : objects) arr.push_back(id.str());
        out["result"] = {{"objects", arr}};
    } else if (form == "when") {
        const auto events = when_of(ctx.state, ObjectId(string_field(req, "object")),
                                    detail::zone_by_id(ctx.zones, string_field(req, "zone")));
        json arr = json::array();
        for (const auto& e : events) arr.push_back(codec::event_to_json(e));
        out["result"] = {{"events", arr}};
    } else if (form == "dist") {
        const std::string b = string_field(req, "b");
        DistanceTarget target = ctx.zones.contains(b) ? DistanceTarget{ctx.zones.at(b)} : DistanceTarget{ObjectId(b)};
        out["result"] = {{"meters", object_distance(ctx.state, ObjectId(string_field(req, "a")), target, time_field(req, "at"))}};
    } else if (form == "locate") {
        out["result"] = {{"where", codec::location_to_json(ctx.state.locate(ObjectId(string_field(req, "object"))))}};
    } else if (form == "occupants") {
        json arr = json::array();
        for (const auto& id : ctx.state.occupants(detail::zone_by_id(ctx.zones, string_field(req, "zone")))) arr.push_back(id.str());
        out["result"] = {{"objects", arr}};
    } else if (form == "stage") {
        const ObjectId group(string_field(req, "group"));
        if (!ctx.quests) throw error(errc::unknown_group, group.str());
        out["result"] = codec::progress_to_json(ctx.quests->progress(group));
    } else {
        throw error(errc::malformed_message, "unknown query form '" + form + "'");
    }
    return out;
}

} // namespace triad
