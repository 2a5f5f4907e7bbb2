#pragma once

// The three spatiotemporal query forms over a triad state:
//   what + when  -> where   (where_of, object_distance)
//   where + when -> what    (what_at)
//   what + where -> when    (when_of)

#include "triad/chronos.hpp"
#include "triad/error.hpp"
#include "triad/geo.hpp"
#include "triad/triad_store.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace triad {

struct TrajectoryPoint {
    GeoPoint point;
    Timestamp time;
    friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Timestamps strictly increasing.
struct Trajectory {
    ObjectId object;
    std::vector<TrajectoryPoint> points;
};

enum class ZoneEventKind { enter, exit };

constexpr std::string_view to_string(ZoneEventKind k) noexcept { return k == ZoneEventKind::enter ? "ENTER" : "EXIT"; }

struct ZoneEvent {
    ObjectId object;
    std::string zone;
    ZoneEventKind kind = ZoneEventKind::enter;
    Timestamp time;
    bool interpolated = false;

    friend bool operator==(const ZoneEvent&, const ZoneEvent&) = default;
};

/// An object's records by virtual time with one record per timestamp; on
/// equal timestamps the larger (device, seq) is kept.
inline std::vector<ObservationRecord> object_track(const TriadState& state, const ObjectId& object) {
    state.object(object);
    std::vector<ObservationRecord> out;
    for (auto& rec : state.log().for_object(object)) {
        if (!out.empty() && out.back().virtual_timestamp == rec.virtual_timestamp) {
            if (fresher_than(rec, out.back())) out.back() = std::move(rec);
            continue;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

/// Position linearly interpolated in (lat, lon) between two fixes.
inline GeoPoint interpolate(const ObservationRecord& a, const ObservationRecord& b, Timestamp t) noexcept {
    if (t <= a.virtual_timestamp) return a.point;
    if (t >= b.virtual_timestamp) return b.point;
    const double f = static_cast<double>((t - a.virtual_timestamp).count()) /
                     static_cast<double>((b.virtual_timestamp - a.virtual_timestamp).count());
    const double lat = a.point.lat + f * (b.point.lat - a.point.lat);
    const double lon = a.point.lon + f * normalize_lon(b.point.lon - a.point.lon);
    return GeoPoint{lat, normalize_lon(lon), a.point.layer};
}

/// Earliest instant in (a.t, b.t] where containment differs from that at a,
/// by bisection to 1 ms. Requires containment to differ at the two fixes.
inline Timestamp crossing_time(const ObservationRecord& a, const ObservationRecord& b, const Zone& zone) {
    const bool start_state = contains(zone, a.point);
    Timestamp lo = a.virtual_timestamp;
    Timestamp hi = b.virtual_timestamp;
    while (hi - lo > Duration{1}) {
        const Timestamp mid = lo + (hi - lo) / 2;
        if (contains(zone, interpolate(a, b, mid)) == start_state) lo = mid;
        else hi = mid;
    }
    return hi;
}

/// what + when -> where: the trajectory of an object inside a closed window.
inline Trajectory where_of(const TriadState& state, const ObjectId& object, const Interval& window) {
    Trajectory traj{object, {}};
    for (const auto& rec : object_track(state, object)) {
        if (window.includes(rec.virtual_timestamp)) traj.points.push_back({rec.point, rec.virtual_timestamp});
    }
    if (traj.points.empty()) throw error(errc::empty_result, "no fixes for " + object.str() + " in window");
    return traj;
}

/// where + when -> what: objects with at least one recorded fix inside the zone
/// during the window. Positions between fixes are not inferred.
inline std::set<ObjectId> what_at(const TriadState& state, const Zone& zone, const Interval& window) {
    validate_zone(zone);
    std::set<ObjectId> out;
    for (const auto& rec : state.log().slice(window)) {
        if (!out.contains(rec.object) && contains(zone, rec.point)) out.insert(rec.object);
    }
    return out;
}

/// what + where -> when: chronological ENTER/EXIT events of an object for one
/// zone. Crossings between fixes are interpolated; a track that starts inside
/// opens with an ENTER at its first fix.
inline std::vector<ZoneEvent> when_of(const TriadState& state, const ObjectId& object, const Zone& zone) {
    validate_zone(zone);
    const auto track = object_track(state, object);
    std::vector<ZoneEvent> events;
    if (track.empty()) return events;
    bool inside = contains(zone, track.front().point);
    if (inside) events.push_back({object, zone.id, ZoneEventKind::enter, track.front().virtual_timestamp, false});
    for (std::size_t i = 1; i < track.size(); ++i) {
        const bool now = contains(zone, track[i].point);
        if (now == inside) continue;
        events.push_back({object, zone.id, now ? ZoneEventKind::enter : ZoneEventKind::exit,
                          crossing_time(track[i - 1], track[i], zone), true});
        inside = now;
    }
    return events;
}

/// The most recent change for an object at a zone ("when did it last change or appear"),
/// if any.
inline std::optional<ZoneEvent> last_change(const TriadState& state, const ObjectId& object, const Zone& zone) {
    auto events = when_of(state, object, zone);
    if (events.empty()) return std::nullopt;
    return events.back();
}

/// Latest fix at or before `at` (step semantics).
inline GeoPoint position_at(const TriadState& state, const ObjectId& object, Timestamp at) {
    const auto track = object_track(state, object);
    const ObservationRecord* best = nullptr;
    for (const auto& rec : track) {
        if (rec.virtual_timestamp > at) break;
        best = &rec;
    }
    if (!best) throw error(errc::no_fix_before, object.str() + " has no fix at or before " + std::to_string(to_ms(at)));
    return best->point;
}

using DistanceTarget = std::variant<ObjectId, Zone>;

/// Distance from an object's position at `at` to another object's position
/// at `at`, or to a zone.
inline double object_distance(const TriadState& state, const ObjectId& a, const DistanceTarget& b, Timestamp at) {
    const GeoPoint pa = position_at(state, a, at);
    if (const auto* zone = std::get_if<Zone>(&b)) {
        validate_zone(*zone);
        return distance_to_zone(pa, *zone);
    }
    return geodesic_distance(pa, position_at(state, std::get<ObjectId>(b), at));
}

// Store overloads: each query runs against one consistent snapshot.

inline Trajectory where_of(const TriadStore& store, const ObjectId& object, const Interval& window) {
    return store.read([&](const TriadState& s) { return where_of(s, object, window); });
}
inline std::set<ObjectId> what_at(const TriadStore& store, const Zone& zone, const Interval& window) {
    return store.read([&](const TriadState& s) { return what_at(s, zone, window); });
}
inline std::vector<ZoneEvent> when_of(const TriadStore& store, const ObjectId& object, const Zone& zone) {
    return store.read([&](const TriadState& s) { return when_of(s, object, zone); });
}
inline double object_distance(const TriadStore& store, const ObjectId& a, const DistanceTarget& b, Timestamp at) {
    return store.read([&](const TriadState& s) { return object_distance(s, a, b, at); });
}

} // namespace triad
