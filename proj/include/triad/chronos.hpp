#pragma once

// The WHEN: integer-millisecond timestamps, intervals, temporal distance and
// the 13 Allen relations.

#include "triad/error.hpp"

#include <chrono>
#include <cstdint>
#include <string_view>

namespace triad {

using Duration = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Duration>;

constexpr Timestamp at_ms(std::int64_t ms) noexcept { return Timestamp{Duration{ms}}; }
constexpr std::int64_t to_ms(Timestamp t) noexcept { return t.time_since_epoch().count(); }

/// |b - a|; symmetric, zero iff equal.
constexpr Duration temporal_distance(Timestamp a, Timestamp b) noexcept { return a < b ? b - a : a - b; }

/// Closed interval [start, end]; start == end is a point interval.
struct Interval {
    Timestamp start;
    Timestamp end;

    static Interval make(Timestamp start, Timestamp end) {
        if (end < start) throw error(errc::invalid_argument, "interval end precedes start");
        return Interval{start, end};
    }

    constexpr bool proper() const noexcept { return start < end; }
    constexpr bool includes(Timestamp t) const noexcept { return start <= t && t <= end; }

    friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

enum class AllenRelation {
    before,
    meets,
    overlaps,
    starts,
    during,
    finishes,
    equals,
    after,
    met_by,
    overlapped_by,
    started_by,
    contains,
    finished_by,
};

constexpr AllenRelation inverse(AllenRelation r) noexcept {
    switch (r) {
    case AllenRelation::before: return AllenRelation::after;
    case AllenRelation::meets: return AllenRelation::met_by;
    case AllenRelation::overlaps: return AllenRelation::overlapped_by;
    case AllenRelation::starts: return AllenRelation::started_by;
    case AllenRelation::during: return AllenRelation::contains;
    case AllenRelation::finishes: return AllenRelation::finished_by;
    case AllenRelation::equals: return AllenRelation::equals;
    case AllenRelation::after: return AllenRelation::before;
    case AllenRelation::met_by: return AllenRelation::meets;
    case AllenRelation::overlapped_by: return AllenRelation::overlaps;
    case AllenRelation::started_by: return AllenRelation::starts;
    case AllenRelation::contains: return AllenRelation::during;
    case AllenRelation::finished_by: return AllenRelation::finishes;
    }
    return r;
}

constexpr std::string_view to_string(AllenRelation r) noexcept {
    switch (r) {
    case AllenRelation::before: return "BEFORE";
    case AllenRelation::meets: return "MEETS";
    case AllenRelation::overlaps: return "OVERLAPS";
    case AllenRelation::starts: return "STARTS";
    case AllenRelation::during: return "DURING";
    case AllenRelation::finishes: return "FINISHES";
    case AllenRelation::equals: return "EQUALS";
    case AllenRelation::after: return "AFTER";
    case AllenRelation::met_by: return "MET_BY";
    case AllenRelation::overlapped_by: return "OVERLAPPED_BY";
    case AllenRelation::started_by: return "STARTED_BY";
    case AllenRelation::contains: return "CONTAINS";
    case AllenRelation::finished_by: return "FINISHED_BY";
    }
    return "?";
}

/// The unique Allen relation of a to b. Both intervals must be proper.
inline AllenRelation interval_relation(const Interval& a, const Interval& b) {
    if (!a.proper() || !b.proper()) throw error(errc::degenerate_interval, "Allen relations need start < end");
    if (a.end < b.start) return AllenRelation::before;
    if (a.end == b.start) return AllenRelation::meets;
    if (b.end < a.start) return AllenRelation::after;
    if (b.end == a.start) return AllenRelation::met_by;
    if (a.start == b.start) {
        if (a.end == b.end) return AllenRelation::equals;
        return a.end < b.end ? AllenRelation::starts : AllenRelation::started_by;
    }
    if (a.end == b.end) return a.start > b.start ? AllenRelation::finishes : AllenRelation::finished_by;
    if (a.start > b.start && a.end < b.end) return AllenRelation::during;
    if (a.start < b.start && a.end > b.end) return AllenRelation::contains;
    return a.start < b.start ? AllenRelation::overlaps : AllenRelation::overlapped_by;
}

/// Where an instant falls relative to an interval.
enum class PointRelation { before, at_start, during, at_end, after };

constexpr PointRelation point_relation(Timestamp t, const Interval& w) noexcept {
    if (t < w.start) return PointRelation::before;
    if (t == w.start) return PointRelation::at_start;
    if (t < w.end) return PointRelation::during;
    if (t == w.end) return PointRelation::at_end;
    return PointRelation::after;
}

} // namespace triad
