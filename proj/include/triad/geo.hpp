#pragma once

// The WHERE: georeferenced points, zones, spherical distance and the
// topological relations a game needs between two zones.

#include "triad/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace triad {

/// Mean Earth radius (IUGG), meters.
inline constexpr double earth_radius_m = 6371008.8;

/// Tolerance for EQUALS/TOUCHES classification, meters.
inline constexpr double geo_epsilon_m = 0.01;

/// Zones larger than this are rejected (tangent-plane geometry is only valid at city scale).
inline constexpr double max_zone_diameter_m = 10000.0;

constexpr double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

/// Wraps a longitude into [-180, 180).
inline double normalize_lon(double lon) noexcept {
    if (lon >= -180.0 && lon < 180.0) return lon;
    double x = std::fmod(lon + 180.0, 360.0);
    if (x < 0) x += 360.0;
    return x - 180.0;
}

/// WGS 84 coordinate with an optional elevational layer (2.5D).
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
    std::optional<int> layer;

    /// Validates ranges and maps lon = 180 to -180; throws invalid_point.
    static GeoPoint make(double lat, double lon, std::optional<int> layer = std::nullopt) {
        if (!std::isfinite(lat) || !std::isfinite(lon) || std::abs(lat) > 90.0 || std::abs(lon) > 180.0) {
            throw error(errc::invalid_point, "latitude/longitude out of range");
        }
        return GeoPoint{lat, normalize_lon(lon), layer};
    }

    // Layer takes part in equality only; distance and containment ignore it.
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Same horizontal position, regardless of layer.
inline bool same_position(const GeoPoint& a, const GeoPoint& b) noexcept {
    return a.lat == b.lat && a.lon == b.lon;
}

/// Great-circle distance in meters (haversine on a sphere of earth_radius_m).
inline double geodesic_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
    if (same_position(a, b)) return 0.0;
    const double phi1 = deg_to_rad(a.lat);
    const double phi2 = deg_to_rad(b.lat);
    const double dphi = phi2 - phi1;
    const double dlambda = deg_to_rad(b.lon - a.lon);
    const double s1 = std::sin(dphi / 2);
    const double s2 = std::sin(dlambda / 2);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * earth_radius_m * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Initial bearing from a to b, radians clockwise from north.
inline double initial_bearing(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double phi1 = deg_to_rad(a.lat);
    const double phi2 = deg_to_rad(b.lat);
    const double dlambda = deg_to_rad(b.lon - a.lon);
    return std::atan2(std::sin(dlambda) * std::cos(phi2),
                      std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda));
}

/// Point reached by travelling distance_m along bearing_rad from origin.
inline GeoPoint destination(const GeoPoint& origin, double bearing_rad, double distance_m) noexcept {
    const double delta = distance_m / earth_radius_m;
    const double phi1 = deg_to_rad(origin.lat);
    const double lambda1 = deg_to_rad(origin.lon);
    const double sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad);
    const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
    const double lambda2 = lambda1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                                                std::cos(delta) - std::sin(phi1) * sin_phi2);
    return GeoPoint{rad_to_deg(phi2), normalize_lon(rad_to_deg(lambda2)), origin.layer};
}

// ---------------------------------------------------------------------------
// Planar helpers (local tangent plane, meters)

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }

/// Azimuthal-equidistant projection about a fixed origin. Distances and
/// bearings from the origin are exact; elsewhere the error grows with the
/// square of the distance, negligible below ~10 km.
class TangentPlane {
public:
    explicit TangentPlane(GeoPoint origin) : origin_(origin) {}

    const GeoPoint& origin() const noexcept { return origin_; }

    Vec2 project(const GeoPoint& p) const noexcept {
        const double d = geodesic_distance(origin_, p);
        if (d == 0.0) return {};
        const double theta = initial_bearing(origin_, p);
        return {d * std::sin(theta), d * std::cos(theta)};
    }

    GeoPoint unproject(Vec2 v) const noexcept {
        return destination(origin_, std::atan2(v.x, v.y), norm(v));
    }

private:
    GeoPoint origin_;
};

namespace planar {

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return norm(p - a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

inline int orientation(Vec2 a, Vec2 b, Vec2 c) noexcept {
    const double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) noexcept {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

/// Closed-segment intersection test.
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) noexcept {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

inline double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) noexcept {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

/// Parameters t in [0, 1] along ab where it meets segment cd.
inline void intersection_params(Vec2 a, Vec2 b, Vec2 c, Vec2 d, std::vector<double>& out) {
    const Vec2 r = b - a;
    const Vec2 s = d - c;
    const double denom = cross(r, s);
    const double rr = dot(r, r);
    if (rr == 0.0) return;
    if (std::abs(denom) > 1e-12 * rr) {
        const double t = cross(c - a, s) / denom;
        const double u = cross(c - a, r) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) out.push_back(t);
        return;
    }
    // Parallel: only collinear overlaps contribute.
    if (std::abs(cross(c - a, r)) > 1e-9 * std::sqrt(rr)) return;
    for (Vec2 q : {c, d}) {
        const double t = dot(q - a, r) / rr;
        if (t > 0.0 && t < 1.0) out.push_back(t);
    }
}

inline double boundary_distance(Vec2 p, std::span<const Vec2> ring) noexcept {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ring.size(); ++i) {
        best = std::min(best, point_segment_distance(p, ring[i], ring[(i + 1) % ring.size()]));
    }
    return best;
}

/// Even-odd ray cast; points within tolerance of an edge count as inside.
inline bool ring_contains(std::span<const Vec2> ring, Vec2 p, double tolerance) noexcept {
    if (boundary_distance(p, ring) <= tolerance) return true;
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const Vec2 a = ring[i];
        const Vec2 b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

inline double signed_area(std::span<const Vec2> ring) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) acc += cross(ring[i], ring[(i + 1) % ring.size()]);
    return acc / 2.0;
}

inline bool is_simple(std::span<const Vec2> ring) noexcept {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const Vec2 a = ring[i], b = ring[(i + 1) % n], c = ring[j], d = ring[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex.
                const Vec2 shared = (j == i + 1) ? b : a;
                const Vec2 far_a = (j == i + 1) ? a : b;
                const Vec2 far_c = (j == i + 1) ? d : c;
                if (orientation(far_a, shared, far_c) == 0 && dot(far_a - shared, far_c - shared) > 0) return false;
                continue;
            }
            if (segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

struct Ring {
    std::vector<Vec2> vertices;
};

using Shape = std::variant<Circle, Ring>;

} // namespace planar

// ---------------------------------------------------------------------------
// Zones

struct CircleShape {
    GeoPoint center;
    double radius_m = 0.0;
};

struct PolygonShape {
    std::vector<GeoPoint> boundary; ///< Closed implicitly; no repeated last vertex.
};

using ZoneShape = std::variant<CircleShape, PolygonShape>;

/// A georeferenced bounded area. Zones are 2D with implied infinite altitude.
struct Zone {
    std::string id;
    ZoneShape shape;
};

enum class TopoRelation { disjoint, touches, overlaps, within, contains, equals };

constexpr std::string_view to_string(TopoRelation r) noexcept {
    switch (r) {
    case TopoRelation::disjoint: return "DISJOINT";
    case TopoRelation::touches: return "TOUCHES";
    case TopoRelation::overlaps: return "OVERLAPS";
    case TopoRelation::within: return "WITHIN";
    case TopoRelation::contains: return "CONTAINS";
    case TopoRelation::equals: return "EQUALS";
    }
    return "?";
}

constexpr TopoRelation converse(TopoRelation r) noexcept {
    if (r == TopoRelation::within) return TopoRelation::contains;
    if (r == TopoRelation::contains) return TopoRelation::within;
    return r;
}

/// Reference point of a zone: circle center or vertex mean of a polygon.
inline GeoPoint zone_anchor(const Zone& z) {
    if (const auto* c = std::get_if<CircleShape>(&z.shape)) return GeoPoint{c->center.lat, c->center.lon, std::nullopt};
    const auto& ring = std::get<PolygonShape>(z.shape).boundary;
    if (ring.empty()) throw error(errc::invalid_zone, "zone '" + z.id + "' has no vertices");
    double lat = 0.0, lon = 0.0;
    const double lon0 = ring.front().lon;
    for (const auto& p : ring) {
        lat += p.lat;
        lon += lon0 + normalize_lon(p.lon - lon0);
    }
    const double n = static_cast<double>(ring.size());
    return GeoPoint{lat / n, normalize_lon(lon / n), std::nullopt};
}

namespace detail {

inline std::vector<Vec2> project_ring(const TangentPlane& plane, const std::vector<GeoPoint>& ring) {
    std::vector<Vec2> out;
    out.reserve(ring.size());
    for (const auto& p : ring) out.push_back(plane.project(p));
    return out;
}

inline planar::Shape project_zone(const TangentPlane& plane, const Zone& z) {
    if (const auto* c = std::get_if<CircleShape>(&z.shape)) return planar::Circle{plane.project(c->center), c->radius_m};
    return planar::Ring{project_ring(plane, std::get<PolygonShape>(z.shape).boundary)};
}

} // namespace detail

/// Throws invalid_zone unless the zone is a positive-radius circle or a
/// simple, non-degenerate polygon, no wider than max_zone_diameter_m.
inline void validate_zone(const Zone& z) {
    auto fail = [&](const std::string& why) { throw error(errc::invalid_zone, "zone '" + z.id + "': " + why); };
    if (z.id.empty()) fail("empty id");
    if (const auto* c = std::get_if<CircleShape>(&z.shape)) {
        if (!std::isfinite(c->radius_m) || c->radius_m <= 0.0) fail("radius must be positive");
        if (2.0 * c->radius_m >= max_zone_diameter_m) fail("zone too large");
        if (!std::isfinite(c->center.lat) || std::abs(c->center.lat) > 90.0) fail("center out of range");
        return;
    }
    const auto& ring = std::get<PolygonShape>(z.shape).boundary;
    if (ring.size() < 3) fail("polygon needs at least 3 vertices");
    for (const auto& p : ring) {
        if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || std::abs(p.lat) > 90.0) fail("vertex out of range");
    }
    const TangentPlane plane(zone_anchor(z));
    const auto projected = detail::project_ring(plane, ring);
    for (std::size_t i = 0; i < projected.size(); ++i) {
        for (std::size_t j = i + 1; j < projected.size(); ++j) {
            if (norm(projected[i] - projected[j]) >= max_zone_diameter_m) fail("zone too large");
        }
    }
    double perimeter = 0.0;
    for (std::size_t i = 0, j = projected.size() - 1; i < projected.size(); j = i++) perimeter += norm(projected[i] - projected[j]);
    // Thinner than geo_epsilon_m everywhere counts as a line.
    if (std::abs(planar::signed_area(projected)) <= geo_epsilon_m * perimeter / 2) fail("polygon has zero area");
    if (!planar::is_simple(projected)) fail("polygon is self-intersecting");
}

/// Boundary-inclusive containment. Layer is ignored.
inline bool contains(const Zone& z, const GeoPoint& p) {
    if (const auto* c = std::get_if<CircleShape>(&z.shape)) return geodesic_distance(c->center, p) <= c->radius_m;
    const auto& ring = std::get<PolygonShape>(z.shape).boundary;
    if (ring.size() < 3) throw error(errc::invalid_zone, "zone '" + z.id + "' is not a polygon");
    const TangentPlane plane(zone_anchor(z));
    return planar::ring_contains(detail::project_ring(plane, ring), plane.project(p), 1e-6);
}

/// Zero inside the zone, otherwise the distance to its boundary.
inline double distance_to_zone(const GeoPoint& p, const Zone& z) {
    if (const auto* c = std::get_if<CircleShape>(&z.shape)) {
        return std::max(0.0, geodesic_distance(c->center, p) - c->radius_m);
    }
    if (contains(z, p)) return 0.0;
    const TangentPlane plane(zone_anchor(z));
    return planar::boundary_distance(plane.project(p), detail::project_ring(plane, std::get<PolygonShape>(z.shape).boundary));
}

namespace detail {

using planar::Circle;
using planar::Ring;

inline double boundary_gap(const Circle& a, const Circle& b) noexcept {
    const double d = norm(a.center - b.center);
    if (d >= a.radius + b.radius) return d - a.radius - b.radius;
    const double inner = std::abs(a.radius - b.radius);
    if (d <= inner) return inner - d;
    return 0.0;
}

inline double boundary_gap(const Circle& c, const Ring& r) noexcept {
    double best = std::numeric_limits<double>::infinity();
    const auto& v = r.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % v.size()];
        const double lo = planar::point_segment_distance(c.center, a, b);
        const double hi = std::max(norm(a - c.center), norm(b - c.center));
        double gap = 0.0;
        if (lo > c.radius) gap = lo - c.radius;
        else if (hi < c.radius) gap = c.radius - hi;
        best = std::min(best, gap);
    }
    return best;
}

inline double boundary_gap(const Ring& a, const Ring& b) noexcept {
    double best = std::numeric_limits<double>::infinity();
    const auto& u = a.vertices;
    const auto& v = b.vertices;
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            best = std::min(best, planar::segment_segment_distance(u[i], u[(i + 1) % u.size()], v[j], v[(j + 1) % v.size()]));
        }
    }
    return best;
}

inline double boundary_gap(const Ring& a, const Circle& b) noexcept { return boundary_gap(b, a); }

inline bool inside(const Circle& c, Vec2 p, double tol) noexcept { return norm(p - c.center) <= c.radius + tol; }
inline bool inside(const Ring& r, Vec2 p, double tol) noexcept { return planar::ring_contains(r.vertices, p, tol); }

inline bool strictly_inside(const Circle& c, Vec2 p, double tol) noexcept { return norm(p - c.center) < c.radius - tol; }
inline bool strictly_inside(const Ring& r, Vec2 p, double tol) noexcept {
    return planar::ring_contains(r.vertices, p, 0.0) && planar::boundary_distance(p, r.vertices) > tol;
}

/// Points along the boundary of `a`, split wherever it meets the boundary of `b`:
/// all vertices plus the midpoint of every resulting sub-segment.
inline std::vector<Vec2> split_probe_points(const Ring& a, const Ring& b) {
    std::vector<Vec2> probes;
    const auto& u = a.vertices;
    const auto& v = b.vertices;
    std::vector<double> ts;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Vec2 p = u[i], q = u[(i + 1) % u.size()];
        ts.assign({0.0, 1.0});
        for (std::size_t j = 0; j < v.size(); ++j) planar::intersection_params(p, q, v[j], v[(j + 1) % v.size()], ts);
        std::sort(ts.begin(), ts.end());
        probes.push_back(p);
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            if (ts[k + 1] - ts[k] <= 1e-12) continue;
            probes.push_back(p + (0.5 * (ts[k] + ts[k + 1])) * (q - p));
        }
    }
    return probes;
}

// covers(outer, inner): inner's closure is inside outer's closure (within tol).
inline bool covers(const Circle& outer, const Circle& inner, double tol) noexcept {
    return norm(outer.center - inner.center) + inner.radius <= outer.radius + tol;
}
inline bool covers(const Circle& outer, const Ring& inner, double tol) noexcept {
    return std::all_of(inner.vertices.begin(), inner.vertices.end(), [&](Vec2 p) { return inside(outer, p, tol); });
}
inline bool covers(const Ring& outer, const Circle& inner, double tol) noexcept {
    return planar::ring_contains(outer.vertices, inner.center, 0.0) &&
           planar::boundary_distance(inner.center, outer.vertices) >= inner.radius - tol;
}
inline bool covers(const Ring& outer, const Ring& inner, double tol) {
    const auto probes = split_probe_points(inner, outer);
    return std::all_of(probes.begin(), probes.end(), [&](Vec2 p) { return inside(outer, p, tol); });
}

// interiors_meet: some point lies strictly inside both (only called when
// neither shape covers the other).
inline bool interiors_meet(const Circle& a, const Circle& b, double tol) noexcept {
    return norm(a.center - b.center) < a.radius + b.radius - tol;
}
inline bool interiors_meet(const Circle& c, const Ring& r, double tol) noexcept {
    if (strictly_inside(r, c.center, tol)) return true;
    const auto& v = r.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (planar::point_segment_distance(c.center, v[i], v[(i + 1) % v.size()]) < c.radius - tol) return true;
    }
    return false;
}
inline bool interiors_meet(const Ring& r, const Circle& c, double tol) noexcept { return interiors_meet(c, r, tol); }
inline bool interiors_meet(const Ring& a, const Ring& b, double tol) {
    for (Vec2 p : split_probe_points(a, b)) {
        if (strictly_inside(b, p, tol)) return true;
    }
    for (Vec2 p : split_probe_points(b, a)) {
        if (strictly_inside(a, p, tol)) return true;
    }
    return false;
}

} // namespace detail

/// Classifies two zones in a shared tangent plane. The plane origin is the
/// midpoint of both anchors, so the result does not depend on argument order
/// beyond the WITHIN/CONTAINS converse.
inline TopoRelation topo_relation(const Zone& a, const Zone& b) {
    validate_zone(a);
    validate_zone(b);
    const GeoPoint pa = zone_anchor(a);
    const GeoPoint pb = zone_anchor(b);
    const GeoPoint mid{(pa.lat + pb.lat) / 2.0, normalize_lon(pa.lon + normalize_lon(pb.lon - pa.lon) / 2.0), std::nullopt};
    const TangentPlane plane(mid);
    const planar::Shape sa = detail::project_zone(plane, a);
    const planar::Shape sb = detail::project_zone(plane, b);
    const double eps = geo_epsilon_m;

    return std::visit(
        [eps](const auto& x, const auto& y) {
            const bool x_in_y = detail::covers(y, x, eps);
            const bool y_in_x = detail::covers(x, y, eps);
            if (x_in_y && y_in_x) return TopoRelation::equals;
            if (x_in_y) return TopoRelation::within;
            if (y_in_x) return TopoRelation::contains;
            if (detail::boundary_gap(x, y) > eps) return TopoRelation::disjoint;
            return detail::interiors_meet(x, y, eps) ? TopoRelation::overlaps : TopoRelation::touches;
        },
        sa, sb);
}

} // namespace triad
