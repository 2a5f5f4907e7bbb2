#pragma once

// Movement trails as GeoJSON: one Point per fix carrying the object id and
// timestamp, plus a LineString through the fixes. Positions are [lon, lat].

#include "triad/codec.hpp"
#include "triad/stquery.hpp"

namespace triad {

inline json position(const GeoPoint& p) { return json::array({p.lon, p.lat}); }

inline json trail_geojson(const Trajectory& trail) {
    json features = json::array();
    json line = json::array();
    for (const auto& pt : trail.points) {
        json props{{"object", trail.object.str()}, {"timestamp", to_ms(pt.time)}};
        if (pt.point.layer) props["layer"] = *pt.point.layer;
        features.push_back({{"type", "Feature"}, {"geometry", {{"type", "Point"}, {"coordinates", position(pt.point)}}}, {"properties", props}});
        line.push_back(position(pt.point));
    }
    if (line.size() >= 2) {
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "LineString"}, {"coordinates", line}}},
                            {"properties", {{"object", trail.object.str()}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

} // namespace triad
