#pragma once

#include "triad/chronos.hpp"
#include "triad/error.hpp"
#include "triad/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <tuple>

namespace triad {

/// Opaque object identifier: a non-empty token without whitespace.
class ObjectId {
public:
    ObjectId() = default;

    explicit ObjectId(std::string value) : value_(std::move(value)) {
        if (value_.empty()) throw error(errc::invalid_argument, "object id must be non-empty");
        if (std::any_of(value_.begin(), value_.end(), [](unsigned char c) { return std::isspace(c); })) {
            throw error(errc::invalid_argument, "object id '" + value_ + "' contains whitespace");
        }
    }

    const std::string& str() const noexcept { return value_; }

    friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
    friend bool operator==(const ObjectId&, const ObjectId&) = default;

private:
    std::string value_;
};

/// Decimal places kept for stored coordinates (about 1.1 cm).
inline constexpr int storage_decimals = 7;

/// Truncates toward zero at the given number of decimals. Values already on
/// the grid (up to binary representation noise) are kept, so the operation
/// is idempotent.
inline double truncate_decimals(double value, int decimals) noexcept {
    const double scale = std::pow(10.0, decimals);
    const double scaled = value * scale;
    const double nearest = std::round(scaled);
    if (std::abs(scaled - nearest) < 1e-6) return nearest / scale;
    return std::trunc(scaled) / scale;
}

inline GeoPoint truncate_point(const GeoPoint& p, int decimals) noexcept {
    return GeoPoint{truncate_decimals(p.lat, decimals), truncate_decimals(p.lon, decimals), p.layer};
}

/// One triad link: WHAT (object) at WHERE (point) at WHEN (timestamps).
struct ObservationRecord {
    ObjectId object;
    GeoPoint point;
    Timestamp device_timestamp;
    Timestamp virtual_timestamp;
    std::string device;
    std::uint64_t seq = 0;

    friend bool operator==(const ObservationRecord&, const ObservationRecord&) = default;
};

/// Orders records for "current position": later virtual time wins, then the
/// larger (device, seq).
inline bool fresher_than(const ObservationRecord& a, const ObservationRecord& b) noexcept {
    return std::tie(a.virtual_timestamp, a.device, a.seq) > std::tie(b.virtual_timestamp, b.device, b.seq);
}

} // namespace triad
