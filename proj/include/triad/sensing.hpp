#pragma once

// Physical -> measured -> virtual. Parameterized error models stand in for
// GPS receivers and device clocks; ingest maps a device's measured snapshot
// into the engine's virtual space and time.

#include "triad/chronos.hpp"
#include "triad/error.hpp"
#include "triad/geo.hpp"
#include "triad/observation.hpp"
#include "triad/triad_store.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>

namespace triad {

/// Gaussian horizontal error with uniform bearing, then decimal truncation.
struct MeasurementModel {
    double noise_sigma_m = 0.0;
    int quant_decimals = storage_decimals;
};

/// Device clock = physical clock + offset_ms + uniform(-jitter_ms, +jitter_ms).
struct ClockModel {
    std::int64_t offset_ms = 0;
    std::int64_t jitter_ms = 0;
};

/// splitmix64 finalizer; derives independent per-sample seeds from one scenario seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept { return mix_seed(mix_seed(a) ^ b); }

inline std::uint64_t mix_seed(std::uint64_t a, const std::string& s) noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    return mix_seed(a, h);
}

struct PositionSample {
    GeoPoint measured;
    double displacement_m = 0.0; ///< Drawn error before truncation.
};

inline PositionSample sample_position(const GeoPoint& truth, const MeasurementModel& m, std::uint64_t seed) {
    GeoPoint displaced = truth;
    double magnitude = 0.0;
    if (m.noise_sigma_m > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, m.noise_sigma_m);
        std::uniform_real_distribution<double> bearing(0.0, 2.0 * std::numbers::pi);
        magnitude = std::abs(noise(rng));
        displaced = destination(truth, bearing(rng), magnitude);
    }
    return {truncate_point(displaced, m.quant_decimals), magnitude};
}

inline GeoPoint measure_position(const GeoPoint& truth, const MeasurementModel& m, std::uint64_t seed) {
    return sample_position(truth, m, seed).measured;
}

inline Timestamp measure_time(Timestamp physical, const ClockModel& c, std::uint64_t seed) {
    std::int64_t jitter = 0;
    if (c.jitter_ms > 0) {
        std::mt19937_64 rng(seed);
        jitter = std::uniform_int_distribution<std::int64_t>(-c.jitter_ms, c.jitter_ms)(rng);
    }
    return physical + Duration{c.offset_ms + jitter};
}

/// Four timestamps of one client/server round trip. Client stamps are device time.
struct Handshake {
    Timestamp client_send;
    Timestamp server_recv;
    Timestamp server_send;
    Timestamp client_recv;
};

/// Cristian-style round-trip estimate of engine time minus device time,
/// truncated toward zero. A device ahead of the engine yields a negative value.
inline Duration estimate_offset(const Handshake& h) {
    if (h.client_recv < h.client_send || h.server_send < h.server_recv) {
        throw error(errc::invalid_handshake, "timestamps out of order");
    }
    const auto sum = (h.server_recv - h.client_send) + (h.server_send - h.client_recv);
    return Duration{sum.count() / 2};
}

/// Snapshot message as sent by a device.
struct DeviceSnapshot {
    ObjectId object;
    double lat = 0.0;
    double lon = 0.0;
    std::optional<int> layer;
    Timestamp device_timestamp;
    std::string device;
    std::uint64_t seq = 0;
};

/// Builds the stored record: virtual time = device time - device_offset
/// (device_offset is device minus engine), coordinates at storage precision.
inline ObservationRecord reconcile(const DeviceSnapshot& raw, Duration device_offset) {
    if (raw.device.empty()) throw error(errc::malformed_message, "snapshot without device");
    if (!std::isfinite(raw.lat) || !std::isfinite(raw.lon) || std::abs(raw.lat) > 90.0 || std::abs(raw.lon) > 180.0) {
        throw error(errc::malformed_message, "coordinates out of range");
    }
    const GeoPoint p = truncate_point(GeoPoint::make(raw.lat, raw.lon, raw.layer), storage_decimals);
    return ObservationRecord{raw.object, p, raw.device_timestamp, raw.device_timestamp - device_offset, raw.device, raw.seq};
}

/// Reconciles and links a snapshot into the store.
inline ObservationRecord ingest(const DeviceSnapshot& raw, Duration device_offset, TriadState& state) {
    ObservationRecord rec = reconcile(raw, device_offset);
    state.link_observation(rec);
    return rec;
}

inline ObservationRecord ingest(const DeviceSnapshot& raw, Duration device_offset, TriadStore& store) {
    return store.write([&](TriadState& s) { return ingest(raw, device_offset, s); });
}

} // namespace triad
