#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace triad {

enum class errc {
    duplicate_id,
    unknown_parent,
    cycle_detected,
    unknown_object,
    not_a_group,
    stale_sequence,
    invalid_zone,
    invalid_point,
    degenerate_interval,
    empty_result,
    no_fix_before,
    dangling_edge,
    unreachable_stage,
    unknown_start,
    not_a_member,
    non_enter_event,
    unknown_group,
    invalid_handshake,
    malformed_message,
    protocol_error,
    invalid_scenario,
    invalid_argument,
    io_error,
};

/// Machine-readable error name, stable across releases (used on the wire and by the CLI).
constexpr std::string_view to_string(errc code) noexcept {
    switch (code) {
    case errc::duplicate_id: return "DuplicateId";
    case errc::unknown_parent: return "UnknownParent";
    case errc::cycle_detected: return "CycleDetected";
    case errc::unknown_object: return "UnknownObject";
    case errc::not_a_group: return "NotAGroup";
    case errc::stale_sequence: return "StaleSequence";
    case errc::invalid_zone: return "InvalidZone";
    case errc::invalid_point: return "InvalidPoint";
    case errc::degenerate_interval: return "DegenerateInterval";
    case errc::empty_result: return "EmptyResult";
    case errc::no_fix_before: return "NoFixBefore";
    case errc::dangling_edge: return "DanglingEdge";
    case errc::unreachable_stage: return "UnreachableStage";
    case errc::unknown_start: return "UnknownStart";
    case errc::not_a_member: return "NotAMember";
    case errc::non_enter_event: return "NonEnterEvent";
    case errc::unknown_group: return "UnknownGroup";
    case errc::invalid_handshake: return "InvalidHandshake";
    case errc::malformed_message: return "MalformedMessage";
    case errc::protocol_error: return "ProtocolError";
    case errc::invalid_scenario: return "InvalidScenario";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::io_error: return "IoError";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace triad
