#pragma once

// Client-side redundant copies of engine objects.

#include "triad/codec.hpp"
#include "triad/engine.hpp"

#include <map>
#include <string>
#include <vector>

namespace triad {

struct Replica {
    std::uint64_t version = 0;
    std::string payload;
    bool gap = false; ///< A version was skipped at some point.
};

class ReplicaClient {
public:
    /// Applies STATE and UPDATE messages; other kinds are ignored.
    void apply(const json& msg) {
        const std::string type = msg.value("type", "");
        if (type == "STATE") {
            for (const auto& o : msg.at("objects")) {
                const ObjectId id(o.at("object").get<std::string>());
                auto& r = replicas_[id];
                r.version = o.at("version").get<std::uint64_t>();
                r.payload = o.at("payload").get<std::string>();
                observed_[id].push_back(r.version);
            }
        } else if (type == "UPDATE") {
            const ObjectId id(msg.at("object").get<std::string>());
            const auto version = msg.at("version").get<std::uint64_t>();
            observed_[id].push_back(version);
            auto it = replicas_.find(id);
            if (it == replicas_.end()) {
                replicas_[id] = Replica{version, msg.at("payload").get<std::string>(), true};
                return;
            }
            Replica& r = it->second;
            if (version <= r.version) return;
            if (version != r.version + 1) r.gap = true;
            r.version = version;
            r.payload = msg.at("payload").get<std::string>();
        }
    }

    const std::map<ObjectId, Replica>& replicas() const noexcept { return replicas_; }

    /// Every version seen per object, in arrival order.
    const std::map<ObjectId, std::vector<std::uint64_t>>& observed_versions() const noexcept { return observed_; }

private:
    std::map<ObjectId, Replica> replicas_;
    std::map<ObjectId, std::vector<std::uint64_t>> observed_;
};

/// True iff every replica is gap-free and byte-identical to the primary copy.
/// Only meaningful once no messages are in flight.
inline bool replica_check(const ReplicaClient& client, const TriadState& primary) {
    for (const auto& [id, r] : client.replicas()) {
        if (r.gap) return false;
        if (!primary.has_object(id)) return false;
        if (r.payload != codec::canonical_state(primary, id)) return false;
    }
    return true;
}

inline bool replica_check(const ReplicaClient& client, const Engine& engine) {
    return engine.store().read([&](const TriadState& s) { return replica_check(client, s); });
}

} // namespace triad
