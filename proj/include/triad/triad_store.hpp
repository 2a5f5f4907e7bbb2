#pragma once

// The WHAT: a taxonomy of game objects with inheritable attributes and group
// membership, plus the canonical triad links from objects to observed
// locations and times.

#include "triad/error.hpp"
#include "triad/geo.hpp"
#include "triad/observation.hpp"
#include "triad/snapshot_log.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace triad {

/// Objects below this one in the taxonomy are groups.
inline const std::string group_ancestor_id = "generic_admin_group";

using AttributeValue = std::variant<bool, double, std::string>;
using AttributeMap = std::map<std::string, AttributeValue>;

struct GameObject {
    ObjectId id;
    std::optional<ObjectId> parent;
    AttributeMap attributes;
    std::set<ObjectId> members;
    std::uint64_t version = 0;

    friend bool operator==(const GameObject&, const GameObject&) = default;
};

/// WHERE relation of a group: the zone of its current quest stage.
struct ZoneRef {
    std::string zone;
    friend bool operator==(const ZoneRef&, const ZoneRef&) = default;
};

using Location = std::variant<GeoPoint, ZoneRef>;

struct ObservationHandle {
    std::size_t index = 0;
};

/// Unsynchronized state. Use TriadStore for shared access.
class TriadState {
public:
    const GameObject& create_object(const ObjectId& id, const std::optional<ObjectId>& parent, AttributeMap attributes) {
        if (objects_.contains(id)) throw error(errc::duplicate_id, id.str());
        if (parent && *parent == id) throw error(errc::cycle_detected, id.str() + " cannot be its own parent");
        if (parent && !objects_.contains(*parent)) throw error(errc::unknown_parent, parent->str());
        GameObject obj{id, parent, std::move(attributes), {}, 1};
        ++mutations_;
        return objects_.emplace(id, std::move(obj)).first->second;
    }

    /// Re-parents an object; rejects moves that would close a cycle.
    void move_object(const ObjectId& id, const std::optional<ObjectId>& parent) {
        GameObject& obj = mutable_object(id);
        if (parent) {
            if (!objects_.contains(*parent)) throw error(errc::unknown_parent, parent->str());
            for (std::optional<ObjectId> cur = parent; cur; cur = objects_.at(*cur).parent) {
                if (*cur == id) throw error(errc::cycle_detected, "moving " + id.str() + " under " + parent->str());
            }
        }
        obj.parent = parent;
        bump(obj);
        // Group status may have changed for the moved subtree; membership is kept.
    }

    void set_attribute(const ObjectId& id, const std::string& key, AttributeValue value) {
        GameObject& obj = mutable_object(id);
        obj.attributes[key] = std::move(value);
        bump(obj);
    }

    /// Nearest definition of `key` walking from the object up its ancestors.
    std::optional<AttributeValue> resolve_attribute(const ObjectId& id, const std::string& key) const {
        const GameObject* cur = &object(id);
        while (cur) {
            if (auto it = cur->attributes.find(key); it != cur->attributes.end()) return it->second;
            cur = cur->parent ? &objects_.at(*cur->parent) : nullptr;
        }
        return std::nullopt;
    }

    bool is_group(const ObjectId& id) const {
        const GameObject* cur = &object(id);
        while (cur->parent) {
            if (cur->parent->str() == group_ancestor_id) return true;
            cur = &objects_.at(*cur->parent);
        }
        return false;
    }

    /// Adds a member; a repeated add is a no-op and does not bump the version.
    void add_member(const ObjectId& group, const ObjectId& member) {
        require_group(group);
        object(member);
        GameObject& g = objects_.at(group);
        if (g.members.insert(member).second) bump(g);
    }

    void remove_member(const ObjectId& group, const ObjectId& member) {
        require_group(group);
        GameObject& g = objects_.at(group);
        if (g.members.erase(member) > 0) bump(g);
    }

    const std::set<ObjectId>& members(const ObjectId& group) const {
        require_group(group);
        return objects_.at(group).members;
    }

    /// Binds a group's WHERE to a zone (its current quest stage).
    void bind_zone(const ObjectId& group, const std::string& zone) {
        require_group(group);
        auto& slot = bindings_[group];
        if (slot == zone) return;
        slot = zone;
        bump(objects_.at(group));
    }

    /// Appends to the object's log and refreshes its current position.
    /// Linking a new WHERE/WHEN counts as a relation mutation.
    ObservationHandle link_observation(ObservationRecord rec) {
        GameObject& obj = mutable_object(rec.object);
        const std::size_t index = log_.append(rec);
        auto it = current_.find(rec.object);
        if (it == current_.end()) current_.emplace(rec.object, std::move(rec));
        else if (fresher_than(rec, it->second)) it->second = std::move(rec);
        bump(obj);
        return {index};
    }

    /// Zone binding for groups, else the freshest observed point.
    std::optional<Location> locate(const ObjectId& id) const {
        object(id);
        if (auto it = bindings_.find(id); it != bindings_.end()) return Location{ZoneRef{it->second}};
        if (auto it = current_.find(id); it != current_.end()) return Location{it->second.point};
        return std::nullopt;
    }

    std::optional<ObservationRecord> current_record(const ObjectId& id) const {
        object(id);
        if (auto it = current_.find(id); it != current_.end()) return it->second;
        return std::nullopt;
    }

    /// Objects whose current point lies in the zone (boundary inclusive).
    std::set<ObjectId> occupants(const Zone& zone) const {
        validate_zone(zone);
        std::set<ObjectId> out;
        for (const auto& [id, rec] : current_) {
            if (bindings_.contains(id)) continue;
            if (contains(zone, rec.point)) out.insert(id);
        }
        return out;
    }

    const GameObject& object(const ObjectId& id) const {
        auto it = objects_.find(id);
        if (it == objects_.end()) throw error(errc::unknown_object, id.str());
        return it->second;
    }

    bool has_object(const ObjectId& id) const { return objects_.contains(id); }

    const std::map<ObjectId, GameObject>& objects() const noexcept { return objects_; }
    const SnapshotLog& log() const noexcept { return log_; }
    const std::map<ObjectId, std::string>& zone_bindings() const noexcept { return bindings_; }

    /// Total count of applied mutations; gives every mutation a global rank.
    std::uint64_t mutation_count() const noexcept { return mutations_; }

private:
    GameObject& mutable_object(const ObjectId& id) {
        auto it = objects_.find(id);
        if (it == objects_.end()) throw error(errc::unknown_object, id.str());
        return it->second;
    }

    void require_group(const ObjectId& id) const {
        if (!is_group(id)) throw error(errc::not_a_group, id.str());
    }

    void bump(GameObject& obj) {
        ++obj.version;
        ++mutations_;
    }

    std::map<ObjectId, GameObject> objects_;
    SnapshotLog log_;
    std::map<ObjectId, ObservationRecord> current_;
    std::map<ObjectId, std::string> bindings_;
    std::uint64_t mutations_ = 0;
};

/// Single-writer, multi-reader wrapper. Readers see whole mutations only and
/// get copies back.
class TriadStore {
public:
    TriadStore() = default;
    explicit TriadStore(TriadState state) : state_(std::move(state)) {}

    /// Runs `fn(const TriadState&)` under a shared lock.
    template <class Fn>
    decltype(auto) read(Fn&& fn) const {
        std::shared_lock lock(mutex_);
        return std::forward<Fn>(fn)(std::as_const(state_));
    }

    /// Runs `fn(TriadState&)` under the exclusive lock.
    template <class Fn>
    decltype(auto) write(Fn&& fn) {
        std::unique_lock lock(mutex_);
        return std::forward<Fn>(fn)(state_);
    }

    GameObject create_object(const ObjectId& id, const std::optional<ObjectId>& parent = std::nullopt,
                             AttributeMap attributes = {}) {
        return write([&](TriadState& s) { return s.create_object(id, parent, std::move(attributes)); });
    }
    void move_object(const ObjectId& id, const std::optional<ObjectId>& parent) {
        write([&](TriadState& s) { s.move_object(id, parent); });
    }
    void set_attribute(const ObjectId& id, const std::string& key, AttributeValue value) {
        write([&](TriadState& s) { s.set_attribute(id, key, std::move(value)); });
    }
    void add_member(const ObjectId& group, const ObjectId& member) {
        write([&](TriadState& s) { s.add_member(group, member); });
    }
    void remove_member(const ObjectId& group, const ObjectId& member) {
        write([&](TriadState& s) { s.remove_member(group, member); });
    }
    void bind_zone(const ObjectId& group, const std::string& zone) {
        write([&](TriadState& s) { s.bind_zone(group, zone); });
    }
    ObservationHandle link_observation(ObservationRecord rec) {
        return write([&](TriadState& s) { return s.link_observation(std::move(rec)); });
    }

    GameObject get(const ObjectId& id) const {
        return read([&](const TriadState& s) { return s.object(id); });
    }
    bool has_object(const ObjectId& id) const {
        return read([&](const TriadState& s) { return s.has_object(id); });
    }
    bool is_group(const ObjectId& id) const {
        return read([&](const TriadState& s) { return s.is_group(id); });
    }
    std::optional<AttributeValue> resolve_attribute(const ObjectId& id, const std::string& key) const {
        return read([&](const TriadState& s) { return s.resolve_attribute(id, key); });
    }
    std::set<ObjectId> members(const ObjectId& group) const {
        return read([&](const TriadState& s) { return s.members(group); });
    }
    std::optional<Location> locate(const ObjectId& id) const {
        return read([&](const TriadState& s) { return s.locate(id); });
    }
    std::set<ObjectId> occupants(const Zone& zone) const {
        return read([&](const TriadState& s) { return s.occupants(zone); });
    }
    std::vector<ObservationRecord> observations(const ObjectId& id) const {
        return read([&](const TriadState& s) {
            s.object(id);
            return s.log().for_object(id);
        });
    }

private:
    mutable std::shared_mutex mutex_;
    TriadState state_;
};

} // namespace triad
