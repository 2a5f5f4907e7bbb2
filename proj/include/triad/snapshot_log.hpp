#pragma once

// Sequent-snapshot log: an append-only record of timestamped observations
// with a virtual-time ordered view.

#include "triad/chronos.hpp"
#include "triad/observation.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace triad {

class SnapshotLog {
public:
    /// Appends a record; throws stale_sequence unless its seq exceeds the last
    /// seq seen for the same (object, device). Returns the insertion index.
    std::size_t append(ObservationRecord rec) {
        auto key = std::make_pair(rec.object, rec.device);
        if (auto it = last_seq_.find(key); it != last_seq_.end() && rec.seq <= it->second) {
            throw error(errc::stale_sequence, "seq " + std::to_string(rec.seq) + " <= " + std::to_string(it->second) +
                                                  " for " + rec.object.str() + "@" + rec.device);
        }
        last_seq_[key] = rec.seq;
        const std::size_t index = records_.size();
        records_.push_back(std::move(rec));
        insert_ordered(order_, index);
        insert_ordered(by_object_[records_[index].object], index);
        return index;
    }

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// Insertion order; entries never change once appended.
    const std::vector<ObservationRecord>& raw() const noexcept { return records_; }

    /// All records by virtual time, equal times in insertion order.
    std::vector<ObservationRecord> ordered() const { return gather(order_); }

    /// One object's records by virtual time.
    std::vector<ObservationRecord> for_object(const ObjectId& object) const {
        auto it = by_object_.find(object);
        return it == by_object_.end() ? std::vector<ObservationRecord>{} : gather(it->second);
    }

    /// Records of `object` with virtual time in the closed window, in time order.
    std::vector<ObservationRecord> slice(const ObjectId& object, const Interval& window) const {
        std::vector<ObservationRecord> out;
        auto it = by_object_.find(object);
        if (it == by_object_.end()) return out;
        const auto& idx = it->second;
        auto first = std::lower_bound(idx.begin(), idx.end(), window.start,
                                      [&](std::size_t i, Timestamp t) { return records_[i].virtual_timestamp < t; });
        for (; first != idx.end() && records_[*first].virtual_timestamp <= window.end; ++first) {
            out.push_back(records_[*first]);
        }
        return out;
    }

    /// Records of all objects in the closed window, in time order.
    std::vector<ObservationRecord> slice(const Interval& window) const {
        std::vector<ObservationRecord> out;
        auto first = std::lower_bound(order_.begin(), order_.end(), window.start,
                                      [&](std::size_t i, Timestamp t) { return records_[i].virtual_timestamp < t; });
        for (; first != order_.end() && records_[*first].virtual_timestamp <= window.end; ++first) {
            out.push_back(records_[*first]);
        }
        return out;
    }

    std::optional<std::uint64_t> last_seq(const ObjectId& object, const std::string& device) const {
        auto it = last_seq_.find(std::make_pair(object, device));
        if (it == last_seq_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<ObjectId> objects() const {
        std::vector<ObjectId> out;
        for (const auto& [id, _] : by_object_) out.push_back(id);
        return out;
    }

private:
    void insert_ordered(std::vector<std::size_t>& idx, std::size_t index) {
        const Timestamp t = records_[index].virtual_timestamp;
        auto pos = std::upper_bound(idx.begin(), idx.end(), t,
                                    [&](Timestamp v, std::size_t i) { return v < records_[i].virtual_timestamp; });
        idx.insert(pos, index);
    }

    std::vector<ObservationRecord> gather(const std::vector<std::size_t>& idx) const {
        std::vector<ObservationRecord> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(records_[i]);
        return out;
    }

    std::vector<ObservationRecord> records_;
    std::vector<std::size_t> order_;
    std::map<ObjectId, std::vector<std::size_t>> by_object_;
    std::map<std::pair<ObjectId, std::string>, std::uint64_t> last_seq_;
};

} // namespace triad
