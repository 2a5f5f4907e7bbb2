#pragma once

// Multi-staged quests: a directed graph over zones acts as a finite state
// machine, and each group's progress walks it as members enter zones.

#include "triad/chronos.hpp"
#include "triad/error.hpp"
#include "triad/stquery.hpp"
#include "triad/triad_store.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace triad {

struct QuestGraph {
    std::set<std::string> stages;
    std::set<std::pair<std::string, std::string>> edges;
    std::string start;

    bool has_edge(const std::string& from, const std::string& to) const { return edges.contains({from, to}); }
};

/// Throws unknown_start, dangling_edge or unreachable_stage.
inline void validate_graph(const QuestGraph& g) {
    if (!g.stages.contains(g.start)) throw error(errc::unknown_start, "start stage '" + g.start + "' not declared");
    for (const auto& [from, to] : g.edges) {
        if (!g.stages.contains(from) || !g.stages.contains(to)) {
            throw error(errc::dangling_edge, from + " -> " + to);
        }
    }
    std::set<std::string> seen{g.start};
    std::deque<std::string> frontier{g.start};
    while (!frontier.empty()) {
        const std::string cur = frontier.front();
        frontier.pop_front();
        for (auto it = g.edges.lower_bound({cur, std::string{}}); it != g.edges.end() && it->first == cur; ++it) {
            if (seen.insert(it->second).second) frontier.push_back(it->second);
        }
    }
    for (const auto& s : g.stages) {
        if (!seen.contains(s)) throw error(errc::unreachable_stage, s);
    }
}

struct StageVisit {
    std::string zone;
    Timestamp time;
    friend bool operator==(const StageVisit&, const StageVisit&) = default;
};

struct GroupProgress {
    ObjectId group;
    std::string current;
    std::vector<StageVisit> history;

    static GroupProgress start(const ObjectId& group, const QuestGraph& g, Timestamp at) {
        return GroupProgress{group, g.start, {{g.start, at}}};
    }
};

/// Moves the group along `current -> event.zone` if that edge exists. Any
/// member's entry advances the whole group. Entries that skip a stage, repeat
/// the current one, or predate the last recorded stage change are no-ops.
/// Returns whether the group advanced.
inline bool advance(GroupProgress& progress, const ZoneEvent& event, const QuestGraph& g,
                    const std::set<ObjectId>& members) {
    if (event.kind != ZoneEventKind::enter) throw error(errc::non_enter_event, event.object.str());
    if (!members.contains(event.object)) {
        throw error(errc::not_a_member, event.object.str() + " not in " + progress.group.str());
    }
    if (!g.has_edge(progress.current, event.zone)) return false;
    if (!progress.history.empty() && event.time < progress.history.back().time) return false;
    progress.current = event.zone;
    progress.history.push_back({event.zone, event.time});
    return true;
}

inline bool advance(GroupProgress& progress, const ZoneEvent& event, const QuestGraph& g, const TriadState& state) {
    return advance(progress, event, g, state.members(progress.group));
}

struct StageChange {
    ObjectId group;
    std::string from;
    std::string to;
    Timestamp time;
    ObjectId trigger;
};

/// Progress of every group taking part in one quest.
class QuestTracker {
public:
    explicit QuestTracker(QuestGraph graph) : graph_(std::move(graph)) { validate_graph(graph_); }

    const QuestGraph& graph() const noexcept { return graph_; }

    void enroll(const ObjectId& group, Timestamp at) { progress_.insert_or_assign(group, GroupProgress::start(group, graph_, at)); }

    /// Reinstates previously persisted progress.
    void restore(GroupProgress p) {
        if (!graph_.stages.contains(p.current)) throw error(errc::invalid_argument, "unknown stage '" + p.current + "'");
        const ObjectId group = p.group;
        progress_.insert_or_assign(group, std::move(p));
    }

    const std::string& current_stage(const ObjectId& group) const { return progress(group).current; }

    const GroupProgress& progress(const ObjectId& group) const {
        auto it = progress_.find(group);
        if (it == progress_.end()) throw error(errc::unknown_group, group.str());
        return it->second;
    }

    const std::map<ObjectId, GroupProgress>& all() const noexcept { return progress_; }

    /// Applies one ENTER event to every enrolled group the object belongs to.
    /// Non-members, EXIT events and unrelated zones are ignored here.
    std::vector<StageChange> on_event(const ZoneEvent& event, const TriadState& state) {
        std::vector<StageChange> changes;
        if (event.kind != ZoneEventKind::enter) return changes;
        for (auto& [group, prog] : progress_) {
            const auto& members = state.members(group);
            if (!members.contains(event.object)) continue;
            const std::string from = prog.current;
            if (advance(prog, event, graph_, members)) changes.push_back({group, from, prog.current, event.time, event.object});
        }
        return changes;
    }

    /// Applies a batch in (time, object id) order, so the first qualifying
    /// entry picks the branch.
    std::vector<StageChange> on_events(std::vector<ZoneEvent> events, const TriadState& state) {
        std::stable_sort(events.begin(), events.end(), [](const ZoneEvent& a, const ZoneEvent& b) {
            return std::tie(a.time, a.object) < std::tie(b.time, b.object);
        });
        std::vector<StageChange> changes;
        for (const auto& e : events) {
            auto c = on_event(e, state);
            changes.insert(changes.end(), c.begin(), c.end());
        }
        return changes;
    }

private:
    QuestGraph graph_;
    std::map<ObjectId, GroupProgress> progress_;
};

} // namespace triad
