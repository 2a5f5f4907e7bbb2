#pragma once

// Loads the artifacts written by a scenario run (or an engine's storage
// directory) back into queryable state.

#include "triad/codec.hpp"
#include "triad/query_api.hpp"
#include "triad/quest.hpp"
#include "triad/triad_store.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

namespace triad {

struct Dataset {
    TriadState state;
    codec::ZoneMap zones;
    std::optional<QuestTracker> quests;

    QueryContext context() const { return QueryContext{state, zones, quests ? &*quests : nullptr}; }
    json query(const json& request) const { return evaluate_query(context(), request); }
};

/// Reads taxonomy.json, zones.json, observations.jsonl and (if present and
/// not null) quest.json from `dir`.
inline Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    Dataset ds;
    ds.state = codec::taxonomy_from_json(codec::read_json_file((base / "taxonomy.json").string()));
    ds.zones = codec::zones_from_json(codec::read_json_file((base / "zones.json").string()));

    const fs::path obs = base / "observations.jsonl";
    if (fs::exists(obs)) {
        std::ifstream in(obs);
        for (auto& rec : codec::read_observations(in)) ds.state.link_observation(std::move(rec));
    }

    const fs::path quest = base / "quest.json";
    if (fs::exists(quest)) {
        const json doc = codec::read_json_file(quest.string());
        if (!doc.is_null()) {
            const auto qd = codec::quest_from_json(doc);
            ds.quests.emplace(qd.graph);
            for (const auto& g : qd.groups) {
                ds.quests->enroll(g, at_ms(0));
                ds.state.bind_zone(g, qd.graph.start);
            }
            for (const auto& p : doc.value("progress", json::array())) {
                GroupProgress prog = codec::progress_from_json(p);
                ds.state.bind_zone(prog.group, prog.current);
                ds.quests->restore(std::move(prog));
            }
        }
    }
    return ds;
}

} // namespace triad
