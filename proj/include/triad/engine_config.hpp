#pragma once

// Engine configuration document:
//   {"listen":"127.0.0.1:7700", "taxonomy":"taxonomy.json", "zones":"zones.json",
//    "quest":"quest.json", "storage":"data",
//    "defaults":{"measurement":{"noise_sigma_m":5,"quant_decimals":7},
//                "clock":{"offset_ms":0,"jitter_ms":0}}}
// Paths resolve relative to the config file.

#include "triad/codec.hpp"
#include "triad/engine.hpp"
#include "triad/sensing.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace triad {

struct EngineConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7700;
    std::filesystem::path taxonomy;
    std::filesystem::path zones;
    std::optional<std::filesystem::path> quest;
    std::optional<std::filesystem::path> storage;
    MeasurementModel default_measurement;
    ClockModel default_clock;
};

inline EngineConfig engine_config_from_json(const json& j, const std::filesystem::path& base = {}) {
    try {
        EngineConfig c;
        const std::string listen = j.value("listen", std::string("127.0.0.1:7700"));
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos) throw error(errc::invalid_argument, "listen must be host:port");
        c.host = listen.substr(0, colon);
        const int port = std::stoi(listen.substr(colon + 1));
        if (port < 0 || port > 65535) throw error(errc::invalid_argument, "port out of range");
        c.port = static_cast<std::uint16_t>(port);
        c.taxonomy = base / j.at("taxonomy").get<std::string>();
        c.zones = base / j.at("zones").get<std::string>();
        if (j.contains("quest") && !j.at("quest").is_null()) c.quest = base / j.at("quest").get<std::string>();
        if (j.contains("storage") && !j.at("storage").is_null()) c.storage = base / j.at("storage").get<std::string>();
        if (j.contains("defaults")) {
            const auto& d = j.at("defaults");
            if (d.contains("measurement")) {
                c.default_measurement = MeasurementModel{d.at("measurement").value("noise_sigma_m", 0.0),
                                                         d.at("measurement").value("quant_decimals", storage_decimals)};
            }
            if (d.contains("clock")) {
                c.default_clock = ClockModel{d.at("clock").value("offset_ms", std::int64_t{0}),
                                             d.at("clock").value("jitter_ms", std::int64_t{0})};
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw error(errc::invalid_argument, std::string("engine config: ") + e.what());
    } catch (const std::logic_error& e) {
        throw error(errc::invalid_argument, std::string("engine config: ") + e.what());
    }
}

inline EngineConfig load_engine_config(const std::string& path) {
    return engine_config_from_json(codec::read_json_file(path), std::filesystem::path(path).parent_path());
}

inline EngineSetup load_engine_setup(const EngineConfig& c) {
    EngineSetup setup{codec::taxonomy_from_json(codec::read_json_file(c.taxonomy.string())),
                      codec::zones_from_json(codec::read_json_file(c.zones.string())), std::nullopt};
    if (c.quest) setup.quest = codec::quest_from_json(codec::read_json_file(c.quest->string()));
    return setup;
}

} // namespace triad
