// triad: operator entry point for the engine, scenario runs, triad queries
// and trail export.

#include "triad/triad.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <thread>

namespace {

using triad::json;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

/// Renders a query response; JSON is the library result verbatim.
void render(const json& response, const std::string& format) {
    if (format == "json") {
        std::cout << response.dump() << '\n';
        return;
    }
    const std::string form = response.at("form").get<std::string>();
    const json& r = response.at("result");
    if (form == "where") {
        std::cout << "t_ms\tlat\tlon\tlayer\n";
        for (const auto& p : r.at("points")) {
            std::cout << p.at("t_ms") << '\t' << p.at("lat") << '\t' << p.at("lon") << '\t'
                      << (p.contains("layer") ? p.at("layer").dump() : "-") << '\n';
        }
    } else if (form == "what" || form == "occupants") {
        for (const auto& id : r.at("objects")) std::cout << id.get<std::string>() << '\n';
    } else if (form == "when") {
        std::cout << "kind\ttime_ms\tinterpolated\n";
        for (const auto& e : r.at("events")) {
            std::cout << e.at("kind").get<std::string>() << '\t' << e.at("time_ms") << '\t' << e.at("interpolated") << '\n';
        }
    } else if (form == "dist") {
        std::cout << r.at("meters").get<double>() << '\n';
    } else if (form == "stage") {
        std::cout << "current\t" << r.at("current").get<std::string>() << '\n';
        for (const auto& h : r.at("history")) std::cout << h.at("zone").get<std::string>() << '\t' << h.at("time_ms") << '\n';
    } else {
        std::cout << r.dump(2) << '\n';
    }
}

int fail(const triad::error& e) {
    std::cerr << json{{"error", std::string(triad::to_string(e.code()))}, {"message", e.what()}}.dump() << '\n';
    return 1;
}

std::int64_t ms(const std::string& text) { return triad::to_ms(triad::parse_timestamp(text)); }

int serve(const std::string& config_path, const std::string& listen_override) {
    namespace fs = std::filesystem;
    auto config = triad::load_engine_config(config_path);
    if (!listen_override.empty()) {
        auto patched = triad::engine_config_from_json(
            [&] {
                json j = triad::codec::read_json_file(config_path);
                j["listen"] = listen_override;
                return j;
            }(),
            fs::path(config_path).parent_path());
        config = patched;
    }
    triad::Engine engine(triad::load_engine_setup(config), [] {
        return std::chrono::time_point_cast<triad::Duration>(std::chrono::system_clock::now());
    });

    std::ofstream observations, events;
    if (config.storage) {
        fs::create_directories(*config.storage);
        fs::copy_file(config.taxonomy, *config.storage / "taxonomy.json", fs::copy_options::overwrite_existing);
        fs::copy_file(config.zones, *config.storage / "zones.json", fs::copy_options::overwrite_existing);
        if (config.quest) fs::copy_file(*config.quest, *config.storage / "quest.json", fs::copy_options::overwrite_existing);
        observations.open(*config.storage / "observations.jsonl", std::ios::app);
        events.open(*config.storage / "events.jsonl", std::ios::app);
        const fs::path quest_path = *config.storage / "quest.json";
        engine.set_event_sink([&, quest_path](const json& e) {
            events << e.dump() << '\n' << std::flush;
            const std::string kind = e.at("kind").get<std::string>();
            if (kind == "snapshot") observations << e.at("record").dump() << '\n' << std::flush;
            if (kind == "quest_advance" && engine.quests()) {
                json doc = triad::codec::quest_to_json(engine.quests()->graph());
                json progress = json::array();
                for (const auto& [g, p] : engine.quests()->all()) {
                    doc["groups"].push_back(g.str());
                    progress.push_back(triad::codec::progress_to_json(p));
                }
                doc["progress"] = progress;
                triad::codec::write_text_file(quest_path.string(), doc.dump(2) + "\n");
            }
        });
    }

    triad::TcpServer server(engine, config.host, config.port);
    server.start();
    std::cerr << json{{"listening", config.host + ":" + std::to_string(server.port())}}.dump() << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatiotemporal engine for location-based games"};
    app.require_subcommand(1);

    std::string format = "json";
    std::string data_dir = ".";

    auto* engine_cmd = app.add_subcommand("engine", "Run the game engine server");
    engine_cmd->require_subcommand(1);
    auto* serve_cmd = engine_cmd->add_subcommand("serve", "Serve the line protocol over TCP");
    std::string config_path, listen_override;
    serve_cmd->add_option("--config", config_path, "Engine config file")->required();
    serve_cmd->add_option("--listen", listen_override, "Override listen host:port");

    auto* sim_cmd = app.add_subcommand("sim", "Scenario simulation");
    sim_cmd->require_subcommand(1);
    auto* sim_run = sim_cmd->add_subcommand("run", "Run a scenario and write its artifacts");
    std::string scenario_path, out_dir;
    sim_run->add_option("--scenario", scenario_path, "Scenario file")->required();
    sim_run->add_option("--out", out_dir, "Output directory")->required();

    auto* query_cmd = app.add_subcommand("query", "Triad queries against stored logs");
    query_cmd->require_subcommand(1);
    query_cmd->add_option("--data", data_dir, "Directory with taxonomy/zones/observations/quest files");
    query_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));
    std::string object, zone, a, b, from, to, at;

    auto* q_where = query_cmd->add_subcommand("where", "what + when -> where");
    q_where->add_option("--object", object)->required();
    q_where->add_option("--from", from)->required();
    q_where->add_option("--to", to)->required();

    auto* q_what = query_cmd->add_subcommand("what", "where + when -> what");
    q_what->add_option("--zone", zone)->required();
    q_what->add_option("--from", from)->required();
    q_what->add_option("--to", to)->required();

    auto* q_when = query_cmd->add_subcommand("when", "what + where -> when");
    q_when->add_option("--object", object)->required();
    q_when->add_option("--zone", zone)->required();

    auto* q_dist = query_cmd->add_subcommand("dist", "Distance between an object and an object or zone");
    q_dist->add_option("--a", a)->required();
    q_dist->add_option("--b", b)->required();
    q_dist->add_option("--at", at)->required();

    for (auto* sub : {q_where, q_what, q_when, q_dist}) {
        sub->add_option("--data", data_dir, "Data directory");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));
    }

    auto* export_cmd = app.add_subcommand("export", "Export trails");
    export_cmd->require_subcommand(1);
    auto* geojson_cmd = export_cmd->add_subcommand("geojson", "Movement trail as a GeoJSON FeatureCollection");
    std::string out_file;
    geojson_cmd->add_option("--object", object)->required();
    geojson_cmd->add_option("--from", from);
    geojson_cmd->add_option("--to", to);
    geojson_cmd->add_option("--out", out_file)->required();
    geojson_cmd->add_option("--data", data_dir, "Data directory");

    auto* quest_cmd = app.add_subcommand("quest", "Quest progression");
    quest_cmd->require_subcommand(1);
    auto* status_cmd = quest_cmd->add_subcommand("status", "Current stage and history of a group");
    std::string group;
    status_cmd->add_option("--group", group)->required();
    status_cmd->add_option("--data", data_dir, "Data directory");
    status_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve_cmd->parsed()) return serve(config_path, listen_override);

        if (sim_run->parsed()) {
            const auto result = triad::run_scenario(triad::load_scenario(scenario_path));
            triad::write_outputs(result, out_dir);
            json summary{{"events", result.events().size()},
                         {"messages_sent", result.messages_sent},
                         {"messages_dropped", result.messages_dropped},
                         {"out", out_dir}};
            if (const auto* q = result.engine->quests()) {
                json stages = json::object();
                for (const auto& [g, p] : q->all()) stages[g.str()] = p.current;
                summary["stages"] = stages;
            }
            std::cout << summary.dump() << '\n';
            return 0;
        }

        const triad::Dataset ds = triad::load_dataset(data_dir);

        if (geojson_cmd->parsed()) {
            const std::int64_t lo = from.empty() ? std::numeric_limits<std::int64_t>::min() : ms(from);
            const std::int64_t hi = to.empty() ? std::numeric_limits<std::int64_t>::max() : ms(to);
            const auto trail = triad::where_of(ds.state, triad::ObjectId(object),
                                               triad::Interval::make(triad::at_ms(lo), triad::at_ms(hi)));
            triad::codec::write_text_file(out_file, triad::trail_geojson(trail).dump(2) + "\n");
            std::cout << json{{"out", out_file}, {"points", trail.points.size()}}.dump() << '\n';
            return 0;
        }

        json request;
        if (q_where->parsed()) request = {{"form", "where"}, {"object", object}, {"from", ms(from)}, {"to", ms(to)}};
        else if (q_what->parsed()) request = {{"form", "what"}, {"zone", zone}, {"from", ms(from)}, {"to", ms(to)}};
        else if (q_when->parsed()) request = {{"form", "when"}, {"object", object}, {"zone", zone}};
        else if (q_dist->parsed()) request = {{"form", "dist"}, {"a", a}, {"b", b}, {"at", ms(at)}};
        else if (status_cmd->parsed()) request = {{"form", "stage"}, {"group", group}};
        render(ds.query(request), format);
        return 0;
    } catch (const triad::error& e) {
        return fail(e);
    } catch (const std::exception& e) {
        return fail(triad::error(triad::errc::io_error, e.what()));
    }
}
