#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

using namespace triad;

namespace {

const std::string scenario_dir = std::string(TRIAD_SOURCE_DIR) + "/scenarios/cnh";

json taxonomy_doc() { return codec::read_json_file(scenario_dir + "/taxonomy.json"); }

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("triad-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST(Codec, ZonesRoundTrip) {
    const auto zones = codec::zones_from_json(codec::read_json_file(scenario_dir + "/zones.json"));
    ASSERT_EQ(zones.size(), 2u);
    const auto& a = std::get<CircleShape>(zones.at("Zone-A").shape);
    EXPECT_EQ(a.radius_m, 100.0);
    EXPECT_EQ(a.center.lat, 59.33);
    EXPECT_EQ(codec::zones_from_json(codec::zones_to_json(zones)).size(), 2u);
    const json poly{{"id", "p"}, {"type", "polygon"}, {"boundary", {{{"lat", 0}, {"lon", 0}}, {{"lat", 0.001}, {"lon", 0}}, {{"lat", 0}, {"lon", 0.001}}}}};
    const Zone z = codec::zone_from_json(poly);
    EXPECT_EQ(codec::zone_to_json(z), poly);
}

TEST(Codec, BadZonesAreInvalidZone) {
    for (const json& bad : {json{{"id", "x"}, {"type", "square"}}, json{{"id", "x"}, {"type", "circle"}},
                            json{{"id", "x"}, {"type", "circle"}, {"center", {{"lat", 0}, {"lon", 0}}}, {"radius_m", -5}}}) {
        try {
            codec::zone_from_json(bad);
            FAIL() << bad;
        } catch (const error& e) {
            EXPECT_EQ(e.code(), errc::invalid_zone);
        }
    }
    const json dup = json::array({json{{"id", "x"}, {"type", "circle"}, {"center", {{"lat", 0}, {"lon", 0}}}, {"radius_m", 5}},
                                  json{{"id", "x"}, {"type", "circle"}, {"center", {{"lat", 0}, {"lon", 0}}}, {"radius_m", 6}}});
    EXPECT_THROW(codec::zones_from_json(dup), error);
}

TEST(Codec, TaxonomyAllowsForwardParentsAndRoundTrips) {
    const json doc{{"objects",
                    {{{"id", "child"}, {"parent", "root"}, {"attributes", {{"hp", 3}, {"alive", true}}}},
                     {{"id", "root"}, {"attributes", {{"name", "r"}}}}}}};
    const TriadState s = codec::taxonomy_from_json(doc);
    EXPECT_EQ(std::get<std::string>(*s.resolve_attribute(ObjectId("child"), "name")), "r");
    EXPECT_EQ(std::get<double>(*s.resolve_attribute(ObjectId("child"), "hp")), 3.0);
    const TriadState again = codec::taxonomy_from_json(codec::taxonomy_to_json(s));
    EXPECT_EQ(again.objects(), s.objects());
}

TEST(Codec, TaxonomyErrors) {
    auto code = [](const json& doc) {
        try {
            codec::taxonomy_from_json(doc);
        } catch (const error& e) {
            return e.code();
        }
        return errc::io_error;
    };
    EXPECT_EQ(code({{"objects", {{{"id", "a"}, {"parent", "ghost"}}}}}), errc::unknown_parent);
    EXPECT_EQ(code({{"objects", {{{"id", "a"}, {"parent", "b"}}, {{"id", "b"}, {"parent", "a"}}}}}), errc::cycle_detected);
    EXPECT_EQ(code({{"objects", {{{"id", "a"}}, {{"id", "a"}}}}}), errc::duplicate_id);
}

TEST(Codec, CnhTaxonomyGroups) {
    const TriadState s = codec::taxonomy_from_json(taxonomy_doc());
    EXPECT_TRUE(s.is_group(ObjectId("team-1")));
    EXPECT_EQ(s.members(ObjectId("team-1")), std::set<ObjectId>{ObjectId("Player-1")});
    EXPECT_EQ(std::get<std::string>(*s.resolve_attribute(ObjectId("Player-1"), "faction")), "blue");
}

TEST(Codec, ObservationsRoundTrip) {
    SnapshotLog log;
    log.append({ObjectId("a"), GeoPoint{59.3280123, 18.06, 2}, at_ms(2000), at_ms(0), "phone-1", 1});
    log.append({ObjectId("a"), GeoPoint{-33.9, -70.1234567, std::nullopt}, at_ms(7000), at_ms(5000), "phone-1", 2});
    std::stringstream ss;
    codec::write_observations(ss, log);
    const auto back = codec::read_observations(ss);
    EXPECT_EQ(back, log.raw());
    const json j = codec::record_to_json(log.raw()[0]);
    for (const char* k : {"object", "lat", "lon", "layer", "device_ts_ms", "virtual_ts_ms", "device", "seq"}) EXPECT_TRUE(j.contains(k)) << k;
    std::stringstream bad("{\"object\":\"a\"}\n");
    EXPECT_THROW(codec::read_observations(bad), error);
}

TEST(Codec, CanonicalStateIsByteStable) {
    TriadState s = codec::taxonomy_from_json(taxonomy_doc());
    const std::string a = codec::canonical_state(s, ObjectId("Player-1"));
    const TriadState t = codec::taxonomy_from_json(taxonomy_doc());
    EXPECT_EQ(a, codec::canonical_state(t, ObjectId("Player-1")));
    s.set_attribute(ObjectId("Player-1"), "hp", 1.0);
    EXPECT_NE(a, codec::canonical_state(s, ObjectId("Player-1")));
    const json parsed = json::parse(a);
    EXPECT_EQ(parsed.at("version"), 1);
    EXPECT_TRUE(parsed.at("where").is_null());
}

TEST(Codec, QuestRoundTrip) {
    const auto doc = codec::quest_from_json(codec::read_json_file(scenario_dir + "/quest.json"));
    EXPECT_EQ(doc.graph.start, "Start");
    EXPECT_TRUE(doc.graph.has_edge("Start", "Zone-A"));
    EXPECT_EQ(doc.groups, std::vector<ObjectId>{ObjectId("team-1")});
    const auto again = codec::quest_from_json(codec::quest_to_json(doc.graph, doc.groups));
    EXPECT_EQ(again.graph.edges, doc.graph.edges);
    GroupProgress p{ObjectId("team-1"), "Zone-A", {{"Start", at_ms(0)}, {"Zone-A", at_ms(44028)}}};
    const GroupProgress q = codec::progress_from_json(codec::progress_to_json(p));
    EXPECT_EQ(q.current, "Zone-A");
    EXPECT_EQ(q.history, p.history);
}

TEST(TimeFormat, ParsesMillisAndRfc3339) {
    EXPECT_EQ(to_ms(parse_timestamp("44030")), 44030);
    EXPECT_EQ(to_ms(parse_timestamp("-5")), -5);
    EXPECT_EQ(to_ms(parse_timestamp("1970-01-01T00:00:44.030Z")), 44030);
    EXPECT_EQ(to_ms(parse_timestamp("1970-01-01T02:00:00+02:00")), 0);
    EXPECT_EQ(to_ms(parse_timestamp("2024-05-04T19:00:00Z")), 1714849200000);
    EXPECT_EQ(to_ms(parse_timestamp("1970-01-01T00:00:01.5Z")), 1500);
    for (const char* bad : {"", "abc", "2024-13-01T00:00:00Z", "2024-05-04T19:00:00", "2024-05-04T19:00:00+0200"}) {
        EXPECT_THROW(parse_timestamp(bad), error) << bad;
    }
    EXPECT_EQ(format_timestamp(at_ms(1714849200250)), "2024-05-04T19:00:00.250Z");
    EXPECT_EQ(to_ms(parse_timestamp(format_timestamp(at_ms(123456789)))), 123456789);
}

TEST(GeoJson, TrailShape) {
    Trajectory t{ObjectId("Player-1"), {{GeoPoint{59.328, 18.06, std::nullopt}, at_ms(0)}, {GeoPoint{59.3295, 18.06, 1}, at_ms(60000)}}};
    const json g = trail_geojson(t);
    EXPECT_EQ(g.at("type"), "FeatureCollection");
    ASSERT_EQ(g.at("features").size(), 3u);
    const json& p0 = g.at("features")[0];
    EXPECT_EQ(p0.at("geometry").at("coordinates"), json::array({18.06, 59.328}));
    EXPECT_EQ(p0.at("properties").at("object"), "Player-1");
    EXPECT_EQ(p0.at("properties").at("timestamp"), 0);
    EXPECT_EQ(g.at("features")[1].at("properties").at("layer"), 1);
    EXPECT_EQ(g.at("features")[2].at("geometry").at("type"), "LineString");
    t.points.pop_back();
    EXPECT_EQ(trail_geojson(t).at("features").size(), 1u);
}

TEST(QueryApi, FormsAndErrors) {
    TriadState s = codec::taxonomy_from_json(taxonomy_doc());
    const auto zones = codec::zones_from_json(codec::read_json_file(scenario_dir + "/zones.json"));
    s.link_observation({ObjectId("Player-1"), GeoPoint{59.328, 18.06, std::nullopt}, at_ms(0), at_ms(0), "phone-1", 1});
    s.link_observation({ObjectId("Player-1"), GeoPoint{59.3295, 18.06, std::nullopt}, at_ms(60000), at_ms(60000), "phone-1", 2});
    const QueryContext ctx{s, zones, nullptr};
    EXPECT_EQ(evaluate_query(ctx, {{"form", "what"}, {"zone", "Zone-A"}, {"from", 50000}, {"to", 70000}})["result"]["objects"],
              json::array({"Player-1"}));
    EXPECT_EQ(evaluate_query(ctx, {{"form", "when"}, {"object", "Player-1"}, {"zone", "Zone-A"}})["result"]["events"][0]["time_ms"],
              44028);
    EXPECT_NEAR(evaluate_query(ctx, {{"form", "dist"}, {"a", "Player-1"}, {"b", "Zone-A"}, {"at", 0}})["result"]["meters"].get<double>(),
                122.39016, 1e-4);
    EXPECT_EQ(evaluate_query(ctx, {{"form", "where"}, {"object", "Player-1"}, {"from", 0}, {"to", 60000}})["result"]["points"].size(), 2u);
    EXPECT_EQ(evaluate_query(ctx, {{"form", "locate"}, {"object", "Player-1"}})["result"]["where"]["lat"], 59.3295);
    EXPECT_EQ(evaluate_query(ctx, {{"form", "occupants"}, {"zone", "Zone-A"}})["result"]["objects"].size(), 1u);
    auto code = [&](const json& req) {
        try {
            evaluate_query(ctx, req);
        } catch (const error& e) {
            return e.code();
        }
        return errc::io_error;
    };
    EXPECT_EQ(code({{"form", "what"}, {"zone", "Nowhere"}, {"from", 0}, {"to", 1}}), errc::invalid_zone);
    EXPECT_EQ(code({{"form", "when"}, {"object", "ghost"}, {"zone", "Zone-A"}}), errc::unknown_object);
    EXPECT_EQ(code({{"form", "stage"}, {"group", "team-1"}}), errc::unknown_group);
    EXPECT_EQ(code({{"form", "bogus"}}), errc::malformed_message);
    EXPECT_EQ(code({{"form", "where"}, {"object", "Player-1"}, {"from", "x"}, {"to", 1}}), errc::malformed_message);
}

TEST(EngineConfigTest, ParsesAndResolvesPaths) {
    const auto c = load_engine_config(scenario_dir + "/engine.json");
    EXPECT_EQ(c.host, "127.0.0.1");
    EXPECT_EQ(c.port, 7700);
    EXPECT_TRUE(std::filesystem::exists(c.taxonomy));
    ASSERT_TRUE(c.quest.has_value());
    const EngineSetup setup = load_engine_setup(c);
    EXPECT_EQ(setup.zones.size(), 2u);
    EXPECT_THROW(engine_config_from_json(json{{"listen", "nocolon"}, {"taxonomy", "t"}, {"zones", "z"}}), error);
    EXPECT_THROW(engine_config_from_json(json{{"listen", "h:99999"}, {"taxonomy", "t"}, {"zones", "z"}}), error);
}

TEST(DatasetTest, LoadsDirectory) {
    const auto dir = temp_dir("dataset");
    std::filesystem::copy(scenario_dir + "/taxonomy.json", dir / "taxonomy.json");
    std::filesystem::copy(scenario_dir + "/zones.json", dir / "zones.json");
    std::filesystem::copy(scenario_dir + "/quest.json", dir / "quest.json");
    codec::write_text_file((dir / "observations.jsonl").string(),
                           codec::record_to_json({ObjectId("Player-1"), GeoPoint{59.3295, 18.06, std::nullopt}, at_ms(1), at_ms(1), "d", 1}).dump() + "\n");
    const Dataset ds = load_dataset(dir.string());
    EXPECT_EQ(ds.query({{"form", "stage"}, {"group", "team-1"}})["result"]["current"], "Start");
    EXPECT_EQ(ds.query({{"form", "locate"}, {"object", "team-1"}})["result"]["where"]["zone"], "Start");
    EXPECT_EQ(ds.state.log().size(), 1u);
    EXPECT_THROW(load_dataset((dir / "missing").string()), error);
    std::filesystem::remove_all(dir);
}
