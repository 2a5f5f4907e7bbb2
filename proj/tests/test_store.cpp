#include "oracles.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace triad;

namespace {

ObjectId id(const char* s) { return ObjectId(s); }

errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return errc::io_error;
}

TriadState cnh_taxonomy() {
    TriadState s;
    s.create_object(id("world"), std::nullopt, {});
    s.create_object(id("players"), id("world"), {{"faction", std::string("blue")}});
    s.create_object(id("Player-1"), id("players"), {{"name", std::string("Alice")}});
    s.create_object(id("generic_admin_group"), id("world"), {});
    s.create_object(id("team-1"), id("generic_admin_group"), {});
    return s;
}

ObservationRecord fix(const char* obj, std::int64_t t, double lat, std::uint64_t seq, const char* dev = "phone-1") {
    return {id(obj), GeoPoint{lat, 18.06, std::nullopt}, at_ms(t), at_ms(t), dev, seq};
}

/// Nearest-ancestor lookup by explicit parent walk.
std::optional<AttributeValue> walk(const TriadState& s, ObjectId cur, const std::string& key) {
    for (;;) {
        const GameObject& o = s.objects().at(cur);
        if (auto it = o.attributes.find(key); it != o.attributes.end()) return it->second;
        if (!o.parent) return std::nullopt;
        cur = *o.parent;
    }
}

} // namespace

TEST(Taxonomy, CreateErrors) {
    TriadState s = cnh_taxonomy();
    EXPECT_EQ(code_of([&] { s.create_object(id("world"), std::nullopt, {}); }), errc::duplicate_id);
    EXPECT_EQ(code_of([&] { s.create_object(id("x"), id("nope"), {}); }), errc::unknown_parent);
    EXPECT_EQ(code_of([&] { s.create_object(id("x"), id("x"), {}); }), errc::cycle_detected);
    EXPECT_EQ(s.object(id("Player-1")).version, 1u);
}

TEST(Taxonomy, MoveRejectsCycles) {
    TriadState s = cnh_taxonomy();
    EXPECT_EQ(code_of([&] { s.move_object(id("world"), id("Player-1")); }), errc::cycle_detected);
    EXPECT_EQ(code_of([&] { s.move_object(id("ghost"), id("world")); }), errc::unknown_object);
    s.move_object(id("Player-1"), id("world"));
    EXPECT_EQ(s.object(id("Player-1")).parent, id("world"));
}

TEST(Taxonomy, AttributeInheritanceNearestAncestorWins) {
    TriadState s = cnh_taxonomy();
    EXPECT_EQ(std::get<std::string>(*s.resolve_attribute(id("Player-1"), "faction")), "blue");
    s.set_attribute(id("Player-1"), "faction", std::string("red"));
    EXPECT_EQ(std::get<std::string>(*s.resolve_attribute(id("Player-1"), "faction")), "red");
    EXPECT_FALSE(s.resolve_attribute(id("Player-1"), "missing").has_value());
    s.set_attribute(id("world"), "score", 3.0);
    EXPECT_EQ(std::get<double>(*s.resolve_attribute(id("Player-1"), "score")), 3.0);
}

TEST(Taxonomy, AttributeInheritanceMatchesWalkOnRandomTrees) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 30; ++round) {
        TriadState s;
        std::vector<ObjectId> ids{id("root")};
        s.create_object(ids[0], std::nullopt, {});
        for (int i = 1; i < 40; ++i) {
            ObjectId n("n" + std::to_string(i));
            s.create_object(n, ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)], {});
            ids.push_back(n);
        }
        for (int i = 0; i < 30; ++i) {
            const auto& target = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
            s.set_attribute(target, "k" + std::to_string(i % 4), double(i));
        }
        for (const auto& o : ids) {
            for (int k = 0; k < 5; ++k) {
                const std::string key = "k" + std::to_string(k);
                EXPECT_EQ(s.resolve_attribute(o, key), walk(s, o, key));
            }
        }
    }
}

TEST(Groups, OnlyDescendantsOfAdminGroupAreGroups) {
    TriadState s = cnh_taxonomy();
    EXPECT_TRUE(s.is_group(id("team-1")));
    EXPECT_FALSE(s.is_group(id("generic_admin_group")));
    EXPECT_FALSE(s.is_group(id("Player-1")));
    EXPECT_EQ(code_of([&] { s.add_member(id("players"), id("Player-1")); }), errc::not_a_group);
    EXPECT_EQ(code_of([&] { s.add_member(id("team-1"), id("ghost")); }), errc::unknown_object);
}

TEST(Groups, MembershipIsIdempotent) {
    TriadState s = cnh_taxonomy();
    s.add_member(id("team-1"), id("Player-1"));
    const auto v = s.object(id("team-1")).version;
    s.add_member(id("team-1"), id("Player-1"));
    EXPECT_EQ(s.object(id("team-1")).version, v);
    EXPECT_EQ(s.members(id("team-1")).size(), 1u);
    s.remove_member(id("team-1"), id("Player-1"));
    EXPECT_EQ(s.object(id("team-1")).version, v + 1);
    s.remove_member(id("team-1"), id("Player-1"));
    EXPECT_EQ(s.object(id("team-1")).version, v + 1);
    EXPECT_TRUE(s.members(id("team-1")).empty());
}

TEST(Groups, MembershipIsNotInherited) {
    TriadState s = cnh_taxonomy();
    s.create_object(id("squad"), id("team-1"), {});
    s.add_member(id("squad"), id("Player-1"));
    EXPECT_TRUE(s.members(id("team-1")).empty());
}

TEST(Location, LinkObservationUpdatesCurrentAndVersion) {
    TriadState s = cnh_taxonomy();
    EXPECT_FALSE(s.locate(id("Player-1")).has_value());
    s.link_observation(fix("Player-1", 0, 59.3280, 1));
    s.link_observation(fix("Player-1", 60000, 59.3295, 2));
    s.link_observation(fix("Player-1", 30000, 59.3290, 3));
    EXPECT_EQ(s.object(id("Player-1")).version, 4u);
    const auto loc = s.locate(id("Player-1"));
    ASSERT_TRUE(loc.has_value());
    EXPECT_EQ(std::get<GeoPoint>(*loc).lat, 59.3295);
    EXPECT_EQ(s.log().size(), 3u);
    EXPECT_EQ(code_of([&] { s.link_observation(fix("ghost", 0, 59.0, 1)); }), errc::unknown_object);
}

TEST(Location, GroupsResolveToBoundZone) {
    TriadState s = cnh_taxonomy();
    s.bind_zone(id("team-1"), "Start");
    EXPECT_EQ(std::get<ZoneRef>(*s.locate(id("team-1"))).zone, "Start");
    const auto v = s.object(id("team-1")).version;
    s.bind_zone(id("team-1"), "Start");
    EXPECT_EQ(s.object(id("team-1")).version, v);
    EXPECT_EQ(code_of([&] { s.bind_zone(id("Player-1"), "Start"); }), errc::not_a_group);
}

TEST(Location, Occupants) {
    TriadState s = cnh_taxonomy();
    const Zone a{"Zone-A", CircleShape{GeoPoint{59.33, 18.06, std::nullopt}, 100}};
    EXPECT_TRUE(s.occupants(a).empty());
    s.link_observation(fix("Player-1", 60000, 59.3295, 1));
    EXPECT_EQ(s.occupants(a), std::set<ObjectId>{id("Player-1")});
    EXPECT_EQ(code_of([&] { s.occupants(Zone{"bad", CircleShape{GeoPoint{59.33, 18.06, std::nullopt}, -1}}); }),
              errc::invalid_zone);
}

TEST(Location, MutationCountRanksEveryChange) {
    TriadState s = cnh_taxonomy();
    const auto base = s.mutation_count();
    s.set_attribute(id("Player-1"), "hp", 10.0);
    s.link_observation(fix("Player-1", 0, 59.0, 1));
    EXPECT_EQ(s.mutation_count(), base + 2);
}

TEST(TriadStoreTest, ConcurrentReadersSeeWholeMutations) {
    TriadStore store(cnh_taxonomy());
    std::atomic<bool> done{false};
    std::atomic<int> bad{0};
    std::thread reader([&] {
        while (!done) {
            store.read([&](const TriadState& s) {
                // Version and log length move together under the lock.
                if (s.object(id("Player-1")).version != s.log().size() + 1) ++bad;
            });
        }
    });
    for (std::uint64_t k = 1; k <= 2000; ++k) {
        store.write([&](TriadState& s) { s.link_observation(fix("Player-1", std::int64_t(k), 59.0, k)); });
    }
    done = true;
    reader.join();
    EXPECT_EQ(bad.load(), 0);
}
