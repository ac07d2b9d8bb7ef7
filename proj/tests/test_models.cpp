#include <doctest.h>

#include "pads/models/community.hpp"
#include "pads/models/gossip.hpp"
#include "pads/models/synthetic.hpp"
#include "pads/models/wireless.hpp"

using namespace pads;
using namespace pads::models;

TEST_SUITE_BEGIN("models");

namespace {

Interaction make_msg(EntityId src, EntityId dst, std::uint32_t seq = 0) {
    Interaction it;
    it.src = src;
    it.dst = dst;
    it.send_step = 0;
    it.deliver_step = 1;
    it.seq = seq;
    return it;
}

struct StepOutcome {
    std::vector<std::uint8_t> state;
    std::uint64_t rng_state;
    std::vector<std::pair<EntityId, std::vector<std::uint8_t>>> emissions;
};

StepOutcome run_once(Behavior& behavior, EntityId self, std::vector<std::uint8_t> state,
                     std::uint64_t rng_seed, std::span<const Interaction> inbox,
                     const void* index = nullptr) {
    SplitMix64 rng(rng_seed);
    Emitter emitter;
    behavior.step(self, state, rng, inbox, index, emitter);
    return {std::move(state), rng.state(), std::move(emitter.take())};
}

} // namespace

TEST_CASE("gossip with p = 0 becomes informed but emits nothing") {
    GossipBehavior gossip;
    std::vector<std::uint32_t> neighbors{1, 2, 3};
    auto state = GossipBehavior::make_initial_state(false, 0.0, neighbors);
    std::vector<Interaction> inbox{make_msg(5, 0)};
    StepOutcome out = run_once(gossip, 0, state, 99, inbox);
    CHECK(GossipBehavior::informed(out.state));
    CHECK(out.emissions.empty());
}

TEST_CASE("newly informed gossip node with p = 1 forwards to all 5 neighbors") {
    GossipBehavior gossip;
    std::vector<std::uint32_t> neighbors{2, 3, 5, 7, 11};
    auto state = GossipBehavior::make_initial_state(false, 1.0, neighbors);
    std::vector<Interaction> inbox{make_msg(9, 0)};
    StepOutcome out = run_once(gossip, 0, state, 4, inbox);
    REQUIRE(out.emissions.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(out.emissions[i].first == neighbors[i]);
    }
}

TEST_CASE("gossip forwards at most once over the run") {
    GossipBehavior gossip;
    auto state = GossipBehavior::make_initial_state(true, 1.0, std::vector<std::uint32_t>{1});
    StepOutcome first = run_once(gossip, 0, state, 4, {});
    CHECK(first.emissions.size() == 1);
    std::vector<Interaction> inbox{make_msg(1, 0)};
    StepOutcome second = run_once(gossip, 0, first.state, first.rng_state, inbox);
    CHECK(second.emissions.empty());
    // informed is monotone
    CHECK(GossipBehavior::informed(second.state));
}

TEST_CASE("uninformed gossip node with empty inbox stays silent and uninformed") {
    GossipBehavior gossip;
    auto state = GossipBehavior::make_initial_state(false, 1.0, std::vector<std::uint32_t>{1});
    StepOutcome out = run_once(gossip, 0, state, 4, {});
    CHECK_FALSE(GossipBehavior::informed(out.state));
    CHECK(out.emissions.empty());
}

TEST_CASE("wireless with radius 0 emits nothing regardless of density") {
    WirelessBehavior wireless(1, 1, 0);
    DirectoryBlob directory;
    auto s0 = WirelessBehavior::make_initial_state(1, 0, 1, 1);
    auto s1 = WirelessBehavior::make_initial_state(1, 1, 1, 1);
    directory.emplace_back(0, wireless.directory_entry(0, s0));
    directory.emplace_back(1, wireless.directory_entry(1, s1));
    auto index = wireless.build_index(directory);
    StepOutcome out = run_once(wireless, 0, s0, 3, {}, index.get());
    CHECK(out.emissions.empty());
}

TEST_CASE("two wireless entities in one cell with radius 1 beacon each other") {
    // a 1x1 grid pins both entities to cell (0,0) forever
    WirelessBehavior wireless(1, 1, 1);
    DirectoryBlob directory;
    auto s0 = WirelessBehavior::make_initial_state(1, 0, 1, 1);
    auto s1 = WirelessBehavior::make_initial_state(1, 1, 1, 1);
    directory.emplace_back(0, wireless.directory_entry(0, s0));
    directory.emplace_back(1, wireless.directory_entry(1, s1));
    auto index = wireless.build_index(directory);

    StepOutcome out0 = run_once(wireless, 0, s0, 3, {}, index.get());
    StepOutcome out1 = run_once(wireless, 1, s1, 4, {}, index.get());
    REQUIRE(out0.emissions.size() == 1);
    REQUIRE(out1.emissions.size() == 1);
    CHECK(out0.emissions[0].first == 1);
    CHECK(out1.emissions[0].first == 0);
}

TEST_CASE("wireless counts received beacons and stays on the grid") {
    WirelessBehavior wireless(3, 3, 1);
    auto state = WirelessBehavior::make_initial_state(7, 0, 3, 3);
    std::vector<Interaction> inbox{make_msg(1, 0, 0), make_msg(2, 0, 0)};
    std::vector<std::uint8_t> s = state;
    std::uint64_t rng_state = 55;
    for (int step = 0; step < 50; ++step) {
        StepOutcome out = run_once(wireless, 0, s, rng_state, step == 0 ? inbox
                                                                        : std::vector<Interaction>{});
        s = out.state;
        rng_state = out.rng_state;
        auto [x, y] = WirelessBehavior::position(s);
        CHECK(x < 3);
        CHECK(y < 3);
    }
    CHECK(WirelessBehavior::beacons_received(s) == 2);
}

TEST_CASE("community with q = 1 sends only intra-community messages") {
    CommunityBehavior community(100, 4, 1.0);
    std::uint64_t rng_state = 17;
    for (EntityId self : {0ULL, 26ULL, 99ULL}) {
        std::uint32_t c = static_cast<std::uint32_t>(self / 25);
        auto state = CommunityBehavior::make_initial_state(c);
        for (int trial = 0; trial < 50; ++trial) {
            StepOutcome out = run_once(community, self, state, rng_state++, {});
            REQUIRE(out.emissions.size() == 1);
            EntityId target = out.emissions[0].first;
            CHECK(target != self);
            CHECK(target / 25 == c);
        }
    }
}

TEST_CASE("community with q = 0 sends only inter-community messages") {
    CommunityBehavior community(100, 4, 0.0);
    auto state = CommunityBehavior::make_initial_state(1);
    std::uint64_t rng_state = 3;
    for (int trial = 0; trial < 50; ++trial) {
        StepOutcome out = run_once(community, 30, state, rng_state++, {});
        REQUIRE(out.emissions.size() == 1);
        EntityId target = out.emissions[0].first;
        CHECK(target < 100);
        CHECK(target / 25 != 1);
    }
}

TEST_CASE("community counts received messages") {
    CommunityBehavior community(8, 2, 0.9);
    auto state = CommunityBehavior::make_initial_state(0);
    std::vector<Interaction> inbox{make_msg(4, 0, 0), make_msg(5, 0, 0), make_msg(6, 0, 0)};
    StepOutcome out = run_once(community, 0, state, 12, inbox);
    // recv counter lives at offset 4
    std::uint64_t recv = 0;
    for (int i = 0; i < 8; ++i) recv = (recv << 8) | out.state[4 + i];
    CHECK(recv == 3);
}

TEST_CASE("synthetic uniform traffic picks a random peer other than itself") {
    SyntheticBehavior synthetic(10, SyntheticBehavior::Traffic::Uniform, 0.0, {});
    auto state = SyntheticBehavior::make_initial_state(1.0);
    std::uint64_t rng_state = 8;
    for (int trial = 0; trial < 100; ++trial) {
        StepOutcome out = run_once(synthetic, 4, state, rng_state++, {});
        REQUIRE(out.emissions.size() == 1);
        CHECK(out.emissions[0].first < 10);
        CHECK(out.emissions[0].first != 4);
    }
}

TEST_CASE("synthetic without traffic stays silent") {
    SyntheticBehavior synthetic(10, SyntheticBehavior::Traffic::None, 0.0, {});
    auto state = SyntheticBehavior::make_initial_state(0.0);
    StepOutcome out = run_once(synthetic, 0, state, 1, {});
    CHECK(out.emissions.empty());
}

TEST_CASE("model steps are pure functions of state, inbox and rng") {
    // identical inputs must yield identical state, emissions and rng use
    GossipBehavior gossip;
    CommunityBehavior community(40, 4, 0.7);
    SyntheticBehavior synthetic(40, SyntheticBehavior::Traffic::Uniform, 0.0, {});
    WirelessBehavior wireless(5, 5, 1);

    DirectoryBlob directory;
    for (EntityId id = 0; id < 4; ++id) {
        directory.emplace_back(id, wireless.directory_entry(
                                       id, WirelessBehavior::make_initial_state(3, id, 5, 5)));
    }
    auto index = wireless.build_index(directory);

    std::vector<Interaction> inbox{make_msg(1, 0, 0), make_msg(2, 0, 0)};

    auto check_pure = [&](Behavior& b, std::vector<std::uint8_t> state, const void* idx) {
        StepOutcome a = run_once(b, 0, state, 1234, inbox, idx);
        StepOutcome c = run_once(b, 0, state, 1234, inbox, idx);
        CHECK(a.state == c.state);
        CHECK(a.rng_state == c.rng_state);
        REQUIRE(a.emissions.size() == c.emissions.size());
        for (std::size_t i = 0; i < a.emissions.size(); ++i) {
            CHECK(a.emissions[i] == c.emissions[i]);
        }
    };

    check_pure(gossip, GossipBehavior::make_initial_state(false, 0.5,
                                                          std::vector<std::uint32_t>{1, 2, 3}),
               nullptr);
    check_pure(community, CommunityBehavior::make_initial_state(0), nullptr);
    check_pure(synthetic, SyntheticBehavior::make_initial_state(2.0), nullptr);
    check_pure(wireless, WirelessBehavior::make_initial_state(3, 0, 5, 5), index.get());
}

TEST_SUITE_END();
