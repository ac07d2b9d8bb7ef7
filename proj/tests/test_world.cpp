#include <doctest.h>

#include "pads/digest.hpp"
#include "pads/errors.hpp"
#include "pads/rng.hpp"
#include "pads/world.hpp"

using namespace pads;

TEST_SUITE_BEGIN("world");

namespace {

std::vector<std::uint8_t> random_state(SplitMix64& rng, std::size_t max_len) {
    std::vector<std::uint8_t> state(rng.next_below(max_len + 1));
    for (auto& b : state) b = static_cast<std::uint8_t>(rng.next_below(256));
    return state;
}

} // namespace

TEST_CASE("registration assigns dense ids starting at 0") {
    World world(4, 1);
    CHECK(world.register_entity(BehaviorKind::Custom, {}, 1.0, 0) == 0);
    CHECK(world.register_entity(BehaviorKind::Custom, {}, 1.0, 1) == 1);
    CHECK(world.register_entity(BehaviorKind::Custom, {}, 1.0, 2) == 2);
}

TEST_CASE("round-robin registration puts ids k, k+4, ... on LP k") {
    World world(4, 1);
    for (EntityId id = 0; id < 100; ++id) {
        world.register_entity(BehaviorKind::Custom, {}, 1.0, static_cast<LpId>(id % 4));
    }
    for (LpId lp = 0; lp < 4; ++lp) {
        std::vector<EntityId> residents = world.residents_of(lp);
        REQUIRE(residents.size() == 25);
        for (std::size_t i = 0; i < residents.size(); ++i) {
            CHECK(residents[i] == lp + 4 * i);
        }
    }
}

TEST_CASE("placement out of range is a configuration error") {
    World world(4, 1);
    CHECK_THROWS_AS(world.register_entity(BehaviorKind::Custom, {}, 1.0, 4), ConfigError);
}

TEST_CASE("registration after the run started is a lifecycle error") {
    World world(1, 1);
    world.register_entity(BehaviorKind::Custom, {}, 1.0, 0);
    world.seal();
    CHECK_THROWS_AS(world.register_entity(BehaviorKind::Custom, {}, 1.0, 0), LifecycleError);
}

TEST_CASE("negative weight is rejected") {
    World world(1, 1);
    CHECK_THROWS_AS(world.register_entity(BehaviorKind::Custom, {}, -0.5, 0), ConfigError);
}

TEST_CASE("entity rng seed is a pure function of global seed and id") {
    World a(2, 99), b(8, 99);
    a.register_entity(BehaviorKind::Custom, {1, 2}, 1.0, 1);
    b.register_entity(BehaviorKind::Custom, {1, 2}, 1.0, 7);
    CHECK(a.record(0).rng_state == b.record(0).rng_state);
    CHECK(a.record(0).rng_state == entity_seed(99, 0));
}

TEST_CASE("entity payload round-trips byte-identically") {
    SplitMix64 rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        EntityRecord rec;
        rec.id = trial;
        rec.behavior = static_cast<BehaviorKind>(rng.next_below(4));
        rec.weight = static_cast<double>(rng.next_below(1000)) / 7.0;
        rec.rng_state = rng.next_u64();
        rec.state = random_state(rng, 300);

        std::vector<std::uint8_t> payload = encode_entity_payload(rec);
        EntityRecord back;
        back.id = rec.id;
        decode_entity_payload(payload, back);
        CHECK(back.behavior == rec.behavior);
        CHECK(back.weight == rec.weight);
        CHECK(back.rng_state == rec.rng_state);
        CHECK(back.state == rec.state);
        CHECK(encode_entity_payload(back) == payload);
    }
}

TEST_CASE("truncated entity payload is a migration fault") {
    EntityRecord rec;
    rec.state = {1, 2, 3, 4};
    std::vector<std::uint8_t> payload = encode_entity_payload(rec);
    payload.pop_back();
    EntityRecord out;
    CHECK_THROWS_AS(decode_entity_payload(payload, out), MigrationFault);
}

TEST_CASE("digest leaf streams the same bytes as the payload encoder") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        EntityRecord rec;
        rec.id = rng.next_u64();
        rec.behavior = static_cast<BehaviorKind>(rng.next_below(4));
        rec.weight = static_cast<double>(trial) * 0.75;
        rec.rng_state = rng.next_u64();
        rec.state = random_state(rng, 64);

        Fnv64 h;
        h.update_u64(rec.id);
        h.update(encode_entity_payload(rec));
        CHECK(entity_digest_leaf(rec) == h.value());
    }
}

TEST_CASE("empty world digest is the digest of the empty sequence") {
    World world(1, 0);
    CHECK(world.state_digest() == Fnv64::kOffsetBasis);
}

TEST_CASE("worlds with equal states but different placements digest equally") {
    World a(4, 7), b(2, 7);
    SplitMix64 rng(11);
    for (EntityId id = 0; id < 40; ++id) {
        std::vector<std::uint8_t> state = random_state(rng, 50);
        a.register_entity(BehaviorKind::Gossip, state, 2.0, static_cast<LpId>(id % 4));
        b.register_entity(BehaviorKind::Gossip, state, 2.0, static_cast<LpId>(id % 2));
    }
    CHECK(a.state_digest() == b.state_digest());
}

TEST_CASE("flipping one bit in one entity state changes the digest") {
    // 1000 random single-bit flips, none may collide with the base digest
    World world(2, 3);
    SplitMix64 rng(21);
    for (EntityId id = 0; id < 25; ++id) {
        std::vector<std::uint8_t> state(40);
        for (auto& b : state) b = static_cast<std::uint8_t>(rng.next_below(256));
        world.register_entity(BehaviorKind::Custom, std::move(state), 1.0,
                              static_cast<LpId>(id % 2));
    }
    const std::uint64_t base = world.state_digest();
    for (int trial = 0; trial < 1000; ++trial) {
        EntityId victim = rng.next_below(25);
        std::size_t byte = rng.next_below(40);
        std::uint8_t mask = static_cast<std::uint8_t>(1u << rng.next_below(8));
        world.record(victim).state[byte] ^= mask;
        CHECK(world.state_digest() != base);
        world.record(victim).state[byte] ^= mask;
    }
    CHECK(world.state_digest() == base);
}

TEST_CASE("digest combines per-entity leaves in ascending id order") {
    World world(1, 9);
    for (EntityId id = 0; id < 5; ++id) {
        world.register_entity(BehaviorKind::Custom, {static_cast<std::uint8_t>(id)}, 1.0, 0);
    }
    std::vector<std::uint64_t> leaves;
    for (EntityId id = 0; id < 5; ++id) {
        leaves.push_back(entity_digest_leaf(world.record(id)));
    }
    CHECK(world.state_digest() == combine_digest_leaves(leaves));
}

TEST_SUITE_END();
