#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <mutex>
#include <thread>

#include "pads/errors.hpp"
#include "pads/rng.hpp"
#include "pads/transport.hpp"

using namespace pads;
using namespace pads::transport;

TEST_SUITE_BEGIN("transport");

TEST_CASE("an empty barrier-vote frame is exactly 10 bytes") {
    std::vector<std::uint8_t> frame = encode_frame(FrameKind::BarrierVote, {});
    REQUIRE(frame.size() == 10);
    CHECK(frame[0] == 'P');
    CHECK(frame[1] == 'A');
    CHECK(frame[2] == 'D');
    CHECK(frame[3] == 'S');
    CHECK(frame[4] == 1);                                   // version
    CHECK(frame[5] == static_cast<std::uint8_t>(FrameKind::BarrierVote));
    CHECK(frame[6] == 0);
    CHECK(frame[9] == 0); // length 0 big-endian
}

TEST_CASE("frame round-trip is identity for random payloads") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> payload(rng.next_below(1025));
        for (auto& b : payload) b = static_cast<std::uint8_t>(rng.next_below(256));
        auto kind = static_cast<FrameKind>(rng.next_below(4));
        std::vector<std::uint8_t> encoded = encode_frame(kind, payload);
        Frame decoded = decode_frame(encoded);
        CHECK(decoded.kind == kind);
        CHECK(decoded.payload == payload);
    }
}

TEST_CASE("truncating a valid frame by one byte is an error, not a wrong result") {
    std::vector<std::uint8_t> payload{1, 2, 3, 4, 5};
    std::vector<std::uint8_t> frame = encode_frame(FrameKind::InteractionBatch, payload);
    frame.pop_back();
    CHECK_THROWS_AS(decode_frame(frame), ProtocolError);
}

TEST_CASE("corrupted frames are rejected with offset diagnostics") {
    std::vector<std::uint8_t> small{9};
    std::vector<std::uint8_t> frame = encode_frame(FrameKind::BarrierRelease, small);

    auto bad_magic = frame;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_frame(bad_magic), doctest::Contains("offset 0"), ProtocolError);

    auto bad_version = frame;
    bad_version[4] = 9;
    CHECK_THROWS_WITH_AS(decode_frame(bad_version), doctest::Contains("offset 4"), ProtocolError);

    auto bad_kind = frame;
    bad_kind[5] = 200;
    CHECK_THROWS_WITH_AS(decode_frame(bad_kind), doctest::Contains("offset 5"), ProtocolError);

    auto trailing = frame;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_frame(trailing), ProtocolError);
}

TEST_CASE("an empty batch encodes a zero-count payload") {
    std::vector<std::uint8_t> payload = encode_batch({});
    CHECK(payload == std::vector<std::uint8_t>{0, 0, 0, 0});
    CHECK(decode_batch(payload).empty());
}

TEST_CASE("a batch of 3 interactions round-trips in order") {
    std::vector<Interaction> batch;
    for (std::uint32_t i = 0; i < 3; ++i) {
        Interaction it;
        it.src = 100 + i;
        it.dst = 7;
        it.send_step = 41;
        it.deliver_step = 42;
        it.seq = i;
        it.payload = {static_cast<std::uint8_t>(i), 0xFF};
        batch.push_back(it);
    }
    std::vector<std::uint8_t> payload = encode_batch(batch);
    std::vector<Interaction> back = decode_batch(payload);
    REQUIRE(back.size() == 3);
    for (std::uint32_t i = 0; i < 3; ++i) {
        CHECK(back[i].src == batch[i].src);
        CHECK(back[i].dst == batch[i].dst);
        CHECK(back[i].send_step == batch[i].send_step);
        CHECK(back[i].deliver_step == batch[i].deliver_step);
        CHECK(back[i].seq == batch[i].seq);
        CHECK(back[i].payload == batch[i].payload);
    }
}

TEST_CASE("a 10000-interaction batch serializes to the size the layout implies") {
    // per interaction: src u64 + dst u64 + send_step u64 + seq u32 + len u32,
    // plus payload bytes; batch header: count u32
    std::vector<Interaction> batch(10000);
    std::size_t payload_bytes = 0;
    SplitMix64 rng(3);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        batch[i].src = i;
        batch[i].dst = i / 2;
        batch[i].send_step = 5;
        batch[i].deliver_step = 6;
        batch[i].seq = static_cast<std::uint32_t>(i);
        batch[i].payload.resize(rng.next_below(16));
        payload_bytes += batch[i].payload.size();
    }
    const std::size_t expected = 4 + 10000 * (8 + 8 + 8 + 4 + 4) + payload_bytes;
    std::vector<std::uint8_t> payload = encode_batch(batch);
    CHECK(payload.size() == expected);

    std::vector<std::uint8_t> frame = encode_frame(FrameKind::InteractionBatch, payload);
    // length field equals the serialized batch size
    std::uint32_t length = (std::uint32_t(frame[6]) << 24) | (std::uint32_t(frame[7]) << 16) |
                           (std::uint32_t(frame[8]) << 8) | std::uint32_t(frame[9]);
    CHECK(length == expected);
    CHECK(decode_batch(payload).size() == 10000);
}

TEST_CASE("vote, release and migration payload messages round-trip") {
    VoteMsg vote;
    vote.lp = 3;
    vote.step = 17;
    vote.status = VoteStatus::Ok;
    vote.entities_executed = 25;
    vote.wall_time_us = 12345;
    vote.counts_prev = {{9, 1, 4}, {2, 0, 1}};
    vote.observed = {{9, 100}, {2, 50}};
    vote.leaves = {{0, 0xAB}, {1, 0xCD}};
    vote.dir_entries = {{4, {1, 2, 3}}};
    vote.acks = {{7, 16, 64, 1000}};
    VoteMsg vote_back = decode_vote(encode_vote(vote));
    CHECK(vote_back.lp == vote.lp);
    CHECK(vote_back.step == vote.step);
    CHECK(vote_back.entities_executed == vote.entities_executed);
    CHECK(vote_back.counts_prev.size() == 2);
    CHECK(vote_back.counts_prev[0].src == 9);
    CHECK(vote_back.counts_prev[0].dst_lp == 1);
    CHECK(vote_back.counts_prev[0].count == 4);
    CHECK(vote_back.observed[1].us == 50);
    CHECK(vote_back.leaves[1].leaf == 0xCD);
    CHECK(vote_back.dir_entries == vote.dir_entries);
    CHECK(vote_back.acks[0].entity == 7);
    CHECK(vote_back.acks[0].step == 16);
    CHECK(vote_back.acks[0].bytes == 64);

    ReleaseMsg rel;
    rel.step = 17;
    rel.status = VoteStatus::Fault;
    rel.fault_text = "boom";
    rel.migrations = {{5, 2, MigrationReason::Balance}};
    rel.directory = {{1, {9}}};
    ReleaseMsg rel_back = decode_release(encode_release(rel));
    CHECK(rel_back.step == 17);
    CHECK(rel_back.status == VoteStatus::Fault);
    CHECK(rel_back.fault_text == "boom");
    REQUIRE(rel_back.migrations.size() == 1);
    CHECK(rel_back.migrations[0].entity == 5);
    CHECK(rel_back.migrations[0].to_lp == 2);
    CHECK(rel_back.migrations[0].reason == MigrationReason::Balance);
    CHECK(rel_back.directory == rel.directory);

    MigrationPayloadMsg pm;
    pm.step = 4;
    pm.entity = 11;
    pm.payload = {1, 2, 3, 4, 5};
    MigrationPayloadMsg pm_back = decode_migration_payload(encode_migration_payload(pm));
    CHECK(pm_back.step == 4);
    CHECK(pm_back.entity == 11);
    CHECK(pm_back.payload == pm.payload);
}

TEST_CASE("flatten_topology validates the LP partition") {
    CHECK_THROWS_AS(flatten_topology({}), ConfigError);
    // LP 0 must live in group 0
    std::vector<ProcessGroup> wrong = {{"127.0.0.1", 1000, {1}}, {"127.0.0.1", 1001, {0}}};
    CHECK_THROWS_AS(flatten_topology(wrong), ConfigError);
    // duplicate LP
    std::vector<ProcessGroup> dup = {{"127.0.0.1", 1000, {0, 1}}, {"127.0.0.1", 1001, {1}}};
    CHECK_THROWS_AS(flatten_topology(dup), ConfigError);
    // valid
    std::vector<ProcessGroup> ok = {{"127.0.0.1", 1000, {0, 1}}, {"127.0.0.1", 1001, {2, 3}}};
    std::vector<LpEndpoint> eps = flatten_topology(ok);
    REQUIRE(eps.size() == 4);
    CHECK(eps[2].process == 1);
}

namespace {

struct RecordingSink : MeshSink {
    std::mutex m;
    std::condition_variable cv;
    std::vector<std::tuple<LpId, LpId, std::vector<Interaction>>> batches;
    std::vector<VoteMsg> votes;
    std::vector<std::pair<LpId, ReleaseMsg>> releases;
    std::vector<std::tuple<LpId, LpId, MigrationPayloadMsg>> migrations;
    std::vector<std::string> faults;

    void on_batch(LpId from, LpId to, std::vector<Interaction> batch) override {
        std::lock_guard<std::mutex> lock(m);
        batches.emplace_back(from, to, std::move(batch));
        cv.notify_all();
    }
    void on_migration(LpId from, LpId to, MigrationPayloadMsg msg) override {
        std::lock_guard<std::mutex> lock(m);
        migrations.emplace_back(from, to, std::move(msg));
        cv.notify_all();
    }
    void on_vote(VoteMsg msg) override {
        std::lock_guard<std::mutex> lock(m);
        votes.push_back(std::move(msg));
        cv.notify_all();
    }
    void on_release(LpId to, ReleaseMsg msg) override {
        std::lock_guard<std::mutex> lock(m);
        releases.emplace_back(to, std::move(msg));
        cv.notify_all();
    }
    void on_transport_fault(const std::string& what) override {
        std::lock_guard<std::mutex> lock(m);
        faults.push_back(what);
        cv.notify_all();
    }

    template <typename Pred>
    bool wait_for(Pred pred, int ms = 5000) {
        std::unique_lock<std::mutex> lock(m);
        return cv.wait_for(lock, std::chrono::milliseconds(ms), pred);
    }
};

std::uint16_t free_port() {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    socklen_t len = sizeof(addr);
    REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    std::uint16_t port = ntohs(addr.sin_port);
    ::close(fd);
    return port;
}

} // namespace

TEST_CASE("4 in-process endpoints make 6 in-memory links and no sockets") {
    RecordingSink sink;
    std::vector<ProcessGroup> groups = {{"127.0.0.1", 0, {0, 1, 2, 3}}};
    auto mesh = establish_topology(groups, 0, sink);
    CHECK(mesh->in_memory_link_count() == 6);
    CHECK(mesh->socket_link_count() == 0);
    mesh->shutdown();
}

TEST_CASE("a single endpoint yields an empty mesh") {
    RecordingSink sink;
    std::vector<ProcessGroup> groups = {{"127.0.0.1", 0, {0}}};
    auto mesh = establish_topology(groups, 0, sink);
    CHECK(mesh->in_memory_link_count() == 0);
    CHECK(mesh->socket_link_count() == 0);
    mesh->shutdown();
}

TEST_CASE("an unreachable peer fails startup naming the endpoint") {
    RecordingSink sink;
    std::uint16_t dead_port = free_port();
    std::vector<ProcessGroup> groups = {{"127.0.0.1", free_port(), {0}},
                                        {"127.0.0.1", dead_port, {1}}};
    MeshOptions options;
    options.connect_retries = 2;
    options.connect_retry_delay_ms = 10;
    std::string port_str = std::to_string(dead_port);
    CHECK_THROWS_WITH_AS(establish_topology(groups, 0, sink, options),
                         doctest::Contains(port_str.c_str()), TransportFault);
}

TEST_CASE("two processes exchange every frame kind over TCP") {
    RecordingSink sink_a, sink_b;
    std::uint16_t port_a = free_port();
    std::uint16_t port_b = free_port();
    std::vector<ProcessGroup> groups = {{"127.0.0.1", port_a, {0, 1}},
                                        {"127.0.0.1", port_b, {2, 3}}};

    std::unique_ptr<Mesh> mesh_a, mesh_b;
    std::thread tb([&] { mesh_b = establish_topology(groups, 1, sink_b); });
    mesh_a = establish_topology(groups, 0, sink_a);
    tb.join();
    // each side: 1 in-memory link for its co-located pair, 4 sockets between
    CHECK(mesh_a->in_memory_link_count() == 1);
    CHECK(mesh_a->socket_link_count() == 4);
    CHECK(mesh_b->socket_link_count() == 4);

    // batch lp1 -> lp2 crosses the wire
    Interaction it;
    it.src = 10;
    it.dst = 20;
    it.send_step = 0;
    it.deliver_step = 1;
    it.seq = 0;
    it.payload = {42};
    mesh_a->send_batch(1, 2, std::vector<Interaction>{it});
    REQUIRE(sink_b.wait_for([&] { return sink_b.batches.size() == 1; }));
    {
        auto& [from, to, batch] = sink_b.batches[0];
        CHECK(from == 1);
        CHECK(to == 2);
        REQUIRE(batch.size() == 1);
        CHECK(batch[0].payload == std::vector<std::uint8_t>{42});
        CHECK(batch[0].deliver_step == 1);
    }

    // in-memory batch lp0 -> lp1 stays in process A
    mesh_a->send_batch(0, 1, std::vector<Interaction>{});
    REQUIRE(sink_a.wait_for([&] { return sink_a.batches.size() == 1; }));

    // vote from remote lp3 reaches the coordinator's sink
    VoteMsg vote;
    vote.lp = 3;
    vote.step = 0;
    mesh_b->send_vote(3, vote);
    REQUIRE(sink_a.wait_for([&] { return sink_a.votes.size() == 1; }));
    CHECK(sink_a.votes[0].lp == 3);

    // release from lp0 to remote lp2
    ReleaseMsg rel;
    rel.step = 0;
    mesh_a->send_release(2, rel);
    REQUIRE(sink_b.wait_for([&] { return sink_b.releases.size() == 1; }));
    CHECK(sink_b.releases[0].first == 2);

    // migration payload lp2 -> lp0
    MigrationPayloadMsg pm;
    pm.step = 0;
    pm.entity = 77;
    pm.payload = {1, 2, 3};
    mesh_b->send_migration(2, 0, pm);
    REQUIRE(sink_a.wait_for([&] { return sink_a.migrations.size() == 1; }));
    CHECK(std::get<2>(sink_a.migrations[0]).entity == 77);

    CHECK(sink_a.faults.empty());
    CHECK(sink_b.faults.empty());
    mesh_a->shutdown();
    mesh_b->shutdown();
}

TEST_SUITE_END();
