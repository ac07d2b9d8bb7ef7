#ifndef PADS_TRANSPORT_HPP
#define PADS_TRANSPORT_HPP

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pads/behavior.hpp"
#include "pads/types.hpp"

namespace pads::transport {

// ---------------------------------------------------------------------------
// Wire protocol. Frames are: magic "PADS", version 1, kind byte, u32 length
// (big-endian), then exactly `length` payload bytes. All multi-byte integers
// on the wire are big-endian.
// ---------------------------------------------------------------------------

inline constexpr std::array<std::uint8_t, 4> kMagic = {'P', 'A', 'D', 'S'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 10;

enum class FrameKind : std::uint8_t {
    InteractionBatch = 0,
    MigrationPayload = 1,
    BarrierVote = 2,
    BarrierRelease = 3,
};

struct Frame {
    FrameKind kind;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(FrameKind kind, std::span<const std::uint8_t> payload);

/// Decodes one complete frame from `bytes`. Rejects bad magic, unknown
/// version or kind, and truncation, reporting the offending offset.
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Header-only decode for streaming reads; returns the payload length still
/// to be read.
std::uint32_t decode_frame_header(std::span<const std::uint8_t, kFrameHeaderSize> header,
                                  FrameKind& kind_out);

/// Interaction batch payload: count u32, then per interaction
/// src u64, dst u64, send_step u64, seq u32, payload_len u32, payload bytes.
std::vector<std::uint8_t> encode_batch(std::span<const Interaction> interactions);
std::vector<Interaction> decode_batch(std::span<const std::uint8_t> payload);

// ---------------------------------------------------------------------------
// Barrier and migration messages. These cross LP boundaries as frames when the
// peers live in different processes, and as in-memory structs otherwise.
// ---------------------------------------------------------------------------

enum class VoteStatus : std::uint8_t { Ok = 0, Fault = 1, Final = 2 };

struct SentCount {
    EntityId src = 0;
    LpId dst_lp = 0;
    std::uint32_t count = 0;
};

struct ObservedUs {
    EntityId id = 0;
    std::uint64_t us = 0;
};

struct DigestLeaf {
    EntityId id = 0;
    std::uint64_t leaf = 0;
};

struct MigrationAck {
    EntityId entity = 0;
    VirtualTime step = 0;
    std::uint64_t bytes = 0;
    std::uint64_t transfer_us = 0;
};

/// Per-LP barrier vote. Carries the step report plus everything the
/// coordinator needs: the previous step's routed traffic counts, measured
/// per-entity handler times, digest leaves and directory entries for the LP's
/// residents, and acks for migrations applied at the previous barrier.
/// A Final vote (sent once, after the last step) carries the LP's full report
/// series instead.
struct VoteMsg {
    LpId lp = 0;
    VirtualTime step = 0;
    VoteStatus status = VoteStatus::Ok;
    std::string fault_text;
    std::uint64_t entities_executed = 0;
    std::uint64_t wall_time_us = 0;
    std::vector<SentCount> counts_prev;
    std::vector<ObservedUs> observed;
    std::vector<DigestLeaf> leaves;
    DirectoryBlob dir_entries;
    std::vector<MigrationAck> acks;
    std::vector<StepReport> final_reports;
};

struct MigrationOrder {
    EntityId entity = 0;
    LpId to_lp = 0;
    MigrationReason reason = MigrationReason::Cluster;
};

/// Coordinator's answer to a round of votes: the migration list to apply
/// atomically before the next step, and the merged model directory.
struct ReleaseMsg {
    VirtualTime step = 0;
    VoteStatus status = VoteStatus::Ok;
    std::string fault_text;
    std::vector<MigrationOrder> migrations;
    DirectoryBlob directory;
};

struct MigrationPayloadMsg {
    VirtualTime step = 0;
    EntityId entity = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_vote(const VoteMsg& msg);
VoteMsg decode_vote(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_release(const ReleaseMsg& msg);
ReleaseMsg decode_release(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_migration_payload(const MigrationPayloadMsg& msg);
MigrationPayloadMsg decode_migration_payload(std::span<const std::uint8_t> payload);

// ---------------------------------------------------------------------------
// Topology and mesh.
// ---------------------------------------------------------------------------

/// One process's slice of the pool. lps must be dense and non-overlapping
/// across groups; group 0 hosts LP 0 and coordinates.
struct ProcessGroup {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    std::vector<LpId> lps;
};

struct LpEndpoint {
    LpId lp_id = 0;
    std::uint32_t process = 0;
    std::string host;
    std::uint16_t port = 0;
    bool remote_to(std::uint32_t my_process) const { return process != my_process; }
};

/// Flattens groups into dense per-LP endpoints. Throws ConfigError if the LP
/// ids are not a partition of 0..pool_size-1 or LP 0 is not in group 0.
std::vector<LpEndpoint> flatten_topology(const std::vector<ProcessGroup>& groups);

/// Inbound delivery interface the engine implements. Called from worker
/// threads (in-memory sends) and socket reader threads; must be thread-safe.
class MeshSink {
public:
    virtual ~MeshSink() = default;
    virtual void on_batch(LpId from, LpId to, std::vector<Interaction> batch) = 0;
    virtual void on_migration(LpId from, LpId to, MigrationPayloadMsg msg) = 0;
    virtual void on_vote(VoteMsg msg) = 0;
    virtual void on_release(LpId to, ReleaseMsg msg) = 0;
    virtual void on_transport_fault(const std::string& what) = 0;
};

struct MeshOptions {
    int connect_retries = 100;
    int connect_retry_delay_ms = 50;
};

/**
 * Full mesh of channels between LPs: direct sink calls for co-located pairs,
 * one TCP stream per remote pair. Construction blocks until every link is up.
 *
 * Write discipline: all frames from LP i are written by i's worker thread, so
 * each socket direction has a single producer and needs no locking. Inbound
 * frames are decoded on a dedicated reader thread per socket and handed to
 * the sink.
 */
class Mesh {
public:
    Mesh(std::vector<LpEndpoint> endpoints, std::uint32_t my_process, MeshSink& sink,
         MeshOptions options = {});
    ~Mesh();

    Mesh(const Mesh&) = delete;
    Mesh& operator=(const Mesh&) = delete;

    /// Sends the step's full batch from one LP to another, empty or not.
    /// Empty batches double as step progress markers.
    void send_batch(LpId from, LpId to, std::span<const Interaction> interactions);

    void send_vote(LpId from, const VoteMsg& msg);              // to LP 0
    void send_release(LpId to, const ReleaseMsg& msg);          // from LP 0
    void send_migration(LpId from, LpId to, const MigrationPayloadMsg& msg);

    /// Marks the run as finished so reader threads treat peer close as normal.
    void shutdown();

    std::size_t in_memory_link_count() const;
    std::size_t socket_link_count() const;
    const std::vector<LpEndpoint>& endpoints() const { return endpoints_; }
    bool local(LpId lp) const { return endpoints_[lp].process == my_process_; }

private:
    struct Link;

    Link* link_for(LpId a, LpId b);
    void send_frame(LpId from, LpId to, FrameKind kind, std::span<const std::uint8_t> payload);
    void reader_loop(Link& link);
    void establish(const MeshOptions& options);

    std::vector<LpEndpoint> endpoints_;
    std::uint32_t my_process_;
    MeshSink& sink_;
    std::vector<std::unique_ptr<Link>> links_;
    std::vector<std::thread> readers_;
    std::atomic<bool> finished_{false};
    int listen_fd_ = -1;
};

/// establish_topology: builds the mesh for this process and blocks until all
/// links are connected. Throws TransportFault naming the unreachable endpoint
/// after bounded retries.
std::unique_ptr<Mesh> establish_topology(const std::vector<ProcessGroup>& groups,
                                         std::uint32_t my_process, MeshSink& sink,
                                         MeshOptions options = {});

} // namespace pads::transport

#endif // PADS_TRANSPORT_HPP
