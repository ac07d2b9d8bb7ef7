#include "pads/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <mutex>

#include "pads/bytes.hpp"
#include "pads/errors.hpp"

namespace pads::transport {

// ---------------------------------------------------------------------------
// Frame codec
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_frame(FrameKind kind, std::span<const std::uint8_t> payload) {
    if (payload.size() > 0xFFFFFFFFull) {
        throw ProtocolError("frame payload exceeds 2^32-1 bytes");
    }
    ByteWriter w;
    w.bytes(kMagic);
    w.u8(kVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.bytes(payload);
    return w.take();
}

std::uint32_t decode_frame_header(std::span<const std::uint8_t, kFrameHeaderSize> header,
                                  FrameKind& kind_out) {
    for (std::size_t i = 0; i < kMagic.size(); ++i) {
        if (header[i] != kMagic[i]) {
            throw ProtocolError("bad magic at offset " + std::to_string(i));
        }
    }
    if (header[4] != kVersion) {
        throw ProtocolError("unsupported version " + std::to_string(header[4]) + " at offset 4");
    }
    std::uint8_t kind = header[5];
    if (kind > static_cast<std::uint8_t>(FrameKind::BarrierRelease)) {
        throw ProtocolError("unknown frame kind " + std::to_string(kind) + " at offset 5");
    }
    kind_out = static_cast<FrameKind>(kind);
    return (std::uint32_t(header[6]) << 24) | (std::uint32_t(header[7]) << 16) |
           (std::uint32_t(header[8]) << 8) | std::uint32_t(header[9]);
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameHeaderSize) {
        throw ProtocolError("truncated frame: " + std::to_string(bytes.size()) +
                            " bytes, header needs " + std::to_string(kFrameHeaderSize));
    }
    FrameKind kind;
    std::uint32_t length =
        decode_frame_header(bytes.subspan<0, kFrameHeaderSize>(), kind);
    if (bytes.size() - kFrameHeaderSize < length) {
        throw ProtocolError("truncated frame: declares " + std::to_string(length) +
                            "-byte payload at offset 6, only " +
                            std::to_string(bytes.size() - kFrameHeaderSize) + " available");
    }
    if (bytes.size() - kFrameHeaderSize > length) {
        throw ProtocolError("frame length mismatch: " +
                            std::to_string(bytes.size() - kFrameHeaderSize - length) +
                            " trailing bytes after payload");
    }
    Frame f;
    f.kind = kind;
    f.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.end());
    return f;
}

// ---------------------------------------------------------------------------
// Payload codecs
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_batch(std::span<const Interaction> interactions) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(interactions.size()));
    for (const Interaction& it : interactions) {
        w.u64(it.src);
        w.u64(it.dst);
        w.u64(it.send_step);
        w.u32(it.seq);
        w.sized_bytes(it.payload);
    }
    return w.take();
}

std::vector<Interaction> decode_batch(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    std::uint32_t count = r.u32();
    std::vector<Interaction> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Interaction it;
        it.src = r.u64();
        it.dst = r.u64();
        it.send_step = r.u64();
        it.deliver_step = it.send_step + 1;
        it.seq = r.u32();
        it.payload = r.sized_bytes();
        out.push_back(std::move(it));
    }
    if (!r.done()) {
        throw ProtocolError("trailing bytes in interaction batch at offset " +
                            std::to_string(r.offset()));
    }
    return out;
}

namespace {

void write_string(ByteWriter& w, const std::string& s) {
    w.u32(static_cast<std::uint32_t>(s.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::string read_string(ByteReader& r) {
    std::vector<std::uint8_t> b = r.sized_bytes();
    return std::string(b.begin(), b.end());
}

void write_directory(ByteWriter& w, const DirectoryBlob& dir) {
    w.u32(static_cast<std::uint32_t>(dir.size()));
    for (const auto& [id, bytes] : dir) {
        w.u64(id);
        w.sized_bytes(bytes);
    }
}

DirectoryBlob read_directory(ByteReader& r) {
    std::uint32_t n = r.u32();
    DirectoryBlob dir;
    dir.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        EntityId id = r.u64();
        dir.emplace_back(id, r.sized_bytes());
    }
    return dir;
}

} // namespace

std::vector<std::uint8_t> encode_vote(const VoteMsg& msg) {
    ByteWriter w;
    w.u32(msg.lp);
    w.u64(msg.step);
    w.u8(static_cast<std::uint8_t>(msg.status));
    write_string(w, msg.fault_text);
    w.u64(msg.entities_executed);
    w.u64(msg.wall_time_us);
    w.u32(static_cast<std::uint32_t>(msg.counts_prev.size()));
    for (const SentCount& c : msg.counts_prev) {
        w.u64(c.src);
        w.u32(c.dst_lp);
        w.u32(c.count);
    }
    w.u32(static_cast<std::uint32_t>(msg.observed.size()));
    for (const ObservedUs& o : msg.observed) {
        w.u64(o.id);
        w.u64(o.us);
    }
    w.u32(static_cast<std::uint32_t>(msg.leaves.size()));
    for (const DigestLeaf& l : msg.leaves) {
        w.u64(l.id);
        w.u64(l.leaf);
    }
    write_directory(w, msg.dir_entries);
    w.u32(static_cast<std::uint32_t>(msg.acks.size()));
    for (const MigrationAck& a : msg.acks) {
        w.u64(a.entity);
        w.u64(a.step);
        w.u64(a.bytes);
        w.u64(a.transfer_us);
    }
    w.u32(static_cast<std::uint32_t>(msg.final_reports.size()));
    for (const StepReport& rep : msg.final_reports) {
        w.u64(rep.step);
        w.u64(rep.messages_sent_local);
        w.u64(rep.messages_sent_remote);
        w.u64(rep.entities_executed);
        w.u64(rep.wall_time_us);
        w.u64(rep.barrier_wait_us);
    }
    return w.take();
}

VoteMsg decode_vote(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    VoteMsg msg;
    msg.lp = r.u32();
    msg.step = r.u64();
    msg.status = static_cast<VoteStatus>(r.u8());
    msg.fault_text = read_string(r);
    msg.entities_executed = r.u64();
    msg.wall_time_us = r.u64();
    std::uint32_t n = r.u32();
    msg.counts_prev.resize(n);
    for (auto& c : msg.counts_prev) {
        c.src = r.u64();
        c.dst_lp = r.u32();
        c.count = r.u32();
    }
    n = r.u32();
    msg.observed.resize(n);
    for (auto& o : msg.observed) {
        o.id = r.u64();
        o.us = r.u64();
    }
    n = r.u32();
    msg.leaves.resize(n);
    for (auto& l : msg.leaves) {
        l.id = r.u64();
        l.leaf = r.u64();
    }
    msg.dir_entries = read_directory(r);
    n = r.u32();
    msg.acks.resize(n);
    for (auto& a : msg.acks) {
        a.entity = r.u64();
        a.step = r.u64();
        a.bytes = r.u64();
        a.transfer_us = r.u64();
    }
    n = r.u32();
    msg.final_reports.resize(n);
    for (auto& rep : msg.final_reports) {
        rep.lp_id = msg.lp;
        rep.step = r.u64();
        rep.messages_sent_local = r.u64();
        rep.messages_sent_remote = r.u64();
        rep.entities_executed = r.u64();
        rep.wall_time_us = r.u64();
        rep.barrier_wait_us = r.u64();
    }
    return msg;
}

std::vector<std::uint8_t> encode_release(const ReleaseMsg& msg) {
    ByteWriter w;
    w.u64(msg.step);
    w.u8(static_cast<std::uint8_t>(msg.status));
    write_string(w, msg.fault_text);
    w.u32(static_cast<std::uint32_t>(msg.migrations.size()));
    for (const MigrationOrder& m : msg.migrations) {
        w.u64(m.entity);
        w.u32(m.to_lp);
        w.u8(static_cast<std::uint8_t>(m.reason));
    }
    write_directory(w, msg.directory);
    return w.take();
}

ReleaseMsg decode_release(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    ReleaseMsg msg;
    msg.step = r.u64();
    msg.status = static_cast<VoteStatus>(r.u8());
    msg.fault_text = read_string(r);
    std::uint32_t n = r.u32();
    msg.migrations.resize(n);
    for (auto& m : msg.migrations) {
        m.entity = r.u64();
        m.to_lp = r.u32();
        m.reason = static_cast<MigrationReason>(r.u8());
    }
    msg.directory = read_directory(r);
    return msg;
}

std::vector<std::uint8_t> encode_migration_payload(const MigrationPayloadMsg& msg) {
    ByteWriter w;
    w.u64(msg.step);
    w.u64(msg.entity);
    w.sized_bytes(msg.payload);
    return w.take();
}

MigrationPayloadMsg decode_migration_payload(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    MigrationPayloadMsg msg;
    msg.step = r.u64();
    msg.entity = r.u64();
    msg.payload = r.sized_bytes();
    return msg;
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

std::vector<LpEndpoint> flatten_topology(const std::vector<ProcessGroup>& groups) {
    if (groups.empty()) {
        throw ConfigError("topology needs at least one process group");
    }
    std::size_t total = 0;
    for (const ProcessGroup& g : groups) total += g.lps.size();
    if (total == 0) {
        throw ConfigError("topology lists no LPs");
    }
    std::vector<LpEndpoint> endpoints(total);
    std::vector<bool> seen(total, false);
    for (std::uint32_t p = 0; p < groups.size(); ++p) {
        for (LpId lp : groups[p].lps) {
            if (lp >= total || seen[lp]) {
                throw ConfigError("process groups must partition LP ids 0.." +
                                  std::to_string(total - 1));
            }
            seen[lp] = true;
            endpoints[lp] = LpEndpoint{lp, p, groups[p].host, groups[p].port};
        }
    }
    if (endpoints[0].process != 0) {
        throw ConfigError("LP 0 must be hosted by process group 0 (the coordinator)");
    }
    return endpoints;
}

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

struct Mesh::Link {
    LpId a = 0; // a < b
    LpId b = 0;
    int fd = -1; // -1: co-located pair, delivered by direct sink call
    LpId local_lp = 0;
    LpId peer_lp = 0;
};

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportFault(std::string("send failed: ") + std::strerror(errno));
        }
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

// Returns false on clean EOF at a frame boundary.
bool read_all(int fd, std::uint8_t* data, std::size_t len, bool eof_ok) {
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, data + got, len - got, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportFault(std::string("recv failed: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (got == 0 && eof_ok) return false;
            throw TransportFault("peer closed mid-frame");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

int make_listener(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportFault("socket() failed");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw TransportFault("bad listen address " + host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd, 64) != 0) {
        ::close(fd);
        throw TransportFault("cannot listen on " + host + ":" + std::to_string(port) + ": " +
                             std::strerror(errno));
    }
    return fd;
}

int dial(const std::string& host, std::uint16_t port, const MeshOptions& options) {
    for (int attempt = 0; attempt <= options.connect_retries; ++attempt) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw TransportFault("socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            throw TransportFault("bad peer address " + host);
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return fd;
        }
        ::close(fd);
        std::this_thread::sleep_for(std::chrono::milliseconds(options.connect_retry_delay_ms));
    }
    throw TransportFault("cannot reach endpoint " + host + ":" + std::to_string(port) +
                         " after bounded retries");
}

} // namespace

Mesh::Mesh(std::vector<LpEndpoint> endpoints, std::uint32_t my_process, MeshSink& sink,
           MeshOptions options)
    : endpoints_(std::move(endpoints)), my_process_(my_process), sink_(sink) {
    establish(options);
}

void Mesh::establish(const MeshOptions& options) {
    const std::size_t pool = endpoints_.size();

    // Enumerate the pairs this process participates in.
    struct Pending {
        LpId a, b;       // a < b
        LpId local, peer;
        bool i_dial;
    };
    std::vector<Pending> remote_pairs;
    for (LpId a = 0; a < pool; ++a) {
        for (LpId b = a + 1; b < pool; ++b) {
            bool a_local = endpoints_[a].process == my_process_;
            bool b_local = endpoints_[b].process == my_process_;
            if (a_local && b_local) {
                auto link = std::make_unique<Link>();
                link->a = a;
                link->b = b;
                links_.push_back(std::move(link));
            } else if (a_local || b_local) {
                Pending p;
                p.a = a;
                p.b = b;
                p.local = a_local ? a : b;
                p.peer = a_local ? b : a;
                p.i_dial = a_local; // the process hosting the lower LP id dials
                remote_pairs.push_back(p);
            }
        }
    }
    if (remote_pairs.empty()) return;

    std::size_t expect_inbound = 0;
    for (const Pending& p : remote_pairs) {
        if (!p.i_dial) ++expect_inbound;
    }

    std::vector<std::unique_ptr<Link>> socket_links;
    std::mutex links_mutex;

    std::thread acceptor;
    std::string accept_error;
    if (expect_inbound > 0) {
        const LpEndpoint& self = endpoints_[0].process == my_process_
                                     ? endpoints_[0]
                                     : *std::find_if(endpoints_.begin(), endpoints_.end(),
                                                     [&](const LpEndpoint& e) {
                                                         return e.process == my_process_;
                                                     });
        listen_fd_ = make_listener(self.host, self.port);
        int deadline_ms = (options.connect_retries + 2) * options.connect_retry_delay_ms + 2000;
        acceptor = std::thread([this, expect_inbound, deadline_ms, &socket_links, &links_mutex,
                                &accept_error] {
            try {
                std::size_t got = 0;
                auto deadline = std::chrono::steady_clock::now() +
                                std::chrono::milliseconds(deadline_ms);
                while (got < expect_inbound) {
                    pollfd pfd{listen_fd_, POLLIN, 0};
                    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now());
                    if (left.count() <= 0) {
                        throw TransportFault("timed out waiting for inbound links");
                    }
                    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
                    if (rc <= 0) continue;
                    int fd = ::accept(listen_fd_, nullptr, nullptr);
                    if (fd < 0) continue;
                    int one = 1;
                    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
                    std::uint8_t hello[8];
                    read_all(fd, hello, sizeof(hello), false);
                    LpId dialer = (std::uint32_t(hello[0]) << 24) | (std::uint32_t(hello[1]) << 16) |
                                  (std::uint32_t(hello[2]) << 8) | std::uint32_t(hello[3]);
                    LpId target = (std::uint32_t(hello[4]) << 24) | (std::uint32_t(hello[5]) << 16) |
                                  (std::uint32_t(hello[6]) << 8) | std::uint32_t(hello[7]);
                    auto link = std::make_unique<Link>();
                    link->a = std::min(dialer, target);
                    link->b = std::max(dialer, target);
                    link->fd = fd;
                    link->local_lp = target;
                    link->peer_lp = dialer;
                    std::lock_guard<std::mutex> lock(links_mutex);
                    socket_links.push_back(std::move(link));
                    ++got;
                }
            } catch (const std::exception& e) {
                accept_error = e.what();
            }
        });
    }

    std::string dial_error;
    try {
        for (const Pending& p : remote_pairs) {
            if (!p.i_dial) continue;
            const LpEndpoint& peer = endpoints_[p.peer];
            int fd = dial(peer.host, peer.port, options);
            std::uint8_t hello[8];
            for (int i = 0; i < 4; ++i) hello[i] = static_cast<std::uint8_t>(p.local >> (24 - 8 * i));
            for (int i = 0; i < 4; ++i)
                hello[4 + i] = static_cast<std::uint8_t>(p.peer >> (24 - 8 * i));
            write_all(fd, hello, sizeof(hello));
            auto link = std::make_unique<Link>();
            link->a = p.a;
            link->b = p.b;
            link->fd = fd;
            link->local_lp = p.local;
            link->peer_lp = p.peer;
            std::lock_guard<std::mutex> lock(links_mutex);
            socket_links.push_back(std::move(link));
        }
    } catch (const std::exception& e) {
        dial_error = e.what();
    }

    if (acceptor.joinable()) acceptor.join();
    if (listen_fd_ >= 0 && !dial_error.empty()) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (!dial_error.empty()) throw TransportFault(dial_error);
    if (!accept_error.empty()) throw TransportFault(accept_error);

    for (auto& link : socket_links) {
        links_.push_back(std::move(link));
    }
    for (auto& link : links_) {
        if (link->fd >= 0) {
            readers_.emplace_back([this, l = link.get()] { reader_loop(*l); });
        }
    }
}

Mesh::~Mesh() {
    shutdown();
    for (auto& link : links_) {
        if (link->fd >= 0) {
            ::shutdown(link->fd, SHUT_RDWR);
        }
    }
    for (std::thread& t : readers_) {
        if (t.joinable()) t.join();
    }
    for (auto& link : links_) {
        if (link->fd >= 0) ::close(link->fd);
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Mesh::shutdown() { finished_.store(true); }

Mesh::Link* Mesh::link_for(LpId a, LpId b) {
    LpId lo = std::min(a, b), hi = std::max(a, b);
    for (auto& link : links_) {
        if (link->a == lo && link->b == hi) return link.get();
    }
    return nullptr;
}

void Mesh::send_frame(LpId from, LpId to, FrameKind kind, std::span<const std::uint8_t> payload) {
    Link* link = link_for(from, to);
    if (link == nullptr || link->fd < 0) {
        throw TransportFault("no socket link between lp " + std::to_string(from) + " and lp " +
                             std::to_string(to));
    }
    std::vector<std::uint8_t> frame = encode_frame(kind, payload);
    write_all(link->fd, frame.data(), frame.size());
}

void Mesh::send_batch(LpId from, LpId to, std::span<const Interaction> interactions) {
    if (local(to) && local(from)) {
        sink_.on_batch(from, to, std::vector<Interaction>(interactions.begin(), interactions.end()));
        return;
    }
    send_frame(from, to, FrameKind::InteractionBatch, encode_batch(interactions));
}

void Mesh::send_vote(LpId from, const VoteMsg& msg) {
    if (local(0)) {
        sink_.on_vote(msg);
        return;
    }
    send_frame(from, 0, FrameKind::BarrierVote, encode_vote(msg));
}

void Mesh::send_release(LpId to, const ReleaseMsg& msg) {
    if (local(to)) {
        sink_.on_release(to, msg);
        return;
    }
    send_frame(0, to, FrameKind::BarrierRelease, encode_release(msg));
}

void Mesh::send_migration(LpId from, LpId to, const MigrationPayloadMsg& msg) {
    if (local(to) && local(from)) {
        sink_.on_migration(from, to, msg);
        return;
    }
    send_frame(from, to, FrameKind::MigrationPayload, encode_migration_payload(msg));
}

void Mesh::reader_loop(Link& link) {
    try {
        for (;;) {
            std::uint8_t header[kFrameHeaderSize];
            if (!read_all(link.fd, header, sizeof(header), true)) {
                if (!finished_.load()) {
                    sink_.on_transport_fault("lp " + std::to_string(link.peer_lp) +
                                             " closed the link mid-run");
                }
                return;
            }
            FrameKind kind;
            std::uint32_t length = decode_frame_header(
                std::span<const std::uint8_t, kFrameHeaderSize>(header, kFrameHeaderSize), kind);
            std::vector<std::uint8_t> payload(length);
            if (length > 0) read_all(link.fd, payload.data(), length, false);
            switch (kind) {
                case FrameKind::InteractionBatch:
                    sink_.on_batch(link.peer_lp, link.local_lp, decode_batch(payload));
                    break;
                case FrameKind::MigrationPayload:
                    sink_.on_migration(link.peer_lp, link.local_lp,
                                       decode_migration_payload(payload));
                    break;
                case FrameKind::BarrierVote:
                    sink_.on_vote(decode_vote(payload));
                    break;
                case FrameKind::BarrierRelease:
                    sink_.on_release(link.local_lp, decode_release(payload));
                    break;
            }
        }
    } catch (const std::exception& e) {
        if (!finished_.load()) {
            sink_.on_transport_fault(e.what());
        }
    }
}

std::size_t Mesh::in_memory_link_count() const {
    std::size_t n = 0;
    for (const auto& link : links_) {
        if (link->fd < 0) ++n;
    }
    return n;
}

std::size_t Mesh::socket_link_count() const {
    return links_.size() - in_memory_link_count();
}

std::unique_ptr<Mesh> establish_topology(const std::vector<ProcessGroup>& groups,
                                         std::uint32_t my_process, MeshSink& sink,
                                         MeshOptions options) {
    return std::make_unique<Mesh>(flatten_topology(groups), my_process, sink, options);
}

} // namespace pads::transport
