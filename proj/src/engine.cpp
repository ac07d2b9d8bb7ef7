#include "pads/engine.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "pads/bytes.hpp"
#include "pads/digest.hpp"
#include "pads/errors.hpp"

namespace pads {

using transport::DigestLeaf;
using transport::Mesh;
using transport::MigrationAck;
using transport::MigrationOrder;
using transport::MigrationPayloadMsg;
using transport::ObservedUs;
using transport::ReleaseMsg;
using transport::SentCount;
using transport::VoteMsg;
using transport::VoteStatus;

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_us(Clock::time_point from, Clock::time_point to) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(to - from).count());
}

enum class FaultCode : std::uint8_t {
    None = 0,
    Entity = 1,
    Routing = 2,
    Transport = 3,
    Migration = 4,
};

[[noreturn]] void throw_fault(FaultCode code, const std::string& text) {
    switch (code) {
        case FaultCode::Routing: throw RoutingFault(text);
        case FaultCode::Transport: throw TransportFault(text);
        case FaultCode::Migration: throw MigrationFault(text);
        default: throw std::runtime_error(text);
    }
}

} // namespace

void sort_inbox(std::vector<Interaction>& inbox) {
    std::sort(inbox.begin(), inbox.end(), [](const Interaction& a, const Interaction& b) {
        if (a.src != b.src) return a.src < b.src;
        return a.seq < b.seq;
    });
}

// ---------------------------------------------------------------------------
// Impl
// ---------------------------------------------------------------------------

struct Simulation::Impl : transport::MeshSink {
    EngineConfig cfg;
    World world;
    BehaviorTable behaviors;
    std::vector<transport::LpEndpoint> endpoints;
    std::unique_ptr<Mesh> mesh;
    LpId pool = 1;
    std::size_t n = 0;
    bool coordinator_process = false;
    bool any_directory = false;
    DirectoryBlob initial_directory;

    // --- staging monitor: one mutex/cv guards all cross-thread state ---
    std::mutex mon;
    std::condition_variable cv;

    struct LpStage {
        std::map<VirtualTime, std::vector<Interaction>> staged;
        std::map<VirtualTime, std::uint32_t> peer_batches;
        std::vector<VirtualTime> next_from; // per-source batch step counter
        std::vector<MigrationPayloadMsg> migrations_in;
        std::deque<ReleaseMsg> releases;
    };
    std::map<LpId, LpStage> stages; // local LPs only

    std::map<VirtualTime, std::vector<VoteMsg>> votes;
    std::vector<VoteMsg> finals;

    bool aborted = false;
    FaultCode fault_code = FaultCode::None;
    std::string fault_text;
    std::exception_ptr first_error;

    std::vector<StepReport> local_reports;

    // --- coordinator state (touched only by LP 0's worker on process 0) ---
    std::unique_ptr<adapt::Controller> controller;
    std::vector<LpId> coord_placement;
    std::vector<double> weights;
    std::vector<std::uint64_t> state_sizes;
    std::vector<double> lp_work; // declared work units per step per LP
    std::uint64_t initial_digest = 0;
    std::vector<std::uint64_t> step_digests;
    std::vector<MigrationRecord> migration_log;

    Impl(EngineConfig c, World w, BehaviorTable b)
        : cfg(std::move(c)), world(std::move(w)), behaviors(std::move(b)) {
        pool = world.pool_size();
        n = world.entity_count();
        if (cfg.topology.empty()) {
            transport::ProcessGroup group;
            for (LpId lp = 0; lp < pool; ++lp) group.lps.push_back(lp);
            cfg.topology.push_back(std::move(group));
        }
        endpoints = transport::flatten_topology(cfg.topology);
        if (endpoints.size() != pool) {
            throw ConfigError("topology lists " + std::to_string(endpoints.size()) +
                              " LPs but pool_size is " + std::to_string(pool));
        }
        if (cfg.process_index >= cfg.topology.size()) {
            throw ConfigError("process index out of range");
        }
        coordinator_process = cfg.process_index == 0;
        for (auto& [kind, behavior] : behaviors) {
            if (behavior && behavior->uses_directory()) any_directory = true;
        }
        for (LpId lp = 0; lp < pool; ++lp) {
            if (endpoints[lp].process == cfg.process_index) {
                stages[lp].next_from.assign(pool, 1);
            }
        }
        if (cfg.background.enabled) {
            if (cfg.background.lp >= pool) {
                throw ConfigError("background_load.lp out of range");
            }
            if (cfg.background.start >= cfg.background.stop ||
                cfg.background.stop > cfg.max_steps) {
                throw ConfigError("background_load interval must satisfy start < stop <= max_steps");
            }
        }
    }

    Behavior& behavior_for(BehaviorKind kind) {
        auto it = behaviors.find(kind);
        if (it == behaviors.end() || !it->second) {
            throw ConfigError(std::string("no behavior registered for kind ") + to_string(kind));
        }
        return *it->second;
    }

    bool local(LpId lp) const { return endpoints[lp].process == cfg.process_index; }

    // --- MeshSink ---

    void on_batch(LpId from, LpId to, std::vector<Interaction> batch) override {
        std::lock_guard<std::mutex> lock(mon);
        LpStage& st = stages[to];
        VirtualTime step = st.next_from[from]++;
        auto& vec = st.staged[step];
        vec.insert(vec.end(), std::make_move_iterator(batch.begin()),
                   std::make_move_iterator(batch.end()));
        st.peer_batches[step] += 1;
        cv.notify_all();
    }

    void on_migration(LpId /*from*/, LpId to, MigrationPayloadMsg msg) override {
        std::lock_guard<std::mutex> lock(mon);
        stages[to].migrations_in.push_back(std::move(msg));
        cv.notify_all();
    }

    void on_vote(VoteMsg msg) override {
        std::lock_guard<std::mutex> lock(mon);
        if (msg.status == VoteStatus::Final) {
            finals.push_back(std::move(msg));
        } else {
            votes[msg.step].push_back(std::move(msg));
        }
        cv.notify_all();
    }

    void on_release(LpId to, ReleaseMsg msg) override {
        std::lock_guard<std::mutex> lock(mon);
        stages[to].releases.push_back(std::move(msg));
        cv.notify_all();
    }

    void on_transport_fault(const std::string& what) override {
        trip(FaultCode::Transport, what, nullptr);
    }

    // --- abort handling ---

    void trip(FaultCode code, const std::string& text, std::exception_ptr err) {
        std::lock_guard<std::mutex> lock(mon);
        if (!aborted) {
            aborted = true;
            fault_code = code;
            fault_text = text;
            first_error = err;
        }
        cv.notify_all();
    }

    [[noreturn]] void raise_abort() {
        if (first_error) std::rethrow_exception(first_error);
        throw_fault(fault_code, fault_text);
    }

    template <typename Pred>
    void wait_on(std::unique_lock<std::mutex>& lock, Pred pred) {
        cv.wait(lock, [&] { return aborted || pred(); });
        if (aborted) {
            lock.unlock();
            raise_abort();
        }
    }

    // --- staged waits ---

    std::vector<Interaction> wait_inbox(LpId lp, VirtualTime t) {
        std::unique_lock<std::mutex> lock(mon);
        LpStage& st = stages[lp];
        wait_on(lock, [&] { return st.peer_batches[t] == pool - 1; });
        std::vector<Interaction> out = std::move(st.staged[t]);
        st.staged.erase(t);
        st.peer_batches.erase(t);
        return out;
    }

    void push_self(LpId lp, VirtualTime t, std::vector<Interaction> batch) {
        std::lock_guard<std::mutex> lock(mon);
        auto& vec = stages[lp].staged[t];
        vec.insert(vec.end(), std::make_move_iterator(batch.begin()),
                   std::make_move_iterator(batch.end()));
    }

    ReleaseMsg wait_release(LpId lp, VirtualTime t) {
        std::unique_lock<std::mutex> lock(mon);
        LpStage& st = stages[lp];
        wait_on(lock, [&] { return !st.releases.empty(); });
        ReleaseMsg msg = std::move(st.releases.front());
        st.releases.pop_front();
        if (msg.step != t) {
            throw TransportFault("release for step " + std::to_string(msg.step) +
                                 " arrived while waiting for step " + std::to_string(t));
        }
        return msg;
    }

    std::vector<VoteMsg> wait_votes(VirtualTime t) {
        std::unique_lock<std::mutex> lock(mon);
        wait_on(lock, [&] { return votes[t].size() == pool; });
        std::vector<VoteMsg> out = std::move(votes[t]);
        votes.erase(t);
        std::sort(out.begin(), out.end(),
                  [](const VoteMsg& a, const VoteMsg& b) { return a.lp < b.lp; });
        return out;
    }

    std::vector<VoteMsg> wait_finals() {
        std::unique_lock<std::mutex> lock(mon);
        wait_on(lock, [&] { return finals.size() == pool; });
        return std::move(finals);
    }

    std::vector<MigrationPayloadMsg> wait_migrations(LpId lp, VirtualTime t,
                                                     const std::vector<EntityId>& expected) {
        std::vector<MigrationPayloadMsg> out;
        if (expected.empty()) return out;
        std::unique_lock<std::mutex> lock(mon);
        LpStage& st = stages[lp];
        wait_on(lock, [&] {
            std::size_t have = 0;
            for (const auto& msg : st.migrations_in) {
                if (msg.step == t) ++have;
            }
            return have >= expected.size();
        });
        auto it = st.migrations_in.begin();
        while (it != st.migrations_in.end()) {
            if (it->step == t) {
                out.push_back(std::move(*it));
                it = st.migrations_in.erase(it);
            } else {
                ++it;
            }
        }
        std::sort(out.begin(), out.end(),
                  [](const MigrationPayloadMsg& a, const MigrationPayloadMsg& b) {
                      return a.entity < b.entity;
                  });
        return out;
    }

    // --- coordinator barrier logic ---

    void coordinate(VirtualTime t) {
        std::vector<VoteMsg> round = wait_votes(t);

        for (const VoteMsg& v : round) {
            if (v.status == VoteStatus::Fault) {
                ReleaseMsg rel;
                rel.step = t;
                rel.status = VoteStatus::Fault;
                rel.fault_text = v.fault_text;
                for (LpId lp = 0; lp < pool; ++lp) mesh->send_release(lp, rel);
                return;
            }
        }

        // digest after step t, merged from per-LP leaves
        std::vector<std::pair<EntityId, std::uint64_t>> leaves;
        leaves.reserve(n);
        for (const VoteMsg& v : round) {
            for (const DigestLeaf& l : v.leaves) leaves.emplace_back(l.id, l.leaf);
        }
        std::sort(leaves.begin(), leaves.end());
        std::vector<std::uint64_t> ordered;
        ordered.reserve(leaves.size());
        for (const auto& [id, leaf] : leaves) ordered.push_back(leaf);
        step_digests.push_back(combine_digest_leaves(ordered));

        // merged model directory for the next step
        DirectoryBlob directory;
        if (any_directory) {
            for (VoteMsg& v : round) {
                for (auto& entry : v.dir_entries) directory.push_back(std::move(entry));
            }
            std::sort(directory.begin(), directory.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
        }

        std::vector<MigrationOrder> orders;
        if (controller) {
            for (const VoteMsg& v : round) {
                if (t > 0 && !v.counts_prev.empty()) {
                    controller->ledger().ingest_counts(t - 1, v.counts_prev);
                }
                if (!v.observed.empty()) {
                    controller->ledger().ingest_observed(t, v.observed);
                }
            }
            std::vector<std::uint64_t> walls(pool, 0);
            for (const VoteMsg& v : round) walls[v.lp] = v.wall_time_us;
            controller->record_step_loads(t, lp_work, walls);

            for (const VoteMsg& v : round) patch_log(v.acks);

            if (controller->eval_barrier(t)) {
                std::vector<adapt::MigrationDecision> decisions =
                    controller->evaluate(t, coord_placement, weights, state_sizes);
                for (const adapt::MigrationDecision& d : decisions) {
                    orders.push_back(MigrationOrder{d.entity, d.to_lp, d.reason});
                    MigrationRecord rec;
                    rec.step = t;
                    rec.entity = d.entity;
                    rec.from_lp = d.from_lp;
                    rec.to_lp = d.to_lp;
                    rec.reason = d.reason;
                    rec.bytes = d.cost_estimate;
                    migration_log.push_back(rec);
                    lp_work[d.from_lp] -= weights[d.entity];
                    lp_work[d.to_lp] += weights[d.entity];
                    coord_placement[d.entity] = d.to_lp;
                }
            }
        }

        ReleaseMsg rel;
        rel.step = t;
        rel.status = VoteStatus::Ok;
        rel.migrations = std::move(orders);
        rel.directory = std::move(directory);
        for (LpId lp = 0; lp < pool; ++lp) mesh->send_release(lp, rel);
    }

    void patch_log(const std::vector<MigrationAck>& acks) {
        for (const MigrationAck& a : acks) {
            for (auto it = migration_log.rbegin(); it != migration_log.rend(); ++it) {
                if (it->entity == a.entity && it->step == a.step) {
                    it->bytes = a.bytes;
                    it->transfer_us = a.transfer_us;
                    break;
                }
            }
        }
    }

    // --- worker ---

    void worker_main(LpId lp) {
        try {
            worker_loop(lp);
        } catch (const EntityFault& e) {
            trip(FaultCode::Entity, e.what(), std::current_exception());
        } catch (const RoutingFault& e) {
            trip(FaultCode::Routing, e.what(), std::current_exception());
        } catch (const MigrationFault& e) {
            trip(FaultCode::Migration, e.what(), std::current_exception());
        } catch (const TransportFault& e) {
            trip(FaultCode::Transport, e.what(), std::current_exception());
        } catch (...) {
            trip(FaultCode::None, "worker failed", std::current_exception());
        }
    }

    void worker_loop(LpId lp) {
        std::vector<LpId> placement = world.placement();
        std::vector<EntityId> residents = world.residents_of(lp);
        std::vector<StepReport> reports;
        reports.reserve(cfg.max_steps);
        std::vector<SentCount> pending_counts;
        std::vector<MigrationAck> pending_acks;
        DirectoryBlob directory = initial_directory;
        const bool observe = cfg.adapt.enabled;
        std::exception_ptr local_fault;
        std::vector<Interaction> outbox;

        for (VirtualTime t = 0; t < cfg.max_steps; ++t) {
            // inbox for this step: one batch from every peer plus own loopback
            std::vector<Interaction> inbox = (t == 0) ? std::vector<Interaction>{}
                                                      : wait_inbox(lp, t);
            std::sort(inbox.begin(), inbox.end(),
                      [](const Interaction& a, const Interaction& b) {
                          if (a.dst != b.dst) return a.dst < b.dst;
                          if (a.src != b.src) return a.src < b.src;
                          return a.seq < b.seq;
                      });

            std::map<BehaviorKind, std::shared_ptr<const void>> indexes;
            if (any_directory) {
                for (auto& [kind, behavior] : behaviors) {
                    if (behavior && behavior->uses_directory()) {
                        indexes[kind] = behavior->build_index(directory);
                    }
                }
            }

            VoteMsg vote;
            vote.lp = lp;
            vote.step = t;
            outbox.clear();

            Clock::time_point step_begin = Clock::now();
            std::size_t inbox_lo = 0;
            for (EntityId e : residents) {
                // this entity's slice of the sorted inbox
                while (inbox_lo < inbox.size() && inbox[inbox_lo].dst < e) ++inbox_lo;
                std::size_t inbox_hi = inbox_lo;
                while (inbox_hi < inbox.size() && inbox[inbox_hi].dst == e) ++inbox_hi;
                std::span<const Interaction> slice(inbox.data() + inbox_lo, inbox_hi - inbox_lo);
                inbox_lo = inbox_hi;

                EntityRecord& rec = world.record(e);
                SplitMix64 rng(rec.rng_state);
                Emitter emitter;
                Clock::time_point h0;
                if (observe) h0 = Clock::now();
                try {
                    behavior_for(rec.behavior)
                        .step(e, rec.state, rng, slice,
                              indexes.count(rec.behavior) ? indexes[rec.behavior].get() : nullptr,
                              emitter);
                } catch (const std::exception& ex) {
                    EntityFault fault(e, t, ex.what());
                    local_fault = std::make_exception_ptr(fault);
                    vote.status = VoteStatus::Fault;
                    vote.fault_text = fault.what();
                    break;
                }
                if (observe) {
                    vote.observed.push_back(ObservedUs{e, elapsed_us(h0, Clock::now())});
                }
                rec.rng_state = rng.state();
                std::uint32_t seq = 0;
                for (auto& [dst, payload] : emitter.take()) {
                    if (!world.valid_id(dst)) {
                        RoutingFault fault("entity " + std::to_string(e) +
                                           " addressed unknown entity " + std::to_string(dst) +
                                           " at step " + std::to_string(t));
                        local_fault = std::make_exception_ptr(fault);
                        vote.status = VoteStatus::Fault;
                        vote.fault_text = fault.what();
                        break;
                    }
                    Interaction it;
                    it.src = e;
                    it.dst = dst;
                    it.send_step = t;
                    it.deliver_step = t + 1;
                    it.seq = seq++;
                    it.payload = std::move(payload);
                    outbox.push_back(std::move(it));
                }
                if (vote.status == VoteStatus::Fault) break;
                ++vote.entities_executed;
            }
            if (vote.status != VoteStatus::Fault && cfg.background.enabled &&
                cfg.background.lp == lp && t >= cfg.background.start && t < cfg.background.stop &&
                cfg.burn_work_units) {
                cfg.burn_work_units(cfg.background.work_units_per_step);
            }
            vote.wall_time_us = elapsed_us(step_begin, Clock::now());

            // digest leaves and directory entries for this LP's residents
            if (vote.status != VoteStatus::Fault) {
                vote.leaves.reserve(residents.size());
                for (EntityId e : residents) {
                    vote.leaves.push_back(DigestLeaf{e, entity_digest_leaf(world.record(e))});
                }
                if (any_directory) {
                    for (EntityId e : residents) {
                        EntityRecord& rec = world.record(e);
                        auto entry = behavior_for(rec.behavior).directory_entry(e, rec.state);
                        if (!entry.empty()) vote.dir_entries.emplace_back(e, std::move(entry));
                    }
                }
            }
            vote.counts_prev = std::move(pending_counts);
            pending_counts.clear();
            vote.acks = std::move(pending_acks);
            pending_acks.clear();

            mesh->send_vote(lp, vote);
            Clock::time_point voted_at = Clock::now();

            if (lp == 0 && coordinator_process) coordinate(t);

            ReleaseMsg rel = wait_release(lp, t);
            std::uint64_t wait_us = elapsed_us(voted_at, Clock::now());
            if (rel.status == VoteStatus::Fault) {
                if (local_fault) std::rethrow_exception(local_fault);
                throw_fault(FaultCode::None, rel.fault_text);
            }
            directory = std::move(rel.directory);

            // apply migrations: placement updates everywhere, state transfer
            // for entities leaving / entering this LP
            Clock::time_point apply_begin = Clock::now();
            std::vector<EntityId> expected_in;
            for (const MigrationOrder& order : rel.migrations) {
                LpId from = placement[order.entity];
                placement[order.entity] = order.to_lp;
                if (from == lp && order.to_lp != lp) {
                    EntityRecord& rec = world.record(order.entity);
                    MigrationPayloadMsg pm;
                    pm.step = t;
                    pm.entity = order.entity;
                    pm.payload = encode_entity_payload(rec);
                    mesh->send_migration(lp, order.to_lp, pm);
                    rec.state.clear();
                    auto it = std::lower_bound(residents.begin(), residents.end(), order.entity);
                    if (it != residents.end() && *it == order.entity) residents.erase(it);
                } else if (order.to_lp == lp && from != lp) {
                    expected_in.push_back(order.entity);
                }
            }

            // route the step's outbox with post-migration placement, one batch
            // per destination LP per step, empty batches included
            std::vector<std::vector<Interaction>> buckets(pool);
            for (Interaction& it : outbox) {
                buckets[placement[it.dst]].push_back(std::move(it));
            }
            std::uint64_t sent_local = buckets[lp].size();
            std::uint64_t sent_remote = outbox.size() - sent_local;
            if (controller_needed()) {
                std::map<std::pair<EntityId, LpId>, std::uint32_t> agg;
                for (LpId dst_lp = 0; dst_lp < pool; ++dst_lp) {
                    for (const Interaction& it : buckets[dst_lp]) {
                        agg[{it.src, dst_lp}] += 1;
                    }
                }
                pending_counts.reserve(agg.size());
                for (const auto& [key, count] : agg) {
                    pending_counts.push_back(SentCount{key.first, key.second, count});
                }
            }
            for (LpId to = 0; to < pool; ++to) {
                if (to == lp) {
                    if (!buckets[to].empty()) push_self(lp, t + 1, std::move(buckets[to]));
                } else {
                    mesh->send_batch(lp, to, buckets[to]);
                }
            }

            // receive migrated entities; their pending inbox already routed to
            // this LP above
            std::vector<MigrationPayloadMsg> arrivals = wait_migrations(lp, t, expected_in);
            for (MigrationPayloadMsg& pm : arrivals) {
                EntityRecord& rec = world.record(pm.entity);
                decode_entity_payload(pm.payload, rec);
                auto it = std::lower_bound(residents.begin(), residents.end(), pm.entity);
                residents.insert(it, pm.entity);
                MigrationAck ack;
                ack.entity = pm.entity;
                ack.step = t;
                ack.bytes = rec.state.size();
                ack.transfer_us = elapsed_us(apply_begin, Clock::now());
                pending_acks.push_back(ack);
            }

            StepReport report;
            report.lp_id = lp;
            report.step = t;
            report.messages_sent_local = sent_local;
            report.messages_sent_remote = sent_remote;
            report.entities_executed = vote.entities_executed;
            report.wall_time_us = vote.wall_time_us;
            report.barrier_wait_us = wait_us;
            reports.push_back(report);
        }

        VoteMsg fin;
        fin.lp = lp;
        fin.step = cfg.max_steps;
        fin.status = VoteStatus::Final;
        fin.final_reports = reports;
        fin.acks = std::move(pending_acks);
        mesh->send_vote(lp, fin);

        std::lock_guard<std::mutex> lock(mon);
        local_reports.insert(local_reports.end(), reports.begin(), reports.end());
    }

    bool controller_needed() const { return cfg.adapt.enabled; }
};

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

Simulation::Simulation(EngineConfig config, World world, BehaviorTable behaviors)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(world), std::move(behaviors))) {}

Simulation::~Simulation() = default;

const World& Simulation::world() const { return impl_->world; }

RunResult Simulation::run() {
    Impl& im = *impl_;
    im.world.seal();
    im.cfg.adapt.validate();

    RunResult result;
    result.complete = im.coordinator_process;

    if (im.coordinator_process) {
        im.initial_digest = im.world.state_digest();
        im.coord_placement = im.world.placement();
        im.weights.resize(im.n);
        im.state_sizes.resize(im.n);
        im.lp_work.assign(im.pool, 0.0);
        for (EntityId e = 0; e < im.n; ++e) {
            const EntityRecord& rec = im.world.record(e);
            im.weights[e] = rec.weight;
            im.state_sizes[e] = rec.state.size();
            im.lp_work[im.coord_placement[e]] += rec.weight;
        }
        if (im.cfg.adapt.enabled) {
            im.controller =
                std::make_unique<adapt::Controller>(im.cfg.adapt, im.n, im.pool);
        }
    }

    result.initial_digest = im.initial_digest;
    result.final_digest = im.initial_digest;
    if (im.cfg.max_steps == 0) {
        result.final_placement = im.coord_placement;
        return result;
    }

    if (im.any_directory) {
        for (EntityId e = 0; e < im.n; ++e) {
            EntityRecord& rec = im.world.record(e);
            auto entry = im.behavior_for(rec.behavior).directory_entry(e, rec.state);
            if (!entry.empty()) im.initial_directory.emplace_back(e, std::move(entry));
        }
    }

    im.mesh = std::make_unique<Mesh>(im.endpoints, im.cfg.process_index, im,
                                     im.cfg.mesh_options);

    std::vector<LpId> local_lps;
    for (LpId lp = 0; lp < im.pool; ++lp) {
        if (im.local(lp)) local_lps.push_back(lp);
    }

    std::vector<std::thread> threads;
    for (std::size_t i = 1; i < local_lps.size(); ++i) {
        threads.emplace_back([&im, lp = local_lps[i]] { im.worker_main(lp); });
    }
    im.worker_main(local_lps[0]);

    std::exception_ptr coordinator_error;
    if (im.coordinator_process && !im.aborted) {
        try {
            std::vector<VoteMsg> fins = im.wait_finals();
            for (const VoteMsg& v : fins) {
                im.patch_log(v.acks);
                result.reports.insert(result.reports.end(), v.final_reports.begin(),
                                      v.final_reports.end());
            }
        } catch (...) {
            coordinator_error = std::current_exception();
        }
    }

    for (std::thread& th : threads) th.join();
    im.mesh->shutdown();

    {
        std::lock_guard<std::mutex> lock(im.mon);
        if (im.aborted) {
            if (im.first_error) std::rethrow_exception(im.first_error);
            throw_fault(im.fault_code, im.fault_text);
        }
    }
    if (coordinator_error) std::rethrow_exception(coordinator_error);

    if (im.coordinator_process) {
        std::sort(result.reports.begin(), result.reports.end(),
                  [](const StepReport& a, const StepReport& b) {
                      if (a.step != b.step) return a.step < b.step;
                      return a.lp_id < b.lp_id;
                  });
        result.step_digests = im.step_digests;
        result.final_digest =
            im.step_digests.empty() ? im.initial_digest : im.step_digests.back();
        result.final_placement = im.coord_placement;
        result.migrations = im.migration_log;
        std::sort(result.migrations.begin(), result.migrations.end(),
                  [](const MigrationRecord& a, const MigrationRecord& b) {
                      if (a.step != b.step) return a.step < b.step;
                      return a.entity < b.entity;
                  });
    } else {
        result.reports = im.local_reports;
        std::sort(result.reports.begin(), result.reports.end(),
                  [](const StepReport& a, const StepReport& b) {
                      if (a.step != b.step) return a.step < b.step;
                      return a.lp_id < b.lp_id;
                  });
    }
    return result;
}

} // namespace pads
