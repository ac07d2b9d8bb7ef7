#ifndef PADS_ENGINE_HPP
#define PADS_ENGINE_HPP

#include <functional>
#include <memory>
#include <vector>

#include "pads/adapt.hpp"
#include "pads/behavior.hpp"
#include "pads/transport.hpp"
#include "pads/types.hpp"
#include "pads/world.hpp"

namespace pads {

/// Synthetic load injected into one LP's step loop to emulate an external
/// tenant on that node. Inflates measured wall time only; model semantics and
/// digests are untouched.
struct BackgroundLoad {
    bool enabled = false;
    LpId lp = 0;
    double work_units_per_step = 0.0;
    VirtualTime start = 0;
    VirtualTime stop = 0;
};

struct EngineConfig {
    std::uint64_t seed = 0;
    VirtualTime max_steps = 0;
    adapt::Params adapt;
    BackgroundLoad background;
    /// Deployment: process groups hosting the LPs. Empty means one in-process
    /// group hosting the whole pool.
    std::vector<transport::ProcessGroup> topology;
    std::uint32_t process_index = 0;
    transport::MeshOptions mesh_options;
    /// Converts work units to busy time for the background injector; wired to
    /// the harness's calibrated spin loop. Null disables injection.
    std::function<void(double)> burn_work_units;
};

struct RunResult {
    /// True on the coordinator process; worker processes return partial data.
    bool complete = false;
    std::uint64_t initial_digest = 0;
    std::uint64_t final_digest = 0;
    std::vector<std::uint64_t> step_digests; // digest after each committed step
    std::vector<StepReport> reports;         // one per (step, lp), sorted
    std::vector<MigrationRecord> migrations; // coordinator's migration log
    std::vector<LpId> final_placement;       // entity id -> LP after the last barrier
};

/// Sorts one entity's inbox by (src, seq) — the total delivery order, unique
/// per inbox because seq is per-(src, step).
void sort_inbox(std::vector<Interaction>& inbox);

/**
 * Time-stepped simulation driver. One worker per locally-hosted LP executes
 * steps; a barrier (coordinated by LP 0) merges outboxes, runs the adaptive
 * layer, applies migrations, and advances virtual time. Entity state is
 * confined to its hosting LP between barriers.
 */
class Simulation {
public:
    Simulation(EngineConfig config, World world, BehaviorTable behaviors);
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs steps 0..max_steps-1 with barrier commits and returns the result.
    /// Throws the mapped fault (EntityFault, RoutingFault, TransportFault,
    /// MigrationFault) if the run aborts.
    RunResult run();

    /// Post-run registry access. State content is authoritative only for
    /// entities this process hosted at the end of the run.
    const World& world() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace pads

#endif // PADS_ENGINE_HPP
