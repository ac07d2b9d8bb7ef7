#ifndef PADS_ADAPT_HPP
#define PADS_ADAPT_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pads/transport.hpp"
#include "pads/types.hpp"

namespace pads::adapt {

using transport::ObservedUs;
using transport::SentCount;

/**
 * Tunables for the adaptive layer. Thresholds are fractions, windows and
 * horizons are step counts, shrink/grow are work units per step. A zero
 * max_migrations_per_eval or cost_horizon means "derive from n / window".
 */
struct Params {
    bool enabled = false;
    std::uint32_t window = 16;                 // evaluation window W, steps
    double migration_threshold = 0.7;          // external-ratio gate
    double load_slack = 0.25;                  // tolerated overshoot above mean load
    std::uint32_t max_migrations_per_eval = 0; // 0: ceil(0.25 * n)
    std::uint32_t cost_horizon = 0;            // 0: 4 * window
    double bytes_per_message_equivalent = 64.0;
    double shrink_threshold = 0.0;             // 0 disables shrinking
    double grow_threshold = std::numeric_limits<double>::infinity(); // inf disables growing
    std::uint32_t hysteresis_evals = 3;
    bool balance_on_wall_time = false;

    void validate() const; // throws ConfigError
    std::uint32_t effective_budget(std::size_t n_entities) const;
    std::uint32_t effective_horizon() const;
};

/// Window traffic totals: sent[e][lp] = messages from entity e delivered to an
/// entity hosted on lp, summed over the window.
class TrafficMatrix {
public:
    TrafficMatrix(std::size_t n, std::uint32_t pool) : pool_(pool), counts_(n * pool, 0) {}

    std::uint64_t& at(EntityId e, LpId lp) { return counts_[e * pool_ + lp]; }
    std::uint64_t at(EntityId e, LpId lp) const { return counts_[e * pool_ + lp]; }

    std::uint64_t total(EntityId e) const {
        std::uint64_t sum = 0;
        for (LpId lp = 0; lp < pool_; ++lp) sum += at(e, lp);
        return sum;
    }

    /// Destination with the most traffic from e; ties broken by lowest lp id.
    LpId argmax_destination(EntityId e) const {
        LpId best = 0;
        std::uint64_t best_count = at(e, 0);
        for (LpId lp = 1; lp < pool_; ++lp) {
            if (at(e, lp) > best_count) {
                best = lp;
                best_count = at(e, lp);
            }
        }
        return best;
    }

    std::uint32_t pool() const { return pool_; }
    std::size_t entities() const { return counts_.size() / pool_; }

private:
    std::uint32_t pool_;
    std::vector<std::uint64_t> counts_;
};

/// Fraction of e's window traffic that left its home LP; 0 when e sent
/// nothing.
double external_ratio(const TrafficMatrix& sent, EntityId e, LpId home);

/**
 * Sliding window of per-entity traffic counters and measured handler times.
 * Ring-buffer semantics: exactly the last `window` committed steps are
 * retained. Counters are recorded with the destination's placement at
 * delivery time.
 */
class InteractionLedger {
public:
    InteractionLedger(std::uint32_t window, std::uint32_t pool);

    // Streaming interface: stage per-interaction records, then commit a step.
    void record_interaction(EntityId src, LpId dst_lp);
    void record_observed(EntityId id, std::uint64_t us);
    void commit_step(VirtualTime step);

    // Bulk interface used by the coordinator when barrier votes arrive.
    void ingest_counts(VirtualTime step, std::span<const SentCount> counts);
    void ingest_observed(VirtualTime step, std::span<const ObservedUs> observed);

    TrafficMatrix window_matrix(std::size_t n_entities) const;
    std::vector<std::uint64_t> window_observed_us(std::size_t n_entities) const;

    std::uint32_t window() const { return window_; }
    std::uint32_t pool() const { return pool_; }

private:
    struct Slot {
        VirtualTime step = 0;
        bool used = false;
        std::vector<SentCount> counts;
        std::vector<ObservedUs> observed;
    };

    Slot& slot_for(VirtualTime step, bool counts_section);

    std::uint32_t window_;
    std::uint32_t pool_;
    std::vector<Slot> count_slots_;
    std::vector<Slot> observed_slots_;
    std::vector<SentCount> staged_counts_;
    std::vector<ObservedUs> staged_observed_;
};

/// Per-LP load snapshot over the window, taken at an evaluation barrier.
struct LoadReport {
    LpId lp_id = 0;
    std::uint32_t resident_count = 0;
    std::uint64_t window_wall_time_us = 0;
    double window_work_units = 0.0;
};

/// A planned migration: to_lp is the argmax destination of the entity's
/// window traffic for clustering moves, or the load-chosen target otherwise.
struct MigrationDecision {
    EntityId entity = 0;
    LpId from_lp = 0;
    LpId to_lp = 0;
    double external_ratio = 0.0;
    double benefit_estimate = 0.0; // remote messages avoided per step
    std::uint64_t cost_estimate = 0; // serialized state bytes
    MigrationReason reason = MigrationReason::Cluster;
};

/// Everything the planners read. Entity indices are dense ids.
struct EvalContext {
    std::uint32_t pool = 1;
    std::uint32_t window = 16;
    Params params;
    const TrafficMatrix* sent = nullptr;
    std::vector<std::uint64_t> entity_total_sent; // window totals per entity
    std::vector<double> entity_load;  // weight*W, or observed window us in wall mode
    std::vector<std::uint64_t> state_size; // serialized state bytes per entity
    std::vector<LpId> home;           // placement at the evaluation barrier
};

/// Mutable view of per-LP loads and entity homes that accumulates this
/// evaluation round's approved moves.
struct LoadProjection {
    std::vector<double> lp_load;
    std::vector<LpId> home;
    double mean = 0.0;

    static LoadProjection from(const EvalContext& ctx, std::span<const double> lp_load);
    void apply_move(EntityId e, LpId from, LpId to, double load) {
        lp_load[from] -= load;
        lp_load[to] += load;
        home[e] = to;
    }
};

/// Clustering pass: entities whose external ratio exceeds the threshold move
/// toward their argmax destination, gated by migration cost payback and the
/// destination's projected load. Returns at most `budget` decisions ranked by
/// external ratio.
std::vector<MigrationDecision> evaluate_migrations(const EvalContext& ctx, LoadProjection& proj,
                                                   std::uint32_t budget);

/// Load pass, run after clustering: while some LP's projected load exceeds
/// (1+slack)*mean, move the lightest-traffic entities off it to the
/// least-loaded LP. Load decisions replace clustering decisions that target
/// the same entity.
std::vector<MigrationDecision> rebalance(const EvalContext& ctx, LoadProjection& proj,
                                         std::vector<MigrationDecision>& clustering,
                                         std::uint32_t total_budget);

/// Hysteresis counters for the LP-count controller.
struct AdaptState {
    std::uint32_t below = 0;
    std::uint32_t above = 0;
};

/// One shrink/grow decision per evaluation, debounced: the work level must
/// stay past a threshold for hysteresis_evals consecutive evaluations before
/// the active LP count moves by one.
std::uint32_t adapt_active_lp_count(double total_work_per_step, const Params& params,
                                    std::uint32_t current_active, std::uint32_t pool,
                                    AdaptState& state);

/// Realizes an LP-count change by draining the highest-numbered active LP
/// (shrink) or filling the lowest-numbered idle LP (grow). These moves carry
/// the adapt reason and are not counted against the per-eval budget. Entities
/// already moved this round are skipped: one decision per entity per round.
std::vector<MigrationDecision> plan_adaptation(const EvalContext& ctx, LoadProjection& proj,
                                               std::uint32_t current_active,
                                               std::uint32_t target_active,
                                               const std::vector<bool>& already_moved);

/**
 * Barrier-side controller: owns the ledger, per-LP load windows and
 * hysteresis state. All calls happen on the coordinator inside the barrier.
 */
class Controller {
public:
    Controller(Params params, std::size_t n_entities, std::uint32_t pool);

    const Params& params() const { return params_; }
    bool enabled() const { return params_.enabled; }
    bool eval_barrier(VirtualTime t) const {
        return params_.enabled && t > 0 && t % params_.window == 0;
    }

    InteractionLedger& ledger() { return ledger_; }

    /// Per-step load accounting, fed at every barrier.
    void record_step_loads(VirtualTime step, std::span<const double> per_lp_work,
                           std::span<const std::uint64_t> per_lp_wall);

    std::vector<LoadReport> load_reports(std::span<const std::uint32_t> resident_counts) const;

    /// Runs the full evaluation: clustering, rebalancing, LP-count adaptation.
    std::vector<MigrationDecision> evaluate(VirtualTime t, std::span<const LpId> home,
                                            std::span<const double> weights,
                                            std::span<const std::uint64_t> state_sizes);

private:
    Params params_;
    std::size_t n_;
    std::uint32_t pool_;
    InteractionLedger ledger_;
    AdaptState adapt_state_;
    // ring of per-step per-LP loads over the window
    std::vector<std::vector<double>> work_ring_;
    std::vector<std::vector<std::uint64_t>> wall_ring_;
    std::vector<VirtualTime> ring_step_;
    std::vector<bool> ring_used_;
};

} // namespace pads::adapt

#endif // PADS_ADAPT_HPP
