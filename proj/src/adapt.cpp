#include "pads/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pads/errors.hpp"

namespace pads::adapt {

void Params::validate() const {
    if (window < 1) throw ConfigError("adapt.window must be >= 1");
    if (!(migration_threshold > 0.0) || migration_threshold > 1.0) {
        throw ConfigError("adapt.migration_threshold must be in (0, 1]");
    }
    if (load_slack < 0.0) throw ConfigError("adapt.load_slack must be >= 0");
    if (bytes_per_message_equivalent <= 0.0) {
        throw ConfigError("adapt.bytes_per_message_equivalent must be > 0");
    }
    if (shrink_threshold < 0.0) throw ConfigError("adapt.shrink_threshold must be >= 0");
    if (grow_threshold <= 0.0) throw ConfigError("adapt.grow_threshold must be > 0");
    if (hysteresis_evals < 1) throw ConfigError("adapt.hysteresis_evals must be >= 1");
}

std::uint32_t Params::effective_budget(std::size_t n_entities) const {
    if (max_migrations_per_eval > 0) return max_migrations_per_eval;
    return static_cast<std::uint32_t>(std::ceil(0.25 * static_cast<double>(n_entities)));
}

std::uint32_t Params::effective_horizon() const {
    return cost_horizon > 0 ? cost_horizon : 4 * window;
}

double external_ratio(const TrafficMatrix& sent, EntityId e, LpId home) {
    std::uint64_t total = sent.total(e);
    if (total == 0) return 0.0;
    return static_cast<double>(total - sent.at(e, home)) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// InteractionLedger
// ---------------------------------------------------------------------------

InteractionLedger::InteractionLedger(std::uint32_t window, std::uint32_t pool)
    : window_(window), pool_(pool), count_slots_(window), observed_slots_(window) {}

void InteractionLedger::record_interaction(EntityId src, LpId dst_lp) {
    staged_counts_.push_back(SentCount{src, dst_lp, 1});
}

void InteractionLedger::record_observed(EntityId id, std::uint64_t us) {
    staged_observed_.push_back(ObservedUs{id, us});
}

void InteractionLedger::commit_step(VirtualTime step) {
    ingest_counts(step, staged_counts_);
    ingest_observed(step, staged_observed_);
    staged_counts_.clear();
    staged_observed_.clear();
}

InteractionLedger::Slot& InteractionLedger::slot_for(VirtualTime step, bool counts_section) {
    Slot& s = (counts_section ? count_slots_ : observed_slots_)[step % window_];
    if (!s.used || s.step != step) {
        s.step = step;
        s.used = true;
        s.counts.clear();
        s.observed.clear();
    }
    return s;
}

void InteractionLedger::ingest_counts(VirtualTime step, std::span<const SentCount> counts) {
    Slot& s = slot_for(step, true);
    s.counts.insert(s.counts.end(), counts.begin(), counts.end());
}

void InteractionLedger::ingest_observed(VirtualTime step, std::span<const ObservedUs> observed) {
    Slot& s = slot_for(step, false);
    s.observed.insert(s.observed.end(), observed.begin(), observed.end());
}

TrafficMatrix InteractionLedger::window_matrix(std::size_t n_entities) const {
    TrafficMatrix m(n_entities, pool_);
    for (const Slot& s : count_slots_) {
        if (!s.used) continue;
        for (const SentCount& c : s.counts) {
            if (c.src < n_entities && c.dst_lp < pool_) m.at(c.src, c.dst_lp) += c.count;
        }
    }
    return m;
}

std::vector<std::uint64_t> InteractionLedger::window_observed_us(std::size_t n_entities) const {
    std::vector<std::uint64_t> out(n_entities, 0);
    for (const Slot& s : observed_slots_) {
        if (!s.used) continue;
        for (const ObservedUs& o : s.observed) {
            if (o.id < n_entities) out[o.id] += o.us;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Planners
// ---------------------------------------------------------------------------

LoadProjection LoadProjection::from(const EvalContext& ctx, std::span<const double> lp_load) {
    LoadProjection proj;
    proj.lp_load.assign(lp_load.begin(), lp_load.end());
    proj.home = ctx.home;
    proj.mean = std::accumulate(proj.lp_load.begin(), proj.lp_load.end(), 0.0) /
                static_cast<double>(ctx.pool);
    return proj;
}

std::vector<MigrationDecision> evaluate_migrations(const EvalContext& ctx, LoadProjection& proj,
                                                   std::uint32_t budget) {
    const TrafficMatrix& sent = *ctx.sent;
    const double cap = (1.0 + ctx.params.load_slack) * proj.mean;
    const double horizon = static_cast<double>(ctx.params.effective_horizon());

    struct Candidate {
        EntityId e;
        LpId dest;
        double ratio;
        double benefit_rate;
    };
    std::vector<Candidate> candidates;
    for (EntityId e = 0; e < ctx.entity_total_sent.size(); ++e) {
        std::uint64_t total = ctx.entity_total_sent[e];
        if (total == 0) continue;
        LpId home = ctx.home[e];
        double ratio =
            static_cast<double>(total - sent.at(e, home)) / static_cast<double>(total);
        if (!(ratio > ctx.params.migration_threshold)) continue;
        LpId dest = sent.argmax_destination(e);
        if (dest == home) continue;
        // payback gate: traffic toward the destination must amortize the
        // serialization cost within the horizon
        double benefit_rate =
            static_cast<double>(sent.at(e, dest)) / static_cast<double>(ctx.window);
        double cost_msgs = static_cast<double>(ctx.state_size[e]) /
                           ctx.params.bytes_per_message_equivalent;
        if (!(benefit_rate * horizon > cost_msgs)) continue;
        candidates.push_back(Candidate{e, dest, ratio, benefit_rate});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.ratio != b.ratio) return a.ratio > b.ratio;
        return a.e < b.e;
    });

    std::vector<MigrationDecision> decisions;
    for (const Candidate& c : candidates) {
        if (decisions.size() >= budget) break;
        if (proj.lp_load[c.dest] + ctx.entity_load[c.e] > cap) continue;
        MigrationDecision d;
        d.entity = c.e;
        d.from_lp = ctx.home[c.e];
        d.to_lp = c.dest;
        d.external_ratio = c.ratio;
        d.benefit_estimate = c.benefit_rate;
        d.cost_estimate = ctx.state_size[c.e];
        d.reason = MigrationReason::Cluster;
        proj.apply_move(c.e, d.from_lp, d.to_lp, ctx.entity_load[c.e]);
        decisions.push_back(d);
    }
    return decisions;
}

std::vector<MigrationDecision> rebalance(const EvalContext& ctx, LoadProjection& proj,
                                         std::vector<MigrationDecision>& clustering,
                                         std::uint32_t total_budget) {
    const double cap = (1.0 + ctx.params.load_slack) * proj.mean;
    std::vector<MigrationDecision> decisions;
    std::vector<bool> src_exhausted(ctx.pool, false);
    std::vector<bool> balance_moved(ctx.entity_total_sent.size(), false);
    std::vector<bool> cluster_moved(ctx.entity_total_sent.size(), false);
    for (const MigrationDecision& d : clustering) cluster_moved[d.entity] = true;

    for (;;) {
        if (clustering.size() + decisions.size() >= total_budget) break;
        LpId src = 0;
        double max_load = -1.0;
        for (LpId lp = 0; lp < ctx.pool; ++lp) {
            if (src_exhausted[lp]) continue;
            if (proj.lp_load[lp] > max_load) {
                max_load = proj.lp_load[lp];
                src = lp;
            }
        }
        if (max_load <= cap) break;

        // lightest-traffic resident of the overloaded LP, ties by lowest id;
        // an entity moves at most once per evaluation round
        bool found = false;
        EntityId pick = 0;
        std::uint64_t pick_traffic = 0;
        for (EntityId e = 0; e < proj.home.size(); ++e) {
            if (proj.home[e] != src || balance_moved[e]) continue;
            if (!found || ctx.entity_total_sent[e] < pick_traffic) {
                found = true;
                pick = e;
                pick_traffic = ctx.entity_total_sent[e];
            }
        }
        if (!found) {
            src_exhausted[src] = true; // nothing movable here (e.g. external load only)
            continue;
        }

        LpId dst = 0;
        double min_load = proj.lp_load[0];
        for (LpId lp = 1; lp < ctx.pool; ++lp) {
            if (proj.lp_load[lp] < min_load) {
                min_load = proj.lp_load[lp];
                dst = lp;
            }
        }
        if (dst == src) break;

        // load decisions take precedence: a clustering decision for the same
        // entity this round is replaced, not duplicated
        LpId original_home = ctx.home[pick];
        if (cluster_moved[pick]) {
            std::erase_if(clustering,
                          [&](const MigrationDecision& d) { return d.entity == pick; });
            cluster_moved[pick] = false;
        }
        MigrationDecision d;
        d.entity = pick;
        d.from_lp = original_home;
        d.to_lp = dst;
        d.external_ratio = external_ratio(*ctx.sent, pick, original_home);
        d.benefit_estimate = 0.0;
        d.cost_estimate = ctx.state_size[pick];
        d.reason = MigrationReason::Balance;
        proj.apply_move(pick, src, dst, ctx.entity_load[pick]);
        balance_moved[pick] = true;
        if (original_home == dst) {
            // the clustering move is cancelled outright; no net migration
            continue;
        }
        decisions.push_back(d);
    }
    return decisions;
}

std::uint32_t adapt_active_lp_count(double total_work_per_step, const Params& params,
                                    std::uint32_t current_active, std::uint32_t pool,
                                    AdaptState& state) {
    if (total_work_per_step < params.shrink_threshold) {
        ++state.below;
    } else {
        state.below = 0;
    }
    if (total_work_per_step > params.grow_threshold) {
        ++state.above;
    } else {
        state.above = 0;
    }
    if (state.below >= params.hysteresis_evals) {
        state.below = 0;
        return std::max<std::uint32_t>(1, current_active - 1);
    }
    if (state.above >= params.hysteresis_evals) {
        state.above = 0;
        return std::min(pool, current_active + 1);
    }
    return current_active;
}

std::vector<MigrationDecision> plan_adaptation(const EvalContext& ctx, LoadProjection& proj,
                                               std::uint32_t current_active,
                                               std::uint32_t target_active,
                                               const std::vector<bool>& already_moved) {
    std::vector<MigrationDecision> decisions;
    if (target_active == current_active) return decisions;

    std::vector<std::uint32_t> resident_count(ctx.pool, 0);
    for (LpId lp : proj.home) ++resident_count[lp];

    auto emit = [&](EntityId e, LpId from, LpId to) {
        MigrationDecision d;
        d.entity = e;
        d.from_lp = from;
        d.to_lp = to;
        d.external_ratio = external_ratio(*ctx.sent, e, from);
        d.cost_estimate = ctx.state_size[e];
        d.reason = MigrationReason::Adapt;
        proj.apply_move(e, from, to, ctx.entity_load[e]);
        --resident_count[from];
        ++resident_count[to];
        decisions.push_back(d);
    };

    if (target_active < current_active) {
        // consolidate: drain the highest-numbered active LP into the rest
        LpId victim = 0;
        bool have = false;
        for (LpId lp = 0; lp < ctx.pool; ++lp) {
            if (resident_count[lp] > 0) {
                victim = lp;
                have = true;
            }
        }
        if (!have || victim == 0) return decisions;
        for (EntityId e = 0; e < proj.home.size(); ++e) {
            if (proj.home[e] != victim || already_moved[e]) continue;
            LpId dst = 0;
            double min_load = std::numeric_limits<double>::infinity();
            for (LpId lp = 0; lp < victim; ++lp) {
                if (resident_count[lp] == 0 && lp != 0) continue; // only remaining actives
                if (proj.lp_load[lp] < min_load) {
                    min_load = proj.lp_load[lp];
                    dst = lp;
                }
            }
            emit(e, victim, dst);
        }
    } else {
        // expand: activate the lowest-numbered idle LP and fill it to an even
        // share of the projected load
        LpId fresh = 0;
        bool have = false;
        for (LpId lp = 0; lp < ctx.pool; ++lp) {
            if (resident_count[lp] == 0) {
                fresh = lp;
                have = true;
                break;
            }
        }
        if (!have) return decisions;
        double total = std::accumulate(proj.lp_load.begin(), proj.lp_load.end(), 0.0);
        double share = total / static_cast<double>(target_active);
        std::vector<bool> src_exhausted(ctx.pool, false);
        std::size_t guard = proj.home.size();
        while (proj.lp_load[fresh] < share && guard-- > 0) {
            LpId src = 0;
            double max_load = -1.0;
            for (LpId lp = 0; lp < ctx.pool; ++lp) {
                if (lp == fresh || src_exhausted[lp]) continue;
                if (proj.lp_load[lp] > max_load) {
                    max_load = proj.lp_load[lp];
                    src = lp;
                }
            }
            if (max_load <= 0.0) break;
            bool found = false;
            EntityId pick = 0;
            std::uint64_t pick_traffic = 0;
            for (EntityId e = 0; e < proj.home.size(); ++e) {
                if (proj.home[e] != src || ctx.entity_load[e] <= 0.0 || already_moved[e]) continue;
                if (!found || ctx.entity_total_sent[e] < pick_traffic) {
                    found = true;
                    pick = e;
                    pick_traffic = ctx.entity_total_sent[e];
                }
            }
            if (!found) {
                src_exhausted[src] = true;
                continue;
            }
            emit(pick, src, fresh);
        }
    }
    return decisions;
}

// ---------------------------------------------------------------------------
// Controller
// ---------------------------------------------------------------------------

Controller::Controller(Params params, std::size_t n_entities, std::uint32_t pool)
    : params_(params), n_(n_entities), pool_(pool), ledger_(params.window, pool),
      work_ring_(params.window, std::vector<double>(pool, 0.0)),
      wall_ring_(params.window, std::vector<std::uint64_t>(pool, 0)),
      ring_step_(params.window, 0), ring_used_(params.window, false) {
    params_.validate();
}

void Controller::record_step_loads(VirtualTime step, std::span<const double> per_lp_work,
                                   std::span<const std::uint64_t> per_lp_wall) {
    std::size_t i = step % params_.window;
    work_ring_[i].assign(per_lp_work.begin(), per_lp_work.end());
    wall_ring_[i].assign(per_lp_wall.begin(), per_lp_wall.end());
    ring_step_[i] = step;
    ring_used_[i] = true;
}

std::vector<LoadReport> Controller::load_reports(
    std::span<const std::uint32_t> resident_counts) const {
    std::vector<LoadReport> reports(pool_);
    for (LpId lp = 0; lp < pool_; ++lp) {
        reports[lp].lp_id = lp;
        reports[lp].resident_count = lp < resident_counts.size() ? resident_counts[lp] : 0;
    }
    for (std::size_t i = 0; i < work_ring_.size(); ++i) {
        if (!ring_used_[i]) continue;
        for (LpId lp = 0; lp < pool_; ++lp) {
            reports[lp].window_work_units += work_ring_[i][lp];
            reports[lp].window_wall_time_us += wall_ring_[i][lp];
        }
    }
    return reports;
}

std::vector<MigrationDecision> Controller::evaluate(VirtualTime t, std::span<const LpId> home,
                                                    std::span<const double> weights,
                                                    std::span<const std::uint64_t> state_sizes) {
    (void)t;
    TrafficMatrix sent = ledger_.window_matrix(n_);

    EvalContext ctx;
    ctx.pool = pool_;
    ctx.window = params_.window;
    ctx.params = params_;
    ctx.sent = &sent;
    ctx.home.assign(home.begin(), home.end());
    ctx.state_size.assign(state_sizes.begin(), state_sizes.end());
    ctx.entity_total_sent.resize(n_);
    for (EntityId e = 0; e < n_; ++e) ctx.entity_total_sent[e] = sent.total(e);

    std::vector<std::uint32_t> resident_counts(pool_, 0);
    for (LpId lp : home) ++resident_counts[lp];
    std::vector<LoadReport> loads = load_reports(resident_counts);

    std::vector<double> lp_load(pool_, 0.0);
    if (params_.balance_on_wall_time) {
        std::vector<std::uint64_t> observed = ledger_.window_observed_us(n_);
        ctx.entity_load.resize(n_);
        for (EntityId e = 0; e < n_; ++e) {
            ctx.entity_load[e] = static_cast<double>(observed[e]);
        }
        for (LpId lp = 0; lp < pool_; ++lp) {
            lp_load[lp] = static_cast<double>(loads[lp].window_wall_time_us);
        }
    } else {
        ctx.entity_load.resize(n_);
        for (EntityId e = 0; e < n_; ++e) {
            ctx.entity_load[e] = weights[e] * static_cast<double>(params_.window);
        }
        for (LpId lp = 0; lp < pool_; ++lp) {
            lp_load[lp] = loads[lp].window_work_units;
        }
    }

    LoadProjection proj = LoadProjection::from(ctx, lp_load);
    std::uint32_t budget = params_.effective_budget(n_);

    std::vector<MigrationDecision> clustering = evaluate_migrations(ctx, proj, budget);
    std::vector<MigrationDecision> balancing = rebalance(ctx, proj, clustering, budget);

    // LP-count adaptation always reasons in declared work units per step
    double total_work = 0.0;
    for (const LoadReport& r : loads) total_work += r.window_work_units;
    double work_per_step = total_work / static_cast<double>(params_.window);
    std::uint32_t active = 0;
    std::vector<std::uint32_t> projected_counts(pool_, 0);
    for (LpId lp : proj.home) ++projected_counts[lp];
    for (LpId lp = 0; lp < pool_; ++lp) {
        if (projected_counts[lp] > 0) ++active;
    }
    std::uint32_t target = adapt_active_lp_count(work_per_step, params_, active, pool_,
                                                 adapt_state_);
    std::vector<bool> moved(n_, false);
    for (const MigrationDecision& d : clustering) moved[d.entity] = true;
    for (const MigrationDecision& d : balancing) moved[d.entity] = true;
    std::vector<MigrationDecision> adaptation =
        plan_adaptation(ctx, proj, active, target, moved);

    std::vector<MigrationDecision> all;
    all.reserve(clustering.size() + balancing.size() + adaptation.size());
    all.insert(all.end(), clustering.begin(), clustering.end());
    all.insert(all.end(), balancing.begin(), balancing.end());
    all.insert(all.end(), adaptation.begin(), adaptation.end());
    return all;
}

} // namespace pads::adapt
