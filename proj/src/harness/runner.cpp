#include "pads/harness/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "pads/errors.hpp"
#include "pads/models/community.hpp"
#include "pads/models/gossip.hpp"
#include "pads/models/synthetic.hpp"
#include "pads/models/wireless.hpp"
#include "pads/rng.hpp"

namespace pads::harness {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Busy work
// ---------------------------------------------------------------------------

namespace {

std::uint64_t spin_chunk(std::uint64_t iterations, std::uint64_t x) {
    for (std::uint64_t i = 0; i < iterations; ++i) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
    }
    return x;
}

std::atomic<std::uint64_t> busy_sink{0};

double calibrate() {
    using Clock = std::chrono::steady_clock;
    // warm up, then time a fixed block
    busy_sink += spin_chunk(500000, 0x12345);
    const std::uint64_t block = 4000000;
    auto t0 = Clock::now();
    busy_sink += spin_chunk(block, 0x6789A);
    auto t1 = Clock::now();
    double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
    if (us <= 0.0) us = 1.0;
    return static_cast<double>(block) / us;
}

} // namespace

double busywork_iterations_per_us() {
    static const double rate = calibrate();
    return rate;
}

void burn_us(double us) {
    if (us <= 0.0) return;
    auto iterations = static_cast<std::uint64_t>(us * busywork_iterations_per_us());
    busy_sink += spin_chunk(iterations, 0xBEEF);
}

// ---------------------------------------------------------------------------
// World construction
// ---------------------------------------------------------------------------

namespace {

std::vector<LpId> make_placements(const Config& cfg) {
    std::vector<LpId> placement(cfg.n_entities, 0);
    switch (cfg.initial_placement) {
        case PlacementKind::RoundRobin:
            for (std::uint64_t id = 0; id < cfg.n_entities; ++id) {
                placement[id] = static_cast<LpId>(id % cfg.pool_size);
            }
            break;
        case PlacementKind::Random: {
            SplitMix64 rng(mix64(cfg.seed ^ 0x9C0FFEE123456789ULL));
            for (std::uint64_t id = 0; id < cfg.n_entities; ++id) {
                placement[id] = static_cast<LpId>(rng.next_below(cfg.pool_size));
            }
            break;
        }
        case PlacementKind::ByCommunity: {
            std::uint64_t size = cfg.n_entities / cfg.model.communities;
            for (std::uint64_t id = 0; id < cfg.n_entities; ++id) {
                placement[id] = static_cast<LpId>((id / size) % cfg.pool_size);
            }
            break;
        }
        case PlacementKind::AllOnZero:
            break;
    }
    return placement;
}

double weight_for(const WeightSpec& spec, std::uint64_t seed, EntityId id) {
    if (spec.kind == "constant") return spec.value;
    SplitMix64 rng(setup_seed(seed ^ 0x57E16874C0DE1234ULL, id));
    if (spec.kind == "two_point") {
        return rng.bernoulli(spec.high_fraction) ? spec.high : spec.low;
    }
    // uniform_int
    return static_cast<double>(spec.min + rng.next_below(spec.max - spec.min + 1));
}

} // namespace

World build_world(const Config& cfg, BehaviorTable& behaviors) {
    World world(cfg.pool_size, cfg.seed);
    std::vector<LpId> placement = make_placements(cfg);

    if (cfg.model.kind == "gossip") {
        models::Graph graph =
            models::generate_graph(cfg.model.graph_kind,
                                   static_cast<std::uint32_t>(cfg.n_entities),
                                   cfg.model.graph_params, cfg.seed);
        behaviors[BehaviorKind::Gossip] = std::make_shared<models::GossipBehavior>();
        for (EntityId id = 0; id < cfg.n_entities; ++id) {
            auto state = models::GossipBehavior::make_initial_state(
                id == 0, cfg.model.forward_prob, graph.adjacency[id]);
            world.register_entity(BehaviorKind::Gossip, std::move(state), 1.0, placement[id]);
        }
    } else if (cfg.model.kind == "wireless") {
        behaviors[BehaviorKind::Wireless] = std::make_shared<models::WirelessBehavior>(
            cfg.model.grid_width, cfg.model.grid_height, cfg.model.tx_radius);
        for (EntityId id = 0; id < cfg.n_entities; ++id) {
            auto state = models::WirelessBehavior::make_initial_state(
                cfg.seed, id, cfg.model.grid_width, cfg.model.grid_height);
            world.register_entity(BehaviorKind::Wireless, std::move(state), 1.0, placement[id]);
        }
    } else if (cfg.model.kind == "community") {
        behaviors[BehaviorKind::Community] = std::make_shared<models::CommunityBehavior>(
            cfg.n_entities, cfg.model.communities, cfg.model.intra_prob);
        std::uint64_t size = cfg.n_entities / cfg.model.communities;
        for (EntityId id = 0; id < cfg.n_entities; ++id) {
            auto state = models::CommunityBehavior::make_initial_state(
                static_cast<std::uint32_t>(id / size));
            world.register_entity(BehaviorKind::Community, std::move(state), 1.0, placement[id]);
        }
    } else if (cfg.model.kind == "synthetic") {
        auto traffic = cfg.model.traffic == "uniform"
                           ? models::SyntheticBehavior::Traffic::Uniform
                           : models::SyntheticBehavior::Traffic::None;
        behaviors[BehaviorKind::Custom] = std::make_shared<models::SyntheticBehavior>(
            cfg.n_entities, traffic, cfg.model.busy_us_per_weight,
            cfg.model.busy_us_per_weight > 0.0 ? burn_us : std::function<void(double)>{});
        for (EntityId id = 0; id < cfg.n_entities; ++id) {
            double weight = weight_for(cfg.model.weights, cfg.seed, id);
            auto state = models::SyntheticBehavior::make_initial_state(weight);
            world.register_entity(BehaviorKind::Custom, std::move(state), weight, placement[id]);
        }
    } else {
        throw ConfigError("unknown model kind \"" + cfg.model.kind + "\"");
    }
    return world;
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const Config& cfg, const std::string& out_dir_override,
                                bool quiet, std::uint32_t process_index) {
    BehaviorTable behaviors;
    World world = build_world(cfg, behaviors);

    EngineConfig engine_cfg;
    engine_cfg.seed = cfg.seed;
    engine_cfg.max_steps = cfg.max_steps;
    engine_cfg.adapt = cfg.adapt_params;
    engine_cfg.background = cfg.background;
    engine_cfg.topology = cfg.processes;
    engine_cfg.process_index = process_index;
    if (cfg.background.enabled) engine_cfg.burn_work_units = burn_us;

    Simulation sim(std::move(engine_cfg), std::move(world), std::move(behaviors));

    ExperimentResult result;
    result.run = sim.run();
    if (!result.run.complete) return result; // worker process: no outputs

    result.rows = build_metrics(result.run);
    result.summary = summarize(result.run, result.rows);

    fs::path dir = out_dir_override.empty() ? fs::path(cfg.output.dir)
                                            : fs::path(out_dir_override);
    std::error_code ec;
    fs::create_directories(dir, ec);
    result.metrics_path = (dir / cfg.output.metrics_csv).string();
    result.migration_log_path = (dir / cfg.output.migration_log).string();
    result.digest_log_path = (dir / cfg.output.digest_log).string();
    result.summary_path = (dir / cfg.output.summary).string();

    write_metrics_csv(result.metrics_path, result.rows);
    write_migration_log(result.migration_log_path, result.run.migrations);
    write_digest_log(result.digest_log_path, result.run.step_digests);
    write_summary_json(result.summary_path, result.summary);

    if (!quiet) {
        std::cout << format_summary(result.summary);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

Comparison compare_runs(const std::string& metrics_a, const std::string& metrics_b,
                        std::uint64_t window) {
    std::vector<MetricsRow> rows_a = read_metrics_csv(metrics_a);
    std::vector<MetricsRow> rows_b = read_metrics_csv(metrics_b);
    if (rows_a.size() != rows_b.size()) {
        throw ComparisonError("metrics files have different row counts (" +
                              std::to_string(rows_a.size()) + " vs " +
                              std::to_string(rows_b.size()) + ")");
    }
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
        if (rows_a[i].step != rows_b[i].step || rows_a[i].lp != rows_b[i].lp) {
            throw ComparisonError("metrics files have different (step, lp) shapes at row " +
                                  std::to_string(i));
        }
    }

    Comparison cmp;
    cmp.ratios_a = window_local_ratios(rows_a, window);
    cmp.ratios_b = window_local_ratios(rows_b, window);
    for (const MetricsRow& r : rows_a) cmp.wall_total_a += r.step_wall_us;
    for (const MetricsRow& r : rows_b) cmp.wall_total_b += r.step_wall_us;

    fs::path da = fs::path(metrics_a).parent_path() / "digests.csv";
    fs::path db = fs::path(metrics_b).parent_path() / "digests.csv";
    if (fs::exists(da) && fs::exists(db)) {
        cmp.digests_available = true;
        cmp.digests_equal = read_digest_log(da.string()) == read_digest_log(db.string());
    }

    // different seeds or models diverge in state; ratio deltas would compare
    // unrelated runs, so they are withheld
    if (!cmp.digests_available || cmp.digests_equal) {
        for (std::size_t i = 0; i < cmp.ratios_a.size() && i < cmp.ratios_b.size(); ++i) {
            cmp.ratio_deltas.push_back(cmp.ratios_b[i] - cmp.ratios_a[i]);
        }
    }
    return cmp;
}

std::string format_comparison(const Comparison& cmp) {
    std::ostringstream out;
    auto print_series = [&out](const char* name, const std::vector<double>& v) {
        out << name << ":";
        for (double x : v) out << ' ' << x;
        out << '\n';
    };
    print_series("local ratio a", cmp.ratios_a);
    print_series("local ratio b", cmp.ratios_b);
    if (!cmp.digests_available) {
        out << "digests: unavailable (no digests.csv beside one of the inputs)\n";
    } else if (cmp.digests_equal) {
        out << "digests: equal\n";
    } else {
        out << "digests: MISMATCH - runs diverged; ratio deltas withheld\n";
    }
    if (!cmp.ratio_deltas.empty()) {
        print_series("ratio delta (b-a)", cmp.ratio_deltas);
    }
    if (cmp.wall_total_a > 0) {
        out << "wall total a: " << cmp.wall_total_a << " us, b: " << cmp.wall_total_b
            << " us, b/a: "
            << (static_cast<double>(cmp.wall_total_b) / static_cast<double>(cmp.wall_total_a))
            << '\n';
    }
    return out.str();
}

} // namespace pads::harness
