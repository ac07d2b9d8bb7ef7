#ifndef PADS_HARNESS_RUNNER_HPP
#define PADS_HARNESS_RUNNER_HPP

#include <string>
#include <vector>

#include "pads/engine.hpp"
#include "pads/harness/config.hpp"
#include "pads/harness/metrics.hpp"

namespace pads::harness {

/// Calibrated spin: measures loop iterations per microsecond once at first
/// use, then burns approximately `us` microseconds of CPU. One work unit is
/// defined as one microsecond of busy time.
double busywork_iterations_per_us();
void burn_us(double us);

/// Builds the registered world and behavior table for a config. The result is
/// a pure function of the config, so every process constructs the same world.
World build_world(const Config& cfg, BehaviorTable& behaviors);

struct ExperimentResult {
    RunResult run;
    std::vector<MetricsRow> rows;
    RunSummary summary;
    std::string metrics_path;
    std::string migration_log_path;
    std::string digest_log_path;
    std::string summary_path;
};

/// Drives a full run. The coordinator process writes the metrics CSV,
/// migration log, digest log and summary under the output directory and
/// prints the summary unless quiet; worker processes write nothing.
/// out_dir_override, when non-empty, replaces the config's output.dir.
ExperimentResult run_experiment(const Config& cfg, const std::string& out_dir_override,
                                bool quiet, std::uint32_t process_index);

struct Comparison {
    bool digests_available = false;
    bool digests_equal = false;
    std::vector<double> ratios_a;
    std::vector<double> ratios_b;
    std::vector<double> ratio_deltas; // empty when digests differ
    std::uint64_t wall_total_a = 0;
    std::uint64_t wall_total_b = 0;
};

/// Compares two metrics files from the same model/seed/steps. Throws
/// ComparisonError when the row shapes do not match. Looks for each file's
/// digest log in its directory; a digest mismatch flags the runs as
/// divergent and suppresses ratio deltas.
Comparison compare_runs(const std::string& metrics_a, const std::string& metrics_b,
                        std::uint64_t window);
std::string format_comparison(const Comparison& cmp);

} // namespace pads::harness

#endif // PADS_HARNESS_RUNNER_HPP
