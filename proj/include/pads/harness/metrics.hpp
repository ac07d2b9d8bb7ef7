#ifndef PADS_HARNESS_METRICS_HPP
#define PADS_HARNESS_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pads/engine.hpp"
#include "pads/types.hpp"

namespace pads::harness {

/// One metrics CSV row. Exactly one per (step, lp); counts are exact.
struct MetricsRow {
    std::uint64_t step = 0;
    std::uint32_t lp = 0;
    std::uint64_t entities = 0;
    std::uint64_t msgs_local = 0;
    std::uint64_t msgs_remote = 0;
    std::uint64_t migrations_in = 0;
    std::uint64_t migrations_out = 0;
    std::uint64_t step_wall_us = 0;
    std::uint64_t barrier_wait_us = 0;
};

inline constexpr const char* kMetricsHeader =
    "step,lp,entities,msgs_local,msgs_remote,migrations_in,migrations_out,step_wall_us,"
    "barrier_wait_us";

/// Joins step reports with per-(step, lp) migration counts.
std::vector<MetricsRow> build_metrics(const RunResult& result);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

/// Migration log: one "step entity from_lp to_lp reason bytes transfer_us"
/// line per record.
void write_migration_log(const std::string& path, const std::vector<MigrationRecord>& records);
std::vector<MigrationRecord> read_migration_log(const std::string& path);

/// Digest log: "step,digest" with the digest in hex; row t is the world state
/// digest after step t committed.
void write_digest_log(const std::string& path, const std::vector<std::uint64_t>& step_digests);
std::vector<std::uint64_t> read_digest_log(const std::string& path);

struct RunSummary {
    std::uint64_t final_digest = 0;
    std::uint64_t total_msgs_local = 0;
    std::uint64_t total_msgs_remote = 0;
    std::uint64_t total_migrations = 0;
    double mean_barrier_wait_us = 0.0;
    std::uint64_t peak_step_wall_us = 0;
    std::uint64_t steps = 0;
    std::uint32_t pool_size = 0;
};

RunSummary summarize(const RunResult& result, const std::vector<MetricsRow>& rows);
void write_summary_json(const std::string& path, const RunSummary& summary);
std::string format_summary(const RunSummary& summary);

/// Local-message ratio per window of `window` steps: sum(local)/sum(total).
std::vector<double> window_local_ratios(const std::vector<MetricsRow>& rows,
                                        std::uint64_t window);

} // namespace pads::harness

#endif // PADS_HARNESS_METRICS_HPP
