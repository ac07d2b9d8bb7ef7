#include "pads/harness/metrics.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pads/errors.hpp"

namespace pads::harness {

std::vector<MetricsRow> build_metrics(const RunResult& result) {
    std::map<std::pair<std::uint64_t, std::uint32_t>, std::pair<std::uint64_t, std::uint64_t>>
        moves; // (step, lp) -> (in, out)
    for (const MigrationRecord& rec : result.migrations) {
        moves[{rec.step, rec.to_lp}].first += 1;
        moves[{rec.step, rec.from_lp}].second += 1;
    }
    std::vector<MetricsRow> rows;
    rows.reserve(result.reports.size());
    for (const StepReport& rep : result.reports) {
        MetricsRow row;
        row.step = rep.step;
        row.lp = rep.lp_id;
        row.entities = rep.entities_executed;
        row.msgs_local = rep.messages_sent_local;
        row.msgs_remote = rep.messages_sent_remote;
        auto it = moves.find({rep.step, rep.lp_id});
        if (it != moves.end()) {
            row.migrations_in = it->second.first;
            row.migrations_out = it->second.second;
        }
        row.step_wall_us = rep.wall_time_us;
        row.barrier_wait_us = rep.barrier_wait_us;
        rows.push_back(row);
    }
    return rows;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write metrics file " + path);
    out << kMetricsHeader << '\n';
    for (const MetricsRow& r : rows) {
        out << r.step << ',' << r.lp << ',' << r.entities << ',' << r.msgs_local << ','
            << r.msgs_remote << ',' << r.migrations_in << ',' << r.migrations_out << ','
            << r.step_wall_us << ',' << r.barrier_wait_us << '\n';
    }
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ComparisonError("cannot open metrics file " + path);
    std::string line;
    if (!std::getline(in, line)) throw ComparisonError(path + ": empty metrics file");
    if (line != kMetricsHeader) throw ComparisonError(path + ": unexpected metrics header");
    std::vector<MetricsRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        MetricsRow r;
        char c;
        if (!(ss >> r.step >> c >> r.lp >> c >> r.entities >> c >> r.msgs_local >> c >>
              r.msgs_remote >> c >> r.migrations_in >> c >> r.migrations_out >> c >>
              r.step_wall_us >> c >> r.barrier_wait_us)) {
            throw ComparisonError(path + ": malformed row at line " + std::to_string(lineno));
        }
        rows.push_back(r);
    }
    return rows;
}

namespace {

MigrationReason reason_from_string(const std::string& s) {
    if (s == "cluster") return MigrationReason::Cluster;
    if (s == "balance") return MigrationReason::Balance;
    if (s == "adapt") return MigrationReason::Adapt;
    throw ConfigError("unknown migration reason \"" + s + "\"");
}

} // namespace

void write_migration_log(const std::string& path, const std::vector<MigrationRecord>& records) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write migration log " + path);
    for (const MigrationRecord& r : records) {
        out << r.step << ' ' << r.entity << ' ' << r.from_lp << ' ' << r.to_lp << ' '
            << to_string(r.reason) << ' ' << r.bytes << ' ' << r.transfer_us << '\n';
    }
}

std::vector<MigrationRecord> read_migration_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open migration log " + path);
    std::vector<MigrationRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        MigrationRecord r;
        std::string reason;
        if (!(ss >> r.step >> r.entity >> r.from_lp >> r.to_lp >> reason >> r.bytes >>
              r.transfer_us)) {
            throw ConfigError(path + ": malformed migration record \"" + line + "\"");
        }
        r.reason = reason_from_string(reason);
        records.push_back(r);
    }
    return records;
}

void write_digest_log(const std::string& path, const std::vector<std::uint64_t>& step_digests) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write digest log " + path);
    out << "step,digest\n";
    for (std::size_t t = 0; t < step_digests.size(); ++t) {
        out << t << ',' << std::hex << std::setw(16) << std::setfill('0') << step_digests[t]
            << std::dec << '\n';
    }
}

std::vector<std::uint64_t> read_digest_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ComparisonError("cannot open digest log " + path);
    std::string line;
    if (!std::getline(in, line) || line != "step,digest") {
        throw ComparisonError(path + ": unexpected digest log header");
    }
    std::vector<std::uint64_t> digests;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ComparisonError(path + ": malformed digest row \"" + line + "\"");
        }
        digests.push_back(std::stoull(line.substr(comma + 1), nullptr, 16));
    }
    return digests;
}

RunSummary summarize(const RunResult& result, const std::vector<MetricsRow>& rows) {
    RunSummary s;
    s.final_digest = result.final_digest;
    s.total_migrations = result.migrations.size();
    std::uint64_t wait_sum = 0;
    std::uint32_t max_lp = 0;
    std::uint64_t max_step = 0;
    for (const MetricsRow& r : rows) {
        s.total_msgs_local += r.msgs_local;
        s.total_msgs_remote += r.msgs_remote;
        wait_sum += r.barrier_wait_us;
        s.peak_step_wall_us = std::max(s.peak_step_wall_us, r.step_wall_us);
        max_lp = std::max(max_lp, r.lp);
        max_step = std::max(max_step, r.step);
    }
    if (!rows.empty()) {
        s.mean_barrier_wait_us = static_cast<double>(wait_sum) / static_cast<double>(rows.size());
        s.steps = max_step + 1;
        s.pool_size = max_lp + 1;
    }
    return s;
}

void write_summary_json(const std::string& path, const RunSummary& s) {
    std::ostringstream digest_hex;
    digest_hex << std::hex << std::setw(16) << std::setfill('0') << s.final_digest;
    nlohmann::json j{
        {"final_digest", digest_hex.str()},
        {"total_msgs_local", s.total_msgs_local},
        {"total_msgs_remote", s.total_msgs_remote},
        {"total_migrations", s.total_migrations},
        {"mean_barrier_wait_us", s.mean_barrier_wait_us},
        {"peak_step_wall_us", s.peak_step_wall_us},
        {"steps", s.steps},
        {"pool_size", s.pool_size},
    };
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write summary file " + path);
    out << j.dump(2) << '\n';
}

std::string format_summary(const RunSummary& s) {
    std::ostringstream out;
    out << "final digest:      " << std::hex << std::setw(16) << std::setfill('0')
        << s.final_digest << std::dec << '\n'
        << "messages local:    " << s.total_msgs_local << '\n'
        << "messages remote:   " << s.total_msgs_remote << '\n'
        << "migrations:        " << s.total_migrations << '\n'
        << "mean barrier wait: " << s.mean_barrier_wait_us << " us\n"
        << "peak LP step wall: " << s.peak_step_wall_us << " us\n";
    return out.str();
}

std::vector<double> window_local_ratios(const std::vector<MetricsRow>& rows,
                                        std::uint64_t window) {
    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> per_window; // (local, total)
    for (const MetricsRow& r : rows) {
        auto& [local, total] = per_window[r.step / window];
        local += r.msgs_local;
        total += r.msgs_local + r.msgs_remote;
    }
    std::vector<double> ratios;
    for (const auto& [w, counts] : per_window) {
        ratios.push_back(counts.second == 0
                             ? 0.0
                             : static_cast<double>(counts.first) /
                                   static_cast<double>(counts.second));
    }
    return ratios;
}

} // namespace pads::harness
