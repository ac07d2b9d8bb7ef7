#ifndef PADS_HARNESS_CONFIG_HPP
#define PADS_HARNESS_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pads/adapt.hpp"
#include "pads/engine.hpp"
#include "pads/models/graph.hpp"
#include "pads/transport.hpp"

namespace pads::harness {

struct WeightSpec {
    std::string kind = "constant"; // constant | two_point | uniform_int
    double value = 1.0;            // constant
    double low = 1.0;              // two_point
    double high = 10.0;
    double high_fraction = 0.1;
    std::uint64_t min = 1; // uniform_int
    std::uint64_t max = 1;
};

struct ModelConfig {
    std::string kind; // gossip | wireless | community | synthetic
    // gossip
    models::GraphKind graph_kind = models::GraphKind::Random;
    models::GraphParams graph_params;
    double forward_prob = 0.5;
    // wireless
    std::uint32_t grid_width = 100;
    std::uint32_t grid_height = 100;
    std::uint32_t tx_radius = 1;
    // community
    std::uint32_t communities = 4;
    double intra_prob = 0.9;
    // synthetic
    WeightSpec weights;
    double busy_us_per_weight = 0.0;
    std::string traffic = "none"; // none | uniform
};

enum class PlacementKind : std::uint8_t {
    RoundRobin = 0,
    Random = 1,
    ByCommunity = 2,
    AllOnZero = 3,
};

struct OutputConfig {
    std::string dir = ".";
    std::string metrics_csv = "metrics.csv";
    std::string migration_log = "migrations.log";
    std::string digest_log = "digests.csv";
    std::string summary = "summary.json";
};

/// The user-facing experiment description. parse_config rejects unknown keys
/// and fills documented defaults for absent optional ones.
struct Config {
    ModelConfig model;
    std::uint64_t n_entities = 0;
    std::uint32_t pool_size = 1;
    std::vector<transport::ProcessGroup> processes; // empty: one in-process group
    std::uint64_t seed = 0;
    std::uint64_t max_steps = 0;
    adapt::Params adapt_params; // disabled unless the config enables it
    PlacementKind initial_placement = PlacementKind::RoundRobin;
    BackgroundLoad background;
    OutputConfig output;
};

/// Parses and validates a UTF-8 JSON config. Errors name the JSON path, e.g.
/// "$.pool_size: must be >= 1".
Config parse_config(const std::string& json_text);
Config load_config_file(const std::string& path);

const char* to_string(PlacementKind p);

} // namespace pads::harness

#endif // PADS_HARNESS_CONFIG_HPP
