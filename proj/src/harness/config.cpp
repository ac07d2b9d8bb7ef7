#include "pads/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pads/errors.hpp"

namespace pads::harness {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            fail(path + "." + key, "unknown key");
        }
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

std::uint64_t get_uint(const json& obj, const std::string& path, const char* key,
                       bool required, std::uint64_t fallback) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) fail(path + "." + key, "required key missing");
        return fallback;
    }
    if (!v->is_number_unsigned()) fail(path + "." + key, "expected a non-negative integer");
    return v->get<std::uint64_t>();
}

double get_number(const json& obj, const std::string& path, const char* key, bool required,
                  double fallback) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) fail(path + "." + key, "required key missing");
        return fallback;
    }
    if (!v->is_number()) fail(path + "." + key, "expected a number");
    return v->get<double>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(path + "." + key, "expected a boolean");
    return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key, bool required,
                       const std::string& fallback) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) fail(path + "." + key, "required key missing");
        return fallback;
    }
    if (!v->is_string()) fail(path + "." + key, "expected a string");
    return v->get<std::string>();
}

ModelConfig parse_model(const json& obj, const std::string& path, std::uint64_t n_entities) {
    if (!obj.is_object()) fail(path, "expected an object");
    ModelConfig model;
    model.kind = get_string(obj, path, "kind", true, "");
    if (model.kind == "gossip") {
        check_keys(obj, path, {"kind", "graph", "forward_prob"});
        const json* graph = find(obj, "graph");
        if (!graph) fail(path + ".graph", "required key missing");
        if (!graph->is_object()) fail(path + ".graph", "expected an object");
        std::string gkind = get_string(*graph, path + ".graph", "kind", true, "");
        try {
            model.graph_kind = models::graph_kind_from_string(gkind);
        } catch (const ConfigError&) {
            fail(path + ".graph.kind", "must be one of random, small-world, scale-free");
        }
        switch (model.graph_kind) {
            case models::GraphKind::Random:
                check_keys(*graph, path + ".graph", {"kind", "edge_prob"});
                model.graph_params.edge_prob =
                    get_number(*graph, path + ".graph", "edge_prob", true, 0.0);
                break;
            case models::GraphKind::SmallWorld:
                check_keys(*graph, path + ".graph", {"kind", "ring_degree", "rewire_prob"});
                model.graph_params.ring_degree = static_cast<std::uint32_t>(
                    get_uint(*graph, path + ".graph", "ring_degree", true, 0));
                model.graph_params.rewire_prob =
                    get_number(*graph, path + ".graph", "rewire_prob", true, 0.0);
                break;
            case models::GraphKind::ScaleFree:
                check_keys(*graph, path + ".graph", {"kind", "attachment"});
                model.graph_params.attachment = static_cast<std::uint32_t>(
                    get_uint(*graph, path + ".graph", "attachment", true, 0));
                break;
        }
        model.forward_prob = get_number(obj, path, "forward_prob", false, 0.5);
        if (model.forward_prob < 0.0 || model.forward_prob > 1.0) {
            fail(path + ".forward_prob", "must be in [0, 1]");
        }
    } else if (model.kind == "wireless") {
        check_keys(obj, path, {"kind", "grid_width", "grid_height", "tx_radius"});
        model.grid_width =
            static_cast<std::uint32_t>(get_uint(obj, path, "grid_width", false, 100));
        model.grid_height =
            static_cast<std::uint32_t>(get_uint(obj, path, "grid_height", false, 100));
        model.tx_radius = static_cast<std::uint32_t>(get_uint(obj, path, "tx_radius", false, 1));
        if (model.grid_width == 0) fail(path + ".grid_width", "must be >= 1");
        if (model.grid_height == 0) fail(path + ".grid_height", "must be >= 1");
    } else if (model.kind == "community") {
        check_keys(obj, path, {"kind", "communities", "intra_prob"});
        model.communities =
            static_cast<std::uint32_t>(get_uint(obj, path, "communities", false, 4));
        model.intra_prob = get_number(obj, path, "intra_prob", false, 0.9);
        if (model.communities == 0) fail(path + ".communities", "must be >= 1");
        if (model.intra_prob < 0.0 || model.intra_prob > 1.0) {
            fail(path + ".intra_prob", "must be in [0, 1]");
        }
        if (n_entities % model.communities != 0) {
            fail(path + ".communities", "must divide n_entities for equally sized communities");
        }
    } else if (model.kind == "synthetic") {
        check_keys(obj, path, {"kind", "weights", "busy_us_per_weight", "traffic"});
        const json* weights = find(obj, "weights");
        if (weights) {
            if (!weights->is_object()) fail(path + ".weights", "expected an object");
            std::string wpath = path + ".weights";
            model.weights.kind = get_string(*weights, wpath, "kind", true, "");
            if (model.weights.kind == "constant") {
                check_keys(*weights, wpath, {"kind", "value"});
                model.weights.value = get_number(*weights, wpath, "value", false, 1.0);
                if (model.weights.value < 0.0) fail(wpath + ".value", "must be >= 0");
            } else if (model.weights.kind == "two_point") {
                check_keys(*weights, wpath, {"kind", "low", "high", "high_fraction"});
                model.weights.low = get_number(*weights, wpath, "low", false, 1.0);
                model.weights.high = get_number(*weights, wpath, "high", false, 10.0);
                model.weights.high_fraction =
                    get_number(*weights, wpath, "high_fraction", false, 0.1);
                if (model.weights.low < 0.0) fail(wpath + ".low", "must be >= 0");
                if (model.weights.high < 0.0) fail(wpath + ".high", "must be >= 0");
                if (model.weights.high_fraction < 0.0 || model.weights.high_fraction > 1.0) {
                    fail(wpath + ".high_fraction", "must be in [0, 1]");
                }
            } else if (model.weights.kind == "uniform_int") {
                check_keys(*weights, wpath, {"kind", "min", "max"});
                model.weights.min = get_uint(*weights, wpath, "min", false, 1);
                model.weights.max = get_uint(*weights, wpath, "max", false, 10);
                if (model.weights.min > model.weights.max) {
                    fail(wpath + ".min", "must be <= max");
                }
            } else {
                fail(wpath + ".kind", "must be one of constant, two_point, uniform_int");
            }
        }
        model.busy_us_per_weight = get_number(obj, path, "busy_us_per_weight", false, 0.0);
        if (model.busy_us_per_weight < 0.0) fail(path + ".busy_us_per_weight", "must be >= 0");
        model.traffic = get_string(obj, path, "traffic", false, "none");
        if (model.traffic != "none" && model.traffic != "uniform") {
            fail(path + ".traffic", "must be one of none, uniform");
        }
    } else {
        fail(path + ".kind", "must be one of gossip, wireless, community, synthetic");
    }
    return model;
}

adapt::Params parse_adapt(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    check_keys(obj, path,
               {"enabled", "window", "migration_threshold", "load_slack",
                "max_migrations_per_eval", "cost_horizon", "bytes_per_message_equivalent",
                "shrink_threshold", "grow_threshold", "hysteresis_evals",
                "balance_on_wall_time"});
    adapt::Params params;
    params.enabled = get_bool(obj, path, "enabled", false);
    params.window = static_cast<std::uint32_t>(get_uint(obj, path, "window", false, 16));
    params.migration_threshold = get_number(obj, path, "migration_threshold", false, 0.7);
    params.load_slack = get_number(obj, path, "load_slack", false, 0.25);
    params.max_migrations_per_eval =
        static_cast<std::uint32_t>(get_uint(obj, path, "max_migrations_per_eval", false, 0));
    params.cost_horizon =
        static_cast<std::uint32_t>(get_uint(obj, path, "cost_horizon", false, 0));
    params.bytes_per_message_equivalent =
        get_number(obj, path, "bytes_per_message_equivalent", false, 64.0);
    params.shrink_threshold = get_number(obj, path, "shrink_threshold", false, 0.0);
    if (find(obj, "grow_threshold")) {
        params.grow_threshold = get_number(obj, path, "grow_threshold", true, 0.0);
    }
    params.hysteresis_evals =
        static_cast<std::uint32_t>(get_uint(obj, path, "hysteresis_evals", false, 3));
    params.balance_on_wall_time = get_bool(obj, path, "balance_on_wall_time", false);
    try {
        params.validate();
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
    return params;
}

std::vector<transport::ProcessGroup> parse_processes(const json& arr, const std::string& path,
                                                     std::uint32_t pool_size) {
    if (!arr.is_array() || arr.empty()) fail(path, "expected a non-empty array");
    std::vector<transport::ProcessGroup> groups;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& g = arr[i];
        std::string gpath = path + "[" + std::to_string(i) + "]";
        if (!g.is_object()) fail(gpath, "expected an object");
        check_keys(g, gpath, {"host", "port", "lps"});
        transport::ProcessGroup group;
        group.host = get_string(g, gpath, "host", false, "127.0.0.1");
        group.port = static_cast<std::uint16_t>(get_uint(g, gpath, "port", arr.size() > 1, 0));
        const json* lps = find(g, "lps");
        if (!lps || !lps->is_array() || lps->empty()) {
            fail(gpath + ".lps", "expected a non-empty array of LP ids");
        }
        for (const json& lp : *lps) {
            if (!lp.is_number_unsigned()) fail(gpath + ".lps", "LP ids must be integers");
            std::uint64_t id = lp.get<std::uint64_t>();
            if (id >= pool_size) {
                fail(gpath + ".lps", "LP id " + std::to_string(id) + " out of range for pool_size " +
                                         std::to_string(pool_size));
            }
            group.lps.push_back(static_cast<LpId>(id));
        }
        groups.push_back(std::move(group));
    }
    try {
        transport::flatten_topology(groups);
    } catch (const ConfigError& e) {
        fail(path, e.what());
    }
    return groups;
}

} // namespace

const char* to_string(PlacementKind p) {
    switch (p) {
        case PlacementKind::RoundRobin: return "round-robin";
        case PlacementKind::Random: return "random";
        case PlacementKind::ByCommunity: return "by-community";
        case PlacementKind::AllOnZero: return "all-on-zero";
    }
    return "?";
}

Config parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("$: top-level config must be an object");
    check_keys(root, "$",
               {"model", "n_entities", "pool_size", "processes", "seed", "max_steps", "adapt",
                "initial_placement", "background_load", "output"});

    Config cfg;
    cfg.n_entities = get_uint(root, "$", "n_entities", true, 0);
    if (cfg.n_entities == 0) fail("$.n_entities", "must be >= 1");
    cfg.seed = get_uint(root, "$", "seed", true, 0);
    cfg.max_steps = get_uint(root, "$", "max_steps", true, 0);
    cfg.pool_size = static_cast<std::uint32_t>(get_uint(root, "$", "pool_size", false, 1));
    if (cfg.pool_size == 0) fail("$.pool_size", "must be >= 1");

    const json* model = find(root, "model");
    if (!model) fail("$.model", "required key missing");
    cfg.model = parse_model(*model, "$.model", cfg.n_entities);

    if (const json* adapt_obj = find(root, "adapt")) {
        cfg.adapt_params = parse_adapt(*adapt_obj, "$.adapt");
    }

    if (const json* processes = find(root, "processes")) {
        cfg.processes = parse_processes(*processes, "$.processes", cfg.pool_size);
    }

    std::string placement = get_string(root, "$", "initial_placement", false, "round-robin");
    if (placement == "round-robin") {
        cfg.initial_placement = PlacementKind::RoundRobin;
    } else if (placement == "random") {
        cfg.initial_placement = PlacementKind::Random;
    } else if (placement == "by-community") {
        cfg.initial_placement = PlacementKind::ByCommunity;
    } else if (placement == "all-on-zero") {
        cfg.initial_placement = PlacementKind::AllOnZero;
    } else {
        fail("$.initial_placement",
             "must be one of round-robin, random, by-community, all-on-zero");
    }
    if (cfg.initial_placement == PlacementKind::ByCommunity && cfg.model.kind != "community") {
        fail("$.initial_placement", "by-community placement requires the community model");
    }

    if (const json* bg = find(root, "background_load")) {
        std::string bpath = "$.background_load";
        if (!bg->is_object()) fail(bpath, "expected an object");
        check_keys(*bg, bpath, {"lp", "work_units_per_step", "start", "stop"});
        cfg.background.enabled = true;
        cfg.background.lp = static_cast<LpId>(get_uint(*bg, bpath, "lp", true, 0));
        cfg.background.work_units_per_step =
            get_number(*bg, bpath, "work_units_per_step", true, 0.0);
        cfg.background.start = get_uint(*bg, bpath, "start", true, 0);
        cfg.background.stop = get_uint(*bg, bpath, "stop", true, 0);
        if (cfg.background.lp >= cfg.pool_size) fail(bpath + ".lp", "out of range");
        if (cfg.background.work_units_per_step < 0.0) {
            fail(bpath + ".work_units_per_step", "must be >= 0");
        }
        if (cfg.background.start >= cfg.background.stop ||
            cfg.background.stop > cfg.max_steps) {
            fail(bpath, "requires start < stop <= max_steps");
        }
    }

    if (const json* output = find(root, "output")) {
        std::string opath = "$.output";
        if (!output->is_object()) fail(opath, "expected an object");
        check_keys(*output, opath, {"dir", "metrics_csv", "migration_log", "digest_log", "summary"});
        cfg.output.dir = get_string(*output, opath, "dir", false, ".");
        cfg.output.metrics_csv = get_string(*output, opath, "metrics_csv", false, "metrics.csv");
        cfg.output.migration_log =
            get_string(*output, opath, "migration_log", false, "migrations.log");
        cfg.output.digest_log = get_string(*output, opath, "digest_log", false, "digests.csv");
        cfg.output.summary = get_string(*output, opath, "summary", false, "summary.json");
    }

    if (cfg.model.kind == "gossip" && cfg.n_entities < 2) {
        fail("$.n_entities", "gossip model needs at least 2 entities");
    }
    return cfg;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace pads::harness
