#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pads/errors.hpp"
#include "pads/harness/config.hpp"
#include "pads/harness/runner.hpp"
#include "pads/models/graph.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRunFault = 3;
constexpr int kExitTransport = 4;

pads::models::GraphParams parse_graph_params(pads::models::GraphKind kind,
                                             const std::string& spec) {
    pads::models::GraphParams params;
    std::istringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw pads::ConfigError("graph param \"" + item + "\" is not key=value");
        }
        std::string key = item.substr(0, eq);
        std::string value = item.substr(eq + 1);
        if (key == "edge_prob") {
            params.edge_prob = std::stod(value);
        } else if (key == "ring_degree") {
            params.ring_degree = static_cast<std::uint32_t>(std::stoul(value));
        } else if (key == "rewire_prob") {
            params.rewire_prob = std::stod(value);
        } else if (key == "attachment") {
            params.attachment = static_cast<std::uint32_t>(std::stoul(value));
        } else {
            throw pads::ConfigError("unknown graph param \"" + key + "\"");
        }
    }
    (void)kind;
    return params;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pads - adaptive parallel simulation runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool quiet = false;
    std::uint32_t process_index = 0;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config output.dir)");
    run->add_flag("--quiet", quiet, "suppress the summary printout");
    run->add_option("--process-index", process_index,
                    "which process group of the config this process hosts");

    std::string metrics_a, metrics_b;
    std::uint64_t window = 16;
    CLI::App* compare = app.add_subcommand("compare", "compare two metrics files");
    compare->add_option("metrics_a", metrics_a, "first metrics CSV")->required();
    compare->add_option("metrics_b", metrics_b, "second metrics CSV")->required();
    compare->add_option("--window", window, "steps per ratio window (default 16)");

    std::string graph_kind;
    std::uint32_t graph_n = 0;
    std::string graph_params;
    std::uint64_t graph_seed = 0;
    std::string graph_out;
    CLI::App* gen = app.add_subcommand("gen-graph", "generate a graph edge list");
    gen->add_option("kind", graph_kind, "random | small-world | scale-free")->required();
    gen->add_option("n", graph_n, "node count")->required();
    gen->add_option("params", graph_params,
                    "key=value list, e.g. edge_prob=0.01 or ring_degree=4,rewire_prob=0.1")
        ->required();
    gen->add_option("seed", graph_seed, "generator seed")->required();
    gen->add_option("--out", graph_out, "output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            pads::harness::Config cfg = pads::harness::load_config_file(config_path);
            if (!cfg.processes.empty() && process_index >= cfg.processes.size()) {
                throw pads::ConfigError("--process-index out of range for config");
            }
            if (cfg.processes.empty() && process_index != 0) {
                throw pads::ConfigError("--process-index requires a processes list in the config");
            }
            pads::harness::run_experiment(cfg, out_dir, quiet, process_index);
            return kExitOk;
        }
        if (compare->parsed()) {
            if (window == 0) throw pads::ConfigError("--window must be >= 1");
            pads::harness::Comparison cmp =
                pads::harness::compare_runs(metrics_a, metrics_b, window);
            std::cout << pads::harness::format_comparison(cmp);
            return kExitOk;
        }
        if (gen->parsed()) {
            pads::models::GraphKind kind = pads::models::graph_kind_from_string(graph_kind);
            pads::models::GraphParams params = parse_graph_params(kind, graph_params);
            pads::models::Graph graph =
                pads::models::generate_graph(kind, graph_n, params, graph_seed);
            std::ofstream out(graph_out);
            if (!out) throw pads::ConfigError("cannot write graph file " + graph_out);
            pads::models::write_edge_list(graph, out);
            return kExitOk;
        }
    } catch (const pads::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const pads::ComparisonError& e) {
        std::cerr << "comparison error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const pads::TransportFault& e) {
        std::cerr << "transport fault: " << e.what() << '\n';
        return kExitTransport;
    } catch (const std::exception& e) {
        std::cerr << "run fault: " << e.what() << '\n';
        return kExitRunFault;
    }
    return kExitOk;
}
