#ifndef PADS_MODELS_GRAPH_HPP
#define PADS_MODELS_GRAPH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pads::models {

enum class GraphKind : std::uint8_t {
    Random = 0,    // Erdos-Renyi G(n, p)
    SmallWorld = 1, // Watts-Strogatz ring rewire
    ScaleFree = 2, // Barabasi-Albert preferential attachment
};

const char* to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& name); // throws ConfigError

struct GraphParams {
    double edge_prob = 0.0;   // random: per-pair edge probability
    std::uint32_t ring_degree = 0; // small-world: ring neighbors per node, even
    double rewire_prob = 0.0; // small-world
    std::uint32_t attachment = 0;  // scale-free: edges per new node
};

/// Undirected simple graph: symmetric adjacency, no self-loops, neighbor
/// lists sorted ascending.
struct Graph {
    GraphKind kind = GraphKind::Random;
    std::vector<std::vector<std::uint32_t>> adjacency;

    std::size_t node_count() const { return adjacency.size(); }
    std::size_t edge_count() const;
    std::uint32_t max_degree() const;
};

/// Deterministic in (kind, n, params, seed). Throws ConfigError on invalid
/// parameters (edge_prob outside [0,1], odd ring degree, attachment >= n).
Graph generate_graph(GraphKind kind, std::uint32_t n, const GraphParams& params,
                     std::uint64_t seed);

/// Plain-text edge list: first line "n m", then m lines "u v" with u < v.
void write_edge_list(const Graph& graph, std::ostream& out);
Graph read_edge_list(std::istream& in);

} // namespace pads::models

#endif // PADS_MODELS_GRAPH_HPP
