#include "pads/models/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "pads/errors.hpp"
#include "pads/rng.hpp"

namespace pads::models {

const char* to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::Random: return "random";
        case GraphKind::SmallWorld: return "small-world";
        case GraphKind::ScaleFree: return "scale-free";
    }
    return "?";
}

GraphKind graph_kind_from_string(const std::string& name) {
    if (name == "random") return GraphKind::Random;
    if (name == "small-world") return GraphKind::SmallWorld;
    if (name == "scale-free") return GraphKind::ScaleFree;
    throw ConfigError("unknown graph kind \"" + name + "\"");
}

std::size_t Graph::edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& nbrs : adjacency) deg_sum += nbrs.size();
    return deg_sum / 2;
}

std::uint32_t Graph::max_degree() const {
    std::size_t best = 0;
    for (const auto& nbrs : adjacency) best = std::max(best, nbrs.size());
    return static_cast<std::uint32_t>(best);
}

namespace {

Graph finalize(GraphKind kind, std::vector<std::set<std::uint32_t>>& adj) {
    Graph g;
    g.kind = kind;
    g.adjacency.resize(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) {
        g.adjacency[i].assign(adj[i].begin(), adj[i].end());
    }
    return g;
}

Graph generate_random(std::uint32_t n, double pr, SplitMix64& rng) {
    if (pr < 0.0 || pr > 1.0) {
        throw ConfigError("random graph edge_prob must be in [0, 1]");
    }
    std::vector<std::set<std::uint32_t>> adj(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (rng.bernoulli(pr)) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    return finalize(GraphKind::Random, adj);
}

Graph generate_small_world(std::uint32_t n, std::uint32_t k, double beta, SplitMix64& rng) {
    if (k % 2 != 0) throw ConfigError("small-world ring_degree must be even");
    if (k >= n) throw ConfigError("small-world ring_degree must be smaller than n");
    if (beta < 0.0 || beta > 1.0) {
        throw ConfigError("small-world rewire_prob must be in [0, 1]");
    }
    std::vector<std::set<std::uint32_t>> adj(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 1; j <= k / 2; ++j) {
            std::uint32_t v = (i + j) % n;
            adj[i].insert(v);
            adj[v].insert(i);
        }
    }
    // rewire the far endpoint of each original ring edge with probability beta
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 1; j <= k / 2; ++j) {
            std::uint32_t v = (i + j) % n;
            if (!rng.bernoulli(beta)) continue;
            if (adj[i].size() >= n - 1) continue; // node already saturated
            std::uint32_t w;
            do {
                w = static_cast<std::uint32_t>(rng.next_below(n));
            } while (w == i || adj[i].count(w) > 0);
            adj[i].erase(v);
            adj[v].erase(i);
            adj[i].insert(w);
            adj[w].insert(i);
        }
    }
    return finalize(GraphKind::SmallWorld, adj);
}

Graph generate_scale_free(std::uint32_t n, std::uint32_t m, SplitMix64& rng) {
    if (m < 1) throw ConfigError("scale-free attachment must be >= 1");
    if (m >= n) throw ConfigError("scale-free attachment must be smaller than n");
    std::vector<std::set<std::uint32_t>> adj(n);
    // endpoint list for preferential sampling: each edge contributes both ends
    std::vector<std::uint32_t> endpoints;
    endpoints.reserve(2 * (static_cast<std::size_t>(m) * (n - m) + m * (m - 1) / 2));
    for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = i + 1; j < m; ++j) {
            adj[i].insert(j);
            adj[j].insert(i);
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    }
    if (m == 1) {
        // a single seed node has no clique edges; give it presence in the
        // endpoint pool so node 1 can attach
        endpoints.push_back(0);
    }
    for (std::uint32_t v = m; v < n; ++v) {
        std::set<std::uint32_t> targets;
        while (targets.size() < m) {
            std::uint32_t t = endpoints[rng.next_below(endpoints.size())];
            if (t != v) targets.insert(t);
        }
        for (std::uint32_t t : targets) {
            adj[v].insert(t);
            adj[t].insert(v);
            endpoints.push_back(v);
            endpoints.push_back(t);
        }
    }
    return finalize(GraphKind::ScaleFree, adj);
}

} // namespace

Graph generate_graph(GraphKind kind, std::uint32_t n, const GraphParams& params,
                     std::uint64_t seed) {
    if (n < 2) throw ConfigError("graph needs at least 2 nodes");
    SplitMix64 rng(mix64(seed ^ 0x67A7C0DE12345678ULL));
    switch (kind) {
        case GraphKind::Random: return generate_random(n, params.edge_prob, rng);
        case GraphKind::SmallWorld:
            return generate_small_world(n, params.ring_degree, params.rewire_prob, rng);
        case GraphKind::ScaleFree: return generate_scale_free(n, params.attachment, rng);
    }
    throw ConfigError("unknown graph kind");
}

void write_edge_list(const Graph& graph, std::ostream& out) {
    out << graph.node_count() << ' ' << graph.edge_count() << '\n';
    for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
        for (std::uint32_t v : graph.adjacency[u]) {
            if (u < v) out << u << ' ' << v << '\n';
        }
    }
}

Graph read_edge_list(std::istream& in) {
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw ConfigError("edge list: bad header line");
    Graph g;
    g.adjacency.resize(n);
    for (std::size_t i = 0; i < m; ++i) {
        std::uint32_t u, v;
        if (!(in >> u >> v)) throw ConfigError("edge list: truncated at edge " + std::to_string(i));
        if (u >= v || v >= n) {
            throw ConfigError("edge list: edge " + std::to_string(i) + " violates u < v < n");
        }
        g.adjacency[u].push_back(v);
        g.adjacency[v].push_back(u);
    }
    for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

} // namespace pads::models
