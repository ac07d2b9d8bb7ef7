#include <doctest.h>

#include <sstream>

#include "pads/errors.hpp"
#include "pads/models/graph.hpp"

using namespace pads;
using namespace pads::models;

TEST_SUITE_BEGIN("graph");

namespace {

void check_simple_undirected(const Graph& g) {
    for (std::uint32_t u = 0; u < g.node_count(); ++u) {
        const auto& nbrs = g.adjacency[u];
        CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
        CHECK(std::adjacent_find(nbrs.begin(), nbrs.end()) == nbrs.end());
        for (std::uint32_t v : nbrs) {
            REQUIRE(v < g.node_count());
            CHECK(v != u); // no self-loops
            const auto& back = g.adjacency[v];
            CHECK(std::binary_search(back.begin(), back.end(), u)); // symmetry
        }
    }
}

} // namespace

TEST_CASE("random graph with edge_prob 1 is complete") {
    GraphParams params;
    params.edge_prob = 1.0;
    Graph g = generate_graph(GraphKind::Random, 4, params, 1);
    CHECK(g.edge_count() == 6);
    check_simple_undirected(g);
    for (const auto& nbrs : g.adjacency) CHECK(nbrs.size() == 3);
}

TEST_CASE("random graph with edge_prob 0 is empty") {
    GraphParams params;
    params.edge_prob = 0.0;
    Graph g = generate_graph(GraphKind::Random, 10, params, 1);
    CHECK(g.edge_count() == 0);
}

TEST_CASE("small-world with no rewiring and ring degree 2 is a cycle") {
    GraphParams params;
    params.ring_degree = 2;
    params.rewire_prob = 0.0;
    Graph g = generate_graph(GraphKind::SmallWorld, 6, params, 1);
    CHECK(g.edge_count() == 6);
    check_simple_undirected(g);
    for (std::uint32_t u = 0; u < 6; ++u) {
        REQUIRE(g.adjacency[u].size() == 2);
        std::uint32_t prev = (u + 5) % 6, next = (u + 1) % 6;
        CHECK(std::binary_search(g.adjacency[u].begin(), g.adjacency[u].end(), prev));
        CHECK(std::binary_search(g.adjacency[u].begin(), g.adjacency[u].end(), next));
    }
}

TEST_CASE("small-world without rewiring has n*k/2 edges") {
    GraphParams params;
    params.ring_degree = 6;
    params.rewire_prob = 0.0;
    Graph g = generate_graph(GraphKind::SmallWorld, 40, params, 3);
    CHECK(g.edge_count() == 40 * 6 / 2);
    check_simple_undirected(g);
}

TEST_CASE("small-world rewiring preserves simplicity") {
    GraphParams params;
    params.ring_degree = 4;
    params.rewire_prob = 0.5;
    Graph g = generate_graph(GraphKind::SmallWorld, 60, params, 9);
    check_simple_undirected(g);
}

TEST_CASE("scale-free edge count is m*(n-m) + m*(m-1)/2") {
    GraphParams params;
    params.attachment = 2;
    Graph g = generate_graph(GraphKind::ScaleFree, 1000, params, 5);
    CHECK(g.edge_count() == 2 * (1000 - 2) + 1);
    check_simple_undirected(g);

    params.attachment = 3;
    Graph g3 = generate_graph(GraphKind::ScaleFree, 50, params, 5);
    CHECK(g3.edge_count() == 3 * (50 - 3) + 3);
}

TEST_CASE("scale-free degree tail dominates a random graph of equal size") {
    // heavier tail means a much larger hub than G(n, p) produces
    const std::uint32_t n = 1000;
    GraphParams sf_params;
    sf_params.attachment = 2;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Graph sf = generate_graph(GraphKind::ScaleFree, n, sf_params, seed);
        GraphParams er_params;
        er_params.edge_prob = 2.0 * static_cast<double>(sf.edge_count()) /
                              (static_cast<double>(n) * (n - 1));
        Graph er = generate_graph(GraphKind::Random, n, er_params, seed);
        CHECK(sf.max_degree() >= 3 * er.max_degree());
    }
}

TEST_CASE("generation is deterministic in kind, n, params and seed") {
    GraphParams params;
    params.attachment = 2;
    Graph a = generate_graph(GraphKind::ScaleFree, 200, params, 42);
    Graph b = generate_graph(GraphKind::ScaleFree, 200, params, 42);
    Graph c = generate_graph(GraphKind::ScaleFree, 200, params, 43);
    CHECK(a.adjacency == b.adjacency);
    CHECK(a.adjacency != c.adjacency);
}

TEST_CASE("invalid generator parameters are configuration errors") {
    GraphParams params;
    params.edge_prob = 1.5;
    CHECK_THROWS_AS(generate_graph(GraphKind::Random, 10, params, 1), ConfigError);

    GraphParams odd;
    odd.ring_degree = 3;
    CHECK_THROWS_AS(generate_graph(GraphKind::SmallWorld, 10, odd, 1), ConfigError);

    GraphParams big_m;
    big_m.attachment = 10;
    CHECK_THROWS_AS(generate_graph(GraphKind::ScaleFree, 10, big_m, 1), ConfigError);

    GraphParams fine;
    fine.edge_prob = 0.5;
    CHECK_THROWS_AS(generate_graph(GraphKind::Random, 1, fine, 1), ConfigError);
}

TEST_CASE("edge list round-trips through the text format") {
    GraphParams params;
    params.ring_degree = 4;
    params.rewire_prob = 0.3;
    Graph g = generate_graph(GraphKind::SmallWorld, 30, params, 8);

    std::stringstream ss;
    write_edge_list(g, ss);

    std::string header;
    std::getline(ss, header);
    CHECK(header == std::to_string(g.node_count()) + " " + std::to_string(g.edge_count()));
    ss.seekg(0);
    Graph back = read_edge_list(ss);
    CHECK(back.adjacency == g.adjacency);
}

TEST_CASE("malformed edge lists are rejected") {
    std::stringstream missing("5 2\n0 1\n");
    CHECK_THROWS_AS(read_edge_list(missing), ConfigError);
    std::stringstream reversed("3 1\n2 1\n");
    CHECK_THROWS_AS(read_edge_list(reversed), ConfigError);
}

TEST_SUITE_END();
