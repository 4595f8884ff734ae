#include "anchorgt/fixtures.hpp"
#include "anchorgt/graph.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace anchorgt;

namespace {

using Edges = std::vector<std::pair<node_id, node_id>>;

Graph p5() { return fixtures::path(5); }

} // namespace

TEST_CASE("from_edge_list canonicalizes duplicates and self-loops") {
    Edges in{{0, 1}, {1, 0}, {2, 2}};
    const Graph g = from_edge_list(in, 3);
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 1);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK(g.degree(2) == 0);
}

TEST_CASE("from_edge_list on no pairs gives isolated nodes") {
    const Graph g = from_edge_list(Edges{}, 4);
    CHECK(g.num_nodes() == 4);
    CHECK(g.num_edges() == 0);
}

TEST_CASE("path degrees") {
    Edges in{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    const Graph g = from_edge_list(in, 5);
    const std::vector<std::uint32_t> expected{1, 2, 2, 2, 1};
    CHECK(std::vector<std::uint32_t>(g.degrees().begin(), g.degrees().end()) == expected);
}

TEST_CASE("from_edge_list rejects ids out of range") {
    Edges in{{0, 1}, {1, 7}};
    CHECK_THROWS_AS(from_edge_list(in, 3), graph_error);
    try {
        from_edge_list(in, 3);
    } catch (const graph_error& e) {
        CHECK(std::string(e.what()).find("7") != std::string::npos);
    }
}

TEST_CASE("bfs_spd examples") {
    SUBCASE("path from an end") {
        const auto t = bfs_spd(p5(), 0);
        CHECK(t.dist == std::vector<std::int32_t>{0, 1, 2, 3, 4});
    }
    SUBCASE("opposite node of a 6-cycle") { CHECK(bfs_spd(fixtures::cycle(6), 0).dist[3] == 3); }
    SUBCASE("other component is unreachable") {
        Edges in{{0, 1}, {2, 3}};
        const auto t = bfs_spd(from_edge_list(in, 4), 0);
        CHECK(t.dist[2] == unreachable);
        CHECK(t.dist[3] == unreachable);
        CHECK_FALSE(t.reachable(3));
    }
    SUBCASE("cap hides far nodes") {
        const auto t = bfs_spd(p5(), 0, 2);
        CHECK(t.dist == std::vector<std::int32_t>{0, 1, 2, unreachable, unreachable});
    }
}

TEST_CASE("k_hop examples") {
    CHECK(k_hop(p5(), 2, 1) == std::vector<node_id>{1, 2, 3});
    CHECK(k_hop(p5(), 0, 2) == std::vector<node_id>{0, 1, 2});
    for (node_id v = 0; v < 4; ++v) CHECK(k_hop(fixtures::complete(4), v, 1).size() == 4);
}

TEST_CASE("bfs_spd matches the matrix-power oracle on 200 random graphs") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t n = 2 + seed % 63;
        const double p = std::array{0.02, 0.05, 0.1, 0.3}[seed % 4];
        const Graph g = oracle::random_graph(n, p, seed);
        const auto dist = oracle::all_pairs_distances(g);
        for (node_id v = 0; v < n; ++v) {
            const auto t = bfs_spd(g, v);
            for (node_id u = 0; u < n; ++u) REQUIRE(t.dist[u] == dist[v][u]);
            for (int k = 1; k <= 3; ++k) {
                std::vector<node_id> expected;
                for (node_id u = 0; u < n; ++u)
                    if (dist[v][u] != oracle::infinite && dist[v][u] <= k) expected.push_back(u);
                REQUIRE(k_hop(g, v, k) == expected);
            }
        }
    }
}

TEST_CASE("BoundedBfs agrees with capped bfs_spd") {
    const Graph g = oracle::random_graph(40, 0.08, 11);
    BoundedBfs bfs(g);
    for (node_id v = 0; v < 40; ++v) {
        const auto t = bfs_spd(g, v, 2);
        std::size_t reached = 0;
        for (auto hit : bfs.run(v, 2)) {
            CHECK(t.dist[hit.node] == hit.dist);
            ++reached;
        }
        CHECK(reached == static_cast<std::size_t>(std::count_if(
                             t.dist.begin(), t.dist.end(), [](int d) { return d != unreachable; })));
    }
}

TEST_CASE("erdos_renyi examples") {
    CHECK(erdos_renyi(100, 0.0, 5).num_edges() == 0);
    const Graph full = erdos_renyi(50, 1.0, 5);
    CHECK(full.num_edges() == 1225);
    CHECK(full == fixtures::complete(50));

    // Binomial over 3000*2999/2 = 4 498 500 pairs at p = 1e-4.
    const double pairs = 4498500.0, p = 1e-4;
    const double mean = pairs * p;
    const double sigma = std::sqrt(pairs * p * (1 - p));
    CHECK(mean == doctest::Approx(449.85));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const double m = static_cast<double>(erdos_renyi(3000, p, seed).num_edges());
        CHECK(std::abs(m - mean) <= 4 * sigma);
    }
}

TEST_CASE("erdos_renyi rejects probabilities outside [0,1]") {
    CHECK_THROWS_AS(erdos_renyi(10, 1.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(erdos_renyi(10, -0.1, 0), std::invalid_argument);
}

TEST_CASE("erdos_renyi is reproducible and seed-sensitive") {
    CHECK(erdos_renyi(400, 0.02, 9) == erdos_renyi(400, 0.02, 9));
    CHECK_FALSE(erdos_renyi(400, 0.02, 9) == erdos_renyi(400, 0.02, 10));
}

TEST_CASE("erdos_renyi edge density is unbiased across many pairs") {
    // 20 graphs of 200 nodes at p = 0.05: 398 000 pair trials in total.
    double edges = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) edges += static_cast<double>(erdos_renyi(200, 0.05, s).num_edges());
    const double trials = 20.0 * 200 * 199 / 2;
    const double sigma = std::sqrt(trials * 0.05 * 0.95);
    CHECK(std::abs(edges - trials * 0.05) <= 4 * sigma);
}

TEST_CASE("edge-list round trip") {
    std::stringstream ss;
    write_edge_list(ss, p5());
    CHECK(read_edge_list(ss) == p5());

    const auto file = std::filesystem::temp_directory_path() / "anchorgt_roundtrip.txt";
    const Graph g = erdos_renyi(120, 0.05, 3);
    write_edge_list_file(file, g);
    CHECK(read_edge_list_file(file) == g);
    std::filesystem::remove(file);
}

TEST_CASE("edge-list parsing") {
    SUBCASE("three-node path") {
        std::istringstream in("3\n0 1\n1 2\n");
        CHECK(read_edge_list(in) == fixtures::path(3));
    }
    SUBCASE("comments and blank lines") {
        std::istringstream in("# header\n3\n\n0 1 # edge\n1 2\n");
        CHECK(read_edge_list(in) == fixtures::path(3));
    }
    SUBCASE("bad token names its line") {
        std::istringstream in("3\n0 1\nx 2\n");
        try {
            read_edge_list(in);
            FAIL("expected a parse error");
        } catch (const parse_error& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("id out of range") {
        std::istringstream in("2\n0 5\n");
        CHECK_THROWS(read_edge_list(in));
    }
    SUBCASE("missing file") { CHECK_THROWS(read_edge_list_file("/nonexistent/graph.txt")); }
}

TEST_CASE("component labels") {
    std::vector<std::pair<node_id, node_id>> in{{0, 3}, {1, 2}, {3, 4}};
    const auto label = component_labels(from_edge_list(in, 6));
    CHECK(label == std::vector<node_id>{0, 1, 1, 0, 0, 2});
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Graph g = oracle::random_graph(30, 0.05, seed);
        const auto dist = oracle::all_pairs_distances(g);
        const auto l = component_labels(g);
        for (node_id v = 0; v < 30; ++v)
            for (node_id u = 0; u < 30; ++u) CHECK((l[v] == l[u]) == (dist[v][u] != oracle::infinite));
    }
}
