#include "anchorgt/anchor.hpp"
#include "anchorgt/expressiveness.hpp"
#include "anchorgt/fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <numeric>

using namespace anchorgt;

namespace {

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

void check_same_multiset(std::vector<double> got, std::vector<double> want, double tol) {
    REQUIRE(got.size() == want.size());
    got = sorted(got);
    want = sorted(want);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

bool dominates(const std::vector<std::vector<int>>& dist, unsigned mask, int k) {
    for (std::size_t v = 0; v < dist.size(); ++v) {
        bool ok = false;
        for (std::size_t a = 0; a < dist.size(); ++a)
            ok |= (mask >> a & 1u) && dist[v][a] != oracle::infinite && dist[v][a] <= k;
        if (!ok) return false;
    }
    return true;
}

// Minimal dominating sets by checking every subset and every single removal.
std::set<std::vector<node_id>> brute_minimal_sets(const Graph& g, int k) {
    const auto dist = oracle::all_pairs_distances(g);
    const std::size_t n = g.num_nodes();
    std::set<std::vector<node_id>> out;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        if (!dominates(dist, mask, k)) continue;
        bool minimal = true;
        for (std::size_t a = 0; a < n && minimal; ++a)
            if (mask >> a & 1u) minimal = !dominates(dist, mask & ~(1u << a), k);
        if (!minimal) continue;
        std::vector<node_id> s;
        for (node_id a = 0; a < n; ++a)
            if (mask >> a & 1u) s.push_back(a);
        out.insert(s);
    }
    return out;
}

} // namespace

TEST_CASE("wl examples") {
    const auto same = wl_refine(fixtures::path(5), fixtures::path(5));
    CHECK_FALSE(same.distinguishable);
    CHECK(same.histograms[0] == same.histograms[1]);

    const auto p3_tri = wl_refine(fixtures::path(3), fixtures::complete(3));
    CHECK(p3_tri.distinguishable);
    CHECK(p3_tri.histograms[0] != p3_tri.histograms[1]);

    const auto dec = wl_refine(fixtures::decalin(), fixtures::bicyclopentyl());
    CHECK_FALSE(dec.distinguishable);
    CHECK(dec.rounds >= 1);

    CHECK_FALSE(wl_refine(fixtures::bridged_triangles(), fixtures::ladder()).distinguishable);
    CHECK(wl_refine(fixtures::path(6), fixtures::cycle(6)).distinguishable);
    // Regular graphs of equal degree and size are invisible to 1-WL.
    std::vector<std::pair<node_id, node_id>> two_triangles{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}};
    CHECK_FALSE(wl_refine(fixtures::cycle(6), from_edge_list(two_triangles, 6)).distinguishable);
}

TEST_CASE("wl is invariant under relabeling") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = oracle::random_graph(18, 0.15, seed);
        std::vector<node_id> perm(18);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
        const auto r = wl_refine(g, oracle::relabel(g, perm));
        CHECK_FALSE(r.distinguishable);
        CHECK(r.histograms[0] == r.histograms[1]);
    }
}

TEST_CASE("fixture graphs") {
    CHECK(fixtures::decalin().num_nodes() == 10);
    CHECK(fixtures::decalin().num_edges() == 11);
    CHECK(fixtures::bicyclopentyl().num_nodes() == 10);
    CHECK(fixtures::bicyclopentyl().num_edges() == 11);
    CHECK(fixtures::bridged_triangles().num_edges() == 7);
    CHECK(fixtures::ladder().num_edges() == 7);
    CHECK(fixtures::by_name("cycle7")->num_edges() == 7);
    CHECK(fixtures::by_name("star4")->num_nodes() == 5);
    CHECK_FALSE(fixtures::by_name("nonsense").has_value());
}

TEST_CASE("fact1 reproduces the neighborhood mean") {
    SUBCASE("one-hot features on a path") {
        const Graph g = fixtures::path(5);
        const auto rf = build_receptive_field(g, select_anchors(g, 1, 0), 2);
        const auto params = fact1_construct(rf, 5);
        const Matrix out = attention_forward(Matrix::identity(5), rf, params).output;
        const std::vector<double> row2(out.row(2).begin(), out.row(2).end());
        CHECK(row2 == std::vector<double>{0.0, 0.5, 0.0, 0.5, 0.0});
    }
    SUBCASE("isolated node keeps its own value") {
        std::vector<std::pair<node_id, node_id>> e{{0, 1}};
        const Graph g = from_edge_list(e, 3);
        const auto rf = build_receptive_field(g, select_anchors(g, 1, 0), 2);
        const Matrix h = oracle::random_matrix(3, 4, 1);
        const Matrix out = attention_forward(h, rf, fact1_construct(rf, 4)).output;
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(out(2, c) == doctest::Approx(h(2, c)).epsilon(1e-12));
            CHECK(out(0, c) == doctest::Approx(h(1, c)).epsilon(1e-12));
        }
    }
    SUBCASE("random graphs against the GNN oracle") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Graph g = oracle::random_graph(10 + seed, 0.15, seed);
            const int k = 1 + static_cast<int>(seed % 2);
            const auto rf = build_receptive_field(g, select_anchors(g, k, seed), k + 1);
            const Matrix h = oracle::random_matrix(g.num_nodes(), 6, seed);
            const Matrix out = attention_forward(h, rf, fact1_construct(rf, 6)).output;
            CHECK(max_abs_diff(out, oracle::neighborhood_mean(g, h)) < 1e-6);
        }
    }
}

TEST_CASE("fact2 configuration") {
    CHECK_NOTHROW(Fact2Config{}.validate());
    CHECK_NOTHROW((Fact2Config{1.0, 1.0 + std::numbers::ln2}.validate()));
    CHECK_THROWS((Fact2Config{0.0, 1.0}.validate()));
    CHECK(std::exp(Fact2Config{}.a - Fact2Config{}.b) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("fact2 with every anchor in reach degenerates to p = 1") {
    const Graph k4 = fixtures::complete(4);
    const auto r = fact2_run(k4, AnchorSet({0}, 1, 0, 4));
    for (double p : r.mixing) CHECK(p == 1.0);
    for (double v : r.values) CHECK(v == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.layer1 == std::vector<double>{3, 3, 3, 3});
    CHECK(r.sum_readout == doctest::Approx(12.0));
    CHECK(r.mean_readout == doctest::Approx(3.0));
}

TEST_CASE("fact2 rejects anchors that do not dominate") {
    CHECK_THROWS_AS(fact2_run(fixtures::path(5), AnchorSet({0}, 1, 0, 5)), std::invalid_argument);
}

TEST_CASE("fact2 attention agrees with the closed form") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = oracle::random_graph(12 + seed, 0.12, seed);
        const int k = 1 + static_cast<int>(seed % 2);
        const AnchorSet s = select_anchors(g, k, seed);
        const auto r = fact2_run(g, s);
        REQUIRE(r.values.size() == g.num_nodes());
        for (node_id v = 0; v < g.num_nodes(); ++v) {
            CHECK(std::abs(r.values[v] - r.closed_form[v]) < 1e-9);
            CHECK(r.mixing[v] > 0.0);
            CHECK(r.mixing[v] <= 1.0);
            const auto ball = k_hop(g, v, k);
            bool all_inside = true;
            for (node_id a : s.nodes()) all_inside &= std::binary_search(ball.begin(), ball.end(), a);
            CHECK((r.mixing[v] == 1.0) == all_inside);
            CHECK(r.layer1[v] == g.degree(v));
        }
    }
}

TEST_CASE("anchor-flag mixture reproduces the reference multisets for every greedy choice") {
    const std::vector<double> g1{17.0 / 7, 12.0 / 5, 12.0 / 5, 12.0 / 5, 13.0 / 5, 5.0 / 2};
    const std::vector<double> g2{7.0 / 3, 7.0 / 3, 7.0 / 3, 7.0 / 3, 19.0 / 8, 19.0 / 8};
    std::set<std::vector<node_id>> seen1, seen2;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const AnchorSet s1 = select_anchors(fixtures::bridged_triangles(), 1, seed);
        const AnchorSet s2 = select_anchors(fixtures::ladder(), 1, seed);
        seen1.insert({s1.nodes().begin(), s1.nodes().end()});
        seen2.insert({s2.nodes().begin(), s2.nodes().end()});
        check_same_multiset(anchor_flag_mixture(fixtures::bridged_triangles(), s1), g1, 1e-12);
        check_same_multiset(anchor_flag_mixture(fixtures::ladder(), s2), g2, 1e-12);
    }
    CHECK(seen1.size() == 4);
    CHECK(seen2.size() == 2);
}

TEST_CASE("minimal dominating sets match brute force") {
    for (const Graph& g : {fixtures::path(5), fixtures::cycle(6), fixtures::star(4),
                           fixtures::bridged_triangles(), oracle::random_graph(9, 0.3, 2)}) {
        for (int k = 1; k <= 2; ++k) {
            std::set<std::vector<node_id>> got;
            for (const auto& s : enumerate_minimal_dominating_sets(g, k)) {
                CHECK(s.k() == k);
                got.insert({s.nodes().begin(), s.nodes().end()});
            }
            CHECK(got == brute_minimal_sets(g, k));
        }
    }
    CHECK_THROWS(enumerate_minimal_dominating_sets(fixtures::path(21), 1));
}

TEST_CASE("decalin and bicyclopentyl are separated by the anchor construction") {
    const auto dec = enumerate_minimal_dominating_sets(fixtures::decalin(), 1);
    const auto bcp = enumerate_minimal_dominating_sets(fixtures::bicyclopentyl(), 1);
    CHECK(dec.size() == 23);
    CHECK(bcp.size() == 31);
    auto smallest = [](const std::vector<AnchorSet>& sets) {
        std::size_t m = 99;
        for (const auto& s : sets) m = std::min(m, s.size());
        return m;
    };
    CHECK(smallest(dec) == 3);
    CHECK(smallest(bcp) == 4);

    const auto dist = fact2_enumerated(fixtures::decalin(), fixtures::bicyclopentyl());
    CHECK(dist.distinguished);
    CHECK(dist.readouts1.size() == 23);
    CHECK(dist.readouts2.size() == 31);
    auto contains = [](const std::vector<double>& xs, double x) {
        return std::any_of(xs.begin(), xs.end(), [&](double y) { return std::abs(x - y) < 1e-8; });
    };
    CHECK(contains(dist.readouts1, 2.230952381));
    CHECK(contains(dist.readouts2, 2.233650794));
    CHECK(contains(dist.readouts2, 2.234285714));
    // some readout of one graph is farther than 1e-6 from every readout of the other
    bool separated = false;
    for (double x : dist.readouts2) {
        bool near = false;
        for (double y : dist.readouts1) near |= std::abs(x - y) <= 1e-6;
        separated |= !near;
    }
    CHECK(separated);
}

TEST_CASE("fact2 distributions") {
    const auto same = fact2_distribution(fixtures::decalin(), fixtures::decalin(), {}, 16, 3);
    CHECK(same.readouts1 == same.readouts2);
    CHECK_FALSE(same.distinguished);

    CHECK(fact2_distribution(fixtures::path(3), fixtures::complete(3), {}, 8, 1).distinguished);
    CHECK(fact2_distribution(fixtures::decalin(), fixtures::bicyclopentyl(), {}, 64, 1).distinguished);
    CHECK_THROWS(fact2_distribution(fixtures::path(3), fixtures::path(3), {}, 0, 1));
}

TEST_CASE("distribution comparison") {
    CHECK_FALSE(distributions_differ({1.0, 2.0, 2.0}, {2.0, 1.0, 2.0}));
    CHECK(distributions_differ({1.0, 2.0, 2.0}, {1.0, 1.0, 2.0}));
    CHECK_FALSE(distributions_differ({1.0, 2.0}, {1.0, 1.0, 2.0, 2.0}));
    CHECK(distributions_differ({1.0}, {1.0 + 1e-6}));
    CHECK_FALSE(distributions_differ({1.0}, {1.0 + 1e-12}));
}

TEST_CASE("reports") {
    const auto wl = wl_refine(fixtures::path(3), fixtures::complete(3));
    const auto j = wl_report(wl);
    CHECK(j.at("verdict") == "distinguishable");
    CHECK(j.contains("rounds"));
    CHECK(j.at("histograms").size() == 2);

    const auto dist = fact2_enumerated(fixtures::decalin(), fixtures::bicyclopentyl());
    const auto r = fact2_report(wl_refine(fixtures::decalin(), fixtures::bicyclopentyl()), dist);
    CHECK(r.at("verdict") == "distinguished");
    CHECK(r.at("wl").at("verdict") == "indistinguishable");
    CHECK(r.at("multisets").size() == 2);
}
