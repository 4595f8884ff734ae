#include "anchorgt/anchor.hpp"
#include "anchorgt/attention.hpp"
#include "anchorgt/bench.hpp"
#include "anchorgt/fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <array>
#include <sstream>

using namespace anchorgt;

namespace {

BenchConfig tiny(std::vector<std::size_t> sizes, BenchConfig::Density density, double value) {
    BenchConfig cfg;
    cfg.sizes = std::move(sizes);
    cfg.density = density;
    cfg.density_value = value;
    cfg.d_model = 8;
    cfg.heads = 2;
    cfg.layers = 1;
    cfg.warmup = 0;
    cfg.seed = 5;
    return cfg;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("scaling exponent of exact power laws") {
    const std::vector<double> n{1000, 2000, 4000, 8000};
    std::vector<double> sq, lin;
    for (double x : n) {
        sq.push_back(x * x);
        lin.push_back(3.7 * x);
    }
    const auto f2 = fit_scaling_exponent(n, sq);
    CHECK(std::abs(f2.slope - 2.0) <= 1e-9);
    CHECK(f2.residual <= 1e-9);
    CHECK(std::abs(fit_scaling_exponent(n, lin).slope - 1.0) <= 1e-9);
    CHECK(std::exp(fit_scaling_exponent(n, lin).intercept) == doctest::Approx(3.7));
}

TEST_CASE("scaling fit rejects degenerate input") {
    const std::vector<double> two{1, 2}, three_same{5, 5, 5}, y{1, 2, 3}, bad{1, 0, 3};
    CHECK_THROWS(fit_scaling_exponent(two, std::vector<double>{1, 2}));
    CHECK_THROWS(fit_scaling_exponent(three_same, y));
    CHECK_THROWS(fit_scaling_exponent(y, bad));
    CHECK_THROWS(fit_scaling_exponent(y, two));
}

TEST_CASE("presets") {
    const auto grid = bench_preset("paper-grid");
    CHECK(grid.sizes == std::vector<std::size_t>{500, 1000, 1500, 2000, 2500, 3000});
    CHECK(grid.density == BenchConfig::Density::fixed_p);
    CHECK(grid.edge_probability(1000) == 0.0001);
    CHECK(grid.k == 2);
    CHECK(grid.warmup == 3);

    const auto fixed = bench_preset("fixed-degree");
    CHECK(fixed.sizes == std::vector<std::size_t>{1000, 2000, 4000, 8000});
    CHECK(fixed.edge_probability(1001) == doctest::Approx(0.01));
    CHECK_THROWS(bench_preset("unknown"));
}

TEST_CASE("config validation") {
    auto cfg = tiny({200, 100}, BenchConfig::Density::fixed_p, 0.1);
    CHECK_THROWS(cfg.validate());
    cfg.sizes = {100};
    CHECK_NOTHROW(cfg.validate());
    cfg.density_value = 1.5;
    CHECK_THROWS(cfg.validate());
    cfg.density_value = 0.1;
    cfg.d_max = 2;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("complete graph attends every pair") {
    auto cfg = tiny({500}, BenchConfig::Density::fixed_p, 1.0);
    cfg.k = 1;
    cfg.dense_max_nodes = 500;
    const auto records = run_scaling_suite(cfg);
    REQUIRE(records.size() == 1);
    const auto& r = records[0];
    CHECK(r.anchors == 1);
    CHECK(r.attended_pairs == r.dense_pairs);
    CHECK(r.dense_pairs == 250000);
    CHECK(r.dense_ran);
    // harness cross-check: both paths compute the same thing when R(v) = V
    CHECK(r.max_output_gap < 1e-6);
}

TEST_CASE("records are deterministic and consistent") {
    auto cfg = tiny({100, 200, 300}, BenchConfig::Density::fixed_degree, 6.0);
    cfg.dense_max_nodes = 200;
    std::vector<std::size_t> progress;
    const auto a = run_scaling_suite(cfg, [&](const BenchRecord& r) { progress.push_back(r.n); });
    const auto b = run_scaling_suite(cfg);
    CHECK(progress == cfg.sizes);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a[i].edges == b[i].edges);
        CHECK(a[i].anchors == b[i].anchors);
        CHECK(a[i].attended_pairs == b[i].attended_pairs);
        CHECK(a[i].anchor_bytes == b[i].anchor_bytes);
        CHECK(a[i].attended_pairs <= a[i].dense_pairs);
        CHECK(a[i].anchor_forward_ms > 0.0);
        CHECK(a[i].anchor_backward_ms > 0.0);
        CHECK(a[i].dense_ran == (a[i].n <= 200));
        if (a[i].dense_ran) {
            CHECK(a[i].dense_forward_ms > 0.0);
            CHECK(a[i].dense_bytes > a[i].anchor_bytes);
        }

        // single source of truth for the pair count
        const Graph g = erdos_renyi(a[i].n, a[i].p, a[i].seed);
        const auto s = select_anchors(g, 2, a[i].seed);
        CHECK(build_receptive_field(g, s).total_pairs() == a[i].attended_pairs);
        CHECK(s.size() == a[i].anchors);
        CHECK(g.num_edges() == a[i].edges);
    }
}

TEST_CASE("low-density grid keeps attended pairs below dense pairs") {
    auto cfg = bench_preset("paper-grid");
    cfg.d_model = 8;
    cfg.layers = 1;
    cfg.warmup = 0;
    cfg.dense_max_nodes = 0;
    const auto records = run_scaling_suite(cfg);
    CHECK(records.size() == 6);
    for (const auto& r : records) CHECK(r.attended_pairs < r.dense_pairs);
}

TEST_CASE("csv writers") {
    auto cfg = tiny({50, 80, 120}, BenchConfig::Density::fixed_degree, 4.0);
    const auto records = run_scaling_suite(cfg);
    std::ostringstream wide, longf;
    write_records_csv(wide, records);
    write_records_long_csv(longf, records);
    CHECK(wide.str().starts_with("n,p,k,seed,edges,anchors,"));
    CHECK(count_lines(wide.str()) == 4);
    CHECK(longf.str().starts_with("n,variant,metric,value\n"));
    CHECK(count_lines(longf.str()) > 3 * 4);

    const nlohmann::json j = records;
    CHECK(j.size() == 3);
    CHECK(j[0].at("attended_pairs") == records[0].attended_pairs);
}

TEST_CASE("k sweep examples") {
    const std::array<int, 3> k123{1, 2, 3};
    SUBCASE("complete graph rows are identical") {
        const auto rows = k_sweep_report(fixtures::complete(6), k123, 0);
        for (const auto& r : rows) {
            CHECK(r.anchors == rows[0].anchors);
            CHECK(r.attended_pairs == rows[0].attended_pairs);
            CHECK(r.mean_khop == rows[0].mean_khop);
            CHECK(r.relative_cost == 1.0);
        }
    }
    SUBCASE("long path shrinks its anchor set") {
        const auto rows = k_sweep_report(fixtures::path(100), k123, 0);
        CHECK(rows[0].anchors > rows[1].anchors);
        CHECK(rows[1].anchors > rows[2].anchors);
        // a path needs at least ceil(n / (2k + 1)) anchors
        CHECK(rows[0].anchors >= 34);
        CHECK(rows[1].anchors >= 20);
        CHECK(rows[2].anchors >= 15);
    }
    SUBCASE("random graph trend") {
        const auto rows = k_sweep_report(erdos_renyi(2000, 0.005, 1), k123, 1);
        CHECK(rows[0].anchors >= rows[1].anchors);
        CHECK(rows[1].anchors >= rows[2].anchors);
        CHECK(rows[0].mean_khop <= rows[1].mean_khop);
        CHECK(rows[1].mean_khop <= rows[2].mean_khop);
        CHECK(rows[1].relative_cost == 1.0);
    }
    CHECK_THROWS(k_sweep_report(fixtures::path(5), std::array<int, 1>{7}, 0));
    CHECK(mean_khop_size(fixtures::path(3), 1) == doctest::Approx(7.0 / 3));
}
