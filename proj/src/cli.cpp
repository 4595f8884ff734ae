#include "anchorgt/cli.hpp"

#include "anchorgt/anchor.hpp"
#include "anchorgt/attention.hpp"
#include "anchorgt/bench.hpp"
#include "anchorgt/expressiveness.hpp"
#include "anchorgt/fixtures.hpp"
#include "anchorgt/gradcheck.hpp"
#include "anchorgt/graph.hpp"
#include "anchorgt/layer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace anchorgt::cli {

namespace {

using nlohmann::json;

/// Everything any subcommand can be configured with.
struct RunConfig {
    std::string graph;
    std::vector<std::string> graphs;
    std::string out;
    std::string format = "json";
    std::string preset;
    std::string mode = "auto";
    std::size_t n = 0;
    double p = 0.0;
    int k = 2;
    std::uint64_t seed = 0;
    int d_max = default_d_max;
    std::size_t d_model = 32;
    int heads = 2;
    int layers = 2;
    int trials = 64;
    int reps = 1;
    int warmup = 3;
    std::vector<std::size_t> sizes;
    std::vector<int> k_values{1, 2, 3};
    std::size_t dense_max = 0;
    double tolerance = 1e-4;

    void validate() const {
        if (k < 1) throw CLI::ValidationError("--k", "k must be >= 1");
        if (d_max < k + 1) throw CLI::ValidationError("--d-max", "d_max must be at least k + 1");
        if (d_model == 0 || heads < 1 || layers < 1 || d_model % heads != 0) {
            throw CLI::ValidationError("dims", "d_model, heads, layers must be positive and "
                                               "heads must divide d_model");
        }
    }
};

bool debug_logging() {
    const char* v = std::getenv("ANCHORGT_LOG");
    return v && std::string_view(v) == "debug";
}

Graph load_graph(const std::string& where) {
    constexpr std::string_view prefix = "builtin:";
    if (where.starts_with(prefix)) {
        auto g = fixtures::by_name(std::string_view(where).substr(prefix.size()));
        if (!g) throw std::invalid_argument("unknown builtin graph '" + where + "'");
        return *g;
    }
    return read_edge_list_file(where);
}

void emit(const json& j, const RunConfig& cfg, std::ostream& out) {
    if (cfg.out.empty()) {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("cannot open " + cfg.out + " for writing");
    f << j.dump(2) << '\n';
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
    const Graph g = erdos_renyi(cfg.n, cfg.p, cfg.seed);
    write_edge_list_file(cfg.out, g);
    out << json{{"nodes", g.num_nodes()}, {"edges", g.num_edges()}, {"out", cfg.out}}.dump() << '\n';
    return exit_ok;
}

int cmd_anchors(const RunConfig& cfg, std::ostream& out) {
    const Graph g = load_graph(cfg.graph);
    const AnchorSet s = select_anchors(g, cfg.k, cfg.seed);
    const auto check = verify_dominating(g, s);
    json j = s;
    j["count"] = s.size();
    j["verified"] = check.ok;
    if (check.uncovered) j["uncovered"] = *check.uncovered;
    emit(j, cfg, out);
    return check.ok ? exit_ok : exit_failed_check;
}

struct Instance {
    Graph g;
    AnchorSet s;
    ReceptiveField rf;
};

Instance prepare(const RunConfig& cfg) {
    Instance inst;
    inst.g = load_graph(cfg.graph);
    if (inst.g.num_nodes() == 0) throw std::invalid_argument("graph has no nodes");
    inst.s = select_anchors(inst.g, cfg.k, cfg.seed);
    inst.rf = build_receptive_field(inst.g, inst.s, cfg.d_max);
    return inst;
}

int cmd_forward(const RunConfig& cfg, std::ostream& out) {
    const Instance inst = prepare(cfg);
    std::mt19937_64 rng(cfg.seed);
    const auto params = AttentionLayerParams::random(cfg.d_model, cfg.heads, cfg.d_max, rng);
    const Matrix h = Matrix::random_normal(inst.g.num_nodes(), cfg.d_model, 1.0, rng);
    const auto result = attention_forward(h, inst.rf, params);

    json heads = json::array();
    double worst = 0.0;
    for (int head = 0; head < params.heads; ++head) {
        double lo = INFINITY, hi = -INFINITY;
        for (node_id v = 0; v < inst.g.num_nodes(); ++v) {
            double sum = 0.0;
            for (std::size_t e = inst.rf.row_begin(v); e < inst.rf.row_begin(v) + inst.rf.row_size(v);
                 ++e) {
                sum += result.cache.alpha[e * params.heads + head];
            }
            lo = std::min(lo, sum);
            hi = std::max(hi, sum);
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        heads.push_back(json{{"head", head}, {"min_row_sum", lo}, {"max_row_sum", hi}});
    }
    const bool ok = worst <= 1e-12;
    emit(json{{"nodes", inst.g.num_nodes()},
              {"anchors", inst.s.size()},
              {"attended_pairs", attended_pair_count(inst.rf)},
              {"dense_pairs", dense_pair_count(inst.g.num_nodes())},
              {"row_sums", heads},
              {"row_sums_ok", ok},
              {"output", dump_node_features(result.output)}},
         cfg, out);
    return ok ? exit_ok : exit_failed_check;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
    const Instance inst = prepare(cfg);
    std::mt19937_64 rng(cfg.seed);
    const auto params = TransformerLayerParams::random(cfg.d_model, cfg.heads, cfg.d_max, rng);
    const Matrix h = Matrix::random_normal(inst.g.num_nodes(), cfg.d_model, 1.0, rng);
    const Matrix w = Matrix::random_normal(inst.g.num_nodes(), cfg.d_model, 1.0, rng);
    const auto report = gradcheck_layer(h, inst.rf, params, w);

    json tensors = json::array();
    for (const auto& t : report.tensors) {
        tensors.push_back(json{{"name", t.name}, {"rel_error", t.rel_error},
                               {"max_abs_error", t.max_abs_error}});
    }
    const bool ok = report.max_rel_error < cfg.tolerance;
    emit(json{{"max_rel_error", report.max_rel_error},
              {"tolerance", cfg.tolerance},
              {"passed", ok},
              {"tensors", tensors}},
         cfg, out);
    return ok ? exit_ok : exit_failed_check;
}

int cmd_wl(const RunConfig& cfg, std::ostream& out) {
    const Graph g1 = load_graph(cfg.graphs.at(0));
    const Graph g2 = load_graph(cfg.graphs.at(1));
    emit(wl_report(wl_refine(g1, g2)), cfg, out);
    return exit_ok;
}

int cmd_fact2(const RunConfig& cfg, std::ostream& out) {
    const Graph g1 = load_graph(cfg.graphs.at(0));
    const Graph g2 = load_graph(cfg.graphs.at(1));
    std::string mode = cfg.mode;
    if (mode == "auto") {
        mode = std::max(g1.num_nodes(), g2.num_nodes()) <= 20 ? "enumerate" : "sample";
    }
    const auto dist = mode == "enumerate" ? fact2_enumerated(g1, g2)
                                          : fact2_distribution(g1, g2, {}, cfg.trials, cfg.seed);
    json j = fact2_report(wl_refine(g1, g2), dist);
    j["mode"] = mode;
    emit(j, cfg, out);
    return exit_ok;
}

double attended(const BenchRecord& r) { return static_cast<double>(r.attended_pairs); }
double dense(const BenchRecord& r) { return static_cast<double>(r.dense_pairs); }

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    BenchConfig bc = bench_preset(cfg.preset);
    if (!cfg.sizes.empty()) bc.sizes = cfg.sizes;
    bc.k = cfg.k;
    bc.seed = cfg.seed;
    bc.d_max = cfg.d_max;
    bc.d_model = cfg.d_model;
    bc.heads = cfg.heads;
    bc.layers = cfg.layers;
    bc.reps = cfg.reps;
    bc.warmup = cfg.warmup;
    if (cfg.dense_max > 0) bc.dense_max_nodes = cfg.dense_max;

    const bool verbose = debug_logging();
    const auto records = run_scaling_suite(bc, [&](const BenchRecord& r) {
        if (verbose) err << "bench n=" << r.n << " pairs=" << r.attended_pairs << '\n';
    });

    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("cannot open " + cfg.out + " for writing");
    if (cfg.format == "csv") {
        write_records_csv(f, records);
        std::ofstream long_csv(cfg.out + ".long.csv");
        write_records_long_csv(long_csv, records);
    } else {
        f << json(records).dump(2) << '\n';
    }

    json summary{{"preset", cfg.preset}, {"records", records.size()}, {"out", cfg.out}};
    std::set<std::size_t> distinct;
    for (const auto& r : records) distinct.insert(r.n);
    if (distinct.size() >= 3) {
        json slopes{{"attended_pairs", fit_scaling_exponent(records, attended)},
                    {"dense_pairs", fit_scaling_exponent(records, dense)}};
        std::ofstream sf(cfg.out + ".slopes.json");
        sf << slopes.dump(2) << '\n';
        summary["slopes"] = slopes;
        summary["slopes_out"] = cfg.out + ".slopes.json";
    }
    out << summary.dump(2) << '\n';
    return exit_ok;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    const Graph g = load_graph(cfg.graph);
    const auto rows = k_sweep_report(g, cfg.k_values, cfg.seed, cfg.d_max);
    if (cfg.format == "csv") {
        std::ostringstream ss;
        write_k_sweep_csv(ss, rows);
        if (cfg.out.empty()) {
            out << ss.str();
        } else {
            std::ofstream f(cfg.out);
            if (!f) throw std::runtime_error("cannot open " + cfg.out + " for writing");
            f << ss.str();
        }
        return exit_ok;
    }
    emit(json(rows), cfg, out);
    return exit_ok;
}

void add_model_flags(CLI::App& sub, RunConfig& cfg) {
    sub.add_option("--graph", cfg.graph, "edge-list file or builtin:<name>")->required();
    sub.add_option("--k", cfg.k, "hop bound")->capture_default_str();
    sub.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub.add_option("--d-max", cfg.d_max, "largest exact SPD bucket")->capture_default_str();
    sub.add_option("--d-model", cfg.d_model, "model width")->capture_default_str();
    sub.add_option("--heads", cfg.heads, "attention heads")->capture_default_str();
    sub.add_option("--out", cfg.out, "write JSON here instead of stdout");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Anchor-based sparse graph attention toolkit", "anchorgt"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "write an Erdos-Renyi graph as an edge list");
    gen->add_option("--n", cfg.n, "node count")->required();
    gen->add_option("--p", cfg.p, "edge probability")->required()->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    gen->add_option("--out", cfg.out, "output path")->required();

    auto* anchors = app.add_subcommand("anchors", "select and verify a k-dominating anchor set");
    anchors->add_option("--graph", cfg.graph, "edge-list file or builtin:<name>")->required();
    anchors->add_option("--k", cfg.k, "hop bound")->capture_default_str();
    anchors->add_option("--seed", cfg.seed, "tie-break seed")->capture_default_str();
    anchors->add_option("--out", cfg.out, "write JSON here instead of stdout");

    auto* forward = app.add_subcommand("forward", "anchor attention forward on random features");
    add_model_flags(*forward, cfg);

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of one layer");
    add_model_flags(*gradcheck, cfg);
    gradcheck->add_option("--tolerance", cfg.tolerance, "max relative error")->capture_default_str();

    auto* wl = app.add_subcommand("wl", "1-WL comparison of two graphs");
    wl->add_option("graphs", cfg.graphs, "two graphs")->required()->expected(2);
    wl->add_option("--out", cfg.out, "write JSON here instead of stdout");

    auto* fact2 = app.add_subcommand("fact2", "anchor-mixture readout distributions of two graphs");
    fact2->add_option("graphs", cfg.graphs, "two graphs")->required()->expected(2);
    fact2->add_option("--mode", cfg.mode, "enumerate | sample | auto")
        ->check(CLI::IsMember({"auto", "enumerate", "sample"}))
        ->capture_default_str();
    fact2->add_option("--trials", cfg.trials, "sampled anchor selections")->capture_default_str();
    fact2->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    fact2->add_option("--out", cfg.out, "write JSON here instead of stdout");

    auto* bench = app.add_subcommand("bench", "scaling suite on Erdos-Renyi graphs");
    bench->add_option("--preset", cfg.preset, "paper-grid | fixed-degree")
        ->required()
        ->check(CLI::IsMember({"paper-grid", "fixed-degree"}));
    bench->add_option("--out", cfg.out, "output path")->required();
    bench->add_option("--format", cfg.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    bench->add_option("--sizes", cfg.sizes, "override the preset's graph sizes");
    bench->add_option("--k", cfg.k, "hop bound")->capture_default_str();
    bench->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    bench->add_option("--reps", cfg.reps, "timed repetitions")->capture_default_str();
    bench->add_option("--warmup", cfg.warmup, "untimed warm-up repetitions")->capture_default_str();
    bench->add_option("--layers", cfg.layers, "transformer layers")->capture_default_str();
    bench->add_option("--d-model", cfg.d_model, "model width")->capture_default_str();
    bench->add_option("--heads", cfg.heads, "attention heads")->capture_default_str();
    bench->add_option("--d-max", cfg.d_max, "largest exact SPD bucket")->capture_default_str();
    bench->add_option("--dense-max", cfg.dense_max, "skip the dense path above this size");

    auto* sweep = app.add_subcommand("sweep", "anchor count and pair cost across k");
    sweep->add_option("--graph", cfg.graph, "edge-list file or builtin:<name>")->required();
    sweep->add_option("--k-values", cfg.k_values, "k values in [1, 6]")->delimiter(',');
    sweep->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sweep->add_option("--d-max", cfg.d_max, "largest exact SPD bucket")->capture_default_str();
    sweep->add_option("--format", cfg.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sweep->add_option("--out", cfg.out, "output path");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        cfg.validate();
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (gen->parsed()) return cmd_gen(cfg, out);
        if (anchors->parsed()) return cmd_anchors(cfg, out);
        if (forward->parsed()) return cmd_forward(cfg, out);
        if (gradcheck->parsed()) return cmd_gradcheck(cfg, out);
        if (wl->parsed()) return cmd_wl(cfg, out);
        if (fact2->parsed()) return cmd_fact2(cfg, out);
        if (bench->parsed()) return cmd_bench(cfg, out, err);
        if (sweep->parsed()) return cmd_sweep(cfg, out);
    } catch (const parse_error& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

} // namespace anchorgt::cli
