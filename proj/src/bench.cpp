#include "anchorgt/bench.hpp"

#include "anchorgt/anchor.hpp"
#include "anchorgt/attention.hpp"
#include "anchorgt/layer.hpp"
#include "anchorgt/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace anchorgt {

double BenchConfig::edge_probability(std::size_t n) const {
    if (density == Density::fixed_p) return density_value;
    if (n < 2) return 0.0;
    return std::min(1.0, density_value / static_cast<double>(n - 1));
}

void BenchConfig::validate() const {
    if (sizes.empty()) throw std::invalid_argument("bench needs at least one graph size");
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw std::invalid_argument("bench sizes must be ascending");
    }
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (d_max < k + 1) throw std::invalid_argument("d_max must be at least k + 1");
    if (reps < 1 || warmup < 0) throw std::invalid_argument("reps must be >= 1, warmup >= 0");
    if (heads < 1 || layers < 1 || d_model == 0 || d_model % heads != 0) {
        throw std::invalid_argument("model dims must be positive with heads dividing d_model");
    }
    if (density == Density::fixed_p && !(density_value >= 0.0 && density_value <= 1.0)) {
        throw std::invalid_argument("edge probability must lie in [0, 1]");
    }
    if (density == Density::fixed_degree && !(density_value >= 0.0)) {
        throw std::invalid_argument("average degree must be non-negative");
    }
}

BenchConfig bench_preset(std::string_view name) {
    BenchConfig cfg;
    if (name == "paper-grid") {
        cfg.sizes = {500, 1000, 1500, 2000, 2500, 3000};
        cfg.density = BenchConfig::Density::fixed_p;
        cfg.density_value = 0.0001;
    } else if (name == "fixed-degree") {
        cfg.sizes = {1000, 2000, 4000, 8000};
        cfg.density = BenchConfig::Density::fixed_degree;
        cfg.density_value = 10.0;
        cfg.dense_max_nodes = 4000;
    } else {
        throw std::invalid_argument("unknown bench preset '" + std::string(name) + "'");
    }
    return cfg;
}

double mean_khop_size(const Graph& g, int k) {
    if (g.num_nodes() == 0) return 0.0;
    BoundedBfs bfs(g);
    double total = 0.0;
    for (node_id v = 0; v < g.num_nodes(); ++v) total += static_cast<double>(bfs.run(v, k).size());
    return total / static_cast<double>(g.num_nodes());
}

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

struct Timing {
    double forward_ms = 0.0;
    double backward_ms = 0.0;
    std::size_t bytes = 0;
    Matrix output;
};

Timing time_stack(const Matrix& x, const Matrix& upstream, AttentionPattern pattern,
                  std::size_t pattern_bytes, const std::vector<TransformerLayerParams>& layers,
                  const BenchConfig& cfg) {
    Timing t;
    for (int i = 0; i < cfg.warmup + cfg.reps; ++i) {
        const bool timed = i >= cfg.warmup;
        auto t0 = clock_type::now();
        auto fwd = stack_forward(x, pattern, layers);
        const double f_ms = ms_since(t0);
        t0 = clock_type::now();
        auto grads = stack_backward(upstream, fwd, pattern, layers);
        const double b_ms = ms_since(t0);
        if (timed) {
            t.forward_ms += f_ms / cfg.reps;
            t.backward_ms += b_ms / cfg.reps;
        }
        if (i + 1 == cfg.warmup + cfg.reps) {
            t.bytes = pattern_bytes + fwd.activation_bytes() + grads.bytes();
            t.output = std::move(fwd.output);
        }
    }
    return t;
}

} // namespace

std::vector<BenchRecord> run_scaling_suite(const BenchConfig& cfg, const BenchProgress& progress) {
    cfg.validate();
    std::vector<BenchRecord> out;
    for (std::size_t n : cfg.sizes) {
        BenchRecord r;
        r.n = n;
        r.p = cfg.edge_probability(n);
        r.k = cfg.k;
        r.seed = counter_hash(cfg.seed, 1, n);
        const Graph g = erdos_renyi(n, r.p, r.seed);
        r.edges = g.num_edges();

        const AnchorSet s = select_anchors(g, cfg.k, r.seed);
        const ReceptiveField rf = build_receptive_field(g, s, cfg.d_max);
        r.anchors = s.size();
        r.max_khop = max_khop_size(g, cfg.k);
        r.mean_khop = mean_khop_size(g, cfg.k);
        r.attended_pairs = attended_pair_count(rf);
        r.dense_pairs = dense_pair_count(n);

        std::mt19937_64 rng(r.seed);
        std::vector<TransformerLayerParams> layers;
        for (int l = 0; l < cfg.layers; ++l) {
            layers.push_back(TransformerLayerParams::random(cfg.d_model, cfg.heads, cfg.d_max, rng));
        }
        const Matrix x = Matrix::random_normal(n, cfg.d_model, 1.0, rng);
        const Matrix upstream = Matrix::random_normal(n, cfg.d_model, 1.0, rng);

        auto anchor = time_stack(x, upstream, rf, rf.bytes(), layers, cfg);
        r.anchor_forward_ms = anchor.forward_ms;
        r.anchor_backward_ms = anchor.backward_ms;
        r.anchor_bytes = anchor.bytes;

        if (cfg.dense_max_nodes == 0 || n <= cfg.dense_max_nodes) {
            const DenseStructure dense(g, cfg.d_max);
            auto full = time_stack(x, upstream, dense, dense.bytes(), layers, cfg);
            r.dense_ran = true;
            r.dense_forward_ms = full.forward_ms;
            r.dense_backward_ms = full.backward_ms;
            r.dense_bytes = full.bytes;
            r.max_output_gap = max_abs_diff(anchor.output, full.output);
        }
        if (progress) progress(r);
        out.push_back(r);
    }
    return out;
}

ScalingFit fit_scaling_exponent(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y must have equal length");
    std::vector<double> xs(x.begin(), x.end());
    std::sort(xs.begin(), xs.end());
    if (std::unique(xs.begin(), xs.end()) - xs.begin() < 3) {
        throw std::invalid_argument("scaling fit needs at least three distinct sizes");
    }
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!std::all_of(x.begin(), x.end(), positive) || !std::all_of(y.begin(), y.end(), positive)) {
        throw std::invalid_argument("scaling fit needs positive finite values");
    }
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    ScalingFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
        ss += e * e;
    }
    f.residual = std::sqrt(ss / m);
    return f;
}

ScalingFit fit_scaling_exponent(std::span<const BenchRecord> records,
                                double (*metric)(const BenchRecord&)) {
    std::vector<double> x, y;
    for (const auto& r : records) {
        x.push_back(static_cast<double>(r.n));
        y.push_back(metric(r));
    }
    return fit_scaling_exponent(x, y);
}

std::vector<KSweepRow> k_sweep_report(const Graph& g, std::span<const int> k_values,
                                      std::uint64_t seed, int d_max) {
    if (k_values.empty()) throw std::invalid_argument("k_values must not be empty");
    std::vector<KSweepRow> rows;
    for (int k : k_values) {
        if (k < 1 || k > 6) throw std::invalid_argument("k must lie in [1, 6]");
        const AnchorSet s = select_anchors(g, k, seed);
        const ReceptiveField rf = build_receptive_field(g, s, std::max(d_max, k + 1));
        KSweepRow row;
        row.k = k;
        row.anchors = s.size();
        row.mean_khop = mean_khop_size(g, k);
        row.max_khop = max_khop_size(g, k);
        row.attended_pairs = attended_pair_count(rf);
        rows.push_back(row);
    }
    auto base = std::find_if(rows.begin(), rows.end(), [](const KSweepRow& r) { return r.k == 2; });
    if (base == rows.end()) base = rows.begin();
    const double denom = static_cast<double>(std::max<std::size_t>(base->attended_pairs, 1));
    for (auto& r : rows) r.relative_cost = static_cast<double>(r.attended_pairs) / denom;
    return rows;
}

void write_records_csv(std::ostream& out, std::span<const BenchRecord> records) {
    out << "n,p,k,seed,edges,anchors,max_khop,mean_khop,attended_pairs,dense_pairs,"
           "anchor_forward_ms,anchor_backward_ms,anchor_bytes,dense_ran,dense_forward_ms,"
           "dense_backward_ms,dense_bytes,max_output_gap\n";
    for (const auto& r : records) {
        out << r.n << ',' << r.p << ',' << r.k << ',' << r.seed << ',' << r.edges << ','
            << r.anchors << ',' << r.max_khop << ',' << r.mean_khop << ',' << r.attended_pairs
            << ',' << r.dense_pairs << ',' << r.anchor_forward_ms << ',' << r.anchor_backward_ms
            << ',' << r.anchor_bytes << ',' << (r.dense_ran ? 1 : 0) << ',' << r.dense_forward_ms
            << ',' << r.dense_backward_ms << ',' << r.dense_bytes << ',' << r.max_output_gap
            << '\n';
    }
}

void write_records_long_csv(std::ostream& out, std::span<const BenchRecord> records) {
    out << "n,variant,metric,value\n";
    auto row = [&](std::size_t n, const char* variant, const char* metric, auto value) {
        out << n << ',' << variant << ',' << metric << ',' << value << '\n';
    };
    for (const auto& r : records) {
        row(r.n, "anchor", "pairs", r.attended_pairs);
        row(r.n, "anchor", "forward_ms", r.anchor_forward_ms);
        row(r.n, "anchor", "backward_ms", r.anchor_backward_ms);
        row(r.n, "anchor", "bytes", r.anchor_bytes);
        row(r.n, "dense", "pairs", r.dense_pairs);
        if (r.dense_ran) {
            row(r.n, "dense", "forward_ms", r.dense_forward_ms);
            row(r.n, "dense", "backward_ms", r.dense_backward_ms);
            row(r.n, "dense", "bytes", r.dense_bytes);
        }
    }
}

void write_k_sweep_csv(std::ostream& out, std::span<const KSweepRow> rows) {
    out << "k,anchors,mean_khop,max_khop,attended_pairs,relative_cost\n";
    for (const auto& r : rows) {
        out << r.k << ',' << r.anchors << ',' << r.mean_khop << ',' << r.max_khop << ','
            << r.attended_pairs << ',' << r.relative_cost << '\n';
    }
}

void to_json(nlohmann::json& j, const BenchRecord& r) {
    j = nlohmann::json{{"n", r.n},
                       {"p", r.p},
                       {"k", r.k},
                       {"seed", r.seed},
                       {"edges", r.edges},
                       {"anchors", r.anchors},
                       {"max_khop", r.max_khop},
                       {"mean_khop", r.mean_khop},
                       {"attended_pairs", r.attended_pairs},
                       {"dense_pairs", r.dense_pairs},
                       {"anchor_forward_ms", r.anchor_forward_ms},
                       {"anchor_backward_ms", r.anchor_backward_ms},
                       {"anchor_bytes", r.anchor_bytes},
                       {"dense_ran", r.dense_ran}};
    if (r.dense_ran) {
        j["dense_forward_ms"] = r.dense_forward_ms;
        j["dense_backward_ms"] = r.dense_backward_ms;
        j["dense_bytes"] = r.dense_bytes;
        j["max_output_gap"] = r.max_output_gap;
    }
}

void to_json(nlohmann::json& j, const ScalingFit& f) {
    j = nlohmann::json{{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}};
}

void to_json(nlohmann::json& j, const KSweepRow& r) {
    j = nlohmann::json{{"k", r.k},
                       {"anchors", r.anchors},
                       {"mean_khop", r.mean_khop},
                       {"max_khop", r.max_khop},
                       {"attended_pairs", r.attended_pairs},
                       {"relative_cost", r.relative_cost}};
}

} // namespace anchorgt
