#pragma once

#include "anchorgt/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace anchorgt {

struct BenchConfig {
    enum class Density { fixed_p, fixed_degree };

    std::vector<std::size_t> sizes;
    Density density = Density::fixed_degree;
    double density_value = 10.0; ///< p, or the expected average degree
    int k = 2;
    int reps = 1;
    int warmup = 3;
    std::uint64_t seed = 0;
    std::size_t d_model = 32;
    int heads = 2;
    int layers = 2;
    int d_max = 8;
    /// Graphs above this size skip the timed dense path (pair counts are
    /// still reported). 0 runs it everywhere.
    std::size_t dense_max_nodes = 0;

    double edge_probability(std::size_t n) const;
    void validate() const;
};

/// "paper-grid" (n = 500..3000 step 500, p = 1e-4) or "fixed-degree"
/// (n = 1000..8000 doubling, average degree 10). Throws std::invalid_argument
/// for any other name.
BenchConfig bench_preset(std::string_view name);

struct BenchRecord {
    std::size_t n = 0;
    double p = 0.0;
    int k = 0;
    std::uint64_t seed = 0;
    std::size_t edges = 0;
    std::size_t anchors = 0;
    std::size_t max_khop = 0;
    double mean_khop = 0.0;
    std::size_t attended_pairs = 0;
    std::size_t dense_pairs = 0;
    double anchor_forward_ms = 0.0;
    double anchor_backward_ms = 0.0;
    std::size_t anchor_bytes = 0; ///< pattern + activations + gradients
    bool dense_ran = false;
    double dense_forward_ms = 0.0;
    double dense_backward_ms = 0.0;
    std::size_t dense_bytes = 0;
    double max_output_gap = 0.0; ///< max |anchor - dense| over stack outputs, when dense ran
};

using BenchProgress = std::function<void(const BenchRecord&)>;

std::vector<BenchRecord> run_scaling_suite(const BenchConfig& cfg, const BenchProgress& progress = {});

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; ///< RMS of log-space residuals
};

/// Least-squares fit of log(y) against log(x). Needs at least three distinct
/// positive x and positive y.
ScalingFit fit_scaling_exponent(std::span<const double> x, std::span<const double> y);
ScalingFit fit_scaling_exponent(std::span<const BenchRecord> records,
                                double (*metric)(const BenchRecord&));

struct KSweepRow {
    int k = 0;
    std::size_t anchors = 0;
    double mean_khop = 0.0;
    std::size_t max_khop = 0;
    std::size_t attended_pairs = 0;
    double relative_cost = 0.0; ///< attended pairs relative to the k = 2 row
};

/// Requires every k in [1, 6]. The baseline is the k = 2 row, or the first
/// row when k = 2 is absent.
std::vector<KSweepRow> k_sweep_report(const Graph& g, std::span<const int> k_values,
                                      std::uint64_t seed, int d_max = 8);

/// Mean |N_k(v)| over all nodes.
double mean_khop_size(const Graph& g, int k);

void write_records_csv(std::ostream& out, std::span<const BenchRecord> records);
/// One row per (n, variant, metric) for plotting tools.
void write_records_long_csv(std::ostream& out, std::span<const BenchRecord> records);
void write_k_sweep_csv(std::ostream& out, std::span<const KSweepRow> rows);

void to_json(nlohmann::json& j, const BenchRecord& r);
void to_json(nlohmann::json& j, const ScalingFit& f);
void to_json(nlohmann::json& j, const KSweepRow& r);

} // namespace anchorgt
