#include "anchorgt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace anchorgt {

namespace {

double weighted_sum(const Matrix& out, const Matrix& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.values.size(); ++i) s += out.values[i] * weights.values[i];
    return s;
}

TensorCheck compare(std::string name, std::span<const double> analytic,
                    std::span<const double> numeric) {
    TensorCheck c{std::move(name)};
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        c.max_abs_error = std::max(c.max_abs_error, std::abs(d));
        diff2 += d * d;
        a2 += analytic[i] * analytic[i];
        n2 += numeric[i] * numeric[i];
    }
    const double scale = std::sqrt(std::max(a2, n2));
    c.rel_error = scale > 0.0 ? std::sqrt(diff2) / scale : 0.0;
    return c;
}

// Central differences of `loss` with respect to every entry of `values`.
template <class Loss>
std::vector<double> numeric_gradient(std::span<double> values, double step, Loss&& loss) {
    std::vector<double> g(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + step;
        const double up = loss();
        values[i] = saved - step;
        const double down = loss();
        values[i] = saved;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

template <class Params, class Forward>
GradCheckReport run_check(const Matrix& h, const Params& params, const Matrix& analytic_input,
                          const Params& analytic_params, double step, Forward&& forward) {
    GradCheckReport report;
    Matrix x = h;
    Params p = params;
    auto loss = [&] { return forward(x, p); };

    report.tensors.push_back(
        compare("input", analytic_input.values, numeric_gradient(std::span(x.values), step, loss)));

    std::vector<std::span<const double>> analytic;
    for_each_tensor(analytic_params, [&](auto, auto values) { analytic.push_back(values); });
    std::size_t index = 0;
    for_each_tensor(p, [&](auto name, std::span<double> values) {
        report.tensors.push_back(
            compare(name, analytic[index++], numeric_gradient(values, step, loss)));
    });
    for (const auto& t : report.tensors) {
        report.max_rel_error = std::max(report.max_rel_error, t.rel_error);
    }
    return report;
}

void check_weights(const Matrix& weights, std::size_t rows, std::size_t cols) {
    if (weights.rows != rows || weights.cols != cols) {
        throw std::invalid_argument("loss weights must match the output shape");
    }
}

} // namespace

GradCheckReport gradcheck_attention(const Matrix& h, AttentionPattern pattern,
                                    const AttentionLayerParams& params, const Matrix& weights,
                                    double step) {
    auto fwd = attention_forward(h, pattern, params);
    check_weights(weights, fwd.output.rows, fwd.output.cols);
    auto grads = attention_backward(weights, fwd.cache, pattern, params);
    return run_check(h, params, grads.input, grads.params, step,
                     [&](const Matrix& x, const AttentionLayerParams& p) {
                         return weighted_sum(attention_forward(x, pattern, p).output, weights);
                     });
}

GradCheckReport gradcheck_layer(const Matrix& h, AttentionPattern pattern,
                                const TransformerLayerParams& params, const Matrix& weights,
                                double step) {
    auto fwd = transformer_layer_forward(h, pattern, params);
    check_weights(weights, fwd.output.rows, fwd.output.cols);
    auto grads = transformer_layer_backward(weights, fwd.cache, pattern, params);
    return run_check(h, params, grads.input, grads.params, step,
                     [&](const Matrix& x, const TransformerLayerParams& p) {
                         return weighted_sum(transformer_layer_forward(x, pattern, p).output,
                                             weights);
                     });
}

} // namespace anchorgt
