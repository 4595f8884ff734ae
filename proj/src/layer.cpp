#include "anchorgt/layer.hpp"

#include "anchorgt/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace anchorgt {

double gelu(double x) noexcept { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) noexcept {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

TransformerLayerParams TransformerLayerParams::zeros(std::size_t d_model, int heads, int d_max) {
    if (heads < 1 || d_model % heads != 0) {
        throw std::invalid_argument("d_model must be a positive multiple of heads");
    }
    const std::size_t hidden = 2 * d_model;
    TransformerLayerParams p;
    p.attention = AttentionLayerParams::zeros(d_model, heads, static_cast<int>(d_model) / heads,
                                              d_max);
    p.out_proj = Matrix(d_model, d_model);
    p.out_bias = Matrix(1, d_model);
    p.ln1_gain = Matrix(1, d_model);
    p.ln1_bias = Matrix(1, d_model);
    p.ln2_gain = Matrix(1, d_model);
    p.ln2_bias = Matrix(1, d_model);
    p.ffn_in = Matrix(d_model, hidden);
    p.ffn_in_bias = Matrix(1, hidden);
    p.ffn_out = Matrix(hidden, d_model);
    p.ffn_out_bias = Matrix(1, d_model);
    return p;
}

TransformerLayerParams TransformerLayerParams::random(std::size_t d_model, int heads, int d_max,
                                                      std::mt19937_64& rng) {
    TransformerLayerParams p = zeros(d_model, heads, d_max);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_model));
    p.attention = AttentionLayerParams::random(d_model, heads, d_max, rng);
    p.out_proj = Matrix::random_normal(d_model, d_model, scale, rng);
    p.out_bias = Matrix::random_normal(1, d_model, 0.1, rng);
    p.ln1_gain = Matrix::random_normal(1, d_model, 0.1, rng);
    p.ln1_bias = Matrix::random_normal(1, d_model, 0.1, rng);
    p.ln2_gain = Matrix::random_normal(1, d_model, 0.1, rng);
    p.ln2_bias = Matrix::random_normal(1, d_model, 0.1, rng);
    for (double& g : p.ln1_gain.values) g += 1.0;
    for (double& g : p.ln2_gain.values) g += 1.0;
    p.ffn_in = Matrix::random_normal(d_model, 2 * d_model, scale, rng);
    p.ffn_in_bias = Matrix::random_normal(1, 2 * d_model, 0.1, rng);
    p.ffn_out = Matrix::random_normal(2 * d_model, d_model, 1.0 / std::sqrt(2.0 * d_model), rng);
    p.ffn_out_bias = Matrix::random_normal(1, d_model, 0.1, rng);
    return p;
}

void TransformerLayerParams::validate() const {
    attention.validate();
    const std::size_t d = d_model();
    auto expect = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
        if (m.rows != r || m.cols != c) {
            throw std::invalid_argument(std::string("layer parameter '") + name + "' has wrong shape");
        }
        if (!m.all_finite()) {
            throw std::invalid_argument(std::string("layer parameter '") + name + "' is not finite");
        }
    };
    if (attention.query.cols != d) throw std::invalid_argument("heads * d_head must equal d_model");
    expect(out_proj, d, d, "out_proj");
    expect(out_bias, 1, d, "out_bias");
    expect(ln1_gain, 1, d, "ln1_gain");
    expect(ln1_bias, 1, d, "ln1_bias");
    expect(ln2_gain, 1, d, "ln2_gain");
    expect(ln2_bias, 1, d, "ln2_bias");
    expect(ffn_in, d, 2 * d, "ffn_in");
    expect(ffn_in_bias, 1, 2 * d, "ffn_in_bias");
    expect(ffn_out, 2 * d, d, "ffn_out");
    expect(ffn_out_bias, 1, d, "ffn_out_bias");
}

namespace {

void layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, Matrix& hat,
                std::vector<double>& rstd, Matrix& out) {
    const std::size_t d = x.cols;
    hat = Matrix(x.rows, d);
    out = Matrix(x.rows, d);
    rstd.assign(x.rows, 0.0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        auto row = x.row(r);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        var /= static_cast<double>(d);
        rstd[r] = 1.0 / std::sqrt(var + layer_norm_eps);
        for (std::size_t c = 0; c < d; ++c) {
            hat(r, c) = (row[c] - mean) * rstd[r];
            out(r, c) = hat(r, c) * gain(0, c) + bias(0, c);
        }
    }
}

// Returns dx and accumulates dgain / dbias.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& hat, const std::vector<double>& rstd,
                           const Matrix& gain, Matrix& dgain, Matrix& dbias) {
    const std::size_t d = dy.cols;
    Matrix dx(dy.rows, d);
    for (std::size_t r = 0; r < dy.rows; ++r) {
        double mean_dhat = 0.0;
        double mean_dhat_hat = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            dgain(0, c) += dy(r, c) * hat(r, c);
            dbias(0, c) += dy(r, c);
            const double dhat = dy(r, c) * gain(0, c);
            mean_dhat += dhat;
            mean_dhat_hat += dhat * hat(r, c);
        }
        mean_dhat /= static_cast<double>(d);
        mean_dhat_hat /= static_cast<double>(d);
        for (std::size_t c = 0; c < d; ++c) {
            const double dhat = dy(r, c) * gain(0, c);
            dx(r, c) = rstd[r] * (dhat - mean_dhat - hat(r, c) * mean_dhat_hat);
        }
    }
    return dx;
}

void add_row_bias(Matrix& m, const Matrix& bias) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) m(r, c) += bias(0, c);
    }
}

void accumulate_column_sums(const Matrix& m, Matrix& out) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) out(0, c) += m(r, c);
    }
}

} // namespace

std::size_t LayerCache::bytes() const noexcept {
    return input.bytes() + ln1_hat.bytes() + ln1_rstd.size() * sizeof(double) + ln1_out.bytes() +
           attention.bytes() + attn_out.bytes() + ln2_hat.bytes() +
           ln2_rstd.size() * sizeof(double) + ln2_out.bytes() + ffn_pre.bytes() + ffn_act.bytes();
}

LayerResult transformer_layer_forward(const Matrix& h, AttentionPattern pattern,
                                      const TransformerLayerParams& params) {
    params.validate();
    if (h.cols != params.d_model()) throw std::invalid_argument("feature width != d_model");
    if (!h.all_finite()) throw std::invalid_argument("non-finite node features");

    LayerResult r;
    LayerCache& c = r.cache;
    c.input = h;
    layer_norm(h, params.ln1_gain, params.ln1_bias, c.ln1_hat, c.ln1_rstd, c.ln1_out);
    auto attn = attention_forward(c.ln1_out, pattern, params.attention);
    c.attention = std::move(attn.cache);
    c.attn_out = std::move(attn.output);

    Matrix h1 = matmul(c.attn_out, params.out_proj);
    add_row_bias(h1, params.out_bias);
    add_inplace(h1, h);

    layer_norm(h1, params.ln2_gain, params.ln2_bias, c.ln2_hat, c.ln2_rstd, c.ln2_out);
    c.ffn_pre = matmul(c.ln2_out, params.ffn_in);
    add_row_bias(c.ffn_pre, params.ffn_in_bias);
    c.ffn_act = c.ffn_pre;
    for (double& x : c.ffn_act.values) x = gelu(x);

    r.output = matmul(c.ffn_act, params.ffn_out);
    add_row_bias(r.output, params.ffn_out_bias);
    add_inplace(r.output, h1);
    return r;
}

LayerGrads transformer_layer_backward(const Matrix& upstream, const LayerCache& c,
                                      AttentionPattern pattern,
                                      const TransformerLayerParams& params) {
    if (upstream.rows != c.input.rows || upstream.cols != c.input.cols) {
        throw std::invalid_argument("upstream gradient shape does not match layer output");
    }
    LayerGrads g;
    g.params = TransformerLayerParams::zeros(params.d_model(), params.attention.heads,
                                             params.attention.bias.d_max());
    auto& gp = g.params;

    // FFN branch
    gp.ffn_out = matmul_tn(c.ffn_act, upstream);
    accumulate_column_sums(upstream, gp.ffn_out_bias);
    Matrix dpre = matmul_nt(upstream, params.ffn_out);
    for (std::size_t i = 0; i < dpre.values.size(); ++i) {
        dpre.values[i] *= gelu_derivative(c.ffn_pre.values[i]);
    }
    gp.ffn_in = matmul_tn(c.ln2_out, dpre);
    accumulate_column_sums(dpre, gp.ffn_in_bias);
    const Matrix dln2 = matmul_nt(dpre, params.ffn_in);
    Matrix dh1 = layer_norm_backward(dln2, c.ln2_hat, c.ln2_rstd, params.ln2_gain, gp.ln2_gain,
                                     gp.ln2_bias);
    add_inplace(dh1, upstream);

    // attention branch
    gp.out_proj = matmul_tn(c.attn_out, dh1);
    accumulate_column_sums(dh1, gp.out_bias);
    const Matrix dattn = matmul_nt(dh1, params.out_proj);
    auto ag = attention_backward(dattn, c.attention, pattern, params.attention);
    gp.attention = std::move(ag.params);
    g.input = layer_norm_backward(ag.input, c.ln1_hat, c.ln1_rstd, params.ln1_gain, gp.ln1_gain,
                                  gp.ln1_bias);
    add_inplace(g.input, dh1);
    return g;
}

std::size_t StackResult::activation_bytes() const noexcept {
    std::size_t total = output.bytes();
    for (const auto& c : caches) total += c.bytes();
    return total;
}

StackResult stack_forward(const Matrix& h, AttentionPattern pattern,
                          const std::vector<TransformerLayerParams>& layers) {
    StackResult r;
    r.output = h;
    for (const auto& layer : layers) {
        auto step = transformer_layer_forward(r.output, pattern, layer);
        r.output = std::move(step.output);
        r.caches.push_back(std::move(step.cache));
    }
    return r;
}

std::size_t StackGrads::bytes() const noexcept {
    std::size_t total = input.bytes();
    for (const auto& l : layers) {
        for_each_tensor(l, [&](auto, auto values) { total += values.size() * sizeof(double); });
    }
    return total;
}

StackGrads stack_backward(const Matrix& upstream, const StackResult& forward,
                          AttentionPattern pattern,
                          const std::vector<TransformerLayerParams>& layers) {
    if (forward.caches.size() != layers.size()) {
        throw std::invalid_argument("forward caches do not match the layer stack");
    }
    StackGrads g;
    g.layers.resize(layers.size());
    g.input = upstream;
    for (std::size_t i = layers.size(); i-- > 0;) {
        auto step = transformer_layer_backward(g.input, forward.caches[i], pattern, layers[i]);
        g.input = std::move(step.input);
        g.layers[i] = std::move(step.params);
    }
    return g;
}

void to_json(nlohmann::json& j, const TransformerLayerParams& p) {
    j = nlohmann::json{{"attention", p.attention},       {"out_proj", p.out_proj},
                       {"out_bias", p.out_bias},         {"ln1_gain", p.ln1_gain},
                       {"ln1_bias", p.ln1_bias},         {"ln2_gain", p.ln2_gain},
                       {"ln2_bias", p.ln2_bias},         {"ffn_in", p.ffn_in},
                       {"ffn_in_bias", p.ffn_in_bias},   {"ffn_out", p.ffn_out},
                       {"ffn_out_bias", p.ffn_out_bias}};
}

void from_json(const nlohmann::json& j, TransformerLayerParams& p) {
    p.attention = j.at("attention").get<AttentionLayerParams>();
    p.out_proj = j.at("out_proj").get<Matrix>();
    p.out_bias = j.at("out_bias").get<Matrix>();
    p.ln1_gain = j.at("ln1_gain").get<Matrix>();
    p.ln1_bias = j.at("ln1_bias").get<Matrix>();
    p.ln2_gain = j.at("ln2_gain").get<Matrix>();
    p.ln2_bias = j.at("ln2_bias").get<Matrix>();
    p.ffn_in = j.at("ffn_in").get<Matrix>();
    p.ffn_in_bias = j.at("ffn_in_bias").get<Matrix>();
    p.ffn_out = j.at("ffn_out").get<Matrix>();
    p.ffn_out_bias = j.at("ffn_out_bias").get<Matrix>();
    p.validate();
}

} // namespace anchorgt
