#pragma once

#include "anchorgt/attention.hpp"

#include <json.hpp>

#include <random>
#include <vector>

namespace anchorgt {

inline constexpr double layer_norm_eps = 1e-5;

/// Pre-norm transformer block around anchor attention:
///   h1  = h + Attn(LN1(h)) * out_proj + out_bias
///   out = h1 + GELU(LN2(h1) * ffn_in + ffn_in_bias) * ffn_out + ffn_out_bias
/// Bias and gain vectors are stored as 1 x d matrices. The FFN hidden width
/// is 2 * d_model.
struct TransformerLayerParams {
    AttentionLayerParams attention;
    Matrix out_proj;
    Matrix out_bias;
    Matrix ln1_gain;
    Matrix ln1_bias;
    Matrix ln2_gain;
    Matrix ln2_bias;
    Matrix ffn_in;
    Matrix ffn_in_bias;
    Matrix ffn_out;
    Matrix ffn_out_bias;

    std::size_t d_model() const noexcept { return attention.d_model(); }

    static TransformerLayerParams zeros(std::size_t d_model, int heads, int d_max);
    static TransformerLayerParams random(std::size_t d_model, int heads, int d_max,
                                         std::mt19937_64& rng);
    void validate() const;
};

template <class Params, class F>
void for_each_tensor(Params& p, F&& f)
    requires std::is_same_v<std::remove_const_t<Params>, TransformerLayerParams>
{
    for_each_tensor(p.attention, f);
    f("out_proj", std::span(p.out_proj.values));
    f("out_bias", std::span(p.out_bias.values));
    f("ln1_gain", std::span(p.ln1_gain.values));
    f("ln1_bias", std::span(p.ln1_bias.values));
    f("ln2_gain", std::span(p.ln2_gain.values));
    f("ln2_bias", std::span(p.ln2_bias.values));
    f("ffn_in", std::span(p.ffn_in.values));
    f("ffn_in_bias", std::span(p.ffn_in_bias.values));
    f("ffn_out", std::span(p.ffn_out.values));
    f("ffn_out_bias", std::span(p.ffn_out_bias.values));
}

struct LayerCache {
    Matrix input;
    Matrix ln1_hat;            ///< normalized input before gain/bias
    std::vector<double> ln1_rstd;
    Matrix ln1_out;
    AttentionCache attention;
    Matrix attn_out;           ///< concatenated heads, before out_proj
    Matrix ln2_hat;
    std::vector<double> ln2_rstd;
    Matrix ln2_out;
    Matrix ffn_pre;            ///< hidden pre-activation
    Matrix ffn_act;

    std::size_t bytes() const noexcept;
};

struct LayerResult {
    Matrix output;
    LayerCache cache;
};

LayerResult transformer_layer_forward(const Matrix& h, AttentionPattern pattern,
                                      const TransformerLayerParams& params);

struct LayerGrads {
    Matrix input;
    TransformerLayerParams params;
};

LayerGrads transformer_layer_backward(const Matrix& upstream, const LayerCache& cache,
                                      AttentionPattern pattern,
                                      const TransformerLayerParams& params);

/// A stack of layers sharing one attention pattern.
struct StackResult {
    Matrix output;
    std::vector<LayerCache> caches;
    std::size_t activation_bytes() const noexcept;
};

StackResult stack_forward(const Matrix& h, AttentionPattern pattern,
                          const std::vector<TransformerLayerParams>& layers);

struct StackGrads {
    Matrix input;
    std::vector<TransformerLayerParams> layers;
    std::size_t bytes() const noexcept;
};

StackGrads stack_backward(const Matrix& upstream, const StackResult& forward,
                          AttentionPattern pattern,
                          const std::vector<TransformerLayerParams>& layers);

double gelu(double x) noexcept;
double gelu_derivative(double x) noexcept;

void to_json(nlohmann::json& j, const TransformerLayerParams& p);
void from_json(const nlohmann::json& j, TransformerLayerParams& p);

} // namespace anchorgt
