#pragma once

#include "anchorgt/attention.hpp"
#include "anchorgt/layer.hpp"

#include <string>
#include <vector>

namespace anchorgt {

struct TensorCheck {
    std::string name;
    double max_abs_error = 0.0;
    /// ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2)
    double rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<TensorCheck> tensors; ///< "input" first, then every parameter tensor
    double max_rel_error = 0.0;
};

/// Compares the analytic backward pass against central differences of the
/// scalar loss sum(output * weights).
GradCheckReport gradcheck_attention(const Matrix& h, AttentionPattern pattern,
                                    const AttentionLayerParams& params, const Matrix& weights,
                                    double step = 1e-5);

GradCheckReport gradcheck_layer(const Matrix& h, AttentionPattern pattern,
                                const TransformerLayerParams& params, const Matrix& weights,
                                double step = 1e-5);

} // namespace anchorgt
