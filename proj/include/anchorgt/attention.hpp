#pragma once

#include "anchorgt/anchor.hpp"
#include "anchorgt/encoding.hpp"
#include "anchorgt/graph.hpp"
#include "anchorgt/matrix.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

namespace anchorgt {

/// Finite stand-in for -inf in additive attention masks. exp(-1e9) is an
/// exact 0 in double, and unlike -inf it never yields NaN on a fully
/// masked row.
inline constexpr double mask_logit = -1e9;

/// Per-node attended keys R(v) = N_k(v) ∪ S in compressed rows, each entry
/// tagged with its SPD bucket. Columns within a row are sorted and unique.
class ReceptiveField {
public:
    std::size_t num_nodes() const noexcept { return offsets_.size() - 1; }
    int k() const noexcept { return k_; }
    int d_max() const noexcept { return d_max_; }
    std::size_t total_pairs() const noexcept { return cols_.size(); }

    std::size_t row_begin(node_id v) const { return offsets_[v]; }
    std::size_t row_size(node_id v) const { return offsets_[v + 1] - offsets_[v]; }
    std::span<const node_id> row(node_id v) const {
        return std::span<const node_id>(cols_).subspan(offsets_[v], row_size(v));
    }
    std::span<const std::uint8_t> row_codes(node_id v) const {
        return std::span<const std::uint8_t>(codes_).subspan(offsets_[v], row_size(v));
    }
    node_id col(std::size_t entry) const { return cols_[entry]; }
    SpdBucket code(std::size_t entry) const { return {codes_[entry]}; }

    std::size_t bytes() const noexcept {
        return offsets_.size() * sizeof(std::size_t) + cols_.size() * sizeof(node_id) +
               codes_.size();
    }

private:
    friend ReceptiveField build_receptive_field(const Graph&, const AnchorSet&, int);

    int k_ = 1;
    int d_max_ = default_d_max;
    std::vector<std::size_t> offsets_{0};
    std::vector<node_id> cols_;
    std::vector<std::uint8_t> codes_;
};

/// Requires d_max >= k + 1 so that exact in-ball distances keep their own
/// buckets. Anchor ids must belong to `g`.
ReceptiveField build_receptive_field(const Graph& g, const AnchorSet& s, int d_max = default_d_max);

/// Full n x n attention with an SPD bucket for every pair; the quadratic
/// comparator for the sparse path.
class DenseStructure {
public:
    DenseStructure(const Graph& g, int d_max = default_d_max);

    std::size_t num_nodes() const noexcept { return n_; }
    int d_max() const noexcept { return d_max_; }
    std::size_t total_pairs() const noexcept { return codes_.size(); }
    SpdBucket code(node_id v, node_id u) const { return {codes_[v * n_ + u]}; }
    std::span<const std::uint8_t> row_codes(node_id v) const {
        return std::span<const std::uint8_t>(codes_).subspan(v * n_, n_);
    }
    std::span<const std::uint8_t> codes() const noexcept { return codes_; }
    std::size_t bytes() const noexcept { return codes_.size(); }

private:
    std::size_t n_ = 0;
    int d_max_ = default_d_max;
    std::vector<std::uint8_t> codes_;
};

/// Either attention pattern, by reference.
class AttentionPattern {
public:
    AttentionPattern(const ReceptiveField& rf) : ptr_(&rf) {}
    AttentionPattern(const DenseStructure& dense) : ptr_(&dense) {}

    std::size_t num_nodes() const;
    std::size_t total_pairs() const;
    int d_max() const;

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit([&](auto* p) -> decltype(auto) { return f(*p); }, ptr_);
    }

private:
    std::variant<const ReceptiveField*, const DenseStructure*> ptr_;
};

/// Projections for every head plus the structural bias table. The query,
/// key and value matrices are d_model x (heads * d_head); head h owns the
/// column block [h * d_head, (h + 1) * d_head).
struct AttentionLayerParams {
    int heads = 1;
    int d_head = 1;
    Matrix query;
    Matrix key;
    Matrix value;
    BiasTable bias;

    std::size_t d_model() const noexcept { return query.rows; }

    /// Zero-valued parameters of the given shape (also the gradient shape).
    static AttentionLayerParams zeros(std::size_t d_model, int heads, int d_head, int d_max);
    /// Gaussian projections with std 1/sqrt(d_model), small random biases.
    static AttentionLayerParams random(std::size_t d_model, int heads, int d_max,
                                       std::mt19937_64& rng);

    void validate() const;
};

/// Visits every trainable tensor as (name, flat values).
template <class Params, class F>
void for_each_tensor(Params& p, F&& f)
    requires std::is_same_v<std::remove_const_t<Params>, AttentionLayerParams>
{
    f("query", std::span(p.query.values));
    f("key", std::span(p.key.values));
    f("value", std::span(p.value.values));
    f("bias", p.bias.values());
}

/// Saved activations of one forward pass, consumed by the backward pass.
struct AttentionCache {
    Matrix input;
    Matrix q;
    Matrix k;
    Matrix v;
    std::vector<double> alpha; ///< entry-major: alpha[entry * heads + head]

    std::size_t bytes() const noexcept {
        return input.bytes() + q.bytes() + k.bytes() + v.bytes() + alpha.size() * sizeof(double);
    }
};

struct AttentionResult {
    Matrix output; ///< n x (heads * d_head), heads concatenated
    AttentionCache cache;
};

/// Multi-head attention restricted to the pattern:
/// logit(v,u) = q_v·k_u / sqrt(d_head) + bias[head][SE(v,u)], softmax over
/// the row with max subtraction, output sum of alpha * value.
/// Throws on non-finite input or shape mismatch.
AttentionResult attention_forward(const Matrix& h, AttentionPattern pattern,
                                  const AttentionLayerParams& params);

struct AttentionGrads {
    Matrix input;
    AttentionLayerParams params;
};

/// Exact gradient of attention_forward for the given upstream gradient.
/// Accumulation runs in a fixed order, so results are bit-reproducible.
AttentionGrads attention_backward(const Matrix& upstream, const AttentionCache& cache,
                                  AttentionPattern pattern, const AttentionLayerParams& params);

/// Column mean over nodes. Throws on an empty matrix.
std::vector<double> mean_readout(const Matrix& h);

std::size_t attended_pair_count(const ReceptiveField& rf);
constexpr std::size_t dense_pair_count(std::size_t n) noexcept { return n * n; }

/// Batch built from a sampled node set with the full graph's anchors injected.
struct AugmentedBatch {
    Graph graph;                   ///< induced on sampled ∪ S, local ids
    std::vector<node_id> global;   ///< local id -> global id, ascending
    AnchorSet anchors;             ///< S in local ids, same k as the source set
};

AugmentedBatch augment_subgraph(const Graph& g, const AnchorSet& s,
                                std::span<const node_id> sampled);

void to_json(nlohmann::json& j, const Matrix& m);
void from_json(const nlohmann::json& j, Matrix& m);
void to_json(nlohmann::json& j, const AttentionLayerParams& p);
void from_json(const nlohmann::json& j, AttentionLayerParams& p);

/// {"<node id>": [values...], ...}
nlohmann::json dump_node_features(const Matrix& h);

} // namespace anchorgt
