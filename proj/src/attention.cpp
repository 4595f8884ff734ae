#include "anchorgt/attention.hpp"

#include "anchorgt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace anchorgt {

namespace {

constexpr int max_supported_d_max = 252; // codes must fit in a byte

void check_d_max(int d_max) {
    if (d_max < 0 || d_max > max_supported_d_max) {
        throw std::invalid_argument("d_max must lie in [0, " + std::to_string(max_supported_d_max) +
                                    "]");
    }
}

// Default code for nodes a d_max+1 capped BFS from `source` does not reach.
void fill_beyond_cap(std::uint8_t* row, const std::vector<node_id>& component, node_id source,
                     int d_max) {
    const auto far = static_cast<std::uint8_t>(far_bucket(d_max).value);
    const auto none = static_cast<std::uint8_t>(unreachable_bucket(d_max).value);
    for (std::size_t u = 0; u < component.size(); ++u) {
        row[u] = component[u] == component[source] ? far : none;
    }
}

} // namespace

ReceptiveField build_receptive_field(const Graph& g, const AnchorSet& s, int d_max) {
    const std::size_t n = g.num_nodes();
    const int k = s.k();
    check_d_max(d_max);
    if (d_max < k + 1) throw std::invalid_argument("d_max must be at least k + 1");
    if (s.num_nodes() != n) throw graph_error("anchor set was built for a different node count");

    const auto anchors = s.nodes();
    const std::size_t num_anchors = anchors.size();

    // SPD bucket of every (anchor, node) pair, one capped BFS per anchor;
    // nodes past the cap are far or unreachable depending on the component
    const auto component = component_labels(g);
    std::vector<std::uint8_t> anchor_codes(num_anchors * n);
    BoundedBfs bfs(g);
    for (std::size_t i = 0; i < num_anchors; ++i) {
        std::uint8_t* row = anchor_codes.data() + i * n;
        fill_beyond_cap(row, component, anchors[i], d_max);
        for (auto hit : bfs.run(anchors[i], d_max + 1)) {
            row[hit.node] = static_cast<std::uint8_t>(bucket_of_distance(hit.dist, d_max).value);
        }
    }

    ReceptiveField rf;
    rf.k_ = k;
    rf.d_max_ = d_max;
    rf.offsets_.assign(n + 1, 0);
    std::vector<std::pair<node_id, std::uint8_t>> entries;
    for (node_id v = 0; v < n; ++v) {
        entries.clear();
        for (auto hit : bfs.run(v, k)) {
            entries.emplace_back(hit.node, static_cast<std::uint8_t>(hit.dist));
        }
        for (std::size_t i = 0; i < num_anchors; ++i) {
            if (!bfs.reached(anchors[i])) entries.emplace_back(anchors[i], anchor_codes[i * n + v]);
        }
        std::sort(entries.begin(), entries.end());
        for (auto [u, c] : entries) {
            rf.cols_.push_back(u);
            rf.codes_.push_back(c);
        }
        rf.offsets_[v + 1] = rf.cols_.size();
    }
    return rf;
}

DenseStructure::DenseStructure(const Graph& g, int d_max) : n_(g.num_nodes()), d_max_(d_max) {
    check_d_max(d_max);
    codes_.resize(n_ * n_);
    const auto component = component_labels(g);
    BoundedBfs bfs(g);
    for (node_id v = 0; v < n_; ++v) {
        std::uint8_t* row = codes_.data() + static_cast<std::size_t>(v) * n_;
        fill_beyond_cap(row, component, v, d_max);
        for (auto hit : bfs.run(v, d_max + 1)) {
            row[hit.node] = static_cast<std::uint8_t>(bucket_of_distance(hit.dist, d_max).value);
        }
    }
}

std::size_t AttentionPattern::num_nodes() const {
    return visit([](const auto& p) { return p.num_nodes(); });
}
std::size_t AttentionPattern::total_pairs() const {
    return visit([](const auto& p) { return p.total_pairs(); });
}
int AttentionPattern::d_max() const {
    return visit([](const auto& p) { return p.d_max(); });
}

AttentionLayerParams AttentionLayerParams::zeros(std::size_t d_model, int heads, int d_head,
                                                 int d_max) {
    AttentionLayerParams p;
    p.heads = heads;
    p.d_head = d_head;
    const std::size_t width = static_cast<std::size_t>(heads) * d_head;
    p.query = Matrix(d_model, width);
    p.key = Matrix(d_model, width);
    p.value = Matrix(d_model, width);
    p.bias = BiasTable(heads, d_max);
    return p;
}

AttentionLayerParams AttentionLayerParams::random(std::size_t d_model, int heads, int d_max,
                                                  std::mt19937_64& rng) {
    if (heads < 1 || d_model % heads != 0) {
        throw std::invalid_argument("d_model must be a positive multiple of heads");
    }
    const int d_head = static_cast<int>(d_model) / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_model));
    AttentionLayerParams p = zeros(d_model, heads, d_head, d_max);
    p.query = Matrix::random_normal(d_model, d_model, scale, rng);
    p.key = Matrix::random_normal(d_model, d_model, scale, rng);
    p.value = Matrix::random_normal(d_model, d_model, scale, rng);
    for (double& b : p.bias.values()) b = 0.5 * standard_normal(rng);
    return p;
}

void AttentionLayerParams::validate() const {
    if (heads < 1 || d_head < 1) throw std::invalid_argument("heads and d_head must be positive");
    const std::size_t width = static_cast<std::size_t>(heads) * d_head;
    for (const Matrix* m : {&query, &key, &value}) {
        if (m->rows != d_model() || m->cols != width) {
            throw std::invalid_argument("projection shape must be d_model x (heads * d_head)");
        }
        if (!m->all_finite()) throw std::invalid_argument("non-finite projection weights");
    }
    if (bias.heads() != heads) throw std::invalid_argument("bias table head count mismatch");
    for (double b : bias.values()) {
        if (!std::isfinite(b)) throw std::invalid_argument("non-finite structural bias");
    }
}

namespace {

struct SparseRows {
    const ReceptiveField& rf;
    std::size_t num_nodes() const { return rf.num_nodes(); }
    std::size_t begin(node_id v) const { return rf.row_begin(v); }
    std::size_t size(node_id v) const { return rf.row_size(v); }
    node_id col(std::size_t e, std::size_t) const { return rf.col(e); }
    int code(std::size_t e) const { return rf.code(e).value; }
};

struct DenseRows {
    const DenseStructure& d;
    std::size_t num_nodes() const { return d.num_nodes(); }
    std::size_t begin(node_id v) const { return static_cast<std::size_t>(v) * d.num_nodes(); }
    std::size_t size(node_id) const { return d.num_nodes(); }
    node_id col(std::size_t, std::size_t j) const { return static_cast<node_id>(j); }
    int code(std::size_t e) const { return d.codes()[e]; }
};

auto rows_of(const ReceptiveField& rf) { return SparseRows{rf}; }
auto rows_of(const DenseStructure& d) { return DenseRows{d}; }

void check_pattern(const Matrix& h, AttentionPattern pattern, const AttentionLayerParams& params) {
    params.validate();
    if (h.rows != pattern.num_nodes()) {
        throw std::invalid_argument("feature rows do not match the pattern's node count");
    }
    if (h.cols != params.d_model()) throw std::invalid_argument("feature width != d_model");
    if (params.bias.d_max() != pattern.d_max()) {
        throw std::invalid_argument("bias table d_max does not match the pattern");
    }
}

template <class Rows>
void forward_kernel(const Rows& rows, const AttentionLayerParams& params, AttentionCache& cache,
                    Matrix& out) {
    const std::size_t n = rows.num_nodes();
    const std::size_t heads = static_cast<std::size_t>(params.heads);
    const std::size_t dh = static_cast<std::size_t>(params.d_head);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<double> logits;

    for (node_id v = 0; v < n; ++v) {
        const std::size_t begin = rows.begin(v);
        const std::size_t len = rows.size(v);
        logits.resize(len);
        for (std::size_t h = 0; h < heads; ++h) {
            const auto bias = params.bias.head_row(static_cast<int>(h));
            const double* q = cache.q.values.data() + v * cache.q.cols + h * dh;
            double row_max = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t e = begin + j;
                const double* kr = cache.k.values.data() + rows.col(e, j) * cache.k.cols + h * dh;
                double dot = 0.0;
                for (std::size_t t = 0; t < dh; ++t) dot += q[t] * kr[t];
                logits[j] = dot * scale + bias[rows.code(e)];
                row_max = std::max(row_max, logits[j]);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < len; ++j) {
                logits[j] = std::exp(logits[j] - row_max);
                total += logits[j];
            }
            double* o = out.values.data() + v * out.cols + h * dh;
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t e = begin + j;
                const double a = logits[j] / total;
                cache.alpha[e * heads + h] = a;
                const double* vr = cache.v.values.data() + rows.col(e, j) * cache.v.cols + h * dh;
                for (std::size_t t = 0; t < dh; ++t) o[t] += a * vr[t];
            }
        }
    }
}

template <class Rows>
void backward_kernel(const Rows& rows, const Matrix& upstream, const AttentionCache& cache,
                     const AttentionLayerParams& params, Matrix& dq, Matrix& dk, Matrix& dv,
                     BiasTable& dbias) {
    const std::size_t n = rows.num_nodes();
    const std::size_t heads = static_cast<std::size_t>(params.heads);
    const std::size_t dh = static_cast<std::size_t>(params.d_head);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<double> dalpha;

    for (node_id v = 0; v < n; ++v) {
        const std::size_t begin = rows.begin(v);
        const std::size_t len = rows.size(v);
        dalpha.resize(len);
        for (std::size_t h = 0; h < heads; ++h) {
            const double* go = upstream.values.data() + v * upstream.cols + h * dh;
            double weighted = 0.0;
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t e = begin + j;
                const std::size_t u = rows.col(e, j);
                const double* vr = cache.v.values.data() + u * cache.v.cols + h * dh;
                double* dvr = dv.values.data() + u * dv.cols + h * dh;
                const double a = cache.alpha[e * heads + h];
                double s = 0.0;
                for (std::size_t t = 0; t < dh; ++t) {
                    s += go[t] * vr[t];
                    dvr[t] += a * go[t];
                }
                dalpha[j] = s;
                weighted += a * s;
            }
            const double* q = cache.q.values.data() + v * cache.q.cols + h * dh;
            double* dqr = dq.values.data() + v * dq.cols + h * dh;
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t e = begin + j;
                const std::size_t u = rows.col(e, j);
                // softmax Jacobian applied along the row
                const double dlogit = cache.alpha[e * heads + h] * (dalpha[j] - weighted);
                if (dlogit == 0.0) continue;
                dbias.at(static_cast<int>(h), SpdBucket{rows.code(e)}) += dlogit;
                const double g = dlogit * scale;
                const double* kr = cache.k.values.data() + u * cache.k.cols + h * dh;
                double* dkr = dk.values.data() + u * dk.cols + h * dh;
                for (std::size_t t = 0; t < dh; ++t) {
                    dqr[t] += g * kr[t];
                    dkr[t] += g * q[t];
                }
            }
        }
    }
}

} // namespace

AttentionResult attention_forward(const Matrix& h, AttentionPattern pattern,
                                  const AttentionLayerParams& params) {
    check_pattern(h, pattern, params);
    if (!h.all_finite()) throw std::invalid_argument("non-finite node features");

    AttentionResult r;
    r.cache.input = h;
    r.cache.q = matmul(h, params.query);
    r.cache.k = matmul(h, params.key);
    r.cache.v = matmul(h, params.value);
    r.cache.alpha.assign(pattern.total_pairs() * static_cast<std::size_t>(params.heads), 0.0);
    r.output = Matrix(h.rows, params.query.cols);
    pattern.visit([&](const auto& p) { forward_kernel(rows_of(p), params, r.cache, r.output); });
    return r;
}

AttentionGrads attention_backward(const Matrix& upstream, const AttentionCache& cache,
                                  AttentionPattern pattern, const AttentionLayerParams& params) {
    check_pattern(cache.input, pattern, params);
    if (upstream.rows != cache.q.rows || upstream.cols != cache.q.cols) {
        throw std::invalid_argument("upstream gradient shape does not match attention output");
    }
    if (cache.alpha.size() != pattern.total_pairs() * static_cast<std::size_t>(params.heads)) {
        throw std::invalid_argument("saved activations do not match the pattern");
    }

    Matrix dq(cache.q.rows, cache.q.cols);
    Matrix dk(cache.k.rows, cache.k.cols);
    Matrix dv(cache.v.rows, cache.v.cols);
    AttentionGrads g;
    g.params = AttentionLayerParams::zeros(params.d_model(), params.heads, params.d_head,
                                           params.bias.d_max());
    pattern.visit([&](const auto& p) {
        backward_kernel(rows_of(p), upstream, cache, params, dq, dk, dv, g.params.bias);
    });

    g.params.query = matmul_tn(cache.input, dq);
    g.params.key = matmul_tn(cache.input, dk);
    g.params.value = matmul_tn(cache.input, dv);
    g.input = matmul_nt(dq, params.query);
    add_inplace(g.input, matmul_nt(dk, params.key));
    add_inplace(g.input, matmul_nt(dv, params.value));
    return g;
}

std::vector<double> mean_readout(const Matrix& h) {
    if (h.rows == 0) throw std::invalid_argument("readout of an empty graph");
    std::vector<double> out(h.cols, 0.0);
    for (std::size_t r = 0; r < h.rows; ++r) {
        for (std::size_t c = 0; c < h.cols; ++c) out[c] += h(r, c);
    }
    for (double& x : out) x /= static_cast<double>(h.rows);
    return out;
}

std::size_t attended_pair_count(const ReceptiveField& rf) { return rf.total_pairs(); }

AugmentedBatch augment_subgraph(const Graph& g, const AnchorSet& s,
                                std::span<const node_id> sampled) {
    if (sampled.empty()) throw std::invalid_argument("sampled node set is empty");
    const std::size_t n = g.num_nodes();
    if (s.num_nodes() != n) throw graph_error("anchor set was built for a different node count");

    AugmentedBatch batch;
    batch.global.assign(sampled.begin(), sampled.end());
    batch.global.insert(batch.global.end(), s.nodes().begin(), s.nodes().end());
    for (node_id v : batch.global) {
        if (v >= n) throw graph_error("sampled node " + std::to_string(v) + " out of range");
    }
    std::sort(batch.global.begin(), batch.global.end());
    batch.global.erase(std::unique(batch.global.begin(), batch.global.end()), batch.global.end());

    constexpr auto absent = std::numeric_limits<node_id>::max();
    std::vector<node_id> local(n, absent);
    for (std::size_t i = 0; i < batch.global.size(); ++i) {
        local[batch.global[i]] = static_cast<node_id>(i);
    }
    std::vector<std::pair<node_id, node_id>> edges;
    std::vector<node_id> local_anchors;
    for (std::size_t i = 0; i < batch.global.size(); ++i) {
        const node_id gv = batch.global[i];
        for (node_id gu : g.neighbors(gv)) {
            if (gv < gu && local[gu] != absent) edges.emplace_back(static_cast<node_id>(i), local[gu]);
        }
        if (s.contains(gv)) local_anchors.push_back(static_cast<node_id>(i));
    }
    batch.graph = from_edge_list(edges, batch.global.size());
    batch.anchors = AnchorSet(std::move(local_anchors), s.k(), s.seed(), batch.global.size());
    return batch;
}

void to_json(nlohmann::json& j, const Matrix& m) {
    j = nlohmann::json{{"shape", {m.rows, m.cols}}, {"data", m.values}};
}

void from_json(const nlohmann::json& j, Matrix& m) {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw std::invalid_argument("matrix shape must have two entries");
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != shape[0] * shape[1]) {
        throw std::invalid_argument("matrix data length does not match its shape");
    }
    m.rows = shape[0];
    m.cols = shape[1];
    m.values = std::move(data);
}

void to_json(nlohmann::json& j, const AttentionLayerParams& p) {
    j = nlohmann::json{{"heads", p.heads},  {"d_head", p.d_head}, {"query", p.query},
                       {"key", p.key},      {"value", p.value},   {"encoding", p.bias}};
}

void from_json(const nlohmann::json& j, AttentionLayerParams& p) {
    p.heads = j.at("heads").get<int>();
    p.d_head = j.at("d_head").get<int>();
    p.query = j.at("query").get<Matrix>();
    p.key = j.at("key").get<Matrix>();
    p.value = j.at("value").get<Matrix>();
    p.bias = j.at("encoding").get<BiasTable>();
    p.validate();
}

nlohmann::json dump_node_features(const Matrix& h) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t r = 0; r < h.rows; ++r) {
        auto row = h.row(r);
        j[std::to_string(r)] = std::vector<double>(row.begin(), row.end());
    }
    return j;
}

} // namespace anchorgt
