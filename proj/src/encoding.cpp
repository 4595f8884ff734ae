#include "anchorgt/encoding.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace anchorgt {

SpdBucket bucket_of_distance(std::int32_t dist, int d_max) {
    if (d_max < 0) throw std::invalid_argument("d_max must be non-negative");
    if (dist == unreachable) return unreachable_bucket(d_max);
    if (dist < 0) throw std::invalid_argument("negative distance");
    return dist > d_max ? far_bucket(d_max) : SpdBucket{dist};
}

SpdBucket encode_pair(const SpdTable& from_v, node_id u, int d_max) {
    if (u >= from_v.dist.size()) throw graph_error("node " + std::to_string(u) + " out of range");
    if (from_v.cap) {
        // past the cap, far and disconnected nodes look the same
        throw std::invalid_argument("encode_pair needs an uncapped distance table");
    }
    return bucket_of_distance(from_v.dist[u], d_max);
}

SpdBucket encode_pair(const Graph& g, node_id v, node_id u, int d_max) {
    return encode_pair(bfs_spd(g, v), u, d_max);
}

std::int32_t EncodingScheme::code(std::int32_t dist) const {
    if (kind == Kind::constant) return 0;
    return bucket_of_distance(dist, d_max).value;
}

namespace {

// Every distance that can show up in a receptive field, up to the point
// where further distances all share the far bucket.
std::vector<std::int32_t> probe_distances(const EncodingScheme& scheme, int k) {
    std::vector<std::int32_t> out;
    const int top = std::max(scheme.d_max, k) + 2;
    for (int d = 0; d <= top; ++d) out.push_back(d);
    out.push_back(unreachable);
    return out;
}

// True when no code is shared by a positive and a negative distance.
template <class IsPositive>
bool separable(const EncodingScheme& scheme, int k, IsPositive is_positive) {
    std::map<std::int32_t, bool> label_of_code;
    for (std::int32_t d : probe_distances(scheme, k)) {
        const bool label = is_positive(d);
        auto [it, fresh] = label_of_code.emplace(scheme.code(d), label);
        if (!fresh && it->second != label) return false;
    }
    return true;
}

} // namespace

bool is_neighbor_distinguishable(const EncodingScheme& scheme) {
    // any distance other than 1 can occur among non-adjacent members of R(v)
    return separable(scheme, 1, [](std::int32_t d) { return d == 1; });
}

bool is_anchor_distinguishable(const EncodingScheme& scheme, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    return separable(scheme, k, [k](std::int32_t d) { return d == unreachable || d > k; });
}

std::optional<CodeConflict> find_anchor_conflict(const Graph& g, std::span<const node_id> anchors,
                                                 int k, const EncodingScheme& scheme) {
    std::vector<std::uint8_t> is_anchor(g.num_nodes(), 0);
    for (node_id a : anchors) is_anchor[a] = 1;
    // code -> first (pair, label) seen with it
    std::map<std::int32_t, std::pair<std::pair<node_id, node_id>, bool>> seen;
    for (node_id v = 0; v < g.num_nodes(); ++v) {
        const SpdTable t = bfs_spd(g, v);
        for (node_id u = 0; u < g.num_nodes(); ++u) {
            const bool in_ball = t.reachable(u) && t.dist[u] <= k;
            if (!in_ball && !is_anchor[u]) continue; // not in R(v)
            const bool positive = !in_ball;
            const std::int32_t code = scheme.code(t.dist[u]);
            auto [it, fresh] = seen.emplace(code, std::pair{std::pair{v, u}, positive});
            if (!fresh && it->second.second != positive) {
                const auto here = std::pair{v, u};
                return positive ? CodeConflict{here, it->second.first}
                                : CodeConflict{it->second.first, here};
            }
        }
    }
    return std::nullopt;
}

BiasTable::BiasTable(int heads, int d_max, double init) : heads_(heads), d_max_(d_max) {
    if (heads < 1) throw std::invalid_argument("heads must be >= 1");
    if (d_max < 0) throw std::invalid_argument("d_max must be non-negative");
    values_.assign(static_cast<std::size_t>(heads) * bucket_count(d_max), init);
}

void to_json(nlohmann::json& j, const BiasTable& t) {
    auto biases = nlohmann::json::array();
    for (int h = 0; h < t.heads(); ++h) {
        auto row = t.head_row(h);
        biases.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j = nlohmann::json{{"heads", t.heads()}, {"d_max", t.d_max()}, {"biases", biases}};
}

void from_json(const nlohmann::json& j, BiasTable& t) {
    const int heads = j.at("heads").get<int>();
    const int d_max = j.at("d_max").get<int>();
    const auto& biases = j.at("biases");
    BiasTable out(heads, d_max);
    if (biases.size() != static_cast<std::size_t>(heads)) {
        throw std::invalid_argument("bias table: expected one row per head");
    }
    for (int h = 0; h < heads; ++h) {
        const auto row = biases[h].get<std::vector<double>>();
        if (row.size() != static_cast<std::size_t>(out.codes())) {
            throw std::invalid_argument("bias table: row length must be d_max + 3");
        }
        for (int c = 0; c < out.codes(); ++c) out.at(h, SpdBucket{c}) = row[c];
    }
    t = std::move(out);
}

} // namespace anchorgt
