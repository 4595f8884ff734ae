#pragma once

// Slow, independent reference computations used by the tests. Nothing here
// calls into the BFS, receptive-field or attention code under test.

#include "anchorgt/attention.hpp"
#include "anchorgt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using anchorgt::Graph;
using anchorgt::Matrix;
using anchorgt::node_id;

inline constexpr int infinite = -1;

/// All-pairs hop distances by repeated boolean products with (A + I).
inline std::vector<std::vector<int>> all_pairs_distances(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (auto [u, v] : g.edges()) adj[u][v] = adj[v][u] = 1;
    for (std::size_t i = 0; i < n; ++i) adj[i][i] = 1;

    std::vector<std::vector<int>> dist(n, std::vector<int>(n, infinite));
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        reach[i][i] = 1;
        dist[i][i] = 0;
    }
    for (std::size_t step = 1; step < n; ++step) {
        std::vector<std::vector<char>> next(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 0; m < n; ++m)
                if (reach[i][m])
                    for (std::size_t j = 0; j < n; ++j)
                        if (adj[m][j]) next[i][j] = 1;
        bool grew = false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (next[i][j] && dist[i][j] == infinite) {
                    dist[i][j] = static_cast<int>(step);
                    grew = true;
                }
        reach = std::move(next);
        if (!grew) break;
    }
    return dist;
}

inline int bucket(int dist, int d_max) {
    if (dist == infinite) return d_max + 2;
    return dist <= d_max ? dist : d_max + 1;
}

/// u is attended by v iff SPD(v,u) <= k or u is an anchor.
inline std::vector<std::vector<char>> attention_mask(const std::vector<std::vector<int>>& dist,
                                                     const std::vector<node_id>& anchors, int k) {
    const std::size_t n = dist.size();
    std::vector<std::vector<char>> mask(n, std::vector<char>(n, 0));
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t u = 0; u < n; ++u) mask[v][u] = dist[v][u] != infinite && dist[v][u] <= k;
        for (node_id a : anchors) mask[v][a] = 1;
    }
    return mask;
}

/// Dense attention over all n^2 pairs with -1e9 logits outside the mask.
inline Matrix dense_masked_attention(const Matrix& h, const std::vector<std::vector<int>>& dist,
                                     const std::vector<std::vector<char>>& mask,
                                     const anchorgt::AttentionLayerParams& p) {
    const std::size_t n = h.rows;
    const std::size_t dm = h.cols;
    const int heads = p.heads, dh = p.d_head;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Matrix out(n, static_cast<std::size_t>(heads * dh));
    for (int hd = 0; hd < heads; ++hd) {
        auto project = [&](const Matrix& w, std::size_t v, int j) {
            double s = 0.0;
            for (std::size_t c = 0; c < dm; ++c) s += h(v, c) * w(c, hd * dh + j);
            return s;
        };
        for (std::size_t v = 0; v < n; ++v) {
            std::vector<double> logits(n);
            for (std::size_t u = 0; u < n; ++u) {
                double dot = 0.0;
                for (int j = 0; j < dh; ++j) dot += project(p.query, v, j) * project(p.key, u, j);
                const int code = bucket(dist[v][u], p.bias.d_max());
                logits[u] = mask[v][u] ? dot * scale + p.bias.at(hd, {code}) : -1e9;
            }
            const double mx = *std::max_element(logits.begin(), logits.end());
            double z = 0.0;
            for (double& l : logits) z += (l = std::exp(l - mx));
            for (std::size_t u = 0; u < n; ++u) {
                for (int j = 0; j < dh; ++j) {
                    out(v, hd * dh + j) += logits[u] / z * project(p.value, u, j);
                }
            }
        }
    }
    return out;
}

/// Mean of exact neighbors' features; isolated nodes keep their own row.
inline Matrix neighborhood_mean(const Graph& g, const Matrix& h) {
    Matrix out(h.rows, h.cols);
    const auto edges = g.edges();
    std::vector<std::vector<node_id>> nb(h.rows);
    for (auto [u, v] : edges) {
        nb[u].push_back(v);
        nb[v].push_back(u);
    }
    for (std::size_t v = 0; v < h.rows; ++v) {
        for (std::size_t c = 0; c < h.cols; ++c) {
            if (nb[v].empty()) {
                out(v, c) = h(v, c);
                continue;
            }
            double s = 0.0;
            for (node_id u : nb[v]) s += h(u, c);
            out(v, c) = s / static_cast<double>(nb[v].size());
        }
    }
    return out;
}

/// Independent random graph: each pair kept with probability p (std::bernoulli).
inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<std::pair<node_id, node_id>> edges;
    for (node_id u = 0; u < n; ++u)
        for (node_id v = u + 1; v < n; ++v)
            if (coin(rng)) edges.emplace_back(u, v);
    return anchorgt::from_edge_list(edges, n);
}

inline Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, scale);
    Matrix m(r, c);
    for (double& x : m.values) x = nd(rng);
    return m;
}

/// Relabels g so that node v becomes perm[v].
inline Graph relabel(const Graph& g, const std::vector<node_id>& perm) {
    std::vector<std::pair<node_id, node_id>> edges;
    for (auto [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
    return anchorgt::from_edge_list(edges, g.num_nodes());
}

} // namespace oracle
