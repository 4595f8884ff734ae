#include "anchorgt/anchor.hpp"

#include "anchorgt/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <random>

namespace anchorgt {

AnchorSet::AnchorSet(std::vector<node_id> nodes, int k, std::uint64_t seed, std::size_t num_nodes)
    : nodes_(std::move(nodes)), k_(k), seed_(seed), membership_(num_nodes, 0) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    for (node_id v : nodes_) {
        if (v >= num_nodes) throw graph_error("anchor " + std::to_string(v) + " out of range");
        membership_[v] = 1;
    }
}

AnchorSet select_anchors(const Graph& g, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const std::size_t n = g.num_nodes();
    std::vector<node_id> chosen;
    if (n == 0) return AnchorSet({}, k, seed, 0);

    // bucket queue over static degrees; unlabeled nodes are purged lazily
    std::uint32_t max_deg = 0;
    for (auto d : g.degrees()) max_deg = std::max(max_deg, d);
    std::vector<std::vector<node_id>> buckets(max_deg + 1);
    for (node_id v = 0; v < n; ++v) buckets[g.degree(v)].push_back(v);

    std::vector<std::uint8_t> labeled(n, 1);
    std::size_t left = n;
    std::mt19937_64 rng(seed);
    BoundedBfs bfs(g);
    std::int64_t top = max_deg;

    while (left > 0) {
        while (buckets[top].empty()) --top;
        auto& bucket = buckets[top];
        // rejection over stale entries draws uniformly among labeled members
        const auto i = uniform_index(rng, bucket.size());
        const node_id a = bucket[i];
        bucket[i] = bucket.back();
        bucket.pop_back();
        if (!labeled[a]) continue;

        chosen.push_back(a);
        for (auto hit : bfs.run(a, k)) {
            if (labeled[hit.node]) {
                labeled[hit.node] = 0;
                --left;
            }
        }
    }
    return AnchorSet(std::move(chosen), k, seed, n);
}

DominationCheck verify_dominating(const Graph& g, const AnchorSet& s) {
    if (s.num_nodes() != g.num_nodes()) {
        throw graph_error("anchor set was built for a different node count");
    }
    BoundedBfs bfs(g);
    bfs.run(s.nodes(), s.k());
    for (node_id v = 0; v < g.num_nodes(); ++v) {
        if (!bfs.reached(v)) return {false, v};
    }
    return {true, std::nullopt};
}

std::size_t max_khop_size(const Graph& g, int k) {
    BoundedBfs bfs(g);
    std::size_t best = 0;
    for (node_id v = 0; v < g.num_nodes(); ++v) best = std::max(best, bfs.run(v, k).size());
    return best;
}

std::vector<AnchorSweepRecord> anchor_sweep(const Graph& g, std::span<const int> k_values,
                                            std::uint64_t seed) {
    if (k_values.empty()) throw std::invalid_argument("k_values must not be empty");
    std::vector<AnchorSweepRecord> out;
    for (int k : k_values) {
        const auto t0 = std::chrono::steady_clock::now();
        const AnchorSet s = select_anchors(g, k, seed);
        const auto t1 = std::chrono::steady_clock::now();
        out.push_back({k, s.size(), max_khop_size(g, k),
                       std::chrono::duration<double>(t1 - t0).count()});
    }
    return out;
}

void to_json(nlohmann::json& j, const AnchorSet& s) {
    j = nlohmann::json{{"k", s.k()},
                       {"seed", s.seed()},
                       {"anchors", std::vector<node_id>(s.nodes().begin(), s.nodes().end())}};
}

void to_json(nlohmann::json& j, const AnchorSweepRecord& r) {
    j = nlohmann::json{{"k", r.k},
                       {"anchors", r.anchors},
                       {"max_khop", r.max_khop},
                       {"select_seconds", r.select_seconds}};
}

} // namespace anchorgt
