#pragma once

#include "anchorgt/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace anchorgt {

/// A set of anchor nodes selected for hop parameter k.
class AnchorSet {
public:
    AnchorSet() = default;
    /// Takes any id list (sorted and deduplicated here). Does not verify
    /// domination; use verify_dominating for that.
    AnchorSet(std::vector<node_id> nodes, int k, std::uint64_t seed, std::size_t num_nodes);

    std::span<const node_id> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    int k() const noexcept { return k_; }
    std::uint64_t seed() const noexcept { return seed_; }
    bool contains(node_id v) const { return membership_[v] != 0; }
    std::size_t num_nodes() const noexcept { return membership_.size(); }

    friend bool operator==(const AnchorSet&, const AnchorSet&) = default;

private:
    std::vector<node_id> nodes_;
    int k_ = 1;
    std::uint64_t seed_ = 0;
    std::vector<std::uint8_t> membership_;
};

/// Greedy k-dominating set: repeatedly take a maximum-degree node that is
/// still labeled (uniform random among ties), then unlabel its k-hop ball
/// in the full graph. Degrees are the static degrees of `g`.
AnchorSet select_anchors(const Graph& g, int k, std::uint64_t seed);

struct DominationCheck {
    bool ok = false;
    std::optional<node_id> uncovered; ///< some node farther than k from every anchor
};

/// Multi-source BFS from all anchors, truncated at depth k.
DominationCheck verify_dominating(const Graph& g, const AnchorSet& s);

struct AnchorSweepRecord {
    int k = 0;
    std::size_t anchors = 0;
    std::size_t max_khop = 0; ///< max over v of |N_k(v)|
    double select_seconds = 0.0;
};

std::vector<AnchorSweepRecord> anchor_sweep(const Graph& g, std::span<const int> k_values,
                                            std::uint64_t seed);

/// Largest |N_k(v)| over all nodes.
std::size_t max_khop_size(const Graph& g, int k);

void to_json(nlohmann::json& j, const AnchorSet& s);
void to_json(nlohmann::json& j, const AnchorSweepRecord& r);

} // namespace anchorgt
