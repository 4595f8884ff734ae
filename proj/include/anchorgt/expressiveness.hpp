#pragma once

#include "anchorgt/anchor.hpp"
#include "anchorgt/attention.hpp"
#include "anchorgt/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

namespace anchorgt {

// ---------------------------------------------------------------------------
// 1-WL color refinement
// ---------------------------------------------------------------------------

struct WlResult {
    int rounds = 0;
    /// Stable color histogram of each graph (color id -> node count).
    std::vector<std::map<std::uint32_t, std::size_t>> histograms;
    bool distinguishable = false;
};

/// Joint 1-WL on two graphs with a shared color dictionary. Colors start as
/// degrees; each round relabels (own color, sorted neighbor colors). Stops
/// once the joint partition no longer splits or after `max_rounds`.
WlResult wl_refine(const Graph& g1, const Graph& g2, int max_rounds = 64);

// ---------------------------------------------------------------------------
// GNN emulation
// ---------------------------------------------------------------------------

/// Single-head attention parameters that turn a layer into mean aggregation
/// over exact neighbors: zero query/key maps, identity values, bias 0 on the
/// distance-1 bucket and mask_logit on the rest. The self bucket gets
/// mask_logit / 2 instead, so it only wins on rows with no neighbor
/// (isolated nodes keep their own value). Throws if the receptive field's
/// bucketing is not neighbor-distinguishable.
AttentionLayerParams fact1_construct(const ReceptiveField& rf, std::size_t d_model);

// ---------------------------------------------------------------------------
// Anchor mixture construction
// ---------------------------------------------------------------------------

struct Fact2Config {
    double a = 0.0;              ///< bias on in-ball buckets (distance <= k)
    double b = std::numbers::ln2; ///< bias on out-of-ball buckets; e^a / e^b = 1/2

    /// Throws unless both are finite and e^(a-b) = 1/2.
    void validate() const;
};

struct Fact2Result {
    std::vector<double> layer1;      ///< degree features
    std::vector<double> values;      ///< second layer, computed by attention_forward
    std::vector<double> closed_form; ///< p * MEAN(N_k(v)) + (1 - p) * MEAN(S \ N_k(v))
    std::vector<double> mixing;      ///< p per node
    double mean_readout = 0.0;
    double sum_readout = 0.0;
};

/// Two-layer construction: degrees, then one attention layer with zero
/// query/key, identity value and biases a (distance <= k) / b (farther).
/// Throws if `s` does not dominate `g`.
Fact2Result fact2_run(const Graph& g, const AnchorSet& s, const Fact2Config& cfg = {});

/// Variant for an encoding that also flags anchor membership: non-anchor
/// neighbors weigh e^a, every anchor weighs e^b, self and all other pairs
/// are masked. Returns the per-node outputs, which equal
/// p * MEAN(N(v) \ S) + (1 - p) * MEAN(S).
std::vector<double> anchor_flag_mixture(const Graph& g, const AnchorSet& s,
                                        const Fact2Config& cfg = {});

/// Empirical readout distribution of each graph and whether they differ.
struct Fact2Distribution {
    std::vector<double> readouts1; ///< sorted MEAN readouts
    std::vector<double> readouts2;
    bool distinguished = false;
};

/// Compares two readout samples as distributions: values closer than `tol`
/// are the same outcome; frequencies are compared after normalizing.
bool distributions_differ(std::vector<double> a, std::vector<double> b, double tol = 1e-9);

/// `trials` greedy 1-DS selections per graph, trial t using the same derived
/// seed on both graphs.
Fact2Distribution fact2_distribution(const Graph& g1, const Graph& g2, const Fact2Config& cfg,
                                     int trials, std::uint64_t seed);

/// Every inclusion-minimal k-dominating set, by brute force (n <= 20).
std::vector<AnchorSet> enumerate_minimal_dominating_sets(const Graph& g, int k);

/// Same comparison with every inclusion-minimal 1-DS as an equally likely
/// anchor choice.
Fact2Distribution fact2_enumerated(const Graph& g1, const Graph& g2, const Fact2Config& cfg = {});

nlohmann::json wl_report(const WlResult& wl);
nlohmann::json fact2_report(const WlResult& wl, const Fact2Distribution& dist);

} // namespace anchorgt
