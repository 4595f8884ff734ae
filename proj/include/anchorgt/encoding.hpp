#pragma once

#include "anchorgt/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace anchorgt {

inline constexpr int default_d_max = 8;

/// Bucketed shortest-path distance.
///
/// Codes 0..d_max are exact distances, d_max+1 means "finite but farther
/// than d_max" and d_max+2 is reserved for unreachable pairs, so a
/// disconnected pair never shares a bucket with a long path.
struct SpdBucket {
    std::int32_t value = 0;
    friend bool operator==(SpdBucket, SpdBucket) = default;
};

constexpr int bucket_count(int d_max) noexcept { return d_max + 3; }
constexpr SpdBucket far_bucket(int d_max) noexcept { return {d_max + 1}; }
constexpr SpdBucket unreachable_bucket(int d_max) noexcept { return {d_max + 2}; }

SpdBucket bucket_of_distance(std::int32_t dist, int d_max);

/// SE(v, u) from an uncapped BFS table rooted at v. Capped tables are
/// rejected: beyond the cap they cannot tell "far" from "disconnected".
SpdBucket encode_pair(const SpdTable& from_v, node_id u, int d_max);
/// Convenience overload that runs the BFS itself.
SpdBucket encode_pair(const Graph& g, node_id v, node_id u, int d_max);

/// A relative structural encoding as seen by the distinguishability checks:
/// either SPD bucketing or a degenerate constant code for every pair.
struct EncodingScheme {
    enum class Kind { spd, constant };
    Kind kind = Kind::spd;
    int d_max = default_d_max;

    static EncodingScheme spd(int d_max) { return {Kind::spd, d_max}; }
    static EncodingScheme constant() { return {Kind::constant, 0}; }

    /// Code this scheme assigns to a pair at the given hop distance
    /// (`unreachable` allowed).
    std::int32_t code(std::int32_t dist) const;
};

/// Whether some decision function over codes recovers adjacency for every
/// pair in any receptive field.
bool is_neighbor_distinguishable(const EncodingScheme& scheme);

/// Whether some decision function over codes separates anchors outside
/// N_k(v) from every other receptive-field member.
bool is_anchor_distinguishable(const EncodingScheme& scheme, int k);

/// Graph-level witness search: a pair of receptive-field entries (v, u) and
/// (v', u') that share a code but must be told apart. Empty when the scheme
/// separates them on this graph.
struct CodeConflict {
    std::pair<node_id, node_id> positive;
    std::pair<node_id, node_id> negative;
};
std::optional<CodeConflict> find_anchor_conflict(const Graph& g, std::span<const node_id> anchors,
                                                 int k, const EncodingScheme& scheme);

/// One learnable scalar bias per head per bucket code.
class BiasTable {
public:
    BiasTable() = default;
    BiasTable(int heads, int d_max, double init = 0.0);

    int heads() const noexcept { return heads_; }
    int d_max() const noexcept { return d_max_; }
    int codes() const noexcept { return bucket_count(d_max_); }

    double& at(int head, SpdBucket code) { return values_[index(head, code.value)]; }
    double at(int head, SpdBucket code) const { return values_[index(head, code.value)]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> head_row(int head) const {
        return std::span<const double>(values_).subspan(static_cast<std::size_t>(head) * codes(),
                                                        codes());
    }

    friend bool operator==(const BiasTable&, const BiasTable&) = default;

private:
    std::size_t index(int head, int code) const {
        return static_cast<std::size_t>(head) * codes() + static_cast<std::size_t>(code);
    }

    int heads_ = 0;
    int d_max_ = 0;
    std::vector<double> values_;
};

void to_json(nlohmann::json& j, const BiasTable& t);
void from_json(const nlohmann::json& j, BiasTable& t);

} // namespace anchorgt
