#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace anchorgt {

using node_id = std::uint32_t;

/// Thrown when a graph is built from, or asked about, invalid node ids.
class graph_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown by the edge-list reader; carries the 1-based line number.
class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Immutable undirected, unweighted graph in compressed-row form.
///
/// Neighbor lists are sorted, free of duplicates and self-loops, and the
/// adjacency is symmetric. Safe to share read-only across threads.
class Graph {
public:
    Graph() = default;

    std::size_t num_nodes() const noexcept { return degrees_.size(); }
    std::size_t num_edges() const noexcept { return neighbors_.size() / 2; }

    std::span<const node_id> neighbors(node_id v) const {
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }
    std::uint32_t degree(node_id v) const { return degrees_[v]; }
    std::span<const std::uint32_t> degrees() const noexcept { return degrees_; }
    bool has_edge(node_id u, node_id v) const;

    /// Canonical edge list, each edge once as (lo, hi), sorted.
    std::vector<std::pair<node_id, node_id>> edges() const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    friend Graph from_edge_list(std::span<const std::pair<node_id, node_id>>, std::size_t);

    std::vector<std::size_t> offsets_{0};
    std::vector<node_id> neighbors_;
    std::vector<std::uint32_t> degrees_;
};

/// Canonicalizes an arbitrary pair list: drops self-loops, merges duplicates
/// and both orientations. Throws graph_error naming the first out-of-range pair.
Graph from_edge_list(std::span<const std::pair<node_id, node_id>> pairs, std::size_t n);

inline constexpr std::int32_t unreachable = -1;

/// Hop distances from one source. Entries beyond the cap, or in another
/// component, hold `unreachable`.
struct SpdTable {
    node_id source = 0;
    std::vector<std::int32_t> dist;
    std::optional<std::int32_t> cap;

    bool reachable(node_id v) const { return dist[v] != unreachable; }
};

SpdTable bfs_spd(const Graph& g, node_id source, std::optional<std::int32_t> cap = std::nullopt);

/// Inclusive k-hop neighborhood N_k(v), sorted; always contains v.
std::vector<node_id> k_hop(const Graph& g, node_id v, int k);

/// Connected-component label per node, labels numbered 0.. in order of the
/// smallest member.
std::vector<node_id> component_labels(const Graph& g);

/// Reusable truncated-BFS workspace. Visited marks are epoch-stamped so a
/// search costs only the nodes it touches.
class BoundedBfs {
public:
    struct Hit {
        node_id node;
        std::int32_t dist;
    };

    explicit BoundedBfs(const Graph& g);

    /// Nodes within `depth` hops of `source` in BFS order (source first).
    std::span<const Hit> run(node_id source, int depth);
    /// Multi-source variant; sources are all at distance 0.
    std::span<const Hit> run(std::span<const node_id> sources, int depth);

    /// Whether `v` was reached by the most recent run.
    bool reached(node_id v) const { return mark_[v] == epoch_; }

private:
    const Graph* g_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t epoch_ = 0;
    std::vector<Hit> hits_;
};

/// G(n, p) with every unordered pair included independently with
/// probability p. Each row draws from its own counter-based stream keyed by
/// (seed, row), so the result does not depend on generation order.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);
void write_edge_list_file(const std::filesystem::path& path, const Graph& g);
Graph read_edge_list_file(const std::filesystem::path& path);

} // namespace anchorgt
