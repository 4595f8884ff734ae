#include "anchorgt/graph.hpp"

#include "anchorgt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace anchorgt {

parse_error::parse_error(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

bool Graph::has_edge(node_id u, node_id v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<node_id, node_id>> Graph::edges() const {
    std::vector<std::pair<node_id, node_id>> out;
    out.reserve(num_edges());
    for (node_id u = 0; u < num_nodes(); ++u) {
        for (node_id v : neighbors(u)) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

Graph from_edge_list(std::span<const std::pair<node_id, node_id>> pairs, std::size_t n) {
    std::vector<std::pair<node_id, node_id>> arcs;
    arcs.reserve(pairs.size() * 2);
    for (auto [u, v] : pairs) {
        if (u >= n || v >= n) {
            throw graph_error("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                              ") out of range for " + std::to_string(n) + " nodes");
        }
        if (u == v) continue;
        arcs.emplace_back(u, v);
        arcs.emplace_back(v, u);
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

    Graph g;
    g.degrees_.assign(n, 0);
    for (auto [u, v] : arcs) ++g.degrees_[u];
    g.offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + g.degrees_[v];
    g.neighbors_.reserve(arcs.size());
    for (auto [u, v] : arcs) g.neighbors_.push_back(v);
    return g;
}

SpdTable bfs_spd(const Graph& g, node_id source, std::optional<std::int32_t> cap) {
    if (source >= g.num_nodes()) {
        throw graph_error("source " + std::to_string(source) + " out of range");
    }
    SpdTable t{source, std::vector<std::int32_t>(g.num_nodes(), unreachable), cap};
    std::vector<node_id> frontier{source};
    std::vector<node_id> next;
    t.dist[source] = 0;
    for (std::int32_t d = 1; !frontier.empty() && (!cap || d <= *cap); ++d) {
        next.clear();
        for (node_id u : frontier) {
            for (node_id w : g.neighbors(u)) {
                if (t.dist[w] == unreachable) {
                    t.dist[w] = d;
                    next.push_back(w);
                }
            }
        }
        frontier.swap(next);
    }
    return t;
}

std::vector<node_id> k_hop(const Graph& g, node_id v, int k) {
    if (v >= g.num_nodes()) throw graph_error("node " + std::to_string(v) + " out of range");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    BoundedBfs bfs(g);
    std::vector<node_id> out;
    for (auto hit : bfs.run(v, k)) out.push_back(hit.node);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<node_id> component_labels(const Graph& g) {
    constexpr node_id unset = std::numeric_limits<node_id>::max();
    std::vector<node_id> label(g.num_nodes(), unset);
    std::vector<node_id> stack;
    node_id next = 0;
    for (node_id root = 0; root < g.num_nodes(); ++root) {
        if (label[root] != unset) continue;
        label[root] = next;
        stack.push_back(root);
        while (!stack.empty()) {
            const node_id v = stack.back();
            stack.pop_back();
            for (node_id u : g.neighbors(v)) {
                if (label[u] == unset) {
                    label[u] = next;
                    stack.push_back(u);
                }
            }
        }
        ++next;
    }
    return label;
}

BoundedBfs::BoundedBfs(const Graph& g) : g_(&g), mark_(g.num_nodes(), 0) {}

std::span<const BoundedBfs::Hit> BoundedBfs::run(node_id source, int depth) {
    return run(std::span<const node_id>(&source, 1), depth);
}

std::span<const BoundedBfs::Hit> BoundedBfs::run(std::span<const node_id> sources, int depth) {
    if (++epoch_ == 0) {
        std::fill(mark_.begin(), mark_.end(), 0);
        epoch_ = 1;
    }
    hits_.clear();
    for (node_id s : sources) {
        if (mark_[s] != epoch_) {
            mark_[s] = epoch_;
            hits_.push_back({s, 0});
        }
    }
    // hits_ doubles as the BFS queue
    for (std::size_t head = 0; head < hits_.size(); ++head) {
        const Hit h = hits_[head];
        if (h.dist >= depth) continue;
        for (node_id w : g_->neighbors(h.node)) {
            if (mark_[w] != epoch_) {
                mark_[w] = epoch_;
                hits_.push_back({w, h.dist + 1});
            }
        }
    }
    return hits_;
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("edge probability must lie in [0, 1]");
    }
    std::vector<std::pair<node_id, node_id>> pairs;
    if (p > 0.0 && n > 1) {
        pairs.reserve(static_cast<std::size_t>(p * static_cast<double>(n) * (n - 1) / 2 * 1.1) + 16);
        const double log_q = std::log1p(-p);
        for (std::size_t u = 0; u + 1 < n; ++u) {
            // geometric gaps between successes of the per-pair Bernoulli
            // trials along row u; p == 1 means every gap is zero
            std::uint64_t counter = 0;
            std::size_t v = u;
            while (true) {
                std::size_t gap = 0;
                if (p < 1.0) {
                    const double r = to_unit_open(counter_hash(seed, u, counter++));
                    const double skip = std::floor(std::log(r) / log_q);
                    if (skip >= static_cast<double>(n)) break;
                    gap = static_cast<std::size_t>(skip);
                }
                v += gap + 1;
                if (v >= n) break;
                pairs.emplace_back(static_cast<node_id>(u), static_cast<node_id>(v));
            }
        }
    }
    return from_edge_list(pairs, n);
}

void write_edge_list(std::ostream& out, const Graph& g) {
    out << g.num_nodes() << '\n';
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

namespace {

bool parse_id(const std::string& tok, std::uint64_t& out) {
    if (tok.empty() || tok.size() > 19) return false;
    out = 0;
    for (char c : tok) {
        if (c < '0' || c > '9') return false;
        out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return true;
}

} // namespace

Graph read_edge_list(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::uint64_t> n;
    std::vector<std::pair<node_id, node_id>> pairs;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::vector<std::string> toks;
        for (std::string t; ss >> t;) toks.push_back(t);
        if (toks.empty()) continue;

        if (!n) {
            std::uint64_t value;
            if (toks.size() != 1 || !parse_id(toks[0], value)) {
                throw parse_error(lineno, "expected node count, got '" + line + "'");
            }
            if (value > std::numeric_limits<node_id>::max()) {
                throw parse_error(lineno, "node count too large");
            }
            n = value;
            continue;
        }
        std::uint64_t u, v;
        if (toks.size() != 2 || !parse_id(toks[0], u) || !parse_id(toks[1], v)) {
            throw parse_error(lineno, "expected 'u v', got '" + line + "'");
        }
        if (u >= *n || v >= *n) {
            throw parse_error(lineno, "node id out of range in '" + line + "'");
        }
        pairs.emplace_back(static_cast<node_id>(u), static_cast<node_id>(v));
    }
    if (!n) throw parse_error(lineno, "missing node count");
    return from_edge_list(pairs, *n);
}

void write_edge_list_file(const std::filesystem::path& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_edge_list(out, g);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

Graph read_edge_list_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_edge_list(in);
}

} // namespace anchorgt
