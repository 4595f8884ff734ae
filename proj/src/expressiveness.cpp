#include "anchorgt/expressiveness.hpp"

#include "anchorgt/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace anchorgt {

WlResult wl_refine(const Graph& g1, const Graph& g2, int max_rounds) {
    const Graph* graphs[2] = {&g1, &g2};
    std::vector<std::uint32_t> colors[2];
    for (int i = 0; i < 2; ++i) {
        const auto deg = graphs[i]->degrees();
        colors[i].assign(deg.begin(), deg.end());
    }
    auto count_classes = [&] {
        std::vector<std::uint32_t> all(colors[0]);
        all.insert(all.end(), colors[1].begin(), colors[1].end());
        std::sort(all.begin(), all.end());
        return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
    };

    WlResult r;
    std::size_t classes = count_classes();
    while (r.rounds < max_rounds) {
        std::map<std::pair<std::uint32_t, std::vector<std::uint32_t>>, std::uint32_t> dict;
        std::vector<std::uint32_t> next[2];
        for (int i = 0; i < 2; ++i) {
            const Graph& g = *graphs[i];
            next[i].resize(g.num_nodes());
            for (node_id v = 0; v < g.num_nodes(); ++v) {
                std::vector<std::uint32_t> nb;
                for (node_id u : g.neighbors(v)) nb.push_back(colors[i][u]);
                std::sort(nb.begin(), nb.end());
                auto key = std::pair{colors[i][v], std::move(nb)};
                auto it = dict.try_emplace(std::move(key), static_cast<std::uint32_t>(dict.size()))
                              .first;
                next[i][v] = it->second;
            }
        }
        colors[0].swap(next[0]);
        colors[1].swap(next[1]);
        ++r.rounds;
        const std::size_t now = count_classes();
        if (now == classes) break;
        classes = now;
    }
    for (int i = 0; i < 2; ++i) {
        std::map<std::uint32_t, std::size_t> hist;
        for (auto c : colors[i]) ++hist[c];
        r.histograms.push_back(std::move(hist));
    }
    r.distinguishable = r.histograms[0] != r.histograms[1];
    return r;
}

AttentionLayerParams fact1_construct(const ReceptiveField& rf, std::size_t d_model) {
    if (!is_neighbor_distinguishable(EncodingScheme::spd(rf.d_max()))) {
        throw std::invalid_argument("encoding is not neighbor-distinguishable");
    }
    const int d = static_cast<int>(d_model);
    auto p = AttentionLayerParams::zeros(d_model, 1, d, rf.d_max());
    p.value = Matrix::identity(d_model);
    for (int c = 0; c < p.bias.codes(); ++c) p.bias.at(0, SpdBucket{c}) = mask_logit;
    p.bias.at(0, SpdBucket{1}) = 0.0;
    p.bias.at(0, SpdBucket{0}) = mask_logit / 2;
    return p;
}

void Fact2Config::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("a, b must be finite");
    if (std::abs(std::exp(a - b) - 0.5) > 1e-12) {
        throw std::invalid_argument("the in-ball to anchor weight ratio e^a / e^b must be 1/2");
    }
}

Fact2Result fact2_run(const Graph& g, const AnchorSet& s, const Fact2Config& cfg) {
    cfg.validate();
    if (!verify_dominating(g, s).ok) throw std::invalid_argument("anchors do not dominate the graph");
    const int k = s.k();
    const int d_max = std::max(default_d_max, k + 1);
    const auto scheme = EncodingScheme::spd(d_max);
    if (!is_neighbor_distinguishable(scheme) || !is_anchor_distinguishable(scheme, k)) {
        throw std::invalid_argument("encoding must be neighbor- and anchor-distinguishable");
    }
    const std::size_t n = g.num_nodes();

    Fact2Result r;
    Matrix h(n, 1);
    for (node_id v = 0; v < n; ++v) {
        r.layer1.push_back(g.degree(v));
        h(v, 0) = g.degree(v);
    }

    // second layer through the real attention kernel
    const ReceptiveField rf = build_receptive_field(g, s, d_max);
    auto params = AttentionLayerParams::zeros(1, 1, 1, d_max);
    params.value = Matrix::identity(1);
    for (int c = 0; c < params.bias.codes(); ++c) {
        params.bias.at(0, SpdBucket{c}) = c <= k ? cfg.a : cfg.b;
    }
    const auto out = attention_forward(h, rf, params).output;
    r.values.assign(out.values.begin(), out.values.end());

    // the same quantity from its closed form
    const double wa = std::exp(cfg.a);
    const double wb = std::exp(cfg.b);
    for (node_id v = 0; v < n; ++v) {
        const SpdTable t = bfs_spd(g, v, k);
        double ball_sum = 0.0, outside_sum = 0.0;
        std::size_t ball = 0, outside = 0;
        for (node_id u = 0; u < n; ++u) {
            if (t.reachable(u)) {
                ball_sum += r.layer1[u];
                ++ball;
            }
        }
        for (node_id a : s.nodes()) {
            if (!t.reachable(a)) {
                outside_sum += r.layer1[a];
                ++outside;
            }
        }
        const double p = ball * wa / (ball * wa + outside * wb);
        double value = p * (ball_sum / ball);
        if (outside > 0) value += (1.0 - p) * (outside_sum / outside);
        r.mixing.push_back(p);
        r.closed_form.push_back(value);
    }

    for (double x : r.values) r.sum_readout += x;
    r.mean_readout = n ? r.sum_readout / static_cast<double>(n) : 0.0;
    return r;
}

std::vector<double> anchor_flag_mixture(const Graph& g, const AnchorSet& s, const Fact2Config& cfg) {
    cfg.validate();
    const double wa = std::exp(cfg.a);
    const double wb = std::exp(cfg.b);
    double anchor_sum = 0.0;
    for (node_id a : s.nodes()) anchor_sum += g.degree(a);
    std::vector<double> out;
    for (node_id v = 0; v < g.num_nodes(); ++v) {
        double nb_sum = 0.0;
        std::size_t nb = 0;
        for (node_id u : g.neighbors(v)) {
            if (!s.contains(u)) {
                nb_sum += g.degree(u);
                ++nb;
            }
        }
        const double total = nb * wa + static_cast<double>(s.size()) * wb;
        if (total == 0.0) throw std::invalid_argument("empty receptive field");
        out.push_back((wa * nb_sum + wb * anchor_sum) / total);
    }
    return out;
}

bool distributions_differ(std::vector<double> a, std::vector<double> b, double tol) {
    if (a.empty() || b.empty()) return a.empty() != b.empty();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // cluster sorted values into outcomes
    auto outcomes = [tol](const std::vector<double>& xs) {
        std::vector<std::pair<double, std::size_t>> out;
        for (double x : xs) {
            if (!out.empty() && x - out.back().first <= tol) {
                ++out.back().second;
            } else {
                out.emplace_back(x, 1);
            }
        }
        return out;
    };
    const auto oa = outcomes(a);
    const auto ob = outcomes(b);
    if (oa.size() != ob.size()) return true;
    for (std::size_t i = 0; i < oa.size(); ++i) {
        if (std::abs(oa[i].first - ob[i].first) > tol) return true;
        if (oa[i].second * b.size() != ob[i].second * a.size()) return true;
    }
    return false;
}

namespace {

double readout_for(const Graph& g, const AnchorSet& s, const Fact2Config& cfg) {
    return fact2_run(g, s, cfg).mean_readout;
}

} // namespace

Fact2Distribution fact2_distribution(const Graph& g1, const Graph& g2, const Fact2Config& cfg,
                                     int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    Fact2Distribution d;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = counter_hash(seed, 0, static_cast<std::uint64_t>(t));
        d.readouts1.push_back(readout_for(g1, select_anchors(g1, 1, trial_seed), cfg));
        d.readouts2.push_back(readout_for(g2, select_anchors(g2, 1, trial_seed), cfg));
    }
    std::sort(d.readouts1.begin(), d.readouts1.end());
    std::sort(d.readouts2.begin(), d.readouts2.end());
    d.distinguished = distributions_differ(d.readouts1, d.readouts2);
    return d;
}

std::vector<AnchorSet> enumerate_minimal_dominating_sets(const Graph& g, int k) {
    const std::size_t n = g.num_nodes();
    if (n > 20) throw std::invalid_argument("brute-force enumeration is limited to 20 nodes");
    if (n == 0) return {};
    std::vector<std::uint32_t> ball(n, 0);
    for (node_id v = 0; v < n; ++v) {
        for (node_id u : k_hop(g, v, k)) ball[v] |= 1u << u;
    }
    const std::uint32_t all = (1u << n) - 1;
    auto covers = [&](std::uint32_t set) {
        std::uint32_t covered = 0;
        for (std::uint32_t rest = set; rest; rest &= rest - 1) covered |= ball[std::countr_zero(rest)];
        return covered == all;
    };
    std::vector<AnchorSet> out;
    for (std::uint32_t set = 1; set <= all; ++set) {
        if (!covers(set)) continue;
        bool minimal = true;
        for (std::uint32_t rest = set; rest && minimal; rest &= rest - 1) {
            if (covers(set & ~(rest & -rest))) minimal = false;
        }
        if (!minimal) continue;
        std::vector<node_id> nodes;
        for (std::uint32_t rest = set; rest; rest &= rest - 1) {
            nodes.push_back(static_cast<node_id>(std::countr_zero(rest)));
        }
        out.emplace_back(std::move(nodes), k, 0, n);
    }
    return out;
}

Fact2Distribution fact2_enumerated(const Graph& g1, const Graph& g2, const Fact2Config& cfg) {
    Fact2Distribution d;
    for (const auto& s : enumerate_minimal_dominating_sets(g1, 1)) {
        d.readouts1.push_back(readout_for(g1, s, cfg));
    }
    for (const auto& s : enumerate_minimal_dominating_sets(g2, 1)) {
        d.readouts2.push_back(readout_for(g2, s, cfg));
    }
    std::sort(d.readouts1.begin(), d.readouts1.end());
    std::sort(d.readouts2.begin(), d.readouts2.end());
    d.distinguished = distributions_differ(d.readouts1, d.readouts2);
    return d;
}

nlohmann::json wl_report(const WlResult& wl) {
    auto hists = nlohmann::json::array();
    for (const auto& h : wl.histograms) {
        nlohmann::json jh = nlohmann::json::object();
        for (auto [color, count] : h) jh[std::to_string(color)] = count;
        hists.push_back(jh);
    }
    return nlohmann::json{{"rounds", wl.rounds},
                          {"histograms", hists},
                          {"verdict", wl.distinguishable ? "distinguishable" : "indistinguishable"}};
}

nlohmann::json fact2_report(const WlResult& wl, const Fact2Distribution& dist) {
    return nlohmann::json{{"wl", wl_report(wl)},
                          {"multisets", {dist.readouts1, dist.readouts2}},
                          {"verdict", dist.distinguished ? "distinguished" : "not-distinguished"}};
}

} // namespace anchorgt
