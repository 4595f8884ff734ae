#include "anchorgt/fixtures.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

namespace anchorgt::fixtures {

namespace {

using edge_list = std::vector<std::pair<node_id, node_id>>;

} // namespace

Graph path(std::size_t n) {
    edge_list e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return from_edge_list(e, n);
}

Graph cycle(std::size_t n) {
    edge_list e;
    for (std::size_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return from_edge_list(e, n);
}

Graph complete(std::size_t n) {
    edge_list e;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
    }
    return from_edge_list(e, n);
}

Graph star(std::size_t leaves) {
    edge_list e;
    for (std::size_t i = 1; i <= leaves; ++i) e.emplace_back(0, i);
    return from_edge_list(e, leaves + 1);
}

Graph decalin() {
    const edge_list e{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0},
                      {0, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 5}};
    return from_edge_list(e, 10);
}

Graph bicyclopentyl() {
    const edge_list e{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                      {0, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 5}};
    return from_edge_list(e, 10);
}

Graph bridged_triangles() {
    const edge_list e{{0, 1}, {0, 2}, {1, 2}, {0, 3}, {3, 4}, {3, 5}, {4, 5}};
    return from_edge_list(e, 6);
}

Graph ladder() {
    const edge_list e{{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 4}, {3, 5}};
    return from_edge_list(e, 6);
}

std::optional<Graph> by_name(std::string_view name) {
    if (name == "decalin") return decalin();
    if (name == "bicyclopentyl") return bicyclopentyl();
    if (name == "bridged_triangles") return bridged_triangles();
    if (name == "ladder") return ladder();
    if (name == "triangle") return cycle(3);
    if (name == "p3") return path(3);

    // family name followed by a size, e.g. "path5"
    std::size_t split = name.size();
    while (split > 0 && std::isdigit(static_cast<unsigned char>(name[split - 1]))) --split;
    if (split == name.size() || split == 0) return std::nullopt;
    std::size_t size = 0;
    const auto digits = name.substr(split);
    if (std::from_chars(digits.data(), digits.data() + digits.size(), size).ec != std::errc{}) {
        return std::nullopt;
    }
    const auto family = name.substr(0, split);
    if (family == "path") return path(size);
    if (family == "cycle") return cycle(size);
    if (family == "complete") return complete(size);
    if (family == "star") return star(size);
    return std::nullopt;
}

} // namespace anchorgt::fixtures
