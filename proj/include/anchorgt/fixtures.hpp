#pragma once

#include "anchorgt/graph.hpp"

#include <optional>
#include <string_view>

namespace anchorgt::fixtures {

Graph path(std::size_t n);
Graph cycle(std::size_t n);
Graph complete(std::size_t n);
/// Center 0 joined to `leaves` leaves.
Graph star(std::size_t leaves);
/// Two hexagons sharing an edge (10 nodes, the two fusion atoms have degree 3).
Graph decalin();
/// Two pentagons joined by a bridge (10 nodes). 1-WL cannot tell it from decalin.
Graph bicyclopentyl();
/// Two triangles joined by one edge (6 nodes).
Graph bridged_triangles();
/// The 2 x 3 grid: two squares sharing an edge (6 nodes).
Graph ladder();

/// Looks up "path5", "cycle6", "complete4", "star5", "decalin", "bicyclopentyl",
/// "bridged_triangles", "ladder", "triangle" (= cycle3), "p3" (= path3).
std::optional<Graph> by_name(std::string_view name);

} // namespace anchorgt::fixtures
