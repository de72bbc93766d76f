#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "strawkit/geometry.hpp"

namespace strawkit {

/// 2D Delaunay triangulation. Triangles are counter-clockwise index triples and
/// cover the convex hull of the input. Exact duplicate points are left unreferenced.
/// Throws Error(DegenerateGeometry) when fewer than 3 points or all points are collinear.
std::vector<std::array<std::size_t, 3>> delaunay_2d(const std::vector<Vec2>& points);

}  // namespace strawkit
