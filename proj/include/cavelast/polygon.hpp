#pragma once

#include "cavelast/types.hpp"

namespace cavelast {

// Positive for counterclockwise loops.
double signed_area(const Polyline& loop);
double perimeter(const Polyline& loop);
Vec2 polygon_centroid(const Polyline& loop);
Polyline reversed(Polyline loop);

// No two non-adjacent edges intersect.
bool is_simple(const Polyline& loop);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
double point_loop_distance(const Polyline& loop, const Vec2& p);

// Symmetric Hausdorff distance between closed polylines, sampling each edge
// at `per_edge` points.
double hausdorff_distance(const Polyline& a, const Polyline& b, int per_edge = 4);

// Axis-aligned raster: cell (i, j) has center origin + delta (i + 1/2, j + 1/2).
struct Grid {
    Vec2 origin = Vec2::Zero();
    double delta = 1.0;
    int nx = 0;
    int ny = 0;

    Vec2 center(int i, int j) const { return origin + delta * Vec2(i + 0.5, j + 0.5); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

    // Grid of cell size delta covering [lo, hi] plus `pad` cells on each side.
    static Grid covering(const Vec2& lo, const Vec2& hi, double delta, int pad = 2);
};

/// Contours of a binary cell indicator. Cell centers act as corners, the
/// raster is padded with zeros, and crossings sit at midpoints between cell
/// centers. Each contour keeps the inside cells on its left, so contours
/// around filled regions run counterclockwise. Diagonal-only contacts are
/// treated as disconnected.
std::vector<Polyline> marching_squares(const std::vector<char>& inside, const Grid& grid);

} // namespace cavelast
