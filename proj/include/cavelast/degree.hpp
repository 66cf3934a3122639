#pragma once

#include "cavelast/deformation.hpp"
#include "cavelast/material.hpp"
#include "cavelast/polygon.hpp"

#include <optional>
#include <string>

namespace cavelast {

// Winding number of a closed polyline around xi by signed ray crossings.
// Throws OnBoundaryError when xi lies within `tol` of the loop.
int winding_number(const Polyline& loop, const Vec2& xi, double tol = 1e-12);

// Same count without the boundary check; points on the loop get the
// half-open convention of the crossing rule.
int winding_number_unchecked(const Polyline& loop, const Vec2& xi);

/// Subdomain U whose boundary trace defines deg(y*, U, .).
struct Subdomain {
    enum class Kind {
        circle,          // B(center, radius), boundary sampled at `samples` points
        outer_boundary,  // region enclosed by the outer boundary, cavities included
        domain_boundary, // every boundary loop with its induced orientation
    };
    Kind kind = Kind::circle;
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    int samples = 512;

    static Subdomain circle(const Vec2& c, double r, int m = 512) { return {Kind::circle, c, r, m}; }
    static Subdomain outer_boundary() { return {Kind::outer_boundary, Vec2::Zero(), 0.0, 0}; }
    static Subdomain domain_boundary() { return {Kind::domain_boundary, Vec2::Zero(), 0.0, 0}; }
};

// Images of the boundary loops of U, oriented with U on the left.
std::vector<Polyline> boundary_images(const DeformationField& y, const Subdomain& U);

/// Integer degree sampled at cell centers. Cells off every loop carry the
/// sum of the loops' winding numbers.
struct DegreeRaster {
    Grid grid;
    std::vector<int> values;
    std::vector<Polyline> loops;
    std::vector<std::string> warnings;

    int at(int i, int j) const { return values[grid.index(i, j)]; }
    std::vector<char> indicator() const;
    // Area of the nonzero cells.
    double area() const;
    // Sum of deg * delta^2.
    double degree_integral() const;
};

// Rasterizes on `grid`, or on a grid covering the loops when none is given.
DegreeRaster rasterize_degree(const std::vector<Polyline>& loops, double delta,
                              const std::optional<Grid>& grid = std::nullopt);

DegreeRaster topological_image(const DeformationField& y, const Subdomain& U, double delta);

struct CavityRecord {
    Vec2 site = Vec2::Zero();
    double puncture_radius = 0.0;
    Polyline boundary; // counterclockwise
    double area = 0.0;
    double aniso_perimeter = 0.0;
    bool simple = true;
};

/// Intersection of the rasterized images of B(a, r) over `radii`. Returns a
/// record when the area exceeds `area_threshold` (default 4 delta^2), with
/// the boundary taken as the largest marching-squares contour. The default
/// threshold separates cavities from regular points only when the smallest
/// radius is below the cell size (or at the puncture scale around a puncture).
std::optional<CavityRecord> topological_image_point(const DeformationField& y, const Vec2& a,
                                                    const std::vector<double>& radii, double delta,
                                                    const SurfaceDensity& phi = SurfaceDensity::isotropic(),
                                                    double area_threshold = -1.0, int samples = 512);

struct InvReport {
    struct Entry {
        Vec2 center = Vec2::Zero();
        double radius = 0.0;
        int checked = 0;
        int excluded = 0; // samples inside the 2 delta band
        int violations = 0;
        std::vector<Vec2> located; // first few violating reference points
    };
    std::vector<Entry> entries;
    int total_violations = 0;
    bool pass() const { return total_violations == 0; }
};

/// Samples element centroids x (at most `sample_budget`, evenly strided) and
/// checks deg(y*, B(a, r), y(x)) != 0 for x in B(a, r) and == 0 outside,
/// skipping images within 2 delta of the circle's image.
InvReport check_inv(const DeformationField& y, const std::vector<Vec2>& centers,
                    const std::vector<std::vector<double>>& radii, double delta, int sample_budget = 4000,
                    int samples_per_circle = 512);

// Default radii for (INV) checks around a puncture: `count` values spaced
// geometrically from 1.2 rho to `r_max`.
std::vector<double> default_inv_radii(double rho, double r_max, int count = 8);

struct InvCircles {
    std::vector<Vec2> centers;
    std::vector<std::vector<double>> radii;
};

// Circles around every puncture whose largest radius stays at 90% of the
// distance to the outer boundary and to the other punctures.
InvCircles default_inv_circles(const Mesh& mesh, int count = 8);

} // namespace cavelast
