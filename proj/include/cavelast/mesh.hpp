#pragma once

#include "cavelast/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cavelast {

enum class EdgeTag { dirichlet, free, puncture };

// Boundary edge (a, b) oriented so the domain lies on its left.
struct BoundaryEdge {
    int a = 0;
    int b = 0;
    EdgeTag tag = EdgeTag::dirichlet;
    int puncture = -1; // index into Mesh::punctures() when tag == puncture
};

struct Puncture {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
};

// Uniform-grid bins over a fixed set of triangles. Ties on shared edges go to
// the lowest triangle index.
class TriangleLocator {
public:
    TriangleLocator() = default;
    TriangleLocator(const std::vector<Vec2>& points, const std::vector<std::array<int, 3>>& triangles);

    struct Hit {
        int triangle = -1;
        Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
    };

    // Barycentric tolerance `tol` admits points marginally outside a triangle.
    std::optional<Hit> locate(const Vec2& p, double tol = 1e-12) const;

private:
    std::vector<Vec2> points_;
    std::vector<std::array<int, 3>> triangles_;
    Vec2 lo_ = Vec2::Zero();
    double cell_ = 1.0;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<int>> bins_;
};

/// Triangulated reference domain with tagged boundary and punctures.
///
/// Invariants checked at construction: positive triangle areas, conforming
/// edges (each shared by at most two triangles), boundary edges equal to the
/// edges with one triangle, boundary edges closing into loops, and every
/// puncture loop lying within 1.5 radii of its center.
class Mesh {
public:
    Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
         std::vector<BoundaryEdge> boundary_edges, std::vector<Puncture> punctures);

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
    const std::vector<Puncture>& punctures() const { return punctures_; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }

    double triangle_area(int t) const { return areas_[t]; }
    // Inverse of the reference edge matrix [x1 - x0, x2 - x0].
    const Mat2& reference_inverse(int t) const { return dm_inv_[t]; }
    double area() const { return total_area_; }

    bool is_dirichlet(int v) const { return dirichlet_[v] != 0; }
    // Vertex indices of puncture k, ordered with the domain on the left
    // (clockwise around the hole).
    const std::vector<int>& puncture_loop(int k) const { return puncture_loops_[k]; }
    // Non-puncture boundary loops, domain on the left.
    const std::vector<std::vector<int>>& outer_loops() const { return outer_loops_; }

    Vec2 centroid() const;
    double diameter() const;
    // Largest radius of a disk inside the outer boundary polygon around its centroid.
    double inradius() const;

    const TriangleLocator& locator() const { return locator_; }

private:
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<Puncture> punctures_;
    std::vector<double> areas_;
    std::vector<Mat2> dm_inv_;
    std::vector<char> dirichlet_;
    std::vector<std::vector<int>> puncture_loops_;
    std::vector<std::vector<int>> outer_loops_;
    double total_area_ = 0.0;
    TriangleLocator locator_;
};

// Polar mesh of the disk B(center, r_out) with a central hole of radius rho.
// Radii are graded geometrically so cells near the hole stay close to
// square; n_theta points per ring. Outer edges are Dirichlet.
Mesh annulus_mesh(const Vec2& center, double rho, double r_out, int n_theta);

// Structured mesh of the full disk: concentric rings with 6k points on ring k.
Mesh disk_mesh(const Vec2& center, double radius, int rings);

// Structured n x n mesh of the axis-aligned square [lo, hi]^2.
Mesh square_mesh(const Vec2& lo, const Vec2& hi, int n);

enum class DomainShape { disk, square };

// Delaunay (Bowyer-Watson) mesh of a disk or square with any number of
// circular holes. Each hole boundary gets n_hole points and is surrounded by
// graded rings until the spacing reaches h.
Mesh delaunay_mesh(DomainShape shape, const Vec2& center, double size, const std::vector<Puncture>& punctures,
                   double h, int n_hole = 48);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

std::string to_string(EdgeTag tag, int puncture);

} // namespace cavelast
