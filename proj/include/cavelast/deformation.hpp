#pragma once

#include "cavelast/mesh.hpp"

#include <functional>
#include <memory>

namespace cavelast {

enum class BoundaryKind { affine_stretch, radial_stretch, user_table };

/// Dirichlet data d applied to the vertices of Dirichlet-tagged edges.
class BoundaryData {
public:
    // d(x) = center + diag(lambda, 1)(x - center), a uniaxial stretch.
    static BoundaryData affine_stretch(double lambda, const Vec2& center = Vec2::Zero());
    // d(x) = center + lambda (x - center).
    static BoundaryData radial_stretch(double lambda, const Vec2& center = Vec2::Zero());
    // Rows (x, d(x)); lookups match x within 1e-9.
    static BoundaryData user_table(std::vector<std::pair<Vec2, Vec2>> rows);

    BoundaryKind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    const Vec2& center() const { return center_; }
    const std::vector<std::pair<Vec2, Vec2>>& rows() const { return rows_; }

    Vec2 operator()(const Vec2& x) const;

private:
    BoundaryData() = default;

    BoundaryKind kind_ = BoundaryKind::radial_stretch;
    double lambda_ = 1.0;
    Vec2 center_ = Vec2::Zero();
    std::vector<std::pair<Vec2, Vec2>> rows_;
};

/// Continuous piecewise-affine map y on a mesh, stored by its vertex images.
class DeformationField {
public:
    DeformationField(std::shared_ptr<const Mesh> mesh, std::vector<Vec2> positions);

    static DeformationField identity(std::shared_ptr<const Mesh> mesh);
    static DeformationField from_map(std::shared_ptr<const Mesh> mesh, const std::function<Vec2(const Vec2&)>& f);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    const std::vector<Vec2>& positions() const { return positions_; }
    std::vector<Vec2>& positions() { return positions_; }

    // Overwrites every Dirichlet vertex with d(x).
    void apply_boundary(const BoundaryData& d);

    // Barycentric interpolation at a reference point; GeometryError outside
    // the mesh.
    Vec2 evaluate(const Vec2& x) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    std::vector<Vec2> positions_;
};

Mat2 element_gradient(const DeformationField& y, int t);

struct MinDet {
    double value = 0.0;
    int triangle = -1;
};

// Minimum element determinant and the first triangle attaining it.
MinDet min_det(const DeformationField& y);

// Images of m equally spaced points on S(center, r), starting at angle 0
// and running counterclockwise.
Polyline trace_on_circle(const DeformationField& y, const Vec2& center, double r, int m);

struct MollifyResult {
    DeformationField y;
    MinDet det;
    bool admissible = false;
};

/// Replaces each non-Dirichlet vertex image by a Gaussian-weighted
/// local-linear fit of the vertex images within 3 sigma. Affine maps are
/// reproduced exactly; sigma = 0 returns y unchanged.
MollifyResult mollify(const DeformationField& y, double sigma);

/// x -> a + (x - a) f(|x - a|)/|x - a| with f(R) = sqrt(R^2 + c^2 (1 - R^2/L^2))
/// for R <= L and the identity outside. Opens a hole of radius c at a point
/// cavity; det = 1 - c^2/L^2 inside B(a, L). Requires 0 <= c < L.
Vec2 localized_cavity_map(const Vec2& x, const Vec2& a, double c, double L);

/// Radial map with r(rho) = s and r(r_out) = lambda r_out:
/// r(R) = sqrt(s^2 + (lambda^2 r_out^2 - s^2)(R^2 - rho^2)/(r_out^2 - rho^2)).
Vec2 radial_seed_map(const Vec2& x, const Vec2& center, double rho, double r_out, double s, double lambda);

} // namespace cavelast
