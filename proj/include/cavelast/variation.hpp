#pragma once

#include "cavelast/degree.hpp"
#include "cavelast/energy.hpp"
#include "cavelast/material.hpp"

#include <string>

namespace cavelast {

/// Velocity field psi on the deformed configuration.
class TestField {
public:
    enum class Kind { bump, affine, fe_basis, windowed };

    // direction * (1 - s^2)^3 with s = |xi - center| / width, zero for s >= 1.
    static TestField bump(const Vec2& center, double width, const Vec2& direction);
    // M xi + v; not compactly supported, for identities only.
    static TestField affine(const Mat2& M, const Vec2& v = Vec2::Zero());
    // Piecewise-linear hat of a vertex on the deformed mesh, times direction.
    static TestField fe_basis(const DeformationField& y, int node, const Vec2& direction);
    // direction * w(u) m(u) with u = (xi - center)/radius, w = (1 - |u|^2)^2
    // on |u| < 1 and m in {1, u_x, u_y, u_x u_y} for mode 0..3.
    static TestField windowed(const Vec2& center, double radius, const Vec2& direction, int mode);

    Kind kind() const { return kind_; }
    Vec2 value(const Vec2& xi) const;
    Mat2 jacobian(const Vec2& xi) const;
    // Upper bound of the operator norm of D psi.
    double jacobian_bound() const;
    std::string describe() const;

private:
    TestField() = default;

    Kind kind_ = Kind::bump;
    Vec2 center_ = Vec2::Zero();
    double width_ = 1.0;
    Vec2 direction_ = Vec2::Zero();
    Mat2 M_ = Mat2::Zero();
    int mode_ = 0;
    // fe_basis: deformed star triangles and the node's local index in each.
    std::vector<std::array<Vec2, 3>> star_;
    std::vector<int> local_;
};

// max |psi(y(v))| over Dirichlet vertices v.
double boundary_mismatch(const TestField& psi, const DeformationField& y);

// Vertex images mapped through id + t psi. PreconditionError, carrying the
// admissible bound on |t|, unless |t| sup|D psi| < 1.
DeformationField outer_compose(const DeformationField& y, const TestField& psi, double t);

enum class ElasticRule {
    nodal,    // D psi of the nodal interpolant on each deformed triangle
    centroid, // D psi at the image of the element centroid
};

// Integral of (DW(Dy) Dy^T) : D psi(y).
double elastic_first_variation(const DeformationField& y, const TestField& psi, const BulkDensity& W,
                               ElasticRule rule = ElasticRule::nodal);

// div psi - Dphi(nu) . (D psi^T nu) / phi(nu).
double anisotropic_tangential_divergence(const Mat2& Dpsi, const Vec2& nu, const SurfaceDensity& phi);
double anisotropic_tangential_divergence(const TestField& psi, const Vec2& nu, const Vec2& point,
                                         const SurfaceDensity& phi);

enum class EdgeRule {
    exact,    // phi(nu) div_phi psi integrated exactly along each edge
    midpoint, // D psi at the edge midpoint
};

// Sum over cavities of the integral of phi(nu) div_phi psi over the
// boundary polygon (counterclockwise, nu outward).
double surface_first_variation(const std::vector<Polyline>& cavities, const TestField& psi,
                               const SurfaceDensity& phi, EdgeRule rule = EdgeRule::exact);
double surface_first_variation(const std::vector<CavityRecord>& cavities, const TestField& psi,
                               const SurfaceDensity& phi, EdgeRule rule = EdgeRule::exact);

struct VariationReport {
    double elastic = 0.0;
    double surface = 0.0;
    double total = 0.0;
    double fd_value = 0.0; // central difference of t -> E(h_t o y)
    double fd_gap = 0.0;   // |total - fd| / (|fd| + 1e-12)
};

VariationReport first_variation_residual(const DeformationField& y, const TestField& psi, const BulkDensity& W,
                                         const SurfaceDensity& phi, double fd_step = 1e-5);

/// 16 bumps on a ring around each cavity (8 sites, 2 directions) and 8
/// windowed fields vanishing on the images of the Dirichlet vertices.
std::vector<TestField> certification_battery(const DeformationField& y);

// First variation along psi from a nodal energy gradient: sum of grad_v . psi(y_v).
double nodal_variation(const DeformationField& y, const std::vector<Vec2>& grad, const TestField& psi);

struct MinimizeOptions {
    int max_iters = 20000;
    double tol_energy = 1e-11;   // relative energy decrease per iteration
    double tol_residual = -1.0;  // battery residual; negative means 1e-3 E
    double det_floor = 1e-8;
    int inv_every = 10;          // (INV) check cadence in accepted steps; 0 disables
    int lbfgs_memory = 10;
    double inv_delta = 0.0;      // band half-width for (INV); 0 picks 0.2% of the diameter
    int stall_patience = 5;      // consecutive small decreases before certification
};

struct IterationRecord {
    int iter = 0;
    double energy = 0.0;
    double bulk = 0.0;
    double surface = 0.0;
    double min_det = 0.0;
    double step = 0.0;
    double residual = 0.0;
};

enum class MinimizeStatus { converged, max_iters, stalled };

std::string to_string(MinimizeStatus s);

struct MinimizeResult {
    DeformationField y;
    std::vector<IterationRecord> log;
    MinimizeStatus status = MinimizeStatus::max_iters;
    double residual = 0.0;
    InvReport inv;
    int inv_rejections = 0;
};

/// L-BFGS on the free vertex positions with Armijo backtracking. Steps with
/// min det <= det_floor are rejected, and every inv_every accepted steps the
/// (INV) check runs; a failing step is undone.
MinimizeResult minimize(const DeformationField& y0, const BulkDensity& W, const SurfaceDensity& phi,
                        const MinimizeOptions& opts = {});

} // namespace cavelast
