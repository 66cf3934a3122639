#pragma once

#include "cavelast/degree.hpp"
#include "cavelast/material.hpp"

#include <functional>
#include <optional>
#include <string>

namespace cavelast {

// Sum over triangles of area * W(Dy); InfeasibleError on det Dy <= 0.
double bulk_term(const DeformationField& y, const BulkDensity& W);

// Sum over edges of |e| phi(nu_e), nu_e the outward normal of a
// counterclockwise loop. A clockwise loop is measured with its orientation
// reversed.
double anisotropic_perimeter(const Polyline& boundary, const SurfaceDensity& phi);

// Image of puncture k's loop, counterclockwise around the cavity.
Polyline cavity_boundary(const DeformationField& y, int k);

struct DetectionOptions {
    // Cross-validate each puncture-image boundary against the raster
    // contour of the topological image of the puncture center.
    bool cross_validate = false;
    // Raster cell size; 0 picks 1% of the mesh diameter.
    double delta = 0.0;
    // Run check_inv around each puncture and record the verdict.
    bool check_inv = false;
};

struct EnergyBreakdown {
    double bulk = 0.0;
    double surface = 0.0;
    double total = 0.0;
    // phi-perimeter of the reference puncture loops, present without any
    // cavitation.
    double rho_artifact = 0.0;
    std::vector<CavityRecord> per_cavity;
    std::optional<bool> inv_pass;
    int inv_violations = 0;
    std::vector<double> slow_path_hausdorff;
    std::vector<std::string> warnings;
};

EnergyBreakdown total_energy(const DeformationField& y, const BulkDensity& W, const SurfaceDensity& phi,
                             const DetectionOptions& opts = {});

// Flat "key = value" lines, prefixed by `prefix`.
std::string format_breakdown(const EnergyBreakdown& e, const std::string& prefix = "energy.");

// Sum of the plain perimeters of the cavity boundaries.
double surface_functional_S_sum(const DeformationField& y, const DetectionOptions& opts = {});

/// Test field eta(x, xi) on reference x deformed xi, with its partial
/// x-gradient and xi-divergence.
struct TestFieldEta {
    std::function<Vec2(const Vec2&, const Vec2&)> value;
    std::function<Mat2(const Vec2&, const Vec2&)> grad_x;
    std::function<double(const Vec2&, const Vec2&)> div_xi;
};

/// eta(x, xi) = chi(x) beta(xi), where chi equals 1 on B(a, r0) and vanishes
/// outside B(a, r1), and beta(xi) = -amplitude g(|xi - s|) Rot(tilt) e_r with
/// g a C^2 bump equal to 1 on [band_lo, band_hi] and 0 outside
/// [band_lo - width, band_hi + width]. |eta| <= amplitude.
TestFieldEta cavity_ring_field(const Vec2& a, double r0, double r1, const Vec2& s, double band_lo, double band_hi,
                               double width, double amplitude = 1.0, double tilt = 0.0);

/// Integral over the mesh of cof Dy : D_x eta(x, y(x)) + div_xi eta(x, y(x)) det Dy
/// with a symmetric triangle rule of the given degree. ArgumentError when
/// |eta| exceeds 1 at a quadrature point.
double surface_functional_S_testfield(const DeformationField& y, const TestFieldEta& eta, int order = 5);

// Intercept at rho = 0 of the least-squares line through (rho_i, value_i).
double extrapolate_rho_zero(const std::vector<double>& rhos, const std::vector<double>& values);

struct DiscreteEnergy {
    double bulk = 0.0;
    double surface = 0.0;
    double total = 0.0;
    double min_det = 0.0;
};

/// Bulk plus phi-perimeter of all puncture images, with the gradient with
/// respect to every vertex position when `grad` is non-null. Returns an
/// infinite total, without throwing, when some det Dy <= det_floor.
DiscreteEnergy discrete_energy(const DeformationField& y, const BulkDensity& W, const SurfaceDensity& phi,
                               std::vector<Vec2>* grad = nullptr, double det_floor = 0.0);

} // namespace cavelast
