#pragma once

#include "cavelast/material.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cavelast {

/// Radial deformation y(x) = r(|x|) x/|x| on the annulus rho <= |x| <= R_out,
/// with r the monotone piecewise-cubic interpolant of its knot values.
/// Invariants: knots and values strictly increasing, values positive,
/// r(R_out) = lambda R_out.
class RadialProfile {
public:
    RadialProfile(std::vector<double> knots, std::vector<double> values);

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& slopes() const { return slopes_; }
    double inner() const { return knots_.front(); }
    double outer() const { return knots_.back(); }
    double lambda() const { return values_.back() / knots_.back(); }
    double cavity_radius() const { return values_.front(); }

    // r and r' at R; R is clamped to [inner, outer].
    double value(double R) const;
    double derivative(double R) const;
    // Radial lift about `center`.
    Vec2 map(const Vec2& x, const Vec2& center = Vec2::Zero()) const;

private:
    int interval(double R) const;

    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

// R_j = rho (R_out/rho)^(j/M), j = 0..M.
std::vector<double> geometric_knots(double rho, double r_out, int M);

// Monotone cubic Hermite slopes: weighted harmonic means inside, a
// three-point one-sided estimate at the ends replaced by the secant when it
// is not in (0, 3 secant].
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y);

struct RadialEnergy {
    double bulk = 0.0;
    double surface = 0.0;
    double total = 0.0;
};

// bulk = integral of 2 pi R W(diag(r', r/R)) dR, surface = phi-perimeter of
// the circle of radius r(rho). InfeasibleError where r' r/R <= 0.
RadialEnergy radial_energy(const RadialProfile& profile, const BulkDensity& W, const SurfaceDensity& phi,
                           double tol = 1e-8);

// c times the integral of phi(cos t, sin t) over [0, 2 pi].
double anisotropic_circle_perimeter(double c, const SurfaceDensity& phi, double tol = 1e-10);

struct RadialOptions {
    int M = 128;
    double r_out = 1.0;
    int max_iters = 200;
    double tol_energy = 1e-10; // absolute energy decrease
    double tol_gradient = 1e-8;
    int gauss_points = 10;
};

enum class RadialStatus { converged, stalled };

std::string to_string(RadialStatus s);

struct RadialSolution {
    RadialProfile profile;
    RadialEnergy energy;
    RadialStatus status = RadialStatus::stalled;
    int iterations = 0;
    double el_residual = 0.0;     // max |dE/dr_j| over the free knots
    std::vector<double> history;  // solver energy per accepted iterate
};

/// Minimizes the radial energy over the knot values r_0..r_{M-1} with
/// r_M = lambda R_out fixed. Newton on a finite-difference Hessian with a
/// Levenberg shift, backtracking to keep the values increasing. Runs from
/// three seeds (no opening, 0.3 lambda R_out, 0.6 lambda R_out) and keeps the
/// lowest energy.
RadialSolution solve_radial(double lambda, const BulkDensity& W, const SurfaceDensity& phi, double rho,
                            const RadialOptions& opts = {});

// Same iteration from a single starting profile.
RadialSolution solve_radial_from(const RadialProfile& start, const BulkDensity& W, const SurfaceDensity& phi,
                                 const RadialOptions& opts = {});

struct SweepRow {
    double lambda = 0.0;
    double cavity_radius = 0.0;
    double bulk = 0.0;
    double surface = 0.0;
    double total = 0.0;
};

// Independent solves, run in parallel over lambda.
std::vector<SweepRow> radial_sweep(const std::vector<double>& lambdas, const BulkDensity& W,
                                   const SurfaceDensity& phi, double rho, const RadialOptions& opts = {});

// Header "lambda,cavity_radius,bulk,surface,total".
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

struct BvpReport {
    double cavity_radius = 0.0;
    double radial_traction = 0.0; // T n . e_r with n = -e_r the material normal
    std::vector<double> angles;
    std::vector<double> curvature; // h^phi(n) at each angle
    std::vector<double> residuals; // |T n + h n| / (|T n| + |h n| + 1e-12)
    double max_residual = 0.0;
};

/// Checks T n = -h^phi(n) n on the cavity circle, with T = DW F^T / det F the
/// Cauchy stress, n = -e_r the normal pointing out of the material,
/// Dn = -(I - n n^T)/c and h^phi = tr(D^2 phi(n) Dn). DomainError
/// "Hessian unavailable" when phi has no second derivative.
BvpReport bvp_boundary_check(const RadialProfile& profile, const BulkDensity& W, const SurfaceDensity& phi,
                             int samples = 32);

} // namespace cavelast
