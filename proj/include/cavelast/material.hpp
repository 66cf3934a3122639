#pragma once

#include "cavelast/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace cavelast {

enum class BulkKind { default_compressible, user_table };

/// Stored-energy density W(F) = (mu/2)|F|^p + gamma(det F) on matrices with
/// positive determinant.
///
/// For the default compressible kind gamma(h) = a h^2 - b log h, so with
/// p = 2 the density reads (mu/2)|F|^2 + a (det F)^2 - b log det F. The
/// user_table kind replaces gamma by a C^1 cubic Hermite interpolant of
/// tabulated (h, gamma) pairs, continued below the table by a logarithmic
/// barrier (coefficient b) and above it by a quadratic (coefficient a), so
/// both limits gamma(0+) = +inf and gamma(h)/h -> inf hold for any table.
///
/// Polyconvexity: W = g(F, det F) with g(F, h) = (mu/2)|F|^p + gamma(h),
/// which is convex whenever p >= 1 and gamma is convex. The default gamma
/// is convex; tabulated gammas are not checked.
class BulkDensity {
public:
    static BulkDensity compressible(double mu, double a, double b, double p = 2.0);
    static BulkDensity tabulated(double mu, double p, std::vector<std::pair<double, double>> gamma_table,
                                 double a = 1.0, double b = 1.0);

    BulkKind kind() const { return kind_; }
    double mu() const { return mu_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double p() const { return p_; }
    const std::vector<std::pair<double, double>>& table() const { return table_; }

    double energy(const Mat2& F) const;
    // DW(F), the first Piola-Kirchhoff stress.
    Mat2 stress(const Mat2& F) const;

    double gamma(double h) const;
    double gamma_derivative(double h) const;

    // Constant c of the lower bound W(F) >= c|F|^p + gamma(det F).
    double coercivity_constant() const { return 0.5 * mu_; }
    // inf of gamma over (0, inf); the lower bound needs gamma >= 0.
    double gamma_minimum() const { return gamma_min_; }

private:
    BulkDensity() = default;
    void check_det(const Mat2& F) const;

    BulkKind kind_ = BulkKind::default_compressible;
    double mu_ = 1.0, a_ = 1.0, b_ = 1.0, p_ = 2.0;
    std::vector<std::pair<double, double>> table_;
    std::vector<double> slopes_;
    double gamma_min_ = 0.0;
};

enum class SurfaceKind { isotropic, elliptic, smoothed_l1 };

/// One-homogeneous, convex anisotropic surface density phi.
class SurfaceDensity {
public:
    static SurfaceDensity isotropic();
    // A must be symmetric positive definite.
    static SurfaceDensity elliptic(const Mat2& A);
    static SurfaceDensity smoothed_l1(double eps);

    SurfaceKind kind() const { return kind_; }
    const Mat2& matrix() const { return A_; }
    double eps() const { return eps_; }

    // phi(0) = 0 by homogeneous extension.
    double value(const Vec2& z) const;
    Vec2 gradient(const Vec2& z) const;
    bool has_hessian() const { return kind_ != SurfaceKind::smoothed_l1; }
    Mat2 hessian(const Vec2& z) const;

    // min of phi over `directions` equally spaced unit vectors.
    double lower_bound_constant(int directions = 256) const;

private:
    SurfaceDensity() = default;

    SurfaceKind kind_ = SurfaceKind::isotropic;
    Mat2 A_ = Mat2::Identity();
    double eps_ = 0.0;
};

struct BulkAdmissibility {
    int samples = 0;
    // min over samples of W(F) - c|F|^p - gamma(det F); must be >= -1e-9.
    double coercivity_margin = 0.0;
    double gamma_minimum = 0.0;
    // max over samples of |DW(F) F^T| / (W(F) + 1), an empirical c-tilde.
    double control_constant = 0.0;
    // W along det F = 2^-k, k = 1..20; the second half must increase with
    // increments that do not decay (logarithmic or faster blow-up).
    std::vector<double> barrier_sequence;
    bool coercive() const { return coercivity_margin >= -1e-9 && gamma_minimum >= 0.0; }
    bool barrier_blows_up() const;
};

/// Random-sample checks of coercivity and control, with det F in
/// [det_min, det_max].
BulkAdmissibility check_bulk_admissibility(const BulkDensity& W, int samples, std::uint64_t seed,
                                           double det_min = 0.1, double det_max = 10.0);

struct SurfaceAdmissibility {
    int samples = 0;
    double homogeneity_error = 0.0;   // max relative |phi(tz) - t phi(z)|
    double lower_bound = 0.0;         // c-hat over 256 directions
    double convexity_violation = 0.0; // max of phi((z+w)/2) - (phi(z)+phi(w))/2, clipped at 0
    double euler_error = 0.0;         // max relative |Dphi(z).z - phi(z)|
    bool ok() const;
};

SurfaceAdmissibility check_surface_admissibility(const SurfaceDensity& phi, int samples, std::uint64_t seed);

} // namespace cavelast
