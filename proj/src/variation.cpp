#include "cavelast/variation.hpp"

#include "cavelast/numerics.hpp"

#include <cmath>
#include <sstream>

namespace cavelast {

namespace {

// max over s in [0, 1] of |d/ds (1 - s^2)^3|, attained at s = 1/sqrt(5).
const double kBumpSlope = 6.0 / std::sqrt(5.0) * 0.64;

Eigen::Vector3d bary(const Vec2& p, const std::array<Vec2, 3>& t) {
    const double d = cross(t[1] - t[0], t[2] - t[0]);
    return {cross(t[1] - p, t[2] - p) / d, cross(t[2] - p, t[0] - p) / d, cross(t[0] - p, t[1] - p) / d};
}

Vec2 hat_gradient(const std::array<Vec2, 3>& t, int local) {
    const Vec2& b = t[(local + 1) % 3];
    const Vec2& c = t[(local + 2) % 3];
    const double d = cross(t[1] - t[0], t[2] - t[0]);
    // lambda_local = cross(b - p, c - p) / d.
    const Vec2 e = c - b;
    return Vec2(e.y(), -e.x()) / d;
}

} // namespace

TestField TestField::bump(const Vec2& center, double width, const Vec2& direction) {
    if (!(width > 0)) throw ArgumentError("bump test field needs a positive width");
    TestField f;
    f.kind_ = Kind::bump;
    f.center_ = center;
    f.width_ = width;
    f.direction_ = direction;
    return f;
}

TestField TestField::affine(const Mat2& M, const Vec2& v) {
    TestField f;
    f.kind_ = Kind::affine;
    f.M_ = M;
    f.direction_ = v;
    return f;
}

TestField TestField::fe_basis(const DeformationField& y, int node, const Vec2& direction) {
    if (node < 0 || node >= y.mesh().num_vertices()) throw ArgumentError("fe_basis: node out of range");
    TestField f;
    f.kind_ = Kind::fe_basis;
    f.direction_ = direction;
    f.center_ = y.positions()[node];
    f.width_ = 0.0;
    for (const auto& tri : y.mesh().triangles())
        for (int k = 0; k < 3; ++k)
            if (tri[k] == node) {
                std::array<Vec2, 3> t{y.positions()[tri[0]], y.positions()[tri[1]], y.positions()[tri[2]]};
                f.star_.push_back(t);
                f.local_.push_back(k);
                for (const auto& p : t) f.width_ = std::max(f.width_, (p - f.center_).norm());
            }
    return f;
}

TestField TestField::windowed(const Vec2& center, double radius, const Vec2& direction, int mode) {
    if (!(radius > 0) || mode < 0 || mode > 3) throw ArgumentError("windowed test field: bad radius or mode");
    TestField f;
    f.kind_ = Kind::windowed;
    f.center_ = center;
    f.width_ = radius;
    f.direction_ = direction;
    f.mode_ = mode;
    return f;
}

Vec2 TestField::value(const Vec2& xi) const {
    switch (kind_) {
    case Kind::bump: {
        const double s2 = (xi - center_).squaredNorm() / (width_ * width_);
        if (s2 >= 1.0) return Vec2::Zero();
        const double w = 1.0 - s2;
        return direction_ * (w * w * w);
    }
    case Kind::affine:
        return M_ * xi + direction_;
    case Kind::fe_basis:
        for (std::size_t i = 0; i < star_.size(); ++i) {
            const Eigen::Vector3d l = bary(xi, star_[i]);
            if (l.minCoeff() >= -1e-12) return direction_ * l[local_[i]];
        }
        return Vec2::Zero();
    case Kind::windowed: {
        const Vec2 u = (xi - center_) / width_;
        const double r2 = u.squaredNorm();
        if (r2 >= 1.0) return Vec2::Zero();
        const double w = (1.0 - r2) * (1.0 - r2);
        const double m[4] = {1.0, u.x(), u.y(), u.x() * u.y()};
        return direction_ * (w * m[mode_]);
    }
    }
    return Vec2::Zero();
}

Mat2 TestField::jacobian(const Vec2& xi) const {
    switch (kind_) {
    case Kind::bump: {
        const Vec2 d = xi - center_;
        const double s2 = d.squaredNorm() / (width_ * width_);
        if (s2 >= 1.0) return Mat2::Zero();
        const double w = 1.0 - s2;
        // d/dxi (1 - s^2)^3 = -6 (1 - s^2)^2 d / width^2.
        const Vec2 g = -6.0 * w * w * d / (width_ * width_);
        return direction_ * g.transpose();
    }
    case Kind::affine:
        return M_;
    case Kind::fe_basis:
        for (std::size_t i = 0; i < star_.size(); ++i) {
            const Eigen::Vector3d l = bary(xi, star_[i]);
            if (l.minCoeff() >= -1e-12) return direction_ * hat_gradient(star_[i], local_[i]).transpose();
        }
        return Mat2::Zero();
    case Kind::windowed: {
        const Vec2 u = (xi - center_) / width_;
        const double r2 = u.squaredNorm();
        if (r2 >= 1.0) return Mat2::Zero();
        const double w = (1.0 - r2) * (1.0 - r2);
        const Vec2 gw = -4.0 * (1.0 - r2) * u / width_;
        const double m[4] = {1.0, u.x(), u.y(), u.x() * u.y()};
        const Vec2 gm[4] = {Vec2::Zero(), Vec2(1.0, 0.0) / width_, Vec2(0.0, 1.0) / width_,
                            Vec2(u.y(), u.x()) / width_};
        return direction_ * (gw * m[mode_] + w * gm[mode_]).transpose();
    }
    }
    return Mat2::Zero();
}

double TestField::jacobian_bound() const {
    switch (kind_) {
    case Kind::bump:
        return direction_.norm() * kBumpSlope / width_;
    case Kind::affine:
        return Eigen::JacobiSVD<Mat2>(M_).singularValues()(0);
    case Kind::fe_basis: {
        double b = 0.0;
        for (std::size_t i = 0; i < star_.size(); ++i) b = std::max(b, hat_gradient(star_[i], local_[i]).norm());
        return direction_.norm() * b;
    }
    case Kind::windowed:
        return direction_.norm() * (4.0 + std::sqrt(2.0)) / width_;
    }
    return 0.0;
}

std::string TestField::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::bump:
        os << "bump(center=" << center_.transpose() << ", width=" << width_ << ", dir=" << direction_.transpose()
           << ")";
        break;
    case Kind::affine:
        os << "affine";
        break;
    case Kind::fe_basis:
        os << "fe_basis(at=" << center_.transpose() << ")";
        break;
    case Kind::windowed:
        os << "windowed(mode=" << mode_ << ", dir=" << direction_.transpose() << ")";
        break;
    }
    return os.str();
}

double boundary_mismatch(const TestField& psi, const DeformationField& y) {
    double m = 0.0;
    for (int v = 0; v < y.mesh().num_vertices(); ++v)
        if (y.mesh().is_dirichlet(v)) m = std::max(m, psi.value(y.positions()[v]).norm());
    return m;
}

DeformationField outer_compose(const DeformationField& y, const TestField& psi, double t) {
    if (t == 0.0) return y;
    const double bound = psi.jacobian_bound();
    if (std::abs(t) * bound >= 1.0)
        throw PreconditionError("outer_compose: need |t| sup|D psi| < 1", bound > 0 ? 1.0 / bound : 0.0);
    std::vector<Vec2> p = y.positions();
    for (auto& q : p) q += t * psi.value(q);
    return DeformationField(y.mesh_ptr(), std::move(p));
}

double elastic_first_variation(const DeformationField& y, const TestField& psi, const BulkDensity& W,
                               ElasticRule rule) {
    const Mesh& mesh = y.mesh();
    const int nt = mesh.num_triangles();
    std::vector<Vec2> pv(mesh.num_vertices());
    if (rule == ElasticRule::nodal)
        for (int v = 0; v < mesh.num_vertices(); ++v) pv[v] = psi.value(y.positions()[v]);
    std::vector<double> parts(nt);
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t begin, std::size_t end) {
        for (std::size_t ti = begin; ti < end; ++ti) {
            const int t = static_cast<int>(ti);
            const auto& tri = mesh.triangles()[t];
            const Mat2 F = element_gradient(y, t);
            const Mat2 P = W.stress(F);
            double v;
            if (rule == ElasticRule::nodal) {
                Mat2 dpsi;
                dpsi.col(0) = pv[tri[1]] - pv[tri[0]];
                dpsi.col(1) = pv[tri[2]] - pv[tri[0]];
                // (DW F^T) : (G F^{-1}) = DW : G with G the reference gradient of
                // the interpolated velocity.
                v = (P.array() * (dpsi * mesh.reference_inverse(t)).array()).sum();
            } else {
                const Vec2 c = (y.positions()[tri[0]] + y.positions()[tri[1]] + y.positions()[tri[2]]) / 3.0;
                v = ((P * F.transpose()).array() * psi.jacobian(c).array()).sum();
            }
            parts[t] = mesh.triangle_area(t) * v;
        }
    });
    return pairwise_sum(parts);
}

double anisotropic_tangential_divergence(const Mat2& Dpsi, const Vec2& nu, const SurfaceDensity& phi) {
    return Dpsi.trace() - phi.gradient(nu).dot(Dpsi.transpose() * nu) / phi.value(nu);
}

double anisotropic_tangential_divergence(const TestField& psi, const Vec2& nu, const Vec2& point,
                                         const SurfaceDensity& phi) {
    return anisotropic_tangential_divergence(psi.jacobian(point), nu, phi);
}

double surface_first_variation(const std::vector<Polyline>& cavities, const TestField& psi,
                               const SurfaceDensity& phi, EdgeRule rule) {
    std::vector<double> per;
    for (const auto& poly : cavities) {
        const std::size_t n = poly.size();
        const double orient = signed_area(poly) >= 0 ? 1.0 : -1.0;
        std::vector<double> parts(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = poly[i];
            const Vec2& b = poly[(i + 1) % n];
            const Vec2 e = orient * (b - a);
            const double len = e.norm();
            if (len == 0.0) continue;
            const Vec2 nu = Vec2(e.y(), -e.x()) / len;
            if (rule == EdgeRule::exact) {
                // phi(nu) div_phi psi = Dphi(nu) . R^T (D psi tau), whose edge
                // integral telescopes to Dphi(nu) . R^T (psi(b) - psi(a)).
                const Vec2 dpsi = orient * (psi.value(b) - psi.value(a));
                parts[i] = phi.gradient(nu).dot(Vec2(dpsi.y(), -dpsi.x()));
            } else {
                parts[i] = len * phi.value(nu) *
                           anisotropic_tangential_divergence(psi, nu, 0.5 * (a + b), phi);
            }
        }
        per.push_back(pairwise_sum(parts));
    }
    return pairwise_sum(per);
}

double surface_first_variation(const std::vector<CavityRecord>& cavities, const TestField& psi,
                               const SurfaceDensity& phi, EdgeRule rule) {
    std::vector<Polyline> polys;
    for (const auto& c : cavities) polys.push_back(c.boundary);
    return surface_first_variation(polys, psi, phi, rule);
}

namespace {

std::vector<Polyline> all_cavities(const DeformationField& y) {
    std::vector<Polyline> out;
    for (int k = 0; k < static_cast<int>(y.mesh().punctures().size()); ++k) out.push_back(cavity_boundary(y, k));
    return out;
}

double composed_energy(const DeformationField& y, const TestField& psi, double t, const BulkDensity& W,
                       const SurfaceDensity& phi) {
    const DeformationField z = outer_compose(y, psi, t);
    double s = 0.0;
    for (const auto& c : all_cavities(z)) s += anisotropic_perimeter(c, phi);
    return bulk_term(z, W) + s;
}

} // namespace

VariationReport first_variation_residual(const DeformationField& y, const TestField& psi, const BulkDensity& W,
                                         const SurfaceDensity& phi, double fd_step) {
    VariationReport r;
    r.elastic = elastic_first_variation(y, psi, W);
    r.surface = surface_first_variation(all_cavities(y), psi, phi);
    r.total = r.elastic + r.surface;
    const double bound = psi.jacobian_bound();
    const double h = bound > 0 ? std::min(fd_step, 0.5 / bound) : fd_step;
    r.fd_value = (composed_energy(y, psi, h, W, phi) - composed_energy(y, psi, -h, W, phi)) / (2 * h);
    r.fd_gap = std::abs(r.total - r.fd_value) / (std::abs(r.fd_value) + 1e-12);
    return r;
}

std::vector<TestField> certification_battery(const DeformationField& y) {
    const Mesh& mesh = y.mesh();
    std::vector<Vec2> gamma;
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (mesh.is_dirichlet(v)) gamma.push_back(y.positions()[v]);
    auto gamma_distance = [&](const Vec2& p) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& g : gamma) d = std::min(d, (g - p).norm());
        return d;
    };
    std::vector<TestField> out;
    for (int k = 0; k < static_cast<int>(mesh.punctures().size()); ++k) {
        const Polyline c = cavity_boundary(y, k);
        const Vec2 s = polygon_centroid(c);
        double rbar = 0.0;
        for (const auto& p : c) rbar += (p - s).norm();
        rbar /= static_cast<double>(c.size());
        for (int j = 0; j < 8; ++j) {
            const double th = 2 * M_PI * j / 8;
            const Vec2 e(std::cos(th), std::sin(th));
            const Vec2 center = s + rbar * e;
            const double w = std::min(0.75 * rbar, 0.9 * gamma_distance(center));
            if (!(w > 0)) continue;
            out.push_back(TestField::bump(center, w, e));
            out.push_back(TestField::bump(center, w, perp(e)));
        }
    }
    Vec2 center = Vec2::Zero();
    for (const auto& p : y.positions()) center += p;
    center /= static_cast<double>(y.positions().size());
    double radius = gamma.empty() ? 0.0 : gamma_distance(center);
    if (gamma.empty()) {
        for (const auto& p : y.positions()) radius = std::max(radius, (p - center).norm());
        radius *= 0.9;
    }
    if (radius > 0)
        for (int mode = 0; mode < 4; ++mode) {
            out.push_back(TestField::windowed(center, radius, Vec2(1, 0), mode));
            out.push_back(TestField::windowed(center, radius, Vec2(0, 1), mode));
        }
    return out;
}

double nodal_variation(const DeformationField& y, const std::vector<Vec2>& grad, const TestField& psi) {
    std::vector<double> parts(grad.size());
    for (std::size_t v = 0; v < grad.size(); ++v) parts[v] = grad[v].dot(psi.value(y.positions()[v]));
    return pairwise_sum(parts);
}

} // namespace cavelast
