#include "cavelast/energy.hpp"

#include "cavelast/numerics.hpp"

#include <cmath>
#include <sstream>

namespace cavelast {

namespace {

Mat2 gradient_from(const std::vector<Vec2>& p, const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles()[t];
    Mat2 ds;
    ds.col(0) = p[tri[1]] - p[tri[0]];
    ds.col(1) = p[tri[2]] - p[tri[0]];
    return ds * mesh.reference_inverse(t);
}

// Quintic smoothstep, C^2 on [0, 1].
double smoothstep(double t) {
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    return t * t * t * (10 - 15 * t + 6 * t * t);
}

double smoothstep_derivative(double t) {
    if (t <= 0 || t >= 1) return 0.0;
    return 30 * t * t * (1 - t) * (1 - t);
}

} // namespace

double bulk_term(const DeformationField& y, const BulkDensity& W) {
    const Mesh& mesh = y.mesh();
    const int nt = mesh.num_triangles();
    std::vector<double> e(nt), det(nt);
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            const Mat2 F = gradient_from(y.positions(), mesh, static_cast<int>(t));
            det[t] = F.determinant();
            e[t] = det[t] > 0 ? mesh.triangle_area(static_cast<int>(t)) * W.energy(F) : 0.0;
        }
    });
    for (int t = 0; t < nt; ++t)
        if (!(det[t] > 0)) {
            std::ostringstream os;
            os << "bulk energy undefined: det Dy = " << det[t] << " <= 0";
            throw InfeasibleError(os.str(), t);
        }
    return pairwise_sum(e);
}

double anisotropic_perimeter(const Polyline& boundary, const SurfaceDensity& phi) {
    const std::size_t n = boundary.size();
    const double orient = signed_area(boundary) >= 0 ? 1.0 : -1.0;
    std::vector<double> parts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = orient * (boundary[(i + 1) % n] - boundary[i]);
        // |e| phi(nu) = phi(|e| nu) with |e| nu = (e_y, -e_x).
        parts[i] = phi.value(Vec2(e.y(), -e.x()));
    }
    return pairwise_sum(parts);
}

Polyline cavity_boundary(const DeformationField& y, int k) {
    const auto& loop = y.mesh().puncture_loop(k);
    Polyline p;
    p.reserve(loop.size());
    for (auto it = loop.rbegin(); it != loop.rend(); ++it) p.push_back(y.positions()[*it]);
    return p;
}

EnergyBreakdown total_energy(const DeformationField& y, const BulkDensity& W, const SurfaceDensity& phi,
                             const DetectionOptions& opts) {
    EnergyBreakdown out;
    out.bulk = bulk_term(y, W);
    const Mesh& mesh = y.mesh();
    const double delta = opts.delta > 0 ? opts.delta : 0.01 * mesh.diameter();
    std::vector<double> surf, artifact;
    for (int k = 0; k < static_cast<int>(mesh.punctures().size()); ++k) {
        CavityRecord rec;
        rec.site = mesh.punctures()[k].center;
        rec.puncture_radius = mesh.punctures()[k].radius;
        rec.boundary = cavity_boundary(y, k);
        rec.area = signed_area(rec.boundary);
        rec.aniso_perimeter = anisotropic_perimeter(rec.boundary, phi);
        rec.simple = is_simple(rec.boundary);
        if (!rec.simple) out.warnings.push_back("cavity " + std::to_string(k) + " boundary is self-intersecting");
        surf.push_back(rec.aniso_perimeter);
        Polyline ref;
        for (auto it = mesh.puncture_loop(k).rbegin(); it != mesh.puncture_loop(k).rend(); ++it)
            ref.push_back(mesh.vertices()[*it]);
        artifact.push_back(anisotropic_perimeter(ref, phi));
        if (opts.cross_validate) {
            const double rho = rec.puncture_radius;
            const auto slow = topological_image_point(y, rec.site, {1.15 * rho, 1.1 * rho, 1.05 * rho}, delta, phi);
            out.slow_path_hausdorff.push_back(slow ? hausdorff_distance(slow->boundary, rec.boundary)
                                                   : std::numeric_limits<double>::infinity());
        }
        out.per_cavity.push_back(std::move(rec));
    }
    out.surface = pairwise_sum(surf);
    out.rho_artifact = pairwise_sum(artifact);
    out.total = out.bulk + out.surface;
    if (opts.check_inv && !mesh.punctures().empty()) {
        const InvCircles circles = default_inv_circles(mesh, 4);
        const InvReport rep = check_inv(y, circles.centers, circles.radii, delta);
        out.inv_pass = rep.pass();
        out.inv_violations = rep.total_violations;
    }
    return out;
}

std::string format_breakdown(const EnergyBreakdown& e, const std::string& prefix) {
    std::ostringstream os;
    os.precision(12);
    os << prefix << "total = " << e.total << "\n";
    os << prefix << "bulk = " << e.bulk << "\n";
    os << prefix << "surface = " << e.surface << "\n";
    os << prefix << "rho_artifact = " << e.rho_artifact << "\n";
    os << prefix << "cavities = " << e.per_cavity.size() << "\n";
    for (std::size_t k = 0; k < e.per_cavity.size(); ++k) {
        const auto& c = e.per_cavity[k];
        const std::string p = prefix + "cavity." + std::to_string(k) + ".";
        os << p << "site = " << c.site.x() << " " << c.site.y() << "\n";
        os << p << "puncture_radius = " << c.puncture_radius << "\n";
        os << p << "area = " << c.area << "\n";
        os << p << "aniso_perimeter = " << c.aniso_perimeter << "\n";
        os << p << "simple = " << (c.simple ? 1 : 0) << "\n";
    }
    if (e.inv_pass) os << prefix << "inv_pass = " << (*e.inv_pass ? 1 : 0) << "\n";
    if (e.inv_pass) os << prefix << "inv_violations = " << e.inv_violations << "\n";
    for (std::size_t k = 0; k < e.slow_path_hausdorff.size(); ++k)
        os << prefix << "cavity." << k << ".slow_path_hausdorff = " << e.slow_path_hausdorff[k] << "\n";
    return os.str();
}

double surface_functional_S_sum(const DeformationField& y, const DetectionOptions&) {
    std::vector<double> parts;
    for (int k = 0; k < static_cast<int>(y.mesh().punctures().size()); ++k)
        parts.push_back(perimeter(cavity_boundary(y, k)));
    return pairwise_sum(parts);
}

TestFieldEta cavity_ring_field(const Vec2& a, double r0, double r1, const Vec2& s, double band_lo, double band_hi,
                               double width, double amplitude, double tilt) {
    if (!(r1 > r0) || !(r0 >= 0)) throw ArgumentError("cavity_ring_field: need 0 <= r0 < r1");
    if (!(band_hi >= band_lo) || !(width > 0) || !(band_lo - width > 0))
        throw ArgumentError("cavity_ring_field: band must stay away from the cavity center");
    auto chi = [=](const Vec2& x) {
        const double d = (x - a).norm();
        return smoothstep((r1 - d) / (r1 - r0));
    };
    auto grad_chi = [=](const Vec2& x) -> Vec2 {
        const Vec2 v = x - a;
        const double d = v.norm();
        if (d <= r0 || d >= r1) return Vec2::Zero();
        return -smoothstep_derivative((r1 - d) / (r1 - r0)) / (r1 - r0) * v / d;
    };
    auto g = [=](double rr) {
        if (rr <= band_lo) return smoothstep((rr - (band_lo - width)) / width);
        if (rr >= band_hi) return smoothstep((band_hi + width - rr) / width);
        return 1.0;
    };
    auto dg = [=](double rr) {
        if (rr <= band_lo) return smoothstep_derivative((rr - (band_lo - width)) / width) / width;
        if (rr >= band_hi) return -smoothstep_derivative((band_hi + width - rr) / width) / width;
        return 0.0;
    };
    const double ca = std::cos(tilt), sa = std::sin(tilt);
    auto beta = [=](const Vec2& xi) -> Vec2 {
        const Vec2 v = xi - s;
        const double rr = v.norm();
        if (rr <= band_lo - width || rr >= band_hi + width) return Vec2::Zero();
        const Vec2 er = v / rr;
        const Vec2 dir(ca * er.x() - sa * er.y(), sa * er.x() + ca * er.y());
        return -amplitude * g(rr) * dir;
    };
    auto div_beta = [=](const Vec2& xi) {
        const double rr = (xi - s).norm();
        if (rr <= band_lo - width || rr >= band_hi + width) return 0.0;
        return -amplitude * ca * (dg(rr) + g(rr) / rr);
    };
    TestFieldEta eta;
    eta.value = [=](const Vec2& x, const Vec2& xi) -> Vec2 { return chi(x) * beta(xi); };
    eta.grad_x = [=](const Vec2& x, const Vec2& xi) -> Mat2 { return beta(xi) * grad_chi(x).transpose(); };
    eta.div_xi = [=](const Vec2& x, const Vec2& xi) { return chi(x) * div_beta(xi); };
    return eta;
}

double surface_functional_S_testfield(const DeformationField& y, const TestFieldEta& eta, int order) {
    const Mesh& mesh = y.mesh();
    const TriangleRule rule = triangle_rule(order);
    const int nt = mesh.num_triangles();
    std::vector<double> parts(nt, 0.0);
    std::vector<char> too_big(nt, 0);
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t begin, std::size_t end) {
        for (std::size_t ti = begin; ti < end; ++ti) {
            const int t = static_cast<int>(ti);
            const auto& tri = mesh.triangles()[t];
            const Mat2 F = gradient_from(y.positions(), mesh, t);
            const Mat2 cof = cofactor(F);
            const double J = F.determinant();
            double acc = 0.0;
            for (std::size_t q = 0; q < rule.weights.size(); ++q) {
                const auto& l = rule.barycentric[q];
                const Vec2 x = l[0] * mesh.vertices()[tri[0]] + l[1] * mesh.vertices()[tri[1]] +
                               l[2] * mesh.vertices()[tri[2]];
                const Vec2 xi = l[0] * y.positions()[tri[0]] + l[1] * y.positions()[tri[1]] +
                                l[2] * y.positions()[tri[2]];
                if (eta.value(x, xi).norm() > 1.0 + 1e-12) too_big[t] = 1;
                acc += rule.weights[q] * ((cof.array() * eta.grad_x(x, xi).array()).sum() + eta.div_xi(x, xi) * J);
            }
            parts[t] = mesh.triangle_area(t) * acc;
        }
    });
    for (int t = 0; t < nt; ++t)
        if (too_big[t]) throw ArgumentError("test field exceeds sup norm 1 on triangle " + std::to_string(t));
    return pairwise_sum(parts);
}

double extrapolate_rho_zero(const std::vector<double>& rhos, const std::vector<double>& values) {
    if (rhos.size() != values.size() || rhos.size() < 2) throw ArgumentError("extrapolation needs >= 2 pairs");
    Eigen::MatrixXd A(rhos.size(), 2);
    Eigen::VectorXd b(rhos.size());
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = rhos[i];
        b(i) = values[i];
    }
    const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
    return c(0);
}

DiscreteEnergy discrete_energy(const DeformationField& y, const BulkDensity& W, const SurfaceDensity& phi,
                               std::vector<Vec2>* grad, double det_floor) {
    const Mesh& mesh = y.mesh();
    const int nt = mesh.num_triangles();
    std::vector<double> e(nt), det(nt);
    std::vector<std::array<Vec2, 3>> g(grad ? nt : 0);
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t begin, std::size_t end) {
        for (std::size_t ti = begin; ti < end; ++ti) {
            const int t = static_cast<int>(ti);
            const Mat2 F = gradient_from(y.positions(), mesh, t);
            det[t] = F.determinant();
            if (!(det[t] > det_floor)) {
                e[t] = 0.0;
                continue;
            }
            const double area = mesh.triangle_area(t);
            e[t] = area * W.energy(F);
            if (grad) {
                const Mat2 P = area * W.stress(F) * mesh.reference_inverse(t).transpose();
                g[t][1] = P.col(0);
                g[t][2] = P.col(1);
                g[t][0] = -P.col(0) - P.col(1);
            }
        }
    });
    DiscreteEnergy out;
    out.min_det = std::numeric_limits<double>::infinity();
    for (int t = 0; t < nt; ++t) out.min_det = std::min(out.min_det, det[t]);
    if (!(out.min_det > det_floor)) {
        out.total = out.bulk = std::numeric_limits<double>::infinity();
        return out;
    }
    out.bulk = pairwise_sum(e);
    if (grad) {
        grad->assign(mesh.num_vertices(), Vec2::Zero());
        for (int t = 0; t < nt; ++t)
            for (int k = 0; k < 3; ++k) (*grad)[mesh.triangles()[t][k]] += g[t][k];
    }
    std::vector<double> surf;
    for (int k = 0; k < static_cast<int>(mesh.punctures().size()); ++k) {
        const auto& loop = mesh.puncture_loop(k);
        const std::size_t n = loop.size();
        std::vector<double> parts(n);
        // Loop runs clockwise around the hole; walk it backwards for a
        // counterclockwise cavity polygon.
        for (std::size_t i = 0; i < n; ++i) {
            const int va = loop[(i + 1) % n];
            const int vb = loop[i];
            const Vec2 ev = y.positions()[vb] - y.positions()[va];
            const Vec2 m(ev.y(), -ev.x());
            parts[i] = phi.value(m);
            if (grad && m.squaredNorm() > 0) {
                const Vec2 d = perp(phi.gradient(m));
                (*grad)[vb] += d;
                (*grad)[va] -= d;
            }
        }
        surf.push_back(pairwise_sum(parts));
    }
    out.surface = pairwise_sum(surf);
    out.total = out.bulk + out.surface;
    return out;
}

} // namespace cavelast
