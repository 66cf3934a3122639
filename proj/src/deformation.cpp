#include "cavelast/deformation.hpp"

#include "cavelast/numerics.hpp"

#include <cmath>
#include <sstream>

namespace cavelast {

BoundaryData BoundaryData::affine_stretch(double lambda, const Vec2& center) {
    if (!(lambda > 0)) throw ConfigError("lambda", 0, "stretch must be positive");
    BoundaryData d;
    d.kind_ = BoundaryKind::affine_stretch;
    d.lambda_ = lambda;
    d.center_ = center;
    return d;
}

BoundaryData BoundaryData::radial_stretch(double lambda, const Vec2& center) {
    if (!(lambda > 0)) throw ConfigError("lambda", 0, "stretch must be positive");
    BoundaryData d;
    d.kind_ = BoundaryKind::radial_stretch;
    d.lambda_ = lambda;
    d.center_ = center;
    return d;
}

BoundaryData BoundaryData::user_table(std::vector<std::pair<Vec2, Vec2>> rows) {
    if (rows.empty()) throw ConfigError("table", 0, "boundary table is empty");
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            if ((rows[i].first - rows[j].first).norm() <= 1e-9 && (rows[i].second - rows[j].second).norm() > 1e-12)
                throw ConfigError("table", 0, "boundary table is not single-valued");
    BoundaryData d;
    d.kind_ = BoundaryKind::user_table;
    d.rows_ = std::move(rows);
    return d;
}

Vec2 BoundaryData::operator()(const Vec2& x) const {
    switch (kind_) {
    case BoundaryKind::affine_stretch:
        return center_ + Vec2(lambda_ * (x.x() - center_.x()), x.y() - center_.y());
    case BoundaryKind::radial_stretch:
        return center_ + lambda_ * (x - center_);
    case BoundaryKind::user_table:
        for (const auto& [p, q] : rows_)
            if ((p - x).norm() <= 1e-9) return q;
        {
            std::ostringstream os;
            os << "boundary table has no row for (" << x.x() << ", " << x.y() << ")";
            throw ConfigError("table", 0, os.str());
        }
    }
    return x;
}

DeformationField::DeformationField(std::shared_ptr<const Mesh> mesh, std::vector<Vec2> positions)
    : mesh_(std::move(mesh)), positions_(std::move(positions)) {
    if (!mesh_) throw ArgumentError("deformation needs a mesh");
    if (static_cast<int>(positions_.size()) != mesh_->num_vertices())
        throw ArgumentError("deformation has " + std::to_string(positions_.size()) + " positions for " +
                            std::to_string(mesh_->num_vertices()) + " vertices");
}

DeformationField DeformationField::identity(std::shared_ptr<const Mesh> mesh) {
    auto v = mesh->vertices();
    return DeformationField(std::move(mesh), std::move(v));
}

DeformationField DeformationField::from_map(std::shared_ptr<const Mesh> mesh,
                                            const std::function<Vec2(const Vec2&)>& f) {
    std::vector<Vec2> v;
    v.reserve(mesh->vertices().size());
    for (const auto& x : mesh->vertices()) v.push_back(f(x));
    return DeformationField(std::move(mesh), std::move(v));
}

void DeformationField::apply_boundary(const BoundaryData& d) {
    for (int v = 0; v < mesh_->num_vertices(); ++v)
        if (mesh_->is_dirichlet(v)) positions_[v] = d(mesh_->vertices()[v]);
}

Vec2 DeformationField::evaluate(const Vec2& x) const {
    const auto hit = mesh_->locator().locate(x, 1e-9);
    if (!hit) {
        std::ostringstream os;
        os << "point (" << x.x() << ", " << x.y() << ") is outside the mesh";
        throw GeometryError(os.str());
    }
    const auto& tri = mesh_->triangles()[hit->triangle];
    const auto& l = hit->barycentric;
    return l[0] * positions_[tri[0]] + l[1] * positions_[tri[1]] + l[2] * positions_[tri[2]];
}

Mat2 element_gradient(const DeformationField& y, int t) {
    const auto& tri = y.mesh().triangles().at(t);
    const auto& p = y.positions();
    Mat2 ds;
    ds.col(0) = p[tri[1]] - p[tri[0]];
    ds.col(1) = p[tri[2]] - p[tri[0]];
    return ds * y.mesh().reference_inverse(t);
}

MinDet min_det(const DeformationField& y) {
    MinDet m{std::numeric_limits<double>::infinity(), -1};
    for (int t = 0; t < y.mesh().num_triangles(); ++t) {
        const double d = element_gradient(y, t).determinant();
        if (d < m.value) m = {d, t};
    }
    return m;
}

Polyline trace_on_circle(const DeformationField& y, const Vec2& center, double r, int m) {
    auto name = [&] {
        std::ostringstream os;
        os << "circle S((" << center.x() << ", " << center.y() << "), " << r << ")";
        return os.str();
    };
    if (!(r > 0) || m < 3) throw ArgumentError(name() + ": need r > 0 and m >= 3");
    for (const auto& pk : y.mesh().punctures()) {
        const double d = (center - pk.center).norm();
        if (std::abs(d - r) < pk.radius) throw GeometryError(name() + " enters a puncture");
    }
    Polyline out;
    out.reserve(m);
    for (int j = 0; j < m; ++j) {
        const double t = 2.0 * M_PI * j / m;
        const Vec2 x = center + r * Vec2(std::cos(t), std::sin(t));
        const auto hit = y.mesh().locator().locate(x, 1e-9);
        if (!hit) throw GeometryError(name() + " leaves the meshed domain");
        const auto& tri = y.mesh().triangles()[hit->triangle];
        const auto& l = hit->barycentric;
        out.push_back(l[0] * y.positions()[tri[0]] + l[1] * y.positions()[tri[1]] + l[2] * y.positions()[tri[2]]);
    }
    return out;
}

MollifyResult mollify(const DeformationField& y, double sigma) {
    if (!(sigma >= 0)) throw ArgumentError("mollify: sigma must be non-negative");
    if (sigma == 0.0) return {y, min_det(y), min_det(y).value > 0};
    const Mesh& mesh = y.mesh();
    const auto& x = mesh.vertices();
    const int nv = mesh.num_vertices();
    const double reach = 3.0 * sigma;
    // Bin vertices so neighbor queries stay local.
    Vec2 lo = x[0], hi = x[0];
    for (const auto& p : x) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const int nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / reach)) + 1);
    const int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / reach)) + 1);
    std::vector<std::vector<int>> bins(static_cast<std::size_t>(nx) * ny);
    auto bin_of = [&](const Vec2& p) {
        return std::pair<int, int>{std::clamp(static_cast<int>((p.x() - lo.x()) / reach), 0, nx - 1),
                                   std::clamp(static_cast<int>((p.y() - lo.y()) / reach), 0, ny - 1)};
    };
    for (int v = 0; v < nv; ++v) {
        const auto [i, j] = bin_of(x[v]);
        bins[static_cast<std::size_t>(j) * nx + i].push_back(v);
    }
    std::vector<Vec2> out = y.positions();
    parallel_for(static_cast<std::size_t>(nv), [&](std::size_t begin, std::size_t end) {
        for (std::size_t vi = begin; vi < end; ++vi) {
            const int v = static_cast<int>(vi);
            if (mesh.is_dirichlet(v)) continue;
            const auto [bi, bj] = bin_of(x[v]);
            Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
            Eigen::Matrix<double, 3, 2> rhs = Eigen::Matrix<double, 3, 2>::Zero();
            for (int j = std::max(0, bj - 1); j <= std::min(ny - 1, bj + 1); ++j)
                for (int i = std::max(0, bi - 1); i <= std::min(nx - 1, bi + 1); ++i)
                    for (int u : bins[static_cast<std::size_t>(j) * nx + i]) {
                        const Vec2 d = x[u] - x[v];
                        const double r2 = d.squaredNorm();
                        if (r2 > reach * reach) continue;
                        const double w = std::exp(-0.5 * r2 / (sigma * sigma));
                        const Eigen::Vector3d phi(1.0, d.x(), d.y());
                        normal += w * phi * phi.transpose();
                        rhs += w * phi * y.positions()[u].transpose();
                    }
            Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
            if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
                // Too few neighbors for a linear fit; fall back to the weighted mean.
                out[v] = (rhs.row(0) / normal(0, 0)).transpose();
                continue;
            }
            const Eigen::Matrix<double, 3, 2> coef = ldlt.solve(rhs);
            out[v] = coef.row(0).transpose();
        }
    });
    DeformationField z(y.mesh_ptr(), std::move(out));
    const MinDet md = min_det(z);
    return {std::move(z), md, md.value > 0};
}

Vec2 localized_cavity_map(const Vec2& x, const Vec2& a, double c, double L) {
    if (!(c >= 0) || !(L > c)) throw ArgumentError("localized_cavity_map: need 0 <= c < L");
    const Vec2 d = x - a;
    const double R = d.norm();
    if (R >= L || R == 0.0) return x;
    const double f = std::sqrt(R * R + c * c * (1.0 - R * R / (L * L)));
    return a + d * (f / R);
}

Vec2 radial_seed_map(const Vec2& x, const Vec2& center, double rho, double r_out, double s, double lambda) {
    const Vec2 d = x - center;
    const double R = d.norm();
    if (R == 0.0) return center;
    const double t = (R * R - rho * rho) / (r_out * r_out - rho * rho);
    const double r = std::sqrt(std::max(0.0, s * s + (lambda * lambda * r_out * r_out - s * s) * t));
    return center + d * (r / R);
}

} // namespace cavelast
