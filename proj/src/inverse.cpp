#include "cavelast/inverse.hpp"

#include "cavelast/degree.hpp"
#include "cavelast/numerics.hpp"

#include <cmath>

namespace cavelast {

Vec2 default_marker(const Mesh& mesh) { return mesh.centroid() + 3.0 * mesh.diameter() * Vec2(1.0, 0.0); }

InverseMap::InverseMap(const DeformationField& y, std::optional<Vec2> marker)
    : y_(y), marker_(marker ? *marker : default_marker(y.mesh())),
      locator_(y.positions(), y.mesh().triangles()), outer_(boundary_images(y, Subdomain::outer_boundary())) {}

InversePoint InverseMap::invert(const Vec2& xi) const {
    if (const auto hit = locator_.locate(xi, 1e-12)) {
        const auto& tri = y_.mesh().triangles()[hit->triangle];
        const auto& l = hit->barycentric;
        const auto& v = y_.mesh().vertices();
        return {InversePoint::Kind::reference, l[0] * v[tri[0]] + l[1] * v[tri[1]] + l[2] * v[tri[2]],
                hit->triangle};
    }
    int deg = 0;
    for (const auto& loop : outer_) deg += winding_number_unchecked(loop, xi);
    if (deg != 0) return {InversePoint::Kind::marker, marker_, -1};
    return {InversePoint::Kind::outside, xi, -1};
}

Mat2 InverseMap::gradient(const Vec2& xi) const {
    const InversePoint p = invert(xi);
    if (p.kind == InversePoint::Kind::marker)
        throw DomainError("inverse gradient: point lies in a cavity, no absolutely continuous part here");
    if (p.kind == InversePoint::Kind::outside) throw DomainError("inverse gradient: point outside the image");
    return element_gradient(y_, p.triangle).inverse();
}

InversePoint invert_point(const DeformationField& y, const Vec2& xi) { return InverseMap(y).invert(xi); }

Mat2 inverse_gradient(const DeformationField& y, const Vec2& xi) { return InverseMap(y).gradient(xi); }

InverseField build_inverse_field(const DeformationField& y, double delta, std::optional<Vec2> marker) {
    const InverseMap map(y, marker);
    Vec2 lo = y.positions()[0], hi = lo;
    for (const auto& p : y.positions()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    InverseField f;
    f.grid = Grid::covering(lo, hi, delta);
    f.marker = map.marker();
    f.kind.resize(f.grid.size());
    f.values.resize(f.grid.size());
    f.triangle.resize(f.grid.size());
    parallel_for(static_cast<std::size_t>(f.grid.ny), [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j)
            for (int i = 0; i < f.grid.nx; ++i) {
                const std::size_t idx = f.grid.index(i, static_cast<int>(j));
                const InversePoint p = map.invert(f.grid.center(i, static_cast<int>(j)));
                f.kind[idx] = p.kind;
                f.values[idx] = p.x;
                f.triangle[idx] = p.triangle;
            }
    });
    return f;
}

std::vector<JumpCurve> extract_jump_set(const InverseField& inv) {
    std::vector<char> in(inv.kind.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = inv.kind[i] == InversePoint::Kind::marker;
    const Grid& g = inv.grid;
    std::vector<JumpCurve> out;
    for (auto& loop : marching_squares(in, g)) {
        JumpCurve c;
        const std::size_t n = loop.size();
        for (std::size_t s = 0; s < n; ++s) {
            const Vec2 tau = loop[(s + 1) % n] - loop[s];
            const Vec2 nu = Vec2(tau.y(), -tau.x()).normalized();
            c.normals.push_back(nu);
            const Vec2 probe = 0.5 * (loop[s] + loop[(s + 1) % n]) + g.delta * nu;
            const int ci = static_cast<int>(std::floor((probe.x() - g.origin.x()) / g.delta));
            const int cj = static_cast<int>(std::floor((probe.y() - g.origin.y()) / g.delta));
            double amp = 0.0, best = std::numeric_limits<double>::infinity();
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int i = ci + di, j = cj + dj;
                    if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) continue;
                    const std::size_t idx = g.index(i, j);
                    if (inv.kind[idx] != InversePoint::Kind::reference) continue;
                    const double d = (g.center(i, j) - probe).norm();
                    if (d < best) {
                        best = d;
                        amp = (inv.values[idx] - inv.marker).norm();
                    }
                }
            c.amplitude.push_back(amp);
        }
        c.points = std::move(loop);
        out.push_back(std::move(c));
    }
    return out;
}

AreaFormulaReport area_formula_check(const DeformationField& y, const std::function<double(double)>& f,
                                     double delta) {
    const InverseField inv = build_inverse_field(y, delta);
    std::vector<double> img;
    for (std::size_t i = 0; i < inv.kind.size(); ++i)
        if (inv.kind[i] == InversePoint::Kind::reference)
            img.push_back(f(1.0 / element_gradient(y, inv.triangle[i]).determinant()) * delta * delta);
    std::vector<double> ref(y.mesh().num_triangles());
    for (int t = 0; t < y.mesh().num_triangles(); ++t) {
        const double J = element_gradient(y, t).determinant();
        ref[t] = y.mesh().triangle_area(t) * J * f(1.0 / J);
    }
    AreaFormulaReport r;
    r.image_side = pairwise_sum(img);
    r.reference_side = pairwise_sum(ref);
    r.relative_gap = std::abs(r.image_side - r.reference_side) / std::max(std::abs(r.reference_side), 1e-300);
    return r;
}

} // namespace cavelast
