#include "cavelast/energy.hpp"
#include "cavelast/inverse.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace cavelast;

namespace {

std::shared_ptr<const Mesh> share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

DeformationField radial_map(const std::shared_ptr<const Mesh>& mesh, double c) {
    return DeformationField::from_map(mesh, [c](const Vec2& x) { return oracle::radial_cavitation(x, c); });
}

} // namespace

TEST_CASE("inverting points") {
    const auto disk = share(disk_mesh(Vec2::Zero(), 1.0, 10));
    const InversePoint a = invert_point(DeformationField::identity(disk), Vec2(0.3, 0.2));
    CHECK(a.kind == InversePoint::Kind::reference);
    CHECK((a.x - Vec2(0.3, 0.2)).norm() < 1e-14);
    const InversePoint b =
        invert_point(DeformationField::from_map(disk, [](const Vec2& x) { return Vec2(2 * x); }), Vec2(0.5, 0));
    CHECK(b.kind == InversePoint::Kind::reference);
    CHECK((b.x - Vec2(0.25, 0)).norm() < 1e-14);
    CHECK(invert_point(DeformationField::identity(disk), Vec2(3, 0)).kind == InversePoint::Kind::outside);

    const auto holed = share(annulus_mesh(Vec2::Zero(), 0.05, 1.0, 64));
    const DeformationField y = radial_map(holed, 0.3);
    const InversePoint c = invert_point(y, Vec2(0.1, 0));
    CHECK(c.kind == InversePoint::Kind::marker);
    CHECK((c.x - default_marker(*holed)).norm() == 0.0);
    CHECK(default_marker(*holed).norm() > 1.0 + 1e-9);
}

TEST_CASE("inverse gradients") {
    const auto disk = share(disk_mesh(Vec2::Zero(), 1.0, 10));
    CHECK((inverse_gradient(DeformationField::identity(disk), Vec2(0.1, -0.3)) - Mat2::Identity()).norm() < 1e-13);
    Mat2 expect;
    expect << 0.5, 0, 0, 2;
    const DeformationField s =
        DeformationField::from_map(disk, [](const Vec2& x) { return Vec2(2 * x.x(), 0.5 * x.y()); });
    CHECK((inverse_gradient(s, Vec2(0.4, 0.1)) - expect).norm() < 1e-13);

    const auto holed = share(annulus_mesh(Vec2::Zero(), 0.05, 1.0, 64));
    const DeformationField y = radial_map(holed, 0.3);
    CHECK_THROWS_AS(inverse_gradient(y, Vec2(0.05, 0.05)), DomainError);
    CHECK_THROWS_AS(inverse_gradient(y, Vec2(3, 0)), DomainError);

    // Finite differences of the inverse, away from deformed element edges.
    const InverseMap map(y);
    const double delta = 0.01, h = delta / 10;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    while (checked < 200) {
        const Vec2 xi(u(rng), u(rng));
        const InversePoint p = map.invert(xi);
        if (p.kind != InversePoint::Kind::reference) continue;
        Mat2 fd;
        bool same = true;
        for (int j = 0; j < 2; ++j) {
            Vec2 e = Vec2::Zero();
            e[j] = h;
            const InversePoint pp = map.invert(xi + e), pm = map.invert(xi - e);
            if (pp.triangle != p.triangle || pm.triangle != p.triangle) same = false;
            fd.col(j) = (pp.x - pm.x) / (2 * h);
        }
        if (!same) continue;
        CHECK((map.gradient(xi) - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
        ++checked;
    }
}

TEST_CASE("round trip and gradient identity on random points") {
    const auto holed = share(annulus_mesh(Vec2(0.1, -0.1), 0.05, 1.0, 64));
    const DeformationField y = DeformationField::from_map(holed, [](const Vec2& x) {
        const Vec2 d = x - Vec2(0.1, -0.1);
        const double R = d.norm();
        return Vec2(d * (std::sqrt(R * R + 0.04) / R) + Vec2(0.1 * std::sin(2 * x.y()), 0.0));
    });
    REQUIRE(min_det(y).value > 0);
    const InverseMap map(y);
    const double delta = 0.01;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-1.3, 1.3);
    int n = 0;
    while (n < 10000) {
        const Vec2 xi(u(rng), u(rng));
        const InversePoint p = map.invert(xi);
        if (p.kind != InversePoint::Kind::reference) continue;
        ++n;
        CHECK((y.evaluate(p.x) - xi).norm() <= 2 * delta);
        const Mat2 prod = map.gradient(xi) * element_gradient(y, p.triangle);
        CHECK((prod - Mat2::Identity()).norm() <= 1e-10);
    }
}

TEST_CASE("inverse field invariants") {
    const double rho = 0.05, c = 0.3;
    const auto holed = share(annulus_mesh(Vec2::Zero(), rho, 1.0, 128));
    const DeformationField y = radial_map(holed, c);
    const double delta = 0.01;
    const InverseField f = build_inverse_field(y, delta);
    const Polyline cav = cavity_boundary(y, 0);
    double sym_diff = 0.0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            const std::size_t idx = f.grid.index(i, j);
            const Vec2 xi = f.grid.center(i, j);
            const bool marker = f.kind[idx] == InversePoint::Kind::marker;
            const bool in_cavity = winding_number_unchecked(cav, xi) != 0;
            if (marker != in_cavity) sym_diff += delta * delta;
            if (f.kind[idx] == InversePoint::Kind::reference) CHECK((y.evaluate(f.values[idx]) - xi).norm() <= 2 * delta);
        }
    CHECK(sym_diff <= 4 * delta * perimeter(cav));
}

TEST_CASE("jump sets") {
    const double delta = 0.01;
    const auto disk = share(disk_mesh(Vec2::Zero(), 1.0, 10));
    CHECK(extract_jump_set(build_inverse_field(DeformationField::identity(disk), delta)).empty());

    const double rho = 0.05, c = 0.3;
    const auto holed = share(annulus_mesh(Vec2::Zero(), rho, 1.0, 128));
    const DeformationField y = radial_map(holed, c);
    const InverseField f = build_inverse_field(y, delta);
    const auto jumps = extract_jump_set(f);
    REQUIRE(jumps.size() == 1);
    CHECK(oracle::max_circle_deviation(jumps[0].points, Vec2::Zero(), std::hypot(rho, c)) <= 2 * delta);
    CHECK(hausdorff_distance(jumps[0].points, cavity_boundary(y, 0)) <= 3 * delta);
    CHECK(jumps[0].normals.size() == jumps[0].points.size());
    for (std::size_t s = 0; s < jumps[0].points.size(); ++s) {
        const Vec2 mid = 0.5 * (jumps[0].points[s] + jumps[0].points[(s + 1) % jumps[0].points.size()]);
        CHECK(jumps[0].normals[s].dot(mid) > 0.0);
        CHECK(jumps[0].amplitude[s] == doctest::Approx((default_marker(*holed) - Vec2::Zero()).norm()).epsilon(0.05));
    }

    const Vec2 other(-7.0, 4.0);
    const auto moved = extract_jump_set(build_inverse_field(y, delta, other));
    REQUIRE(moved.size() == 1);
    CHECK(moved[0].points == jumps[0].points);
    CHECK(moved[0].normals == jumps[0].normals);
    CHECK(moved[0].amplitude != jumps[0].amplitude);
}

TEST_CASE("two cavities give two jump contours") {
    const auto mesh = share(
        delaunay_mesh(DomainShape::disk, Vec2::Zero(), 1.0, {{Vec2(-0.4, 0), 0.05}, {Vec2(0.4, 0), 0.05}}, 0.06));
    const DeformationField y = DeformationField::from_map(mesh, [](const Vec2& x) {
        return localized_cavity_map(localized_cavity_map(x, Vec2(-0.4, 0), 0.15, 0.35), Vec2(0.4, 0), 0.2, 0.35);
    });
    const double delta = 0.005;
    const auto jumps = extract_jump_set(build_inverse_field(y, delta));
    REQUIRE(jumps.size() == 2);
    for (const auto& j : jumps) {
        const double d0 = hausdorff_distance(j.points, cavity_boundary(y, 0));
        const double d1 = hausdorff_distance(j.points, cavity_boundary(y, 1));
        CHECK(std::min(d0, d1) <= 3 * delta);
    }
}

TEST_CASE("area formula") {
    const double delta = 0.005;
    auto id = [](double h) { return h; };
    const auto disk = share(disk_mesh(Vec2::Zero(), 1.0, 12));
    const AreaFormulaReport a = area_formula_check(DeformationField::identity(disk), id, delta);
    CHECK(a.reference_side == doctest::Approx(disk->area()).epsilon(1e-12));
    CHECK(a.image_side == doctest::Approx(disk->area()).epsilon(0.02));
    const AreaFormulaReport b =
        area_formula_check(DeformationField::from_map(disk, [](const Vec2& x) { return Vec2(2 * x); }), id, delta);
    CHECK(b.reference_side == doctest::Approx(disk->area()).epsilon(1e-12));
    CHECK(b.relative_gap <= 0.02);

    const auto holed = share(annulus_mesh(Vec2::Zero(), 0.05, 1.0, 64));
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0, 0.003);
    DeformationField y = radial_map(holed, 0.25);
    for (int v = 0; v < holed->num_vertices(); ++v)
        if (!holed->is_dirichlet(v) && holed->vertices()[v].norm() > 0.2) y.positions()[v] += Vec2(n(rng), n(rng));
    REQUIRE(min_det(y).value > 0);
    for (const auto& f : std::vector<std::function<double(double)>>{id, [](double h) { return h * h; },
                                                                     [](double h) { return 1.0 + std::log(1 + h); }}) {
        const AreaFormulaReport r = area_formula_check(y, f, delta);
        CHECK(r.relative_gap <= 0.02);
    }
}
