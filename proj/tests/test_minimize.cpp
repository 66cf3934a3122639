#include "cavelast/radial.hpp"
#include "cavelast/variation.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace cavelast;

namespace {

std::shared_ptr<const Mesh> share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

Mat2 diag(double a, double b) {
    Mat2 m;
    m << a, 0, 0, b;
    return m;
}

const BulkDensity& regime_bulk() {
    static const BulkDensity W = BulkDensity::compressible(2, 2, 2, 1.5);
    return W;
}

DeformationField radial_start(const std::shared_ptr<const Mesh>& mesh, double lambda) {
    DeformationField y = DeformationField::from_map(
        mesh, [&](const Vec2& x) { return radial_seed_map(x, Vec2::Zero(), 0.1, 1.0, 1.0, lambda); });
    y.apply_boundary(BoundaryData::radial_stretch(lambda));
    return y;
}

double surface_under(const DeformationField& y, const SurfaceDensity& phi) {
    return anisotropic_perimeter(cavity_boundary(y, 0), phi);
}

void check_log(const MinimizeResult& r, const MinimizeOptions& o) {
    REQUIRE_FALSE(r.log.empty());
    for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].energy <= r.log[i - 1].energy);
    for (const auto& rec : r.log) {
        CHECK(rec.min_det > o.det_floor);
        CHECK(rec.energy == doctest::Approx(rec.bulk + rec.surface).epsilon(1e-12));
    }
}

} // namespace

TEST_CASE("identity boundary data keeps the identity") {
    const auto disk = share(disk_mesh(Vec2::Zero(), 1.0, 24));
    const BulkDensity& W = regime_bulk();
    const SurfaceDensity iso = SurfaceDensity::isotropic();
    const MinimizeOptions o;
    const MinimizeResult r = minimize(DeformationField::identity(disk), W, iso, o);
    CHECK(r.status == MinimizeStatus::converged);
    double drift = 0.0;
    for (int v = 0; v < disk->num_vertices(); ++v) drift = std::max(drift, (r.y.positions()[v] - disk->vertices()[v]).norm());
    CHECK(drift < 1e-8);
    const double e2d = r.log.back().energy;
    CHECK(e2d == doctest::Approx(disk->area() * W.energy(Mat2::Identity())).epsilon(1e-12));

    // A vanishing puncture in the radial problem reproduces the unpunctured energy.
    RadialOptions ro;
    const RadialSolution rs = solve_radial(1.0, W, iso, 1e-4, ro);
    CHECK(std::abs(rs.energy.total - e2d) <= 1e-3 * e2d);
}

TEST_CASE("isotropic radial stretch matches the radial solver") {
    const auto mesh = share(annulus_mesh(Vec2::Zero(), 0.1, 1.0, 64));
    const SurfaceDensity iso = SurfaceDensity::isotropic();
    MinimizeOptions o;
    const MinimizeResult r = minimize(radial_start(mesh, 1.5), regime_bulk(), iso, o);
    CHECK(r.status == MinimizeStatus::converged);
    check_log(r, o);
    CHECK(r.inv.pass());

    const RadialSolution rs = solve_radial(1.5, regime_bulk(), iso, 0.1);
    CHECK(r.log.back().energy == doctest::Approx(rs.energy.total).epsilon(0.02));
    const Polyline cav = cavity_boundary(r.y, 0);
    const double equivalent = std::sqrt(signed_area(cav) / oracle::pi);
    CHECK(equivalent == doctest::Approx(rs.profile.cavity_radius()).epsilon(0.03));
}

TEST_CASE("elliptic surface density elongates the cavity") {
    const auto mesh = share(annulus_mesh(Vec2::Zero(), 0.1, 1.0, 64));
    const SurfaceDensity iso = SurfaceDensity::isotropic();
    const SurfaceDensity ell = SurfaceDensity::elliptic(diag(4, 1));
    const MinimizeOptions o;
    const MinimizeResult e = minimize(radial_start(mesh, 1.5), regime_bulk(), ell, o);
    CHECK(e.status == MinimizeStatus::converged);
    check_log(e, o);
    const Polyline cav = cavity_boundary(e.y, 0);
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : cav) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    CHECK(xmax - xmin > 1.05 * (ymax - ymin));

    const MinimizeResult i = minimize(radial_start(mesh, 1.5), regime_bulk(), iso, o);
    const double iso_under_ell = bulk_term(i.y, regime_bulk()) + surface_under(i.y, ell);
    CHECK(e.log.back().energy <= iso_under_ell);
}

TEST_CASE("minimizer error paths and statuses") {
    const auto mesh = share(annulus_mesh(Vec2::Zero(), 0.1, 1.0, 32));
    const SurfaceDensity iso = SurfaceDensity::isotropic();
    MinimizeOptions o;
    o.max_iters = 3;
    const MinimizeResult r = minimize(radial_start(mesh, 1.5), regime_bulk(), iso, o);
    CHECK(r.status == MinimizeStatus::max_iters);
    CHECK(to_string(MinimizeStatus::max_iters) == "max_iters");

    DeformationField bad = radial_start(mesh, 1.5);
    for (int v = 0; v < mesh->num_vertices(); ++v)
        if (!mesh->is_dirichlet(v)) {
            bad.positions()[v] = Vec2(5, 5);
            break;
        }
    CHECK_THROWS_AS(minimize(bad, regime_bulk(), iso, o), InfeasibleError);
}
