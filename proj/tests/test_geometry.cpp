#include "cavelast/deformation.hpp"
#include "cavelast/polygon.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <map>
#include <sstream>

using namespace cavelast;

namespace {

Mat2 mat(double a, double b, double c, double d) {
    Mat2 m;
    m << a, b, c, d;
    return m;
}

std::shared_ptr<const Mesh> share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

void check_mesh_invariants(const Mesh& m) {
    std::map<std::pair<int, int>, int> uses;
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles()[t];
        const Vec2 e1 = m.vertices()[tri[1]] - m.vertices()[tri[0]];
        const Vec2 e2 = m.vertices()[tri[2]] - m.vertices()[tri[0]];
        CHECK(cross(e1, e2) > 0.0);
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            ++uses[{std::min(a, b), std::max(a, b)}];
        }
    }
    std::size_t boundary = 0;
    for (const auto& [e, n] : uses) {
        CHECK(n <= 2);
        if (n == 1) ++boundary;
    }
    CHECK(boundary == m.boundary_edges().size());
    for (int k = 0; k < static_cast<int>(m.punctures().size()); ++k) {
        const auto& p = m.punctures()[k];
        CHECK(m.puncture_loop(k).size() >= 8);
        for (int v : m.puncture_loop(k)) CHECK((m.vertices()[v] - p.center).norm() <= 1.5 * p.radius);
    }
}

} // namespace

TEST_CASE("generated meshes satisfy the mesh invariants") {
    check_mesh_invariants(annulus_mesh(Vec2::Zero(), 0.1, 1.0, 32));
    check_mesh_invariants(disk_mesh(Vec2(0.5, -0.2), 2.0, 6));
    check_mesh_invariants(square_mesh(Vec2(0, 0), Vec2(1, 1), 7));
    const Mesh d = delaunay_mesh(DomainShape::disk, Vec2::Zero(), 1.0, {{Vec2(-0.4, 0), 0.05}, {Vec2(0.4, 0), 0.05}},
                                 0.08);
    check_mesh_invariants(d);
    CHECK(d.punctures().size() == 2);
    const double hole = 48 / 2.0 * std::sin(2 * oracle::pi / 48) * 0.05 * 0.05;
    CHECK(d.area() == doctest::Approx(oracle::pi - 2 * hole).epsilon(0.01));
    const Mesh s = delaunay_mesh(DomainShape::square, Vec2::Zero(), 1.0, {{Vec2(0.2, 0.1), 0.1}}, 0.1);
    check_mesh_invariants(s);
    CHECK(s.area() == doctest::Approx(4.0 - oracle::pi * 0.01).epsilon(0.002));
}

TEST_CASE("mesh areas and tags") {
    const Mesh sq = square_mesh(Vec2(0, 0), Vec2(2, 1), 4);
    CHECK(sq.area() == doctest::Approx(2.0).epsilon(1e-14));
    for (const auto& e : sq.boundary_edges()) CHECK(e.tag == EdgeTag::dirichlet);
    const Mesh an = annulus_mesh(Vec2::Zero(), 0.1, 1.0, 64);
    int punct = 0;
    for (const auto& e : an.boundary_edges()) punct += e.tag == EdgeTag::puncture;
    CHECK(punct == 64);
    CHECK(an.outer_loops().size() == 1);
    CHECK(an.inradius() == doctest::Approx(std::cos(oracle::pi / 64)).epsilon(1e-9));
}

TEST_CASE("mesh construction rejects bad input") {
    std::vector<Vec2> v = {{0, 0}, {1, 0}, {0, 1}};
    CHECK_THROWS_AS(Mesh(v, {{0, 2, 1}}, {{0, 2}, {2, 1}, {1, 0}}, {}), GeometryError);
    CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}}, {{0, 1}, {1, 2}}, {}), GeometryError);
    CHECK_NOTHROW(Mesh(v, {{0, 1, 2}}, {{0, 1}, {1, 2}, {2, 0}}, {}));
}

TEST_CASE("mesh file round trip") {
    const Mesh m = annulus_mesh(Vec2(0.1, 0.2), 0.1, 1.0, 16);
    std::stringstream ss;
    write_mesh(ss, m);
    CHECK(ss.str().rfind("cavmesh 1", 0) == 0);
    const Mesh r = read_mesh(ss);
    CHECK(r.num_vertices() == m.num_vertices());
    CHECK(r.num_triangles() == m.num_triangles());
    CHECK(r.boundary_edges().size() == m.boundary_edges().size());
    CHECK(r.punctures().size() == 1);
    for (int i = 0; i < m.num_vertices(); ++i) CHECK(r.vertices()[i] == m.vertices()[i]);
    std::istringstream bad("cavmesh 2\n");
    CHECK_THROWS_AS(read_mesh(bad), GeometryError);
}

TEST_CASE("element gradients of affine maps") {
    const auto mesh = share(delaunay_mesh(DomainShape::disk, Vec2::Zero(), 1.0, {{Vec2(0.3, 0.1), 0.05}}, 0.1));
    const DeformationField id = DeformationField::identity(mesh);
    const DeformationField twice = DeformationField::from_map(mesh, [](const Vec2& x) { return Vec2(2 * x); });
    const Mat2 M = mat(1.3, -0.4, 0.2, 0.9);
    const DeformationField aff =
        DeformationField::from_map(mesh, [&](const Vec2& x) { return Vec2(M * x + Vec2(0.5, -1.0)); });
    for (int t = 0; t < mesh->num_triangles(); ++t) {
        CHECK((element_gradient(id, t) - Mat2::Identity()).norm() < 1e-12);
        CHECK((element_gradient(twice, t) - 2 * Mat2::Identity()).norm() < 1e-12);
        CHECK((element_gradient(aff, t) - M).norm() < 1e-12);
    }
}

TEST_CASE("min_det reports the feasibility margin") {
    const auto mesh = share(square_mesh(Vec2(0, 0), Vec2(1, 1), 4));
    CHECK(min_det(DeformationField::identity(mesh)).value == doctest::Approx(1.0).epsilon(1e-14));
    const DeformationField s =
        DeformationField::from_map(mesh, [](const Vec2& x) { return Vec2(3 * x.x(), 0.5 * x.y()); });
    CHECK(min_det(s).value == doctest::Approx(1.5).epsilon(1e-14));

    DeformationField flipped = DeformationField::identity(mesh);
    const auto& tri = mesh->triangles()[5];
    const Vec2 c = (mesh->vertices()[tri[1]] + mesh->vertices()[tri[2]]) / 2;
    int interior = -1;
    for (int k = 0; k < 3; ++k)
        if (!mesh->is_dirichlet(tri[k])) interior = tri[k];
    REQUIRE(interior >= 0);
    flipped.positions()[interior] = 2 * c - mesh->vertices()[interior] + Vec2(0.3, 0.3);
    const MinDet md = min_det(flipped);
    CHECK(md.value < 0.0);
    CHECK(md.triangle >= 0);
    CHECK(element_gradient(flipped, md.triangle).determinant() == doctest::Approx(md.value));
}

TEST_CASE("boundary data") {
    const BoundaryData aff = BoundaryData::affine_stretch(1.5, Vec2(1, 0));
    CHECK((aff(Vec2(2, 3)) - Vec2(2.5, 3)).norm() < 1e-15);
    const BoundaryData rad = BoundaryData::radial_stretch(2.0);
    CHECK((rad(Vec2(0.3, -0.4)) - Vec2(0.6, -0.8)).norm() < 1e-15);
    const BoundaryData tab = BoundaryData::user_table({{Vec2(1, 0), Vec2(2, 0)}, {Vec2(0, 1), Vec2(0, 3)}});
    CHECK((tab(Vec2(0, 1)) - Vec2(0, 3)).norm() == 0.0);
    CHECK_THROWS_AS(tab(Vec2(0.5, 0.5)), ConfigError);
    CHECK_THROWS_AS(BoundaryData::user_table({{Vec2(1, 0), Vec2(2, 0)}, {Vec2(1, 0), Vec2(3, 0)}}), ConfigError);
    CHECK_THROWS_AS(BoundaryData::radial_stretch(0.0), ConfigError);

    const auto mesh = share(annulus_mesh(Vec2::Zero(), 0.1, 1.0, 32));
    DeformationField y = DeformationField::identity(mesh);
    y.apply_boundary(rad);
    for (int v = 0; v < mesh->num_vertices(); ++v) {
        if (mesh->is_dirichlet(v))
            CHECK((y.positions()[v] - 2.0 * mesh->vertices()[v]).norm() == 0.0);
        else
            CHECK(y.positions()[v] == mesh->vertices()[v]);
    }
}

TEST_CASE("trace on circles") {
    const auto mesh = share(disk_mesh(Vec2::Zero(), 1.0, 8));
    const Polyline c = trace_on_circle(DeformationField::identity(mesh), Vec2::Zero(), 0.5, 4);
    REQUIRE(c.size() == 4);
    const Polyline expect = {{0.5, 0}, {0, 0.5}, {-0.5, 0}, {0, -0.5}};
    for (int i = 0; i < 4; ++i) CHECK((c[i] - expect[i]).norm() < 1e-12);

    const Polyline d =
        trace_on_circle(DeformationField::from_map(mesh, [](const Vec2& x) { return Vec2(2 * x); }), Vec2::Zero(), 0.5, 64);
    CHECK(oracle::max_circle_deviation(d, Vec2::Zero(), 1.0) < 1e-12);

    const Mat2 M = mat(1.5, 0.3, -0.2, 0.8);
    const Polyline e = trace_on_circle(DeformationField::from_map(mesh, [&](const Vec2& x) { return Vec2(M * x); }),
                                       Vec2(0.1, 0.05), 0.4, 97);
    const Mat2 Minv = M.inverse();
    for (int j = 0; j < 97; ++j) {
        const double t = 2 * oracle::pi * j / 97;
        const Vec2 x = Vec2(0.1, 0.05) + 0.4 * Vec2(std::cos(t), std::sin(t));
        CHECK((e[j] - M * x).norm() < 1e-12);
        CHECK(std::abs((Minv * e[j] - Vec2(0.1, 0.05)).norm() - 0.4) < 1e-12);
    }

    CHECK_THROWS_AS(trace_on_circle(DeformationField::identity(mesh), Vec2::Zero(), 1.5, 16), GeometryError);
    const auto holed = share(annulus_mesh(Vec2::Zero(), 0.1, 1.0, 32));
    CHECK_THROWS_AS(trace_on_circle(DeformationField::identity(holed), Vec2(0.1, 0), 0.05, 16), GeometryError);
}

TEST_CASE("mollify keeps affine maps and sigma zero") {
    const auto mesh = share(disk_mesh(Vec2::Zero(), 1.0, 10));
    const Mat2 M = mat(1.2, 0.1, -0.3, 0.9);
    const DeformationField aff = DeformationField::from_map(mesh, [&](const Vec2& x) { return Vec2(M * x + Vec2(1, 2)); });
    for (double sigma : {0.0, 0.05, 0.2}) {
        const MollifyResult r = mollify(aff, sigma);
        CHECK(r.admissible);
        for (int v = 0; v < mesh->num_vertices(); ++v) CHECK((r.y.positions()[v] - aff.positions()[v]).norm() < 1e-12);
    }
    CHECK_THROWS_AS(mollify(aff, -1.0), ArgumentError);
}

TEST_CASE("mollify smooths a random perturbation") {
    const auto mesh = share(square_mesh(Vec2(0, 0), Vec2(1, 1), 24));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 0.004);
    DeformationField y = DeformationField::identity(mesh);
    for (int v = 0; v < mesh->num_vertices(); ++v)
        if (!mesh->is_dirichlet(v)) y.positions()[v] += Vec2(n(rng), n(rng));
    auto roughness = [&](const DeformationField& z) {
        double s = 0.0;
        for (int t = 0; t < mesh->num_triangles(); ++t)
            s += mesh->triangle_area(t) * (element_gradient(z, t) - Mat2::Identity()).squaredNorm();
        return s;
    };
    double prev = roughness(y);
    for (double sigma : {0.03, 0.06, 0.12}) {
        const MollifyResult r = mollify(y, sigma);
        CHECK(r.admissible);
        const double now = roughness(r.y);
        MESSAGE("sigma " << sigma << " roughness " << now);
        CHECK(now < prev);
        prev = now;
    }
}

TEST_CASE("Dirichlet energy of interpolants converges at first order or better") {
    auto f = [](const Vec2& x) { return Vec2(x.x() + 0.2 * std::sin(3 * x.y()), x.y() + 0.1 * std::cos(2 * x.x())); };
    auto grad2 = [](double x, double y) {
        const double a = 0.6 * std::cos(3 * y), b = -0.2 * std::sin(2 * x);
        return 1.0 + a * a + b * b + 1.0;
    };
    const double exact = oracle::simpson(
        [&](double x) { return oracle::simpson([&](double y) { return grad2(x, y); }, 0.0, 1.0, 400); }, 0.0, 1.0, 400);
    std::vector<double> err;
    for (int n : {8, 16, 32, 64}) {
        const auto mesh = share(square_mesh(Vec2(0, 0), Vec2(1, 1), n));
        const DeformationField y = DeformationField::from_map(mesh, f);
        double s = 0.0;
        for (int t = 0; t < mesh->num_triangles(); ++t) s += mesh->triangle_area(t) * element_gradient(y, t).squaredNorm();
        err.push_back(std::abs(s - exact));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double order = std::log2(err[i - 1] / err[i]);
        MESSAGE("observed order " << order);
        CHECK(order >= 0.9);
    }
}

TEST_CASE("seed maps") {
    const Vec2 a(0.2, -0.1);
    const double c = 0.1, L = 0.4;
    CHECK((localized_cavity_map(a + Vec2(0.5, 0), a, c, L) - (a + Vec2(0.5, 0))).norm() == 0.0);
    const Vec2 rim = localized_cavity_map(a + Vec2(1e-9, 0), a, c, L);
    CHECK((rim - a).norm() == doctest::Approx(c).epsilon(1e-6));
    for (const Vec2& x : {Vec2(0.3, 0.0), Vec2(0.1, 0.1), Vec2(0.25, -0.3)}) {
        Mat2 D;
        for (int j = 0; j < 2; ++j) {
            Vec2 e = Vec2::Zero();
            e[j] = 1e-6;
            D.col(j) = (localized_cavity_map(x + e, a, c, L) - localized_cavity_map(x - e, a, c, L)) / 2e-6;
        }
        CHECK(D.determinant() == doctest::Approx(1 - c * c / (L * L)).epsilon(1e-7));
    }
    CHECK(radial_seed_map(Vec2(0.1, 0), Vec2::Zero(), 0.1, 1.0, 0.3, 1.5).x() == doctest::Approx(0.3));
    CHECK(radial_seed_map(Vec2(0, 1), Vec2::Zero(), 0.1, 1.0, 0.3, 1.5).y() == doctest::Approx(1.5));
}

TEST_CASE("polygon helpers") {
    const Polyline sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(signed_area(sq) == 1.0);
    CHECK(signed_area(reversed(sq)) == -1.0);
    CHECK(perimeter(sq) == 4.0);
    CHECK((polygon_centroid(sq) - Vec2(0.5, 0.5)).norm() < 1e-15);
    CHECK(is_simple(sq));
    CHECK_FALSE(is_simple(Polyline{{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
    CHECK(point_loop_distance(sq, Vec2(0.5, 2)) == doctest::Approx(1.0));
    CHECK(hausdorff_distance(sq, Polyline{{0, 0}, {1, 0}, {1, 1.2}, {0, 1}}) == doctest::Approx(0.2).epsilon(1e-12));

    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const Polyline p = oracle::random_star_polygon(rng, Vec2(0.3, -0.2), 12, 0.5, 1.5);
        CHECK(signed_area(p) == doctest::Approx(oracle::shoelace(p)).epsilon(1e-13));
        CHECK(perimeter(p) == doctest::Approx(oracle::polygon_perimeter(p)).epsilon(1e-13));
        CHECK(is_simple(p));
    }
}

TEST_CASE("marching squares traces a disk indicator") {
    const Grid g = Grid::covering(Vec2(-1, -1), Vec2(1, 1), 0.02);
    std::vector<char> in(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) in[g.index(i, j)] = g.center(i, j).norm() < 0.6;
    const auto contours = marching_squares(in, g);
    REQUIRE(contours.size() == 1);
    CHECK(signed_area(contours[0]) > 0.0);
    CHECK(oracle::max_circle_deviation(contours[0], Vec2::Zero(), 0.6) <= 2 * g.delta);
    CHECK(signed_area(contours[0]) == doctest::Approx(oracle::pi * 0.36).epsilon(0.02));
}
