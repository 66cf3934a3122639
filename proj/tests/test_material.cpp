#include "cavelast/material.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <thread>

using namespace cavelast;

namespace {

Mat2 diag(double a, double b) {
    Mat2 m;
    m << a, 0, 0, b;
    return m;
}

Mat2 random_positive_matrix(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (;;) {
        Mat2 F;
        F << u(rng), u(rng), u(rng), u(rng);
        const double J = F.determinant();
        if (J > 0.1 && J < 10.0) return F;
    }
}

} // namespace

TEST_CASE("bulk energy at the identity") {
    const BulkDensity W = BulkDensity::compressible(1, 1, 1);
    CHECK(W.energy(Mat2::Identity()) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("bulk energy grows along diag(t, 1/t)") {
    const BulkDensity W = BulkDensity::compressible(1, 1, 1);
    double prev = 0.0;
    for (double t = 2; t < 1e4; t *= 2) {
        const Mat2 F = diag(t, 1 / t);
        const double w = W.energy(F);
        CHECK(w / F.squaredNorm() >= 0.5);
        CHECK(w > prev);
        prev = w;
    }
    CHECK(prev > 1e7);
}

TEST_CASE("bulk energy matches a componentwise re-evaluation") {
    std::mt19937_64 rng(11);
    for (double p : {2.0, 1.5, 3.0}) {
        const BulkDensity W = BulkDensity::compressible(1.3, 0.7, 2.1, p);
        for (int i = 0; i < 200; ++i) {
            const Mat2 F = random_positive_matrix(rng);
            CHECK(W.energy(F) == doctest::Approx(oracle::default_density(1.3, 0.7, 2.1, p, F)).epsilon(1e-13));
        }
    }
}

TEST_CASE("bulk density rejects non-positive determinants") {
    const BulkDensity W = BulkDensity::compressible(1, 1, 1);
    Mat2 flip = diag(1, -1);
    CHECK_THROWS_AS(W.energy(flip), DomainError);
    CHECK_THROWS_AS(W.stress(Mat2::Zero()), DomainError);
    try {
        W.energy(flip);
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("-1") != std::string::npos);
    }
}

TEST_CASE("bulk density construction validates parameters") {
    CHECK_THROWS_AS(BulkDensity::compressible(0, 1, 1), ConfigError);
    CHECK_THROWS_AS(BulkDensity::compressible(1, 1, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(BulkDensity::tabulated(1, 2, {{1.0, 0.0}}), ConfigError);
}

TEST_CASE("bulk stress closed forms") {
    const BulkDensity W = BulkDensity::compressible(1, 1, 1);
    CHECK((W.stress(Mat2::Identity()) - 2.0 * Mat2::Identity()).norm() < 1e-14);
    CHECK((W.stress(diag(2, 0.5)) - diag(2.5, 2.5)).norm() < 1e-14);
}

TEST_CASE("bulk stress equals the finite-difference gradient") {
    std::mt19937_64 rng(5);
    const std::vector<BulkDensity> densities = {
        BulkDensity::compressible(1, 1, 1), BulkDensity::compressible(2, 2, 2, 1.5),
        BulkDensity::tabulated(1.0, 2.0, {{0.5, 1.2}, {1.0, 0.3}, {1.5, 0.6}, {2.5, 2.0}}, 1.0, 1.0)};
    for (const auto& W : densities) {
        for (int i = 0; i < 200; ++i) {
            const Mat2 F = random_positive_matrix(rng);
            const Mat2 fd = oracle::fd_matrix_gradient([&](const Mat2& G) { return W.energy(G); }, F);
            const Mat2 an = W.stress(F);
            CHECK((an - fd).norm() <= 1e-5 * std::max(1.0, an.norm()));
        }
    }
}

TEST_CASE("tabulated gamma interpolates its table and keeps both limits") {
    const BulkDensity W = BulkDensity::tabulated(1.0, 2.0, {{0.5, 1.2}, {1.0, 0.3}, {1.5, 0.6}, {2.5, 2.0}}, 1.0, 1.0);
    CHECK(W.gamma(1.0) == doctest::Approx(0.3));
    CHECK(W.gamma(2.5) == doctest::Approx(2.0));
    CHECK(W.gamma(1e-8) > W.gamma(1e-4));
    CHECK(W.gamma(1e-8) > 10.0);
    CHECK(W.gamma(100.0) / 100.0 > W.gamma(10.0) / 10.0);
    for (double h : {0.3, 0.5, 0.9, 1.7, 2.5, 4.0}) {
        const double fd = (W.gamma(h + 1e-6) - W.gamma(h - 1e-6)) / 2e-6;
        CHECK(W.gamma_derivative(h) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("coercivity and control hold on 1000 samples") {
    for (const auto& W : {BulkDensity::compressible(1, 1, 1), BulkDensity::compressible(2, 2, 2, 1.5),
                          BulkDensity::compressible(0.5, 3, 0.2, 4.0)}) {
        const BulkAdmissibility r = check_bulk_admissibility(W, 1000, 17);
        CHECK(r.samples == 1000);
        CHECK(r.coercivity_margin >= -1e-9);
        CHECK(std::isfinite(r.control_constant));
        CHECK(r.control_constant > 0.0);
        CHECK(r.barrier_blows_up());
        MESSAGE("empirical control constant " << r.control_constant);
    }
}

TEST_CASE("barrier along det F = 2^-k") {
    const BulkDensity W = BulkDensity::compressible(1, 1, 1);
    double prev = W.energy(diag(1, 0.5));
    for (int k = 2; k <= 40; ++k) {
        const double w = W.energy(diag(1, std::ldexp(1.0, -k)));
        CHECK(w > prev);
        prev = w;
    }
    CHECK(prev > 25.0);
}

TEST_CASE("surface density values") {
    Mat2 A = diag(4, 1);
    CHECK(SurfaceDensity::isotropic().value(Vec2(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(SurfaceDensity::elliptic(A).value(Vec2(1, 0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(SurfaceDensity::elliptic(A).value(Vec2(1, 1) / std::sqrt(2.0)) ==
          doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
    CHECK(SurfaceDensity::isotropic().value(Vec2::Zero()) == 0.0);
    const SurfaceDensity l1 = SurfaceDensity::smoothed_l1(0.01);
    auto l1_ref = [](const Vec2& z, double eps) {
        const double n2 = z.squaredNorm();
        return (std::sqrt(z.x() * z.x() + eps * eps * n2) + std::sqrt(z.y() * z.y() + eps * eps * n2)) /
               std::sqrt(1 + 2 * eps * eps);
    };
    CHECK(l1.value(Vec2(1, 0)) == doctest::Approx(l1_ref(Vec2(1, 0), 0.01)).epsilon(1e-14));
    CHECK(l1.value(Vec2(0.6, -0.8)) == doctest::Approx(l1_ref(Vec2(0.6, -0.8), 0.01)).epsilon(1e-14));
    CHECK(l1.value(Vec2(1, 0)) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("surface density gradients") {
    const Mat2 A = diag(4, 1);
    CHECK((SurfaceDensity::isotropic().gradient(Vec2(0, 1)) - Vec2(0, 1)).norm() < 1e-15);
    CHECK((SurfaceDensity::elliptic(A).gradient(Vec2(1, 0)) - Vec2(2, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(SurfaceDensity::isotropic().gradient(Vec2::Zero()), DomainError);

    Mat2 B;
    B << 3, 0.7, 0.7, 1.5;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(0, 2 * oracle::pi);
    for (const auto& phi : {SurfaceDensity::isotropic(), SurfaceDensity::elliptic(A), SurfaceDensity::elliptic(B),
                            SurfaceDensity::smoothed_l1(0.05)}) {
        for (int i = 0; i < 100; ++i) {
            const double t = ang(rng);
            const Vec2 z(std::cos(t), std::sin(t));
            const Vec2 fd = oracle::fd_vector_gradient([&](const Vec2& w) { return phi.value(w); }, z);
            CHECK((phi.gradient(z) - fd).norm() <= 1e-6);
        }
    }
}

TEST_CASE("surface density Hessians match differences of the gradient") {
    Mat2 B;
    B << 3, 0.7, 0.7, 1.5;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (const auto& phi : {SurfaceDensity::isotropic(), SurfaceDensity::elliptic(B)}) {
        for (int i = 0; i < 50; ++i) {
            const Vec2 z(u(rng), u(rng));
            if (z.norm() < 0.2) continue;
            Mat2 fd;
            for (int j = 0; j < 2; ++j) {
                Vec2 e = Vec2::Zero();
                e[j] = 1e-6;
                fd.col(j) = (phi.gradient(z + e) - phi.gradient(z - e)) / 2e-6;
            }
            CHECK((phi.hessian(z) - fd).norm() < 1e-6);
        }
    }
    CHECK_THROWS_AS(SurfaceDensity::smoothed_l1(0.1).hessian(Vec2(1, 0)), DomainError);
}

TEST_CASE("non-SPD matrices are rejected at construction") {
    Mat2 indefinite = diag(1, -1);
    Mat2 skew;
    skew << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(SurfaceDensity::elliptic(indefinite), ConfigError);
    CHECK_THROWS_AS(SurfaceDensity::elliptic(skew), ConfigError);
    CHECK_THROWS_AS(SurfaceDensity::smoothed_l1(0.0), ConfigError);
}

TEST_CASE("surface density structural properties") {
    for (const auto& phi : {SurfaceDensity::isotropic(), SurfaceDensity::elliptic(diag(4, 1)),
                            SurfaceDensity::smoothed_l1(0.02)}) {
        const SurfaceAdmissibility r = check_surface_admissibility(phi, 2000, 21);
        CHECK(r.homogeneity_error <= 1e-12);
        CHECK(r.lower_bound > 0.0);
        CHECK(r.convexity_violation <= 1e-12);
        CHECK(r.euler_error <= 1e-10);
        CHECK(r.ok());
    }
    CHECK(SurfaceDensity::elliptic(diag(4, 1)).lower_bound_constant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("densities are safe to evaluate concurrently") {
    const BulkDensity W = BulkDensity::compressible(2, 2, 2, 1.5);
    const SurfaceDensity phi = SurfaceDensity::elliptic(diag(4, 1));
    std::vector<double> serial(64), threaded(64);
    auto work = [&](int i) {
        const Mat2 F = diag(1.0 + 0.01 * i, 1.0 / (1.0 + 0.02 * i));
        return W.energy(F) + phi.value(Vec2(std::cos(i), std::sin(i)));
    };
    for (int i = 0; i < 64; ++i) serial[i] = work(i);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < 64; i += 4) threaded[i] = work(i);
        });
    for (auto& th : pool) th.join();
    CHECK(serial == threaded);
}
