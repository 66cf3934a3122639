#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library except for the shared vector types.

#include "cavelast/types.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cavelast::Mat2;
using cavelast::Polyline;
using cavelast::Vec2;

constexpr double pi = std::numbers::pi;

// Winding number by summing signed turning angles seen from xi.
inline int angle_sum_winding(const Polyline& loop, const Vec2& xi) {
    double total = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 u = loop[i] - xi;
        const Vec2 v = loop[(i + 1) % n] - xi;
        total += std::atan2(u.x() * v.y() - u.y() * v.x(), u.x() * v.x() + u.y() * v.y());
    }
    return static_cast<int>(std::lround(total / (2.0 * pi)));
}

// (mu/2)|F|^p + a J^2 - b log J, written out componentwise.
inline double default_density(double mu, double a, double b, double p, const Mat2& F) {
    const double f11 = F(0, 0), f12 = F(0, 1), f21 = F(1, 0), f22 = F(1, 1);
    const double frob2 = f11 * f11 + f12 * f12 + f21 * f21 + f22 * f22;
    const double J = f11 * f22 - f12 * f21;
    return 0.5 * mu * std::pow(frob2, 0.5 * p) + a * J * J - b * std::log(J);
}

// Central differences of a scalar function of a matrix.
inline Mat2 fd_matrix_gradient(const std::function<double(const Mat2&)>& f, const Mat2& F, double h = 1e-6) {
    Mat2 G;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Mat2 Fp = F, Fm = F;
            Fp(i, j) += h;
            Fm(i, j) -= h;
            G(i, j) = (f(Fp) - f(Fm)) / (2.0 * h);
        }
    return G;
}

inline Vec2 fd_vector_gradient(const std::function<double(const Vec2&)>& f, const Vec2& z, double h = 1e-6) {
    return {(f(z + Vec2(h, 0)) - f(z - Vec2(h, 0))) / (2 * h), (f(z + Vec2(0, h)) - f(z - Vec2(0, h))) / (2 * h)};
}

// Circumference of the ellipse with semi-axes a, b by the Gauss-Kummer series
// pi (a + b) sum_n binom(1/2, n)^2 k^n, k = ((a - b)/(a + b))^2.
inline double ellipse_circumference_series(double a, double b, int terms = 60) {
    const double k = std::pow((a - b) / (a + b), 2);
    double sum = 0.0, coef = 1.0, kn = 1.0;
    for (int n = 0; n < terms; ++n) {
        sum += coef * coef * kn;
        coef *= (0.5 - n) / (n + 1.0);
        kn *= k;
    }
    return pi * (a + b) * sum;
}

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Perimeter of a closed polygon.
inline double polygon_perimeter(const Polyline& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[(i + 1) % p.size()] - p[i]).norm();
    return s;
}

// Shoelace area, positive for counterclockwise loops.
inline double shoelace(const Polyline& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& a = p[i];
        const Vec2& b = p[(i + 1) % p.size()];
        s += a.x() * b.y() - a.y() * b.x();
    }
    return 0.5 * s;
}

// Random star-shaped counterclockwise polygon around `center`.
inline Polyline random_star_polygon(std::mt19937_64& rng, const Vec2& center, int n, double rmin, double rmax) {
    std::uniform_real_distribution<double> ur(rmin, rmax), jitter(-0.3, 0.3);
    Polyline p;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * pi * (i + 0.5 + jitter(rng)) / n;
        const double r = ur(rng);
        p.emplace_back(center.x() + r * std::cos(t), center.y() + r * std::sin(t));
    }
    return p;
}

// Random closed polyline with arbitrary self-intersections.
inline Polyline random_loop(std::mt19937_64& rng, int n, double extent) {
    std::uniform_real_distribution<double> u(-extent, extent);
    Polyline p;
    for (int i = 0; i < n; ++i) p.emplace_back(u(rng), u(rng));
    return p;
}

inline Polyline regular_polygon(const Vec2& c, double r, int n, int turns = 1) {
    Polyline p;
    for (int i = 0; i < n * turns; ++i) {
        const double t = 2.0 * pi * i / n;
        p.emplace_back(c.x() + r * std::cos(t), c.y() + r * std::sin(t));
    }
    return p;
}

// Radial cavitation map x -> sqrt(|x|^2 + c^2) x/|x|.
inline Vec2 radial_cavitation(const Vec2& x, double c) {
    const double R = x.norm();
    return x * (std::sqrt(R * R + c * c) / R);
}

// Hausdorff distance from a polyline's vertices to a circle.
inline double max_circle_deviation(const Polyline& p, const Vec2& c, double r) {
    double d = 0.0;
    for (const auto& q : p) d = std::max(d, std::abs((q - c).norm() - r));
    return d;
}

} // namespace oracle
