#include "cavelast/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace cavelast {

namespace {

std::atomic<unsigned> g_max_threads{0};

double pairwise_sum_impl(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

double gk15(const std::function<double(double)>& f, double a, double b, double& err) {
    static const double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static const double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static const double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * wgk[7];
    double rg = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        const double s = f(c - dx) + f(c + dx);
        rk += wgk[j] * s;
        if (j % 2 == 1) rg += wg[j / 2] * s;
    }
    err = std::abs((rk - rg) * h);
    return rk * h;
}

double adaptive(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
    double err = 0.0;
    const double v = gk15(f, a, b, err);
    if (err <= tol || depth <= 0) return v;
    const double m = 0.5 * (a + b);
    return adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1);
}

} // namespace

double pairwise_sum(std::span<const double> values) { return pairwise_sum_impl(values.data(), values.size()); }

void set_max_threads(unsigned n) { g_max_threads = n; }

unsigned max_threads() {
    const unsigned cap = g_max_threads.load();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return cap == 0 ? hw : std::min(cap, hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(max_threads(), n / 256 + 1);
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& t : pool) t.join();
}

QuadratureRule1D gauss_legendre(int points) {
    if (points < 1) throw ArgumentError("gauss_legendre: need at least one point");
    QuadratureRule1D rule;
    rule.nodes.resize(points);
    rule.weights.resize(points);
    // Newton iteration on P_n starting from the Chebyshev-like guess.
    for (int i = 0; i < points; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (points + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= points; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = points * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
    return adaptive(f, a, b, tol, max_depth);
}

TriangleRule triangle_rule(int degree) {
    TriangleRule r;
    if (degree <= 1) {
        r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
        r.weights = {1.0};
    } else if (degree == 2) {
        r.barycentric = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
        r.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    } else if (degree == 3) {
        r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.6, 0.2, 0.2}, {0.2, 0.6, 0.2}, {0.2, 0.2, 0.6}};
        r.weights = {-27.0 / 48, 25.0 / 48, 25.0 / 48, 25.0 / 48};
    } else {
        // Radon's 7-point rule, exact for degree 5.
        const double a1 = 0.059715871789770, b1 = 0.470142064105115;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456;
        const double w1 = 0.132394152788506, w2 = 0.125939180544827;
        r.barycentric = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                         {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
        r.weights = {0.225, w1, w1, w1, w2, w2, w2};
    }
    return r;
}

} // namespace cavelast
