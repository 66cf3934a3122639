#include "cavelast/material.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cavelast {

namespace {

std::string describe(const Mat2& F) {
    std::ostringstream os;
    os.precision(17);
    os << "[[" << F(0, 0) << ", " << F(0, 1) << "], [" << F(1, 0) << ", " << F(1, 1) << "]]";
    return os.str();
}

// Cubic Hermite basis on [x0, x1].
double hermite(double x, double x0, double x1, double y0, double y1, double s0, double s1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * s0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * s1;
}

double hermite_derivative(double x, double x0, double x1, double y0, double y1, double s0, double s1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (6 * t - 6 * t2) * y1) / h + (3 * t2 - 4 * t + 1) * s0 + (3 * t2 - 2 * t) * s1;
}

} // namespace

BulkDensity BulkDensity::compressible(double mu, double a, double b, double p) {
    if (!(mu > 0) || !(a > 0) || !(b > 0)) throw ConfigError("material", 0, "mu, a, b must be positive");
    if (!(p > 1.0)) throw ConfigError("p", 0, "growth exponent must exceed N-1 = 1");
    BulkDensity W;
    W.kind_ = BulkKind::default_compressible;
    W.mu_ = mu;
    W.a_ = a;
    W.b_ = b;
    W.p_ = p;
    const double hstar = std::sqrt(b / (2 * a));
    W.gamma_min_ = a * hstar * hstar - b * std::log(hstar);
    return W;
}

BulkDensity BulkDensity::tabulated(double mu, double p, std::vector<std::pair<double, double>> table, double a,
                                   double b) {
    if (!(mu > 0) || !(a > 0) || !(b > 0)) throw ConfigError("material", 0, "mu, a, b must be positive");
    if (!(p > 1.0)) throw ConfigError("p", 0, "growth exponent must exceed N-1 = 1");
    if (table.size() < 2) throw ConfigError("table", 0, "gamma table needs at least two rows");
    std::sort(table.begin(), table.end());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(table[i].first > 0)) throw ConfigError("table", 0, "gamma table abscissae must be positive");
        if (i > 0 && !(table[i].first > table[i - 1].first))
            throw ConfigError("table", 0, "gamma table abscissae must be distinct");
    }
    BulkDensity W;
    W.kind_ = BulkKind::user_table;
    W.mu_ = mu;
    W.a_ = a;
    W.b_ = b;
    W.p_ = p;
    W.table_ = std::move(table);
    const auto& t = W.table_;
    const std::size_t n = t.size();
    W.slopes_.resize(n);
    auto secant = [&](std::size_t i) { return (t[i + 1].second - t[i].second) / (t[i + 1].first - t[i].first); };
    W.slopes_[0] = secant(0);
    W.slopes_[n - 1] = secant(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = t[i].first - t[i - 1].first;
        const double hr = t[i + 1].first - t[i].first;
        W.slopes_[i] = (hr * secant(i - 1) + hl * secant(i)) / (hl + hr);
    }
    // gamma is C^1 with a barrier below and a quadratic above, so a log grid
    // spanning the table by a few decades brackets its minimum.
    double gmin = std::numeric_limits<double>::infinity();
    const double lo = std::log(t.front().first) - 8.0;
    const double hi = std::log(t.back().first) + 4.0;
    for (int k = 0; k <= 4000; ++k) gmin = std::min(gmin, W.gamma(std::exp(lo + (hi - lo) * k / 4000.0)));
    W.gamma_min_ = gmin;
    return W;
}

void BulkDensity::check_det(const Mat2& F) const {
    if (!(F.determinant() > 0.0)) throw DomainError("bulk density requires det F > 0, got F = " + describe(F));
}

double BulkDensity::gamma(double h) const {
    if (!(h > 0)) throw DomainError("gamma requires h > 0");
    if (kind_ == BulkKind::default_compressible) return a_ * h * h - b_ * std::log(h);
    const auto& t = table_;
    const double h0 = t.front().first, h1 = t.back().first;
    if (h < h0) {
        const double s = h / h0;
        return t.front().second + slopes_.front() * (h - h0) + b_ * (s - 1.0 - std::log(s));
    }
    if (h > h1) {
        const double d = h - h1;
        return t.back().second + slopes_.back() * d + a_ * d * d;
    }
    auto it = std::upper_bound(t.begin(), t.end(), h, [](double v, const auto& row) { return v < row.first; });
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - t.begin()), t.size() - 1) - 1;
    return hermite(h, t[i].first, t[i + 1].first, t[i].second, t[i + 1].second, slopes_[i], slopes_[i + 1]);
}

double BulkDensity::gamma_derivative(double h) const {
    if (!(h > 0)) throw DomainError("gamma requires h > 0");
    if (kind_ == BulkKind::default_compressible) return 2 * a_ * h - b_ / h;
    const auto& t = table_;
    const double h0 = t.front().first, h1 = t.back().first;
    if (h < h0) return slopes_.front() + b_ * (1.0 / h0 - 1.0 / h);
    if (h > h1) return slopes_.back() + 2 * a_ * (h - h1);
    auto it = std::upper_bound(t.begin(), t.end(), h, [](double v, const auto& row) { return v < row.first; });
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - t.begin()), t.size() - 1) - 1;
    return hermite_derivative(h, t[i].first, t[i + 1].first, t[i].second, t[i + 1].second, slopes_[i],
                              slopes_[i + 1]);
}

double BulkDensity::energy(const Mat2& F) const {
    check_det(F);
    const double n2 = F.squaredNorm();
    const double iso = p_ == 2.0 ? 0.5 * mu_ * n2 : 0.5 * mu_ * std::pow(n2, 0.5 * p_);
    return iso + gamma(F.determinant());
}

Mat2 BulkDensity::stress(const Mat2& F) const {
    check_det(F);
    const double n2 = F.squaredNorm();
    const double coef = p_ == 2.0 ? mu_ : 0.5 * mu_ * p_ * std::pow(n2, 0.5 * p_ - 1.0);
    return coef * F + gamma_derivative(F.determinant()) * cofactor(F);
}

bool BulkAdmissibility::barrier_blows_up() const {
    if (barrier_sequence.size() < 2) return false;
    const std::size_t n = barrier_sequence.size();
    // The tail must increase, with increments that do not decay: a bounded
    // sequence has summable increments, a barrier does not.
    for (std::size_t i = n / 2; i < n; ++i)
        if (!(barrier_sequence[i] > barrier_sequence[i - 1])) return false;
    const double mid = barrier_sequence[n / 2] - barrier_sequence[n / 2 - 1];
    const double last = barrier_sequence[n - 1] - barrier_sequence[n - 2];
    return last >= 0.5 * mid;
}

BulkAdmissibility check_bulk_admissibility(const BulkDensity& W, int samples, std::uint64_t seed, double det_min,
                                           double det_max) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    std::uniform_real_distribution<double> logdet(std::log(det_min), std::log(det_max));
    std::uniform_real_distribution<double> logratio(std::log(0.1), std::log(10.0));
    BulkAdmissibility r;
    r.samples = samples;
    r.coercivity_margin = std::numeric_limits<double>::infinity();
    r.gamma_minimum = W.gamma_minimum();
    const double c = W.coercivity_constant();
    for (int k = 0; k < samples; ++k) {
        const double det = std::exp(logdet(rng));
        const double ratio = std::exp(logratio(rng));
        const double s1 = std::sqrt(det * ratio), s2 = std::sqrt(det / ratio);
        const double t1 = angle(rng), t2 = angle(rng);
        Mat2 R1, R2;
        R1 << std::cos(t1), -std::sin(t1), std::sin(t1), std::cos(t1);
        R2 << std::cos(t2), -std::sin(t2), std::sin(t2), std::cos(t2);
        const Mat2 F = R1 * Eigen::Vector2d(s1, s2).asDiagonal() * R2;
        const double w = W.energy(F);
        const double bound = c * std::pow(F.norm(), W.p()) + W.gamma(F.determinant());
        r.coercivity_margin = std::min(r.coercivity_margin, w - bound);
        const double ratio_c = (W.stress(F) * F.transpose()).norm() / (w + 1.0);
        r.control_constant = std::max(r.control_constant, ratio_c);
    }
    for (int k = 1; k <= 20; ++k) {
        const double h = std::ldexp(1.0, -k);
        r.barrier_sequence.push_back(W.energy(Eigen::Vector2d(1.0, h).asDiagonal().toDenseMatrix()));
    }
    return r;
}

SurfaceDensity SurfaceDensity::isotropic() { return SurfaceDensity{}; }

SurfaceDensity SurfaceDensity::elliptic(const Mat2& A) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (std::abs(A(0, 1) - A(1, 0)) > 1e-12 * scale) throw ConfigError("A", 0, "elliptic matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat2> es(A);
    if (!(es.eigenvalues().minCoeff() > 0)) throw ConfigError("A", 0, "elliptic matrix must be positive definite");
    SurfaceDensity phi;
    phi.kind_ = SurfaceKind::elliptic;
    phi.A_ = 0.5 * (A + A.transpose());
    return phi;
}

SurfaceDensity SurfaceDensity::smoothed_l1(double eps) {
    if (!(eps > 0)) throw ConfigError("eps", 0, "smoothing parameter must be positive");
    SurfaceDensity phi;
    phi.kind_ = SurfaceKind::smoothed_l1;
    phi.eps_ = eps;
    return phi;
}

double SurfaceDensity::value(const Vec2& z) const {
    switch (kind_) {
    case SurfaceKind::isotropic:
        return z.norm();
    case SurfaceKind::elliptic:
        return std::sqrt(std::max(0.0, z.dot(A_ * z)));
    case SurfaceKind::smoothed_l1: {
        const double e2 = eps_ * eps_ * z.squaredNorm();
        return (std::sqrt(z.x() * z.x() + e2) + std::sqrt(z.y() * z.y() + e2)) / std::sqrt(1.0 + 2.0 * eps_ * eps_);
    }
    }
    return 0.0;
}

Vec2 SurfaceDensity::gradient(const Vec2& z) const {
    if (z.squaredNorm() == 0.0) throw DomainError("surface density is not differentiable at z = 0");
    switch (kind_) {
    case SurfaceKind::isotropic:
        return z / z.norm();
    case SurfaceKind::elliptic:
        return A_ * z / value(z);
    case SurfaceKind::smoothed_l1: {
        const double e2 = eps_ * eps_;
        const double n2 = z.squaredNorm();
        const double sx = std::sqrt(z.x() * z.x() + e2 * n2);
        const double sy = std::sqrt(z.y() * z.y() + e2 * n2);
        Vec2 g;
        g.x() = (z.x() + e2 * z.x()) / sx + e2 * z.x() / sy;
        g.y() = e2 * z.y() / sx + (z.y() + e2 * z.y()) / sy;
        return g / std::sqrt(1.0 + 2.0 * e2);
    }
    }
    return Vec2::Zero();
}

Mat2 SurfaceDensity::hessian(const Vec2& z) const {
    if (!has_hessian()) throw DomainError("Hessian unavailable for the smoothed_l1 surface density");
    if (z.squaredNorm() == 0.0) throw DomainError("surface density is not differentiable at z = 0");
    if (kind_ == SurfaceKind::isotropic) {
        const double n = z.norm();
        const Vec2 u = z / n;
        return (Mat2::Identity() - u * u.transpose()) / n;
    }
    const double f = value(z);
    const Vec2 Az = A_ * z;
    return A_ / f - Az * Az.transpose() / (f * f * f);
}

double SurfaceDensity::lower_bound_constant(int directions) const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < directions; ++k) {
        const double t = 2 * M_PI * k / directions;
        m = std::min(m, value(Vec2(std::cos(t), std::sin(t))));
    }
    return m;
}

bool SurfaceAdmissibility::ok() const {
    return homogeneity_error <= 1e-12 && lower_bound > 0 && convexity_violation <= 1e-12 && euler_error <= 1e-10;
}

SurfaceAdmissibility check_surface_admissibility(const SurfaceDensity& phi, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> logt(std::log(1e-3), std::log(1e3));
    SurfaceAdmissibility r;
    r.samples = samples;
    r.lower_bound = phi.lower_bound_constant(256);
    for (int k = 0; k < samples; ++k) {
        const Vec2 z(g(rng), g(rng));
        const Vec2 w(g(rng), g(rng));
        const double t = std::exp(logt(rng));
        const double fz = phi.value(z);
        r.homogeneity_error = std::max(r.homogeneity_error, std::abs(phi.value(t * z) - t * fz) / (t * fz));
        const double mid = phi.value(0.5 * (z + w)) - 0.5 * (fz + phi.value(w));
        r.convexity_violation = std::max(r.convexity_violation, mid / (fz + phi.value(w)));
        r.euler_error = std::max(r.euler_error, std::abs(phi.gradient(z).dot(z) - fz) / fz);
    }
    r.convexity_violation = std::max(0.0, r.convexity_violation);
    return r;
}

} // namespace cavelast
