#include "cavelast/radial.hpp"

#include "cavelast/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace cavelast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Slope at knot j of the monotone Hermite interpolant through (x, y).
double pchip_slope_at(const std::vector<double>& x, const std::vector<double>& y, std::size_t j) {
    const std::size_t n = x.size();
    auto secant = [&](std::size_t k) { return (y[k + 1] - y[k]) / (x[k + 1] - x[k]); };
    if (n == 2) return secant(0);
    if (j == 0 || j == n - 1) {
        const std::size_t k = j == 0 ? 0 : n - 2;
        const std::size_t k2 = j == 0 ? 1 : n - 3;
        const double h0 = x[k + 1] - x[k], h1 = x[k2 + 1] - x[k2];
        const double d0 = secant(k), d1 = secant(k2);
        const double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (!(d > 0) || d > 3 * d0) return d0;
        return d;
    }
    const double h0 = x[j] - x[j - 1], h1 = x[j + 1] - x[j];
    const double d0 = secant(j - 1), d1 = secant(j);
    if (d0 * d1 <= 0) return 0.0;
    const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
    return (w1 + w2) / (w1 / d0 + w2 / d1);
}

// Nonzero partial derivatives of pchip_slope_at(x, y, j) with respect to y.
void pchip_slope_jacobian(const std::vector<double>& x, const std::vector<double>& y, std::size_t j,
                          std::vector<std::pair<int, double>>& out) {
    out.clear();
    const std::size_t n = x.size();
    auto secant = [&](std::size_t k) { return (y[k + 1] - y[k]) / (x[k + 1] - x[k]); };
    auto add_secant = [&](std::size_t k, double w) {
        const double h = x[k + 1] - x[k];
        out.emplace_back(static_cast<int>(k), -w / h);
        out.emplace_back(static_cast<int>(k + 1), w / h);
    };
    if (n == 2) {
        add_secant(0, 1.0);
        return;
    }
    if (j == 0 || j == n - 1) {
        const std::size_t k = j == 0 ? 0 : n - 2;
        const std::size_t k2 = j == 0 ? 1 : n - 3;
        const double h0 = x[k + 1] - x[k], h1 = x[k2 + 1] - x[k2];
        const double d0 = secant(k), d1 = secant(k2);
        const double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (!(d > 0) || d > 3 * d0) {
            add_secant(k, 1.0);
        } else {
            add_secant(k, (2 * h0 + h1) / (h0 + h1));
            add_secant(k2, -h0 / (h0 + h1));
        }
        return;
    }
    const double h0 = x[j] - x[j - 1], h1 = x[j + 1] - x[j];
    const double d0 = secant(j - 1), d1 = secant(j);
    if (d0 * d1 <= 0) return;
    const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
    const double D = w1 / d0 + w2 / d1;
    add_secant(j - 1, (w1 + w2) * w1 / (d0 * d0 * D * D));
    add_secant(j, (w1 + w2) * w2 / (d1 * d1 * D * D));
}

struct Hermite {
    double value, derivative;
};

Hermite hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
                     (t3 - t2) * h * d1;
    const double dv = ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / h + (3 * t2 - 4 * t + 1) * d0 +
                      (3 * t2 - 2 * t) * d1;
    return {v, dv};
}

double radial_density(const BulkDensity& W, double R, double dr, double r) {
    const double l2 = r / R;
    if (!(dr * l2 > 0)) return kInf;
    Mat2 F;
    F << dr, 0.0, 0.0, l2;
    return 2 * M_PI * R * W.energy(F);
}

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i + 1] > v[i])) return false;
    return !v.empty() && v.front() > 0;
}

} // namespace

RadialProfile::RadialProfile(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() < 2 || knots_.size() != values_.size())
        throw ArgumentError("radial profile needs matching knot and value lists of length >= 2");
    if (!strictly_increasing(knots_)) throw ArgumentError("radial profile knots must be positive and increasing");
    if (!strictly_increasing(values_))
        throw InfeasibleError("radial profile values must be positive and strictly increasing", -1);
    slopes_ = pchip_slopes(knots_, values_);
}

int RadialProfile::interval(double R) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), R);
    const int k = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(knots_.size()) - 2);
}

double RadialProfile::value(double R) const {
    R = std::clamp(R, inner(), outer());
    const int k = interval(R);
    return hermite(knots_[k], knots_[k + 1], values_[k], values_[k + 1], slopes_[k], slopes_[k + 1], R).value;
}

double RadialProfile::derivative(double R) const {
    R = std::clamp(R, inner(), outer());
    const int k = interval(R);
    return hermite(knots_[k], knots_[k + 1], values_[k], values_[k + 1], slopes_[k], slopes_[k + 1], R).derivative;
}

Vec2 RadialProfile::map(const Vec2& x, const Vec2& center) const {
    const Vec2 d = x - center;
    const double R = d.norm();
    if (R == 0.0) return center;
    return center + value(R) / R * d;
}

std::vector<double> geometric_knots(double rho, double r_out, int M) {
    if (!(rho > 0) || !(r_out > rho) || M < 1) throw ArgumentError("geometric_knots: need 0 < rho < R_out, M >= 1");
    std::vector<double> R(M + 1);
    for (int j = 0; j <= M; ++j) R[j] = rho * std::pow(r_out / rho, static_cast<double>(j) / M);
    R[M] = r_out;
    return R;
}

std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> d(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) d[j] = pchip_slope_at(x, y, j);
    return d;
}

double anisotropic_circle_perimeter(double c, const SurfaceDensity& phi, double tol) {
    if (!(c >= 0)) throw ArgumentError("anisotropic_circle_perimeter: radius must be >= 0");
    if (c == 0.0) return 0.0;
    const double unit = integrate_adaptive(
        [&](double t) { return phi.value(Vec2(std::cos(t), std::sin(t))); }, 0.0, 2 * M_PI, tol / c);
    return c * unit;
}

RadialEnergy radial_energy(const RadialProfile& p, const BulkDensity& W, const SurfaceDensity& phi, double tol) {
    const auto& R = p.knots();
    const auto& r = p.values();
    const auto& d = p.slopes();
    const std::size_t M = R.size() - 1;
    std::vector<double> parts(M);
    for (std::size_t k = 0; k < M; ++k) {
        parts[k] = integrate_adaptive(
            [&](double x) {
                const Hermite h = hermite(R[k], R[k + 1], r[k], r[k + 1], d[k], d[k + 1], x);
                const double v = radial_density(W, x, h.derivative, h.value);
                if (!std::isfinite(v)) {
                    std::ostringstream os;
                    os << "radial profile infeasible: r' r/R <= 0 at R = " << x;
                    throw InfeasibleError(os.str(), -1);
                }
                return v;
            },
            R[k], R[k + 1], tol / static_cast<double>(M));
    }
    RadialEnergy e;
    e.bulk = pairwise_sum(parts);
    e.surface = anisotropic_circle_perimeter(p.cavity_radius(), phi);
    e.total = e.bulk + e.surface;
    return e;
}

std::string to_string(RadialStatus s) { return s == RadialStatus::converged ? "converged" : "stalled"; }

namespace {

// Discretized radial energy with a fixed Gauss rule per interval.
class RadialProblem {
public:
    RadialProblem(std::vector<double> knots, const BulkDensity& W, double kappa, int points)
        : R_(std::move(knots)), W_(W), kappa_(kappa), rule_(gauss_legendre(points)) {}

    int free() const { return static_cast<int>(R_.size()) - 1; }
    const std::vector<double>& knots() const { return R_; }

    double interval(int k, const std::vector<double>& r) const {
        const double d0 = pchip_slope_at(R_, r, k), d1 = pchip_slope_at(R_, r, k + 1);
        const double a = R_[k], b = R_[k + 1], half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
            const double x = a + half * (rule_.nodes[q] + 1.0);
            const Hermite h = hermite(a, b, r[k], r[k + 1], d0, d1, x);
            const double v = radial_density(W_, x, h.derivative, h.value);
            if (!std::isfinite(v)) return kInf;
            s += rule_.weights[q] * half * v;
        }
        return s;
    }

    double total(const std::vector<double>& r) const {
        if (!strictly_increasing(r)) return kInf;
        std::vector<double> parts(free());
        for (int k = 0; k < free(); ++k) {
            parts[k] = interval(k, r);
            if (!std::isfinite(parts[k])) return kInf;
        }
        return pairwise_sum(parts) + kappa_ * r[0];
    }

    double step_for(int j, const std::vector<double>& r, double rel) const {
        double gap = r[j + 1] - r[j];
        gap = std::min(gap, j > 0 ? r[j] - r[j - 1] : r[0]);
        return rel * gap;
    }

    // Exact gradient of total() with respect to r_0..r_{M-1}.
    Eigen::VectorXd gradient(const std::vector<double>& r) const {
        const int M = free();
        const std::vector<double> d = pchip_slopes(R_, r);
        std::vector<double> gy(M + 1, 0.0), gd(M + 1, 0.0);
        for (int k = 0; k < M; ++k) {
            const double a = R_[k], b = R_[k + 1], h = b - a, half = 0.5 * h;
            for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
                const double t = 0.5 * (rule_.nodes[q] + 1.0);
                const double x = a + h * t;
                const Hermite v = hermite(a, b, r[k], r[k + 1], d[k], d[k + 1], x);
                Mat2 F;
                F << v.derivative, 0.0, 0.0, v.value / x;
                const Mat2 P = W_.stress(F);
                const double wa = rule_.weights[q] * half * 2 * M_PI * x * P(0, 0);
                const double wb = rule_.weights[q] * half * 2 * M_PI * P(1, 1);
                const double t2 = t * t, t3 = t2 * t;
                // Hermite basis values and t-derivatives for y0, d0, y1, d1.
                const double bv[4] = {2 * t3 - 3 * t2 + 1, h * (t3 - 2 * t2 + t), -2 * t3 + 3 * t2, h * (t3 - t2)};
                const double bd[4] = {(6 * t2 - 6 * t) / h, 3 * t2 - 4 * t + 1, (-6 * t2 + 6 * t) / h, 3 * t2 - 2 * t};
                gy[k] += wa * bd[0] + wb * bv[0];
                gd[k] += wa * bd[1] + wb * bv[1];
                gy[k + 1] += wa * bd[2] + wb * bv[2];
                gd[k + 1] += wa * bd[3] + wb * bv[3];
            }
        }
        std::vector<std::pair<int, double>> jac;
        for (int j = 0; j <= M; ++j) {
            pchip_slope_jacobian(R_, r, j, jac);
            for (const auto& [i, v] : jac) gy[i] += gd[j] * v;
        }
        gy[0] += kappa_;
        return Eigen::Map<const Eigen::VectorXd>(gy.data(), M);
    }

    Eigen::MatrixXd hessian(std::vector<double> r) const {
        const int n = free();
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            const double h = step_for(j, r, 1e-5);
            const double keep = r[j];
            const int lo = std::max(0, j - 3), hi = std::min(n - 1, j + 3);
            std::vector<double> gp(hi - lo + 1), gm(hi - lo + 1);
            r[j] = keep + h;
            const Eigen::VectorXd g1 = gradient(r);
            r[j] = keep - h;
            const Eigen::VectorXd g2 = gradient(r);
            r[j] = keep;
            for (int i = lo; i <= hi; ++i) {
                gp[i - lo] = g1[i];
                gm[i - lo] = g2[i];
            }
            for (int i = lo; i <= hi; ++i) H(i, j) = (gp[i - lo] - gm[i - lo]) / (2 * h);
        }
        return 0.5 * (H + H.transpose());
    }

private:
    std::vector<double> R_;
    const BulkDensity& W_;
    double kappa_;
    QuadratureRule1D rule_;
};

} // namespace

RadialSolution solve_radial_from(const RadialProfile& start, const BulkDensity& W, const SurfaceDensity& phi,
                                 const RadialOptions& opts) {
    const RadialProblem prob(start.knots(), W, anisotropic_circle_perimeter(1.0, phi), opts.gauss_points);
    std::vector<double> r = start.values();
    double E = prob.total(r);
    if (!std::isfinite(E)) throw InfeasibleError("radial solver: starting profile has infinite energy", -1);
    RadialSolution sol{start, {}, RadialStatus::stalled, 0, 0.0, {E}};
    Eigen::VectorXd g = prob.gradient(r);
    const int n = prob.free();

    for (int it = 1; it <= opts.max_iters; ++it) {
        sol.iterations = it;
        if (g.cwiseAbs().maxCoeff() < opts.tol_gradient) {
            sol.status = RadialStatus::converged;
            break;
        }
        const Eigen::MatrixXd H = prob.hessian(r);
        const double scale = std::max(1e-12, H.diagonal().cwiseAbs().mean());
        double mu = 0.0;
        bool accepted = false;
        std::vector<double> r_new;
        double E_new = E;
        for (int attempt = 0; attempt < 25 && !accepted; ++attempt) {
            Eigen::MatrixXd A = H;
            A.diagonal().array() += mu;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
            Eigen::VectorXd d;
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) d = -ldlt.solve(g);
            if (d.size() != n || !d.allFinite() || !(g.dot(d) < 0)) {
                mu = mu == 0.0 ? 1e-8 * scale : 10 * mu;
                continue;
            }
            double t = 1.0;
            for (int k = 0; k < 40; ++k) {
                r_new = r;
                for (int j = 0; j < n; ++j) r_new[j] += t * d[j];
                E_new = prob.total(r_new);
                if (std::isfinite(E_new) && E_new <= E + 1e-4 * t * g.dot(d)) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) mu = mu == 0.0 ? 1e-8 * scale : 10 * mu;
        }
        if (!accepted) {
            sol.status = g.cwiseAbs().maxCoeff() <= 1e-6 ? RadialStatus::converged : RadialStatus::stalled;
            break;
        }
        const double decrease = E - E_new;
        r = std::move(r_new);
        E = E_new;
        g = prob.gradient(r);
        sol.history.push_back(E);
        if (decrease < opts.tol_energy && g.cwiseAbs().maxCoeff() <= 1e-6) {
            sol.status = RadialStatus::converged;
            break;
        }
    }
    sol.el_residual = g.cwiseAbs().maxCoeff();
    sol.profile = RadialProfile(start.knots(), r);
    sol.energy = radial_energy(sol.profile, W, phi);
    return sol;
}

RadialSolution solve_radial(double lambda, const BulkDensity& W, const SurfaceDensity& phi, double rho,
                            const RadialOptions& opts) {
    if (!(lambda > 0)) throw ArgumentError("solve_radial: lambda must be positive");
    if (opts.M < 32) throw ArgumentError("solve_radial: M must be at least 32");
    const std::vector<double> R = geometric_knots(rho, opts.r_out, opts.M);
    const double r_end = lambda * opts.r_out;
    std::vector<std::vector<double>> seeds;
    std::vector<double> closed(R.size());
    for (std::size_t j = 0; j < R.size(); ++j) closed[j] = lambda * R[j];
    seeds.push_back(closed);
    for (double f : {0.3, 0.6}) {
        const double c0 = f * r_end;
        std::vector<double> s(R.size());
        for (std::size_t j = 0; j < R.size(); ++j)
            s[j] = std::sqrt(lambda * lambda * R[j] * R[j] +
                             c0 * c0 * (1.0 - R[j] * R[j] / (opts.r_out * opts.r_out)));
        s.back() = r_end;
        seeds.push_back(s);
    }
    std::optional<RadialSolution> best;
    for (const auto& s : seeds) {
        RadialSolution sol = solve_radial_from(RadialProfile(R, s), W, phi, opts);
        if (!best || sol.history.back() < best->history.back() ||
            (best->status == RadialStatus::stalled && sol.status == RadialStatus::converged &&
             sol.history.back() <= best->history.back() + 1e-9))
            best = std::move(sol);
    }
    return *best;
}

std::vector<SweepRow> radial_sweep(const std::vector<double>& lambdas, const BulkDensity& W,
                                   const SurfaceDensity& phi, double rho, const RadialOptions& opts) {
    std::vector<SweepRow> rows(lambdas.size());
    parallel_for(lambdas.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const RadialSolution s = solve_radial(lambdas[i], W, phi, rho, opts);
            rows[i] = {lambdas[i], s.profile.cavity_radius(), s.energy.bulk, s.energy.surface, s.energy.total};
        }
    });
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "lambda,cavity_radius,bulk,surface,total\n";
    std::ostringstream line;
    line.precision(12);
    for (const auto& r : rows) {
        line.str("");
        line << r.lambda << "," << r.cavity_radius << "," << r.bulk << "," << r.surface << "," << r.total << "\n";
        os << line.str();
    }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
    std::vector<SweepRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line.rfind("lambda", 0) == 0) continue;
        std::istringstream ls(line);
        SweepRow r;
        char c1, c2, c3, c4;
        if (!(ls >> r.lambda >> c1 >> r.cavity_radius >> c2 >> r.bulk >> c3 >> r.surface >> c4 >> r.total) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
            throw ConfigError("sweep row", lineno, "expected five comma-separated numbers");
        rows.push_back(r);
    }
    return rows;
}

BvpReport bvp_boundary_check(const RadialProfile& profile, const BulkDensity& W, const SurfaceDensity& phi,
                             int samples) {
    if (!phi.has_hessian()) throw DomainError("Hessian unavailable for this surface density");
    BvpReport rep;
    const double rho = profile.inner();
    const double c = profile.cavity_radius();
    const double l1 = profile.slopes().front();
    const double l2 = c / rho;
    rep.cavity_radius = c;
    for (int i = 0; i < samples; ++i) {
        const double th = 2 * M_PI * i / samples;
        const Vec2 er(std::cos(th), std::sin(th));
        const Vec2 et = perp(er);
        const Mat2 F = l1 * er * er.transpose() + l2 * et * et.transpose();
        const Mat2 T = W.stress(F) * F.transpose() / F.determinant();
        const Vec2 n = -er;
        const Mat2 Dn = -(Mat2::Identity() - n * n.transpose()) / c;
        const double h = (phi.hessian(n) * Dn).trace();
        const Vec2 Tn = T * n;
        const double res = (Tn + h * n).norm() / (Tn.norm() + std::abs(h) + 1e-12);
        if (i == 0) rep.radial_traction = Tn.dot(er);
        rep.angles.push_back(th);
        rep.curvature.push_back(h);
        rep.residuals.push_back(res);
        rep.max_residual = std::max(rep.max_residual, res);
    }
    return rep;
}

} // namespace cavelast
