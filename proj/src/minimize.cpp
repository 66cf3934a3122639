#include "cavelast/variation.hpp"

#include <cmath>
#include <deque>

namespace cavelast {

std::string to_string(MinimizeStatus s) {
    switch (s) {
    case MinimizeStatus::converged:
        return "converged";
    case MinimizeStatus::max_iters:
        return "max_iters";
    case MinimizeStatus::stalled:
        return "stalled";
    }
    return "unknown";
}

namespace {

using Vec = Eigen::VectorXd;

struct Problem {
    const DeformationField& base;
    const BulkDensity& W;
    const SurfaceDensity& phi;
    std::vector<int> free; // free vertex ids, two unknowns each
    double det_floor;

    DeformationField field(const Vec& x) const {
        DeformationField y = base;
        for (std::size_t i = 0; i < free.size(); ++i) y.positions()[free[i]] = x.segment<2>(2 * i);
        return y;
    }

    Vec pack(const DeformationField& y) const {
        Vec x(2 * free.size());
        for (std::size_t i = 0; i < free.size(); ++i) x.segment<2>(2 * i) = y.positions()[free[i]];
        return x;
    }

    DiscreteEnergy eval(const Vec& x, Vec* g, std::vector<Vec2>* full = nullptr) const {
        std::vector<Vec2> grad;
        const DiscreteEnergy e = discrete_energy(field(x), W, phi, g ? &grad : nullptr, det_floor);
        if (g && std::isfinite(e.total)) {
            g->resize(x.size());
            for (std::size_t i = 0; i < free.size(); ++i) g->segment<2>(2 * i) = grad[free[i]];
            if (full) *full = std::move(grad);
        }
        return e;
    }
};

double battery_residual(const DeformationField& y, const std::vector<Vec2>& grad) {
    double r = 0.0;
    for (const auto& psi : certification_battery(y)) r = std::max(r, std::abs(nodal_variation(y, grad, psi)));
    return r;
}

double min_edge(const Mesh& mesh) {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& t : mesh.triangles())
        for (int k = 0; k < 3; ++k) h = std::min(h, (mesh.vertices()[t[k]] - mesh.vertices()[t[(k + 1) % 3]]).norm());
    return h;
}

double max_block_norm(const Vec& g) {
    double m = 0.0;
    for (Eigen::Index i = 0; i + 1 < g.size(); i += 2) m = std::max(m, g.segment<2>(i).norm());
    return m;
}

} // namespace

MinimizeResult minimize(const DeformationField& y0, const BulkDensity& W, const SurfaceDensity& phi,
                        const MinimizeOptions& opts) {
    const Mesh& mesh = y0.mesh();
    Problem prob{y0, W, phi, {}, opts.det_floor};
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (!mesh.is_dirichlet(v)) prob.free.push_back(v);

    MinimizeResult res{y0, {}, MinimizeStatus::max_iters, 0.0, {}, 0};
    const double delta = opts.inv_delta > 0 ? opts.inv_delta : 0.002 * mesh.diameter();
    const InvCircles circles = default_inv_circles(mesh, 4);
    auto inv_ok = [&](const DeformationField& y, InvReport* out) {
        if (circles.centers.empty()) return true;
        InvReport rep = check_inv(y, circles.centers, circles.radii, delta, 1500, 256);
        const bool ok = rep.pass();
        if (out) *out = std::move(rep);
        return ok;
    };

    Vec x = prob.pack(y0);
    Vec g;
    std::vector<Vec2> full;
    DiscreteEnergy e = prob.eval(x, &g, &full);
    if (!std::isfinite(e.total)) {
        MinDet md = min_det(y0);
        throw InfeasibleError("initial deformation violates det Dy > det_floor", md.triangle);
    }
    const double h_min = min_edge(mesh);
    double residual = battery_residual(prob.field(x), full);
    res.log.push_back({0, e.total, e.bulk, e.surface, e.min_det, 0.0, residual});

    std::deque<std::pair<Vec, Vec>> memory;
    Vec x_checkpoint = x;
    int accepted_since_check = 0;
    int small_steps = 0;
    int consecutive_rejections = 0;

    auto certified = [&](double E) {
        const double tol = opts.tol_residual >= 0 ? opts.tol_residual : 1e-3 * std::abs(E);
        return residual < tol;
    };

    for (int it = 1; it <= opts.max_iters; ++it) {
        // Two-loop recursion.
        Vec d = -g;
        if (!memory.empty()) {
            std::vector<double> alpha(memory.size());
            for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
                const auto& [s, yv] = memory[i];
                alpha[i] = s.dot(d) / yv.dot(s);
                d -= alpha[i] * yv;
            }
            const auto& [s_last, y_last] = memory.back();
            d *= s_last.dot(y_last) / y_last.dot(y_last);
            for (std::size_t i = 0; i < memory.size(); ++i) {
                const auto& [s, yv] = memory[i];
                const double beta = yv.dot(d) / yv.dot(s);
                d += (alpha[i] - beta) * s;
            }
        }
        if (memory.empty() || !(g.dot(d) < 0)) {
            memory.clear();
            const double gm = max_block_norm(g);
            d = gm > 0 ? Vec(-g * (0.01 * h_min / gm)) : Vec(-g);
        }
        const double slope = g.dot(d);
        if (!(slope < 0)) {
            res.status = certified(e.total) ? MinimizeStatus::converged : MinimizeStatus::stalled;
            break;
        }

        double step = 1.0;
        Vec x_new, g_new;
        std::vector<Vec2> full_new;
        DiscreteEnergy e_new;
        bool found = false;
        for (int k = 0; k < 60; ++k) {
            x_new = x + step * d;
            e_new = prob.eval(x_new, &g_new, &full_new);
            if (std::isfinite(e_new.total) && e_new.total <= e.total + 1e-4 * step * slope) {
                found = true;
                break;
            }
            step *= 0.5;
        }
        if (!found) {
            if (!memory.empty()) {
                memory.clear();
                --it;
                continue;
            }
            res.status = certified(e.total) ? MinimizeStatus::converged : MinimizeStatus::stalled;
            break;
        }

        if (opts.inv_every > 0 && ++accepted_since_check >= opts.inv_every) {
            accepted_since_check = 0;
            if (!inv_ok(prob.field(x_new), nullptr)) {
                // Undo back to the last certified iterate and restart the memory.
                ++res.inv_rejections;
                if (++consecutive_rejections >= 3) {
                    res.status = MinimizeStatus::stalled;
                    x = x_checkpoint;
                    e = prob.eval(x, &g, &full);
                    break;
                }
                x = x_checkpoint;
                e = prob.eval(x, &g, &full);
                memory.clear();
                continue;
            }
            consecutive_rejections = 0;
            x_checkpoint = x_new;
        }

        const Vec s = x_new - x;
        const Vec yv = g_new - g;
        if (s.dot(yv) > 1e-12 * s.norm() * yv.norm()) {
            memory.emplace_back(s, yv);
            if (static_cast<int>(memory.size()) > opts.lbfgs_memory) memory.pop_front();
        }
        const double decrease = (e.total - e_new.total) / std::max(1.0, std::abs(e.total));
        x = std::move(x_new);
        g = std::move(g_new);
        full = std::move(full_new);
        e = e_new;

        const bool check_residual = decrease < opts.tol_energy || it % std::max(1, opts.inv_every) == 0;
        if (check_residual) residual = battery_residual(prob.field(x), full);
        res.log.push_back({it, e.total, e.bulk, e.surface, e.min_det, step, residual});

        small_steps = decrease < opts.tol_energy ? small_steps + 1 : 0;
        if (small_steps >= opts.stall_patience && certified(e.total)) {
            res.status = MinimizeStatus::converged;
            break;
        }
        if (it == opts.max_iters) res.status = MinimizeStatus::max_iters;
    }

    res.y = prob.field(x);
    res.residual = battery_residual(res.y, full);
    if (!inv_ok(res.y, &res.inv) && res.status == MinimizeStatus::converged) res.status = MinimizeStatus::stalled;
    return res;
}

} // namespace cavelast
