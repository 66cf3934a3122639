#include "cavelast/scenario.hpp"

#include "cavelast/energy.hpp"
#include "cavelast/radial.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cavelast {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> numbers(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok));
    return out;
}

std::vector<std::vector<double>> rows_of(const std::string& s, std::size_t width) {
    std::vector<std::vector<double>> out;
    for (const auto& r : split(s, ';')) {
        auto v = numbers(r);
        if (v.size() != width)
            throw ArgumentError("each ';'-separated entry needs " + std::to_string(width) + " numbers");
        out.push_back(std::move(v));
    }
    return out;
}

double number(const std::string& s) {
    const auto v = numbers(s);
    if (v.size() != 1) throw ArgumentError("expected one number");
    return v[0];
}

int integer(const std::string& s) {
    const double v = number(s);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ArgumentError("expected an integer");
    return static_cast<int>(v);
}

Vec2 vec2(const std::string& s) {
    const auto v = numbers(s);
    if (v.size() != 2) throw ArgumentError("expected two numbers");
    return {v[0], v[1]};
}

std::string choice(const std::string& s, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (s == a) return s;
    std::string msg = "expected one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ArgumentError(msg);
}

using Setter = std::function<void(ScenarioConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"scenario.name", [](ScenarioConfig& c, const std::string& v) { c.name = v; }},
        {"scenario.mode",
         [](ScenarioConfig& c, const std::string& v) { c.mode = choice(v, {"minimize", "evaluate"}); }},
        {"scenario.seed",
         [](ScenarioConfig& c, const std::string& v) {
             const double s = number(v);
             if (s < 0 || s != std::floor(s)) throw ArgumentError("seed must be a nonnegative integer");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"domain.shape", [](ScenarioConfig& c, const std::string& v) { c.shape = choice(v, {"disk", "square"}); }},
        {"domain.center", [](ScenarioConfig& c, const std::string& v) { c.center = vec2(v); }},
        {"domain.radius", [](ScenarioConfig& c, const std::string& v) { c.radius = number(v); }},
        {"domain.mesh",
         [](ScenarioConfig& c, const std::string& v) { c.mesh = choice(v, {"structured", "delaunay"}); }},
        {"domain.n_theta", [](ScenarioConfig& c, const std::string& v) { c.n_theta = integer(v); }},
        {"domain.h", [](ScenarioConfig& c, const std::string& v) { c.h = number(v); }},
        {"domain.punctures",
         [](ScenarioConfig& c, const std::string& v) {
             c.punctures.clear();
             for (const auto& r : rows_of(v, 3)) c.punctures.push_back({Vec2(r[0], r[1]), r[2]});
         }},
        {"material.kind",
         [](ScenarioConfig& c, const std::string& v) {
             c.material = choice(v, {"default_compressible", "user_table"});
         }},
        {"material.mu", [](ScenarioConfig& c, const std::string& v) { c.mu = number(v); }},
        {"material.a", [](ScenarioConfig& c, const std::string& v) { c.a = number(v); }},
        {"material.b", [](ScenarioConfig& c, const std::string& v) { c.b = number(v); }},
        {"material.p", [](ScenarioConfig& c, const std::string& v) { c.p = number(v); }},
        {"material.table",
         [](ScenarioConfig& c, const std::string& v) {
             c.gamma_table.clear();
             for (const auto& r : rows_of(v, 2)) c.gamma_table.emplace_back(r[0], r[1]);
         }},
        {"surface.kind",
         [](ScenarioConfig& c, const std::string& v) {
             c.surface = choice(v, {"isotropic", "elliptic", "smoothed_l1"});
         }},
        {"surface.A",
         [](ScenarioConfig& c, const std::string& v) {
             const auto a = numbers(v);
             if (a.size() != 4) throw ArgumentError("expected four numbers a11 a12 a21 a22");
             c.A << a[0], a[1], a[2], a[3];
         }},
        {"surface.eps", [](ScenarioConfig& c, const std::string& v) { c.eps = number(v); }},
        {"boundary.kind",
         [](ScenarioConfig& c, const std::string& v) {
             c.boundary = choice(v, {"affine_stretch", "radial_stretch", "user_table"});
         }},
        {"boundary.lambda", [](ScenarioConfig& c, const std::string& v) { c.lambda = number(v); }},
        {"boundary.center", [](ScenarioConfig& c, const std::string& v) { c.boundary_center = vec2(v); }},
        {"boundary.table",
         [](ScenarioConfig& c, const std::string& v) {
             c.boundary_table.clear();
             for (const auto& r : rows_of(v, 4)) c.boundary_table.emplace_back(Vec2(r[0], r[1]), Vec2(r[2], r[3]));
         }},
        {"initial.kind",
         [](ScenarioConfig& c, const std::string& v) {
             c.initial = choice(v, {"identity", "boundary_map", "radial_seed", "localized"});
         }},
        {"initial.seed_radius", [](ScenarioConfig& c, const std::string& v) { c.seed_radius = number(v); }},
        {"solver.max_iters", [](ScenarioConfig& c, const std::string& v) { c.max_iters = integer(v); }},
        {"solver.tol_energy", [](ScenarioConfig& c, const std::string& v) { c.tol_energy = number(v); }},
        {"solver.tol_residual", [](ScenarioConfig& c, const std::string& v) { c.tol_residual = number(v); }},
        {"solver.det_floor", [](ScenarioConfig& c, const std::string& v) { c.det_floor = number(v); }},
        {"solver.inv_every", [](ScenarioConfig& c, const std::string& v) { c.inv_every = integer(v); }},
        {"solver.lbfgs_memory", [](ScenarioConfig& c, const std::string& v) { c.lbfgs_memory = integer(v); }},
        {"output.directory", [](ScenarioConfig& c, const std::string& v) { c.directory = v; }},
        {"output.emit",
         [](ScenarioConfig& c, const std::string& v) {
             c.emit.clear();
             if (v == "none") return;
             for (const auto& e : split(v, ',')) c.emit.insert(choice(e, {"svg", "csv", "raster", "inverse"}));
         }},
        {"output.raster_cell", [](ScenarioConfig& c, const std::string& v) { c.raster_cell = number(v); }},
        {"output.golden", [](ScenarioConfig& c, const std::string& v) { c.golden = v; }},
    };
    return table;
}

std::string join_rows(const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) out += "; ";
        for (std::size_t j = 0; j < rows[i].size(); ++j) out += (j ? " " : "") + format_double(rows[i][j]);
    }
    return out;
}

} // namespace

ScenarioConfig parse_config(std::istream& is) {
    ScenarioConfig c;
    std::string line, section;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(t, lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(t, lineno, "expected 'key = value'");
        const std::string key = section + "." + trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(key, lineno, "unknown key");
        if (!seen.insert(key).second) throw ConfigError(key, lineno, "duplicate key");
        try {
            it->second(c, value);
        } catch (const ArgumentError& e) {
            throw ConfigError(key, lineno, e.what());
        }
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path, 0, "cannot open config file");
    return parse_config(is);
}

std::string serialize_config(const ScenarioConfig& c) {
    std::ostringstream os;
    auto emit_line = [&](const char* k, const std::string& v) {
        if (!v.empty()) os << k << " = " << v << "\n";
    };
    auto f = format_double;
    auto v2 = [](const Vec2& v) { return format_double(v.x()) + " " + format_double(v.y()); };

    os << "[scenario]\n";
    emit_line("name", c.name);
    emit_line("mode", c.mode);
    emit_line("seed", std::to_string(c.seed));
    os << "\n[domain]\n";
    emit_line("shape", c.shape);
    emit_line("center", v2(c.center));
    emit_line("radius", f(c.radius));
    emit_line("mesh", c.mesh);
    emit_line("n_theta", std::to_string(c.n_theta));
    emit_line("h", f(c.h));
    std::vector<std::vector<double>> p;
    for (const auto& q : c.punctures) p.push_back({q.center.x(), q.center.y(), q.radius});
    emit_line("punctures", join_rows(p));
    os << "\n[material]\n";
    emit_line("kind", c.material);
    emit_line("mu", f(c.mu));
    emit_line("a", f(c.a));
    emit_line("b", f(c.b));
    emit_line("p", f(c.p));
    std::vector<std::vector<double>> g;
    for (const auto& [h, v] : c.gamma_table) g.push_back({h, v});
    emit_line("table", join_rows(g));
    os << "\n[surface]\n";
    emit_line("kind", c.surface);
    emit_line("A", f(c.A(0, 0)) + " " + f(c.A(0, 1)) + " " + f(c.A(1, 0)) + " " + f(c.A(1, 1)));
    emit_line("eps", f(c.eps));
    os << "\n[boundary]\n";
    emit_line("kind", c.boundary);
    emit_line("lambda", f(c.lambda));
    emit_line("center", v2(c.boundary_center));
    std::vector<std::vector<double>> bt;
    for (const auto& [x, y] : c.boundary_table) bt.push_back({x.x(), x.y(), y.x(), y.y()});
    emit_line("table", join_rows(bt));
    os << "\n[initial]\n";
    emit_line("kind", c.initial);
    emit_line("seed_radius", f(c.seed_radius));
    os << "\n[solver]\n";
    emit_line("max_iters", std::to_string(c.max_iters));
    emit_line("tol_energy", f(c.tol_energy));
    emit_line("tol_residual", f(c.tol_residual));
    emit_line("det_floor", f(c.det_floor));
    emit_line("inv_every", std::to_string(c.inv_every));
    emit_line("lbfgs_memory", std::to_string(c.lbfgs_memory));
    os << "\n[output]\n";
    emit_line("directory", c.directory);
    std::string emit;
    for (const auto& e : c.emit) emit += (emit.empty() ? "" : ",") + e;
    emit_line("emit", emit.empty() ? "none" : emit);
    emit_line("raster_cell", f(c.raster_cell));
    emit_line("golden", c.golden);
    return os.str();
}

void validate_config(const ScenarioConfig& c) {
    auto positive = [](const char* key, double v) {
        if (!(v > 0)) throw ConfigError(key, 0, "must be positive");
    };
    if (c.name.empty()) throw ConfigError("scenario.name", 0, "must not be empty");
    positive("domain.radius", c.radius);
    positive("domain.h", c.h);
    positive("solver.tol_energy", c.tol_energy);
    positive("solver.det_floor", c.det_floor);
    positive("boundary.lambda", c.lambda);
    if (c.tol_residual < 0) throw ConfigError("solver.tol_residual", 0, "must be positive (0 selects 1e-3 E)");
    if (c.n_theta < 8) throw ConfigError("domain.n_theta", 0, "must be at least 8");
    if (c.max_iters < 0) throw ConfigError("solver.max_iters", 0, "must be nonnegative");
    if (c.inv_every < 0) throw ConfigError("solver.inv_every", 0, "must be nonnegative");
    if (c.lbfgs_memory < 1) throw ConfigError("solver.lbfgs_memory", 0, "must be at least 1");
    if (c.raster_cell < 0) throw ConfigError("output.raster_cell", 0, "must be nonnegative");
    const double inradius = c.radius;
    for (std::size_t k = 0; k < c.punctures.size(); ++k) {
        const auto& q = c.punctures[k];
        std::ostringstream os;
        if (!(q.radius > 0)) throw ConfigError("domain.punctures", 0, "puncture radius must be positive");
        if (q.radius >= inradius / 4) {
            os << "puncture " << k << " radius " << q.radius << " must be below inradius/4 = " << inradius / 4;
            throw ConfigError("domain.punctures", 0, os.str());
        }
        const Vec2 d = (q.center - c.center).cwiseAbs();
        const double room = c.shape == "disk" ? c.radius - d.norm() : c.radius - d.maxCoeff();
        if (!(room > 2 * q.radius)) {
            os << "puncture " << k << " is too close to the outer boundary";
            throw ConfigError("domain.punctures", 0, os.str());
        }
        for (std::size_t l = 0; l < k; ++l)
            if ((c.punctures[l].center - q.center).norm() <= 2 * (q.radius + c.punctures[l].radius)) {
                os << "punctures " << l << " and " << k << " overlap";
                throw ConfigError("domain.punctures", 0, os.str());
            }
    }
    if (c.surface == "elliptic") {
        if (std::abs(c.A(0, 1) - c.A(1, 0)) > 1e-12 || !(c.A(0, 0) > 0) || !(c.A.determinant() > 0))
            throw ConfigError("surface.A", 0, "must be symmetric positive definite");
    }
    if (c.surface == "smoothed_l1") positive("surface.eps", c.eps);
    if (c.material == "user_table" && c.gamma_table.size() < 2)
        throw ConfigError("material.table", 0, "needs at least two rows");
    if (c.boundary == "user_table" && c.boundary_table.empty())
        throw ConfigError("boundary.table", 0, "needs at least one row");
    if (c.initial == "radial_seed" && (c.punctures.size() != 1 || c.boundary != "radial_stretch"))
        throw ConfigError("initial.kind", 0, "radial_seed needs one puncture and radial_stretch boundary data");
    if ((c.initial == "radial_seed" || c.initial == "localized") && !(c.seed_radius > 0))
        throw ConfigError("initial.seed_radius", 0, "must be positive");
}

std::shared_ptr<const Mesh> build_mesh(const ScenarioConfig& c) {
    if (c.mesh == "structured") {
        if (c.shape == "disk") {
            if (c.punctures.empty()) return std::make_shared<const Mesh>(disk_mesh(c.center, c.radius, c.n_theta / 6));
            if (c.punctures.size() == 1 && (c.punctures[0].center - c.center).norm() < 1e-12)
                return std::make_shared<const Mesh>(annulus_mesh(c.center, c.punctures[0].radius, c.radius, c.n_theta));
        } else if (c.punctures.empty()) {
            const Vec2 r = Vec2::Constant(c.radius);
            return std::make_shared<const Mesh>(square_mesh(c.center - r, c.center + r, c.n_theta));
        }
        throw ConfigError("domain.mesh", 0,
                          "structured meshes allow no puncture, or one at the disk center; use delaunay");
    }
    return std::make_shared<const Mesh>(delaunay_mesh(c.shape == "disk" ? DomainShape::disk : DomainShape::square,
                                                      c.center, c.radius, c.punctures, c.h));
}

BulkDensity build_bulk(const ScenarioConfig& c) {
    if (c.material == "user_table") return BulkDensity::tabulated(c.mu, c.p, c.gamma_table, c.a, c.b);
    return BulkDensity::compressible(c.mu, c.a, c.b, c.p);
}

SurfaceDensity build_surface(const ScenarioConfig& c) {
    if (c.surface == "elliptic") return SurfaceDensity::elliptic(c.A);
    if (c.surface == "smoothed_l1") return SurfaceDensity::smoothed_l1(c.eps);
    return SurfaceDensity::isotropic();
}

BoundaryData build_boundary(const ScenarioConfig& c) {
    if (c.boundary == "affine_stretch") return BoundaryData::affine_stretch(c.lambda, c.boundary_center);
    if (c.boundary == "user_table") return BoundaryData::user_table(c.boundary_table);
    return BoundaryData::radial_stretch(c.lambda, c.boundary_center);
}

DeformationField build_initial(const ScenarioConfig& c, std::shared_ptr<const Mesh> mesh) {
    const BoundaryData d = build_boundary(c);
    DeformationField y = DeformationField::identity(mesh);
    if (c.initial == "radial_seed") {
        const auto& q = c.punctures[0];
        y = DeformationField::from_map(mesh, [&](const Vec2& x) {
            return radial_seed_map(x, q.center, q.radius, c.radius, c.seed_radius, c.lambda);
        });
    } else if (c.initial == "boundary_map" || c.initial == "localized") {
        if (d.kind() != BoundaryKind::user_table) y = DeformationField::from_map(mesh, [&](const Vec2& x) { return d(x); });
        if (c.initial == "localized") {
            std::vector<Vec2> sites;
            // Image of each puncture center, taken as the midpoint of two opposite rim points.
            for (const auto& q : mesh->punctures())
                sites.push_back(0.5 * (y.evaluate(q.center + Vec2(q.radius, 0)) + y.evaluate(q.center - Vec2(q.radius, 0))));
            std::vector<Vec2> gamma;
            for (int v = 0; v < mesh->num_vertices(); ++v)
                if (mesh->is_dirichlet(v)) gamma.push_back(y.positions()[v]);
            for (std::size_t k = 0; k < sites.size(); ++k) {
                double L = std::numeric_limits<double>::infinity();
                for (const auto& g : gamma) L = std::min(L, (g - sites[k]).norm());
                for (std::size_t l = 0; l < sites.size(); ++l)
                    if (l != k) L = std::min(L, 0.5 * (sites[l] - sites[k]).norm());
                L *= 0.9;
                if (!(c.seed_radius < L)) {
                    std::ostringstream os;
                    os << "seed_radius " << c.seed_radius << " does not fit around puncture " << k << " (room " << L
                       << ")";
                    throw ConfigError("initial.seed_radius", 0, os.str());
                }
                for (auto& p : y.positions()) p = localized_cavity_map(p, sites[k], c.seed_radius, L);
            }
        }
    }
    y.apply_boundary(d);
    return y;
}

MinimizeOptions build_solver(const ScenarioConfig& c) {
    MinimizeOptions o;
    o.max_iters = c.max_iters;
    o.tol_energy = c.tol_energy;
    o.tol_residual = c.tol_residual > 0 ? c.tol_residual : -1.0;
    o.det_floor = c.det_floor;
    o.inv_every = c.inv_every;
    o.lbfgs_memory = c.lbfgs_memory;
    return o;
}

std::string golden_directory() {
    if (const char* env = std::getenv("CAVELAST_GOLDEN_DIR"); env && *env) return env;
    return CAVELAST_DEFAULT_GOLDEN_DIR;
}

namespace {

double diameter_of(const std::vector<Vec2>& pts) {
    Vec2 lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

void add_golden(Summary& s, const ScenarioConfig& c, double energy, double radius) {
    namespace fs = std::filesystem;
    const fs::path path = fs::path(golden_directory()) / c.golden;
    std::ifstream is(path);
    if (!is) {
        s["golden.error"] = "missing " + path.string();
        return;
    }
    for (const auto& row : read_sweep_csv(is)) {
        if (std::abs(row.lambda - c.lambda) > 1e-9) continue;
        const double de = std::abs(energy - row.total) / std::abs(row.total);
        const double dr = std::abs(radius - row.cavity_radius) / row.cavity_radius;
        s["golden.file"] = c.golden;
        s["golden.total"] = format_double(row.total);
        s["golden.cavity_radius"] = format_double(row.cavity_radius);
        s["golden.energy_rel_gap"] = format_double(de);
        s["golden.radius_rel_gap"] = format_double(dr);
        s["golden.pass"] = de <= 0.02 && dr <= 0.03 ? "1" : "0";
        return;
    }
    s["golden.error"] = "no row for lambda " + format_double(c.lambda) + " in " + path.string();
}

} // namespace

RunOutcome run_scenario(const RunRequest& req) {
    namespace fs = std::filesystem;
    RunOutcome out;
    try {
        ScenarioConfig c = load_config(req.config_path);
        if (req.evaluate_only) c.mode = "evaluate";
        if (req.emit) c.emit = *req.emit;
        if (req.out_dir) c.directory = *req.out_dir;
        if (c.directory.empty()) c.directory = (fs::path("runs") / c.name).string();
        validate_config(c);

        const auto mesh = build_mesh(c);
        const BulkDensity W = build_bulk(c);
        const SurfaceDensity phi = build_surface(c);
        DeformationField y = build_initial(c, mesh);
        const MinDet md0 = min_det(y);
        if (!(md0.value > (c.mode == "minimize" ? c.det_floor : 0.0))) {
            std::ostringstream os;
            os << "initial deformation is not admissible: min det " << md0.value << " at triangle " << md0.triangle;
            throw InfeasibleError(os.str(), md0.triangle);
        }

        Summary& s = out.summary;
        s["scenario.name"] = c.name;
        s["scenario.mode"] = c.mode;
        s["scenario.seed"] = std::to_string(c.seed);
        s["mesh.vertices"] = std::to_string(mesh->num_vertices());
        s["mesh.triangles"] = std::to_string(mesh->num_triangles());
        s["mesh.punctures"] = std::to_string(mesh->punctures().size());

        std::vector<IterationRecord> log;
        MinimizeStatus status = MinimizeStatus::converged;
        if (c.mode == "minimize") {
            MinimizeResult r = minimize(y, W, phi, build_solver(c));
            y = r.y;
            log = std::move(r.log);
            status = r.status;
            double accepted_min = std::numeric_limits<double>::infinity();
            for (const auto& it : log) accepted_min = std::min(accepted_min, it.min_det);
            s["solver.status"] = to_string(r.status);
            s["solver.iterations"] = std::to_string(log.empty() ? 0 : log.back().iter);
            s["solver.residual"] = format_double(r.residual);
            s["solver.inv_rejections"] = std::to_string(r.inv_rejections);
            s["solver.min_det_accepted"] = format_double(accepted_min);
        }
        s["deformation.min_det"] = format_double(min_det(y).value);

        DetectionOptions det;
        det.cross_validate = true;
        det.check_inv = true;
        const EnergyBreakdown e = total_energy(y, W, phi, det);
        s["energy.total"] = format_double(e.total);
        s["energy.bulk"] = format_double(e.bulk);
        s["energy.surface"] = format_double(e.surface);
        s["energy.rho_artifact"] = format_double(e.rho_artifact);
        if (e.inv_pass) {
            s["inv.pass"] = *e.inv_pass ? "1" : "0";
            s["inv.violations"] = std::to_string(e.inv_violations);
        }
        std::vector<Polyline> cavities;
        double radius0 = 0.0;
        for (std::size_t k = 0; k < e.per_cavity.size(); ++k) {
            const auto& cr = e.per_cavity[k];
            const std::string p = "cavity." + std::to_string(k) + ".";
            const Vec2 ctr = polygon_centroid(cr.boundary);
            double rbar = 0.0;
            for (const auto& q : cr.boundary) rbar += (q - ctr).norm();
            rbar /= static_cast<double>(cr.boundary.size());
            if (k == 0) radius0 = rbar;
            s[p + "site"] = format_double(cr.site.x()) + " " + format_double(cr.site.y());
            s[p + "centroid"] = format_double(ctr.x()) + " " + format_double(ctr.y());
            s[p + "mean_radius"] = format_double(rbar);
            s[p + "area"] = format_double(cr.area);
            s[p + "aniso_perimeter"] = format_double(cr.aniso_perimeter);
            s[p + "simple"] = cr.simple ? "1" : "0";
            if (k < e.slow_path_hausdorff.size())
                s[p + "slow_path_hausdorff"] = format_double(e.slow_path_hausdorff[k]);
            cavities.push_back(cr.boundary);
        }
        for (std::size_t i = 0; i < e.warnings.size(); ++i) s["warning." + std::to_string(i)] = e.warnings[i];
        if (!c.golden.empty()) add_golden(s, c, e.total, radius0);

        fs::create_directories(c.directory);
        const fs::path dir(c.directory);
        write_text((dir / "config.ini").string(), serialize_config(c));
        const bool csv = c.emit.count("csv") || c.emit.count("svg");
        if (csv) {
            std::ostringstream ms;
            write_mesh(ms, *mesh);
            write_text((dir / "mesh.cavmesh").string(), ms.str());
            write_text((dir / "deformation.csv").string(), deformation_csv(y));
            write_text((dir / "cavities.csv").string(), cavities_csv(cavities));
            if (c.mode == "minimize") write_text((dir / "iterations.csv").string(), iterations_csv(log));
        }
        if (c.emit.count("svg")) write_text((dir / "figure.svg").string(), render_svg_from_exports(c.directory));
        const double cell = c.raster_cell > 0 ? c.raster_cell : 0.005 * diameter_of(y.positions());
        if (c.emit.count("raster")) {
            const DegreeRaster r = topological_image(y, Subdomain::domain_boundary(), cell);
            write_text((dir / "degree.pgm").string(), degree_pgm(r));
            s["raster.cell"] = format_double(cell);
            s["raster.area"] = format_double(r.area());
        }
        if (c.emit.count("inverse")) {
            const InverseField f = build_inverse_field(y, cell);
            write_text((dir / "inverse.csv").string(), inverse_csv(f));
            write_text((dir / "jump_set.csv").string(), jump_set_csv(extract_jump_set(f)));
        }
        write_text((dir / "summary.txt").string(), format_summary(s));
        out.directory = c.directory;
        out.exit_code = status == MinimizeStatus::stalled ? 3 : 0;
        out.message = status == MinimizeStatus::stalled ? "solver stalled" : "ok";
    } catch (const ConfigError& e) {
        out.exit_code = 2;
        out.message = e.what();
    } catch (const InfeasibleError& e) {
        out.exit_code = 2;
        out.message = e.what();
    } catch (const ArgumentError& e) {
        out.exit_code = 2;
        out.message = e.what();
    } catch (const GeometryError& e) {
        out.exit_code = 2;
        out.message = e.what();
    }
    return out;
}

namespace {

struct LoadedRun {
    ScenarioConfig config;
    Summary summary;
    std::optional<DeformationField> y;
};

LoadedRun load_run(const std::string& dir) {
    namespace fs = std::filesystem;
    LoadedRun r;
    const fs::path d(dir);
    if (!fs::exists(d / "summary.txt")) throw ArgumentError("no summary.txt in " + dir);
    r.summary = parse_summary(read_text((d / "summary.txt").string()));
    std::istringstream cs(read_text((d / "config.ini").string()));
    r.config = parse_config(cs);
    std::istringstream ms(read_text((d / "mesh.cavmesh").string()));
    auto mesh = std::make_shared<const Mesh>(read_mesh(ms));
    r.y.emplace(parse_deformation_csv(read_text((d / "deformation.csv").string()), mesh));
    return r;
}

double discrete_surface(const DeformationField& y, const SurfaceDensity& phi) {
    double s = 0.0;
    for (int k = 0; k < static_cast<int>(y.mesh().punctures().size()); ++k)
        s += anisotropic_perimeter(cavity_boundary(y, k), phi);
    return s;
}

} // namespace

CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b) {
    const LoadedRun A = load_run(dir_a), B = load_run(dir_b);
    CompareReport rep;
    rep.a = A.summary;
    rep.b = B.summary;
    const BulkDensity Wb = build_bulk(B.config);
    const SurfaceDensity phib = build_surface(B.config);
    rep.surface_b = discrete_surface(*B.y, phib);
    rep.energy_b = bulk_term(*B.y, Wb) + rep.surface_b;
    rep.surface_a_under_b = discrete_surface(*A.y, phib);
    rep.energy_a_under_b = bulk_term(*A.y, Wb) + rep.surface_a_under_b;
    const ScenarioConfig &ca = A.config, &cb = B.config;
    rep.same_boundary = ca.shape == cb.shape && ca.center == cb.center && ca.radius == cb.radius &&
                        ca.boundary == cb.boundary && ca.lambda == cb.lambda &&
                        ca.boundary_center == cb.boundary_center && ca.boundary_table == cb.boundary_table;
    rep.alarm = rep.same_boundary && rep.energy_a_under_b < rep.energy_b - 1e-9 * std::abs(rep.energy_b);

    std::ostringstream os;
    os << "key,A,B,B-A\n";
    for (const char* k : {"energy.total", "energy.bulk", "energy.surface", "cavity.0.mean_radius",
                          "cavity.0.aniso_perimeter", "solver.status", "solver.iterations"}) {
        const auto ia = rep.a.find(k), ib = rep.b.find(k);
        const std::string va = ia == rep.a.end() ? "" : ia->second, vb = ib == rep.b.end() ? "" : ib->second;
        std::string delta;
        try {
            delta = format_double(parse_double(vb) - parse_double(va));
        } catch (const ArgumentError&) {
            delta = va == vb ? "same" : "differs";
        }
        os << k << "," << va << "," << vb << "," << delta << "\n";
    }
    os << "energy_b," << "," << format_double(rep.energy_b) << ",\n";
    os << "energy_a_under_b," << format_double(rep.energy_a_under_b) << ",,\n";
    os << "surface_b," << "," << format_double(rep.surface_b) << ",\n";
    os << "surface_a_under_b," << format_double(rep.surface_a_under_b) << ",,\n";
    os << "same_boundary," << (rep.same_boundary ? 1 : 0) << ",,\n";
    os << "alarm," << (rep.alarm ? 1 : 0) << ",,\n";
    rep.table = os.str();
    return rep;
}

} // namespace cavelast
