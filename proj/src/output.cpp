#include "cavelast/output.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cavelast {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw ArgumentError("expected a number, got an empty field");
    const std::string t = s.substr(b, e - b + 1);
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ArgumentError("expected a number, got '" + t + "'");
    return v;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << text;
    if (!os) throw Error("write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string format_summary(const Summary& s) {
    std::string out;
    for (const auto& [k, v] : s) out += k + " = " + v + "\n";
    return out;
}

Summary parse_summary(const std::string& text) {
    Summary s;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw ConfigError("summary", lineno, "expected 'key = value'");
        s[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return s;
}

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::size_t columns, const char* what) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != columns) throw ConfigError(what, lineno, "expected " + std::to_string(columns) + " columns");
        rows.push_back(std::move(f));
    }
    return rows;
}

} // namespace

std::string iterations_csv(const std::vector<IterationRecord>& log) {
    std::string out = "iter,energy,bulk,surface,min_det,step,residual\n";
    for (const auto& r : log)
        out += std::to_string(r.iter) + "," + format_double(r.energy) + "," + format_double(r.bulk) + "," +
               format_double(r.surface) + "," + format_double(r.min_det) + "," + format_double(r.step) + "," +
               format_double(r.residual) + "\n";
    return out;
}

std::string deformation_csv(const DeformationField& y) {
    std::string out = "vertex,x1,x2,y1,y2\n";
    const auto& X = y.mesh().vertices();
    for (std::size_t v = 0; v < X.size(); ++v)
        out += std::to_string(v) + "," + format_double(X[v].x()) + "," + format_double(X[v].y()) + "," +
               format_double(y.positions()[v].x()) + "," + format_double(y.positions()[v].y()) + "\n";
    return out;
}

DeformationField parse_deformation_csv(const std::string& text, std::shared_ptr<const Mesh> mesh) {
    const auto rows = csv_rows(text, 5, "deformation.csv");
    if (static_cast<int>(rows.size()) != mesh->num_vertices())
        throw ArgumentError("deformation.csv has " + std::to_string(rows.size()) + " rows for " +
                            std::to_string(mesh->num_vertices()) + " vertices");
    std::vector<Vec2> p(rows.size());
    for (const auto& r : rows) {
        const int v = std::stoi(r[0]);
        if (v < 0 || v >= mesh->num_vertices()) throw ArgumentError("deformation.csv: vertex out of range");
        p[v] = Vec2(parse_double(r[3]), parse_double(r[4]));
    }
    return DeformationField(std::move(mesh), std::move(p));
}

std::string cavities_csv(const std::vector<Polyline>& cavities) {
    std::string out = "cavity,point,x,y\n";
    for (std::size_t k = 0; k < cavities.size(); ++k)
        for (std::size_t i = 0; i < cavities[k].size(); ++i)
            out += std::to_string(k) + "," + std::to_string(i) + "," + format_double(cavities[k][i].x()) + "," +
                   format_double(cavities[k][i].y()) + "\n";
    return out;
}

std::vector<Polyline> parse_cavities_csv(const std::string& text) {
    std::vector<Polyline> out;
    for (const auto& r : csv_rows(text, 4, "cavities.csv")) {
        const std::size_t k = std::stoul(r[0]);
        if (k >= out.size()) out.resize(k + 1);
        out[k].emplace_back(parse_double(r[2]), parse_double(r[3]));
    }
    return out;
}

std::string degree_pgm(const DegreeRaster& r, int offset) {
    std::ostringstream os;
    os << "P2\n# degree + " << offset << "\n" << r.grid.nx << " " << r.grid.ny << "\n" << 2 * offset << "\n";
    for (int j = r.grid.ny - 1; j >= 0; --j) {
        for (int i = 0; i < r.grid.nx; ++i) {
            if (i) os << ' ';
            os << std::clamp(r.at(i, j) + offset, 0, 2 * offset);
        }
        os << '\n';
    }
    return os.str();
}

std::string inverse_csv(const InverseField& f) {
    std::string out = "i,j,xi1,xi2,kind,x1,x2\n";
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            const int idx = f.grid.index(i, j);
            if (f.kind[idx] == InversePoint::Kind::outside) continue;
            const Vec2 c = f.grid.center(i, j);
            out += std::to_string(i) + "," + std::to_string(j) + "," + format_double(c.x()) + "," +
                   format_double(c.y()) + "," + (f.kind[idx] == InversePoint::Kind::marker ? "marker" : "reference") +
                   "," + format_double(f.values[idx].x()) + "," + format_double(f.values[idx].y()) + "\n";
        }
    return out;
}

std::string jump_set_csv(const std::vector<JumpCurve>& curves) {
    std::string out = "curve,point,x,y,n1,n2,amplitude\n";
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const auto& c = curves[k];
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const Vec2 n = i < c.normals.size() ? c.normals[i] : Vec2::Zero();
            const double a = i < c.amplitude.size() ? c.amplitude[i] : 0.0;
            out += std::to_string(k) + "," + std::to_string(i) + "," + format_double(c.points[i].x()) + "," +
                   format_double(c.points[i].y()) + "," + format_double(n.x()) + "," + format_double(n.y()) + "," +
                   format_double(a) + "\n";
        }
    }
    return out;
}

std::string render_svg_from_exports(const std::string& dir) {
    namespace fs = std::filesystem;
    std::istringstream ms(read_text((fs::path(dir) / "mesh.cavmesh").string()));
    auto mesh = std::make_shared<const Mesh>(read_mesh(ms));
    const DeformationField y = parse_deformation_csv(read_text((fs::path(dir) / "deformation.csv").string()), mesh);
    const std::vector<Polyline> cavities = parse_cavities_csv(read_text((fs::path(dir) / "cavities.csv").string()));

    auto bounds = [](const std::vector<Vec2>& pts) {
        Vec2 lo = pts.front(), hi = pts.front();
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        return std::pair{lo, hi};
    };
    const auto [rlo, rhi] = bounds(mesh->vertices());
    const auto [dlo, dhi] = bounds(y.positions());
    const double panel = 400.0, margin = 20.0;
    const double rs = panel / std::max((rhi - rlo).maxCoeff(), 1e-300);
    const double ds = panel / std::max((dhi - dlo).maxCoeff(), 1e-300);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * panel + 3 * margin << "\" height=\""
       << panel + 2 * margin << "\">\n";
    auto draw = [&](const std::vector<Vec2>& pts, const Vec2& lo, double s, double x0, const std::string& tag) {
        auto px = [&](const Vec2& p) {
            return format_double(x0 + s * (p.x() - lo.x())) + "," +
                   format_double(margin + panel - s * (p.y() - lo.y()));
        };
        os << "<g id=\"" << tag << "\" fill=\"none\" stroke=\"#4a6fa5\" stroke-width=\"0.3\">\n";
        for (const auto& t : mesh->triangles())
            os << "<polygon points=\"" << px(pts[t[0]]) << " " << px(pts[t[1]]) << " " << px(pts[t[2]]) << "\"/>\n";
        os << "</g>\n";
        return px;
    };
    draw(mesh->vertices(), rlo, rs, margin, "reference");
    const auto px = draw(y.positions(), dlo, ds, 2 * margin + panel, "deformed");
    os << "<g id=\"cavities\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\">\n";
    for (const auto& c : cavities) {
        os << "<polygon points=\"";
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << px(c[i]);
        os << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

} // namespace cavelast
