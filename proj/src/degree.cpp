#include "cavelast/degree.hpp"

#include "cavelast/energy.hpp"
#include "cavelast/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cavelast {

int winding_number_unchecked(const Polyline& loop, const Vec2& xi) {
    int wn = 0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = loop[i];
        const Vec2& b = loop[(i + 1) % n];
        const double left = cross(b - a, xi - a);
        if (a.y() <= xi.y()) {
            if (b.y() > xi.y() && left > 0) ++wn;
        } else if (b.y() <= xi.y() && left < 0) {
            --wn;
        }
    }
    return wn;
}

int winding_number(const Polyline& loop, const Vec2& xi, double tol) {
    if (loop.size() < 2) throw ArgumentError("winding_number: loop needs at least two points");
    if (point_loop_distance(loop, xi) <= tol) {
        std::ostringstream os;
        os << "point (" << xi.x() << ", " << xi.y() << ") lies on the loop";
        throw OnBoundaryError(os.str());
    }
    return winding_number_unchecked(loop, xi);
}

std::vector<Polyline> boundary_images(const DeformationField& y, const Subdomain& U) {
    std::vector<Polyline> out;
    auto image = [&](const std::vector<int>& idx) {
        Polyline p;
        p.reserve(idx.size());
        for (int v : idx) p.push_back(y.positions()[v]);
        return p;
    };
    switch (U.kind) {
    case Subdomain::Kind::circle:
        out.push_back(trace_on_circle(y, U.center, U.radius, U.samples));
        break;
    case Subdomain::Kind::outer_boundary:
        for (const auto& loop : y.mesh().outer_loops()) out.push_back(image(loop));
        break;
    case Subdomain::Kind::domain_boundary:
        for (const auto& loop : y.mesh().outer_loops()) out.push_back(image(loop));
        for (int k = 0; k < static_cast<int>(y.mesh().punctures().size()); ++k)
            out.push_back(image(y.mesh().puncture_loop(k)));
        break;
    }
    return out;
}

std::vector<char> DegreeRaster::indicator() const {
    std::vector<char> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] != 0;
    return out;
}

double DegreeRaster::area() const {
    std::size_t n = 0;
    for (int v : values) n += v != 0;
    return static_cast<double>(n) * grid.delta * grid.delta;
}

double DegreeRaster::degree_integral() const {
    long long s = 0;
    for (int v : values) s += v;
    return static_cast<double>(s) * grid.delta * grid.delta;
}

namespace {

// Smallest distance between loop points separated by more than 3 delta of
// arc length in both directions.
double loop_self_distance(const Polyline& loop, double delta) {
    const std::size_t n = loop.size();
    if (n < 4 || n > 6000) return std::numeric_limits<double>::infinity();
    std::vector<double> s(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) s[i + 1] = s[i] + (loop[(i + 1) % n] - loop[i]).norm();
    const double total = s[n];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double arc = s[j] - s[i];
            if (std::min(arc, total - arc) <= 3 * delta) continue;
            best = std::min(best, (loop[i] - loop[j]).norm());
        }
    return best;
}

} // namespace

DegreeRaster rasterize_degree(const std::vector<Polyline>& loops, double delta, const std::optional<Grid>& grid) {
    DegreeRaster r;
    r.loops = loops;
    if (grid) {
        r.grid = *grid;
    } else {
        Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
        Vec2 hi = -lo;
        for (const auto& l : loops)
            for (const auto& p : l) {
                lo = lo.cwiseMin(p);
                hi = hi.cwiseMax(p);
            }
        if (!(lo.x() <= hi.x())) throw ArgumentError("rasterize_degree: no loop points");
        r.grid = Grid::covering(lo, hi, delta);
    }
    const Grid& g = r.grid;
    r.values.assign(g.size(), 0);
    parallel_for(static_cast<std::size_t>(g.ny), [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, int>> crossings;
        for (std::size_t jj = begin; jj < end; ++jj) {
            const int j = static_cast<int>(jj);
            const double yc = g.center(0, j).y();
            crossings.clear();
            for (const auto& loop : loops) {
                const std::size_t n = loop.size();
                for (std::size_t i = 0; i < n; ++i) {
                    const Vec2& a = loop[i];
                    const Vec2& b = loop[(i + 1) % n];
                    int sign = 0;
                    if (a.y() <= yc && b.y() > yc) sign = 1;
                    else if (a.y() > yc && b.y() <= yc) sign = -1;
                    if (sign == 0) continue;
                    const double xc = a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
                    crossings.emplace_back(xc, sign);
                }
            }
            std::sort(crossings.begin(), crossings.end());
            int right = 0;
            for (const auto& c : crossings) right += c.second;
            std::size_t k = 0;
            for (int i = 0; i < g.nx; ++i) {
                const double xc = g.center(i, j).x();
                while (k < crossings.size() && crossings[k].first <= xc) right -= crossings[k++].second;
                r.values[g.index(i, j)] = right;
            }
        }
    });
    for (const auto& l : loops) {
        const double d = loop_self_distance(l, delta);
        if (d < delta) {
            std::ostringstream os;
            os << "raster under-resolved: loop self-distance " << d << " below cell size " << delta
               << "; use a smaller cell size";
            r.warnings.push_back(os.str());
        }
    }
    return r;
}

DegreeRaster topological_image(const DeformationField& y, const Subdomain& U, double delta) {
    return rasterize_degree(boundary_images(y, U), delta);
}

std::optional<CavityRecord> topological_image_point(const DeformationField& y, const Vec2& a,
                                                    const std::vector<double>& radii, double delta,
                                                    const SurfaceDensity& phi, double area_threshold, int samples) {
    if (radii.empty()) throw ArgumentError("topological_image_point: radii list is empty");
    if (area_threshold < 0) area_threshold = 4 * delta * delta;
    const double r_max = *std::max_element(radii.begin(), radii.end());
    const Polyline outer = trace_on_circle(y, a, r_max, samples);
    Vec2 lo = outer[0], hi = outer[0];
    for (const auto& p : outer) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Grid grid = Grid::covering(lo, hi, delta);
    std::vector<char> common(grid.size(), 1);
    for (double r : radii) {
        const DegreeRaster d = rasterize_degree({trace_on_circle(y, a, r, samples)}, delta, grid);
        for (std::size_t i = 0; i < common.size(); ++i) common[i] = common[i] && d.values[i] != 0;
    }
    std::size_t count = 0;
    for (char c : common) count += c != 0;
    const double area = static_cast<double>(count) * delta * delta;
    if (!(area > area_threshold)) return std::nullopt;
    CavityRecord rec;
    rec.site = a;
    for (const auto& pk : y.mesh().punctures())
        if ((pk.center - a).norm() <= 1e-12) rec.puncture_radius = pk.radius;
    const auto contours = marching_squares(common, grid);
    double best = -1.0;
    for (const auto& c : contours) {
        const double s = std::abs(signed_area(c));
        if (s > best) {
            best = s;
            rec.boundary = c;
        }
    }
    rec.area = area;
    rec.simple = is_simple(rec.boundary);
    rec.aniso_perimeter = anisotropic_perimeter(rec.boundary, phi);
    return rec;
}

InvReport check_inv(const DeformationField& y, const std::vector<Vec2>& centers,
                    const std::vector<std::vector<double>>& radii, double delta, int sample_budget,
                    int samples_per_circle) {
    if (radii.size() != centers.size()) throw ArgumentError("check_inv: one radius list per center");
    const Mesh& mesh = y.mesh();
    const int nt = mesh.num_triangles();
    const int stride = std::max(1, (nt + sample_budget - 1) / std::max(1, sample_budget));
    std::vector<Vec2> ref, img;
    for (int t = 0; t < nt; t += stride) {
        const auto& tri = mesh.triangles()[t];
        ref.push_back((mesh.vertices()[tri[0]] + mesh.vertices()[tri[1]] + mesh.vertices()[tri[2]]) / 3.0);
        img.push_back((y.positions()[tri[0]] + y.positions()[tri[1]] + y.positions()[tri[2]]) / 3.0);
    }
    InvReport report;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (double r : radii[c]) {
            InvReport::Entry e;
            e.center = centers[c];
            e.radius = r;
            const Polyline loop = trace_on_circle(y, centers[c], r, samples_per_circle);
            std::vector<signed char> status(ref.size(), 0); // 1 checked, 2 excluded, 3 violation
            parallel_for(ref.size(), [&](std::size_t begin, std::size_t end) {
                for (std::size_t s = begin; s < end; ++s) {
                    if (point_loop_distance(loop, img[s]) < 2 * delta) {
                        status[s] = 2;
                        continue;
                    }
                    const bool inside = (ref[s] - centers[c]).norm() < r;
                    const int w = winding_number_unchecked(loop, img[s]);
                    status[s] = (inside == (w != 0)) ? 1 : 3;
                }
            });
            for (std::size_t s = 0; s < ref.size(); ++s) {
                if (status[s] == 2) {
                    ++e.excluded;
                    continue;
                }
                ++e.checked;
                if (status[s] == 3) {
                    ++e.violations;
                    if (e.located.size() < 10) e.located.push_back(ref[s]);
                }
            }
            report.total_violations += e.violations;
            report.entries.push_back(std::move(e));
        }
    return report;
}

std::vector<double> default_inv_radii(double rho, double r_max, int count) {
    if (count < 1 || !(r_max > 1.2 * rho)) throw ArgumentError("default_inv_radii: need r_max > 1.2 rho");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(1.2 * rho * std::pow(r_max / (1.2 * rho), t));
    }
    return out;
}

InvCircles default_inv_circles(const Mesh& mesh, int count) {
    InvCircles out;
    const auto& punctures = mesh.punctures();
    for (std::size_t k = 0; k < punctures.size(); ++k) {
        const Vec2& a = punctures[k].center;
        double room = std::numeric_limits<double>::infinity();
        for (const auto& loop : mesh.outer_loops())
            for (std::size_t i = 0; i < loop.size(); ++i)
                room = std::min(room, point_segment_distance(a, mesh.vertices()[loop[i]],
                                                             mesh.vertices()[loop[(i + 1) % loop.size()]]));
        for (std::size_t l = 0; l < punctures.size(); ++l)
            if (l != k) room = std::min(room, (punctures[l].center - a).norm() - 1.5 * punctures[l].radius);
        room *= 0.9;
        if (!(room > 1.3 * punctures[k].radius)) continue;
        out.centers.push_back(a);
        out.radii.push_back(default_inv_radii(punctures[k].radius, room, count));
    }
    return out;
}

} // namespace cavelast
