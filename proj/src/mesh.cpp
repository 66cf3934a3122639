#include "cavelast/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace cavelast {

namespace {

double signed_area2(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

Eigen::Vector3d barycentric(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d = signed_area2(a, b, c);
    return {signed_area2(p, b, c) / d, signed_area2(a, p, c) / d, signed_area2(a, b, p) / d};
}

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

} // namespace

TriangleLocator::TriangleLocator(const std::vector<Vec2>& points, const std::vector<std::array<int, 3>>& triangles)
    : points_(points), triangles_(triangles) {
    if (points_.empty() || triangles_.empty()) return;
    Vec2 lo = points_[0], hi = points_[0];
    for (const auto& p : points_) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec2 span = (hi - lo).cwiseMax(Vec2::Constant(1e-12));
    cell_ = std::max(1e-12, 1.5 * std::sqrt(span.x() * span.y() / static_cast<double>(triangles_.size())));
    lo_ = lo;
    nx_ = std::max(1, static_cast<int>(std::ceil(span.x() / cell_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil(span.y() / cell_)) + 1);
    bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
        Vec2 tlo = points_[triangles_[t][0]], thi = tlo;
        for (int k = 1; k < 3; ++k) {
            tlo = tlo.cwiseMin(points_[triangles_[t][k]]);
            thi = thi.cwiseMax(points_[triangles_[t][k]]);
        }
        const int i0 = std::clamp(static_cast<int>(std::floor((tlo.x() - lo_.x()) / cell_)), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>(std::floor((thi.x() - lo_.x()) / cell_)), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>(std::floor((tlo.y() - lo_.y()) / cell_)), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>(std::floor((thi.y() - lo_.y()) / cell_)), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
}

std::optional<TriangleLocator::Hit> TriangleLocator::locate(const Vec2& p, double tol) const {
    if (bins_.empty()) return std::nullopt;
    const double fx = (p.x() - lo_.x()) / cell_;
    const double fy = (p.y() - lo_.y()) / cell_;
    if (fx < -1e-9 || fy < -1e-9 || fx > nx_ || fy > ny_) return std::nullopt;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
    for (int t : bins_[static_cast<std::size_t>(j) * nx_ + i]) {
        const auto& tri = triangles_[t];
        const Eigen::Vector3d l = barycentric(p, points_[tri[0]], points_[tri[1]], points_[tri[2]]);
        if (l.minCoeff() >= -tol) return Hit{t, l};
    }
    return std::nullopt;
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges, std::vector<Puncture> punctures)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_edges_(std::move(boundary_edges)),
      punctures_(std::move(punctures)) {
    const int nv = num_vertices();
    const int nt = num_triangles();
    if (nt == 0) throw GeometryError("mesh has no triangles");
    areas_.resize(nt);
    dm_inv_.resize(nt);
    std::vector<double> weighted;
    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k)
            if (triangles_[t][k] < 0 || triangles_[t][k] >= nv)
                throw GeometryError("triangle " + std::to_string(t) + " references a missing vertex");
        const Vec2& x0 = vertices_[triangles_[t][0]];
        Mat2 dm;
        dm.col(0) = vertices_[triangles_[t][1]] - x0;
        dm.col(1) = vertices_[triangles_[t][2]] - x0;
        const double a = 0.5 * dm.determinant();
        if (!(a > 0)) throw GeometryError("triangle " + std::to_string(t) + " has non-positive signed area");
        areas_[t] = a;
        dm_inv_[t] = dm.inverse();
    }
    double acc = 0.0;
    for (double a : areas_) acc += a;
    total_area_ = acc;

    // Edges used once are boundary edges, oriented as in their triangle.
    std::map<std::uint64_t, std::pair<int, int>> single;
    std::map<std::uint64_t, int> count;
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k) {
            const int a = triangles_[t][k], b = triangles_[t][(k + 1) % 3];
            const auto key = edge_key(a, b);
            if (++count[key] > 2) throw GeometryError("non-conforming mesh: edge shared by more than two triangles");
            single[key] = {a, b};
        }
    std::size_t n_single = 0;
    for (const auto& [key, c] : count)
        if (c == 1) ++n_single;
    if (n_single != boundary_edges_.size())
        throw GeometryError("boundary edge list does not match the mesh boundary (" +
                            std::to_string(boundary_edges_.size()) + " given, " + std::to_string(n_single) +
                            " expected)");
    for (auto& e : boundary_edges_) {
        const auto key = edge_key(e.a, e.b);
        auto it = count.find(key);
        if (it == count.end() || it->second != 1)
            throw GeometryError("edge " + std::to_string(e.a) + "-" + std::to_string(e.b) + " is not a boundary edge");
        e.a = single[key].first;
        e.b = single[key].second;
        if (e.tag == EdgeTag::puncture && (e.puncture < 0 || e.puncture >= static_cast<int>(punctures_.size())))
            throw GeometryError("boundary edge tagged with unknown puncture " + std::to_string(e.puncture));
    }

    dirichlet_.assign(nv, 0);
    for (const auto& e : boundary_edges_)
        if (e.tag == EdgeTag::dirichlet) dirichlet_[e.a] = dirichlet_[e.b] = 1;

    // Chain boundary edges into loops.
    std::map<int, int> next_edge;
    for (int i = 0; i < static_cast<int>(boundary_edges_.size()); ++i) {
        if (!next_edge.emplace(boundary_edges_[i].a, i).second)
            throw GeometryError("boundary is not a union of simple loops at vertex " +
                                std::to_string(boundary_edges_[i].a));
    }
    std::vector<char> used(boundary_edges_.size(), 0);
    puncture_loops_.assign(punctures_.size(), {});
    for (int start = 0; start < static_cast<int>(boundary_edges_.size()); ++start) {
        if (used[start]) continue;
        std::vector<int> loop;
        std::set<std::pair<int, int>> tags;
        int e = start;
        while (!used[e]) {
            used[e] = 1;
            loop.push_back(boundary_edges_[e].a);
            tags.insert({static_cast<int>(boundary_edges_[e].tag),
                         boundary_edges_[e].tag == EdgeTag::puncture ? boundary_edges_[e].puncture : -1});
            auto it = next_edge.find(boundary_edges_[e].b);
            if (it == next_edge.end()) throw GeometryError("boundary edges do not close into loops");
            e = it->second;
        }
        if (e != start) throw GeometryError("boundary edges do not close into loops");
        const bool has_puncture = std::any_of(tags.begin(), tags.end(), [](const auto& t) {
            return t.first == static_cast<int>(EdgeTag::puncture);
        });
        if (has_puncture) {
            if (tags.size() != 1) throw GeometryError("puncture loop mixes tags");
            const int k = tags.begin()->second;
            if (!puncture_loops_[k].empty()) throw GeometryError("puncture " + std::to_string(k) + " has two loops");
            for (int v : loop)
                if ((vertices_[v] - punctures_[k].center).norm() > 1.5 * punctures_[k].radius)
                    throw GeometryError("puncture " + std::to_string(k) + " loop leaves 1.5 radii of its center");
            puncture_loops_[k] = std::move(loop);
        } else {
            outer_loops_.push_back(std::move(loop));
        }
    }
    for (std::size_t k = 0; k < punctures_.size(); ++k)
        if (puncture_loops_[k].empty()) throw GeometryError("puncture " + std::to_string(k) + " has no boundary loop");

    locator_ = TriangleLocator(vertices_, triangles_);
}

Vec2 Mesh::centroid() const {
    Vec2 c = Vec2::Zero();
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = triangles_[t];
        c += areas_[t] * (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
    }
    return c / total_area_;
}

double Mesh::diameter() const {
    double d = 0.0;
    for (const auto& loop : outer_loops_)
        for (std::size_t i = 0; i < loop.size(); ++i)
            for (std::size_t j = i + 1; j < loop.size(); ++j)
                d = std::max(d, (vertices_[loop[i]] - vertices_[loop[j]]).norm());
    return d;
}

double Mesh::inradius() const {
    const Vec2 c = centroid();
    double r = std::numeric_limits<double>::infinity();
    for (const auto& loop : outer_loops_)
        for (std::size_t i = 0; i < loop.size(); ++i)
            r = std::min(r, segment_distance(c, vertices_[loop[i]], vertices_[loop[(i + 1) % loop.size()]]));
    return r;
}

Mesh annulus_mesh(const Vec2& center, double rho, double r_out, int n_theta) {
    if (!(rho > 0) || !(r_out > rho)) throw ArgumentError("annulus_mesh: need 0 < rho < r_out");
    if (n_theta < 8) throw ArgumentError("annulus_mesh: need n_theta >= 8");
    const double q = 1.0 + 2.0 * M_PI / n_theta;
    const int nr = std::max(2, static_cast<int>(std::ceil(std::log(r_out / rho) / std::log(q))));
    std::vector<Vec2> v;
    v.reserve(static_cast<std::size_t>(nr + 1) * n_theta);
    for (int i = 0; i <= nr; ++i) {
        const double r = i == nr ? r_out : rho * std::pow(r_out / rho, static_cast<double>(i) / nr);
        for (int j = 0; j < n_theta; ++j) {
            const double t = 2.0 * M_PI * j / n_theta;
            v.push_back(center + r * Vec2(std::cos(t), std::sin(t)));
        }
    }
    auto id = [n_theta](int i, int j) { return i * n_theta + (j % n_theta); };
    std::vector<std::array<int, 3>> tris;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < n_theta; ++j) {
            if ((i + j) % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    std::vector<BoundaryEdge> edges;
    for (int j = 0; j < n_theta; ++j) {
        edges.push_back({id(0, j + 1), id(0, j), EdgeTag::puncture, 0});
        edges.push_back({id(nr, j), id(nr, j + 1), EdgeTag::dirichlet, -1});
    }
    return Mesh(std::move(v), std::move(tris), std::move(edges), {{center, rho}});
}

namespace {

// Triangulates the band between two rings ordered by increasing angle from 0.
void stitch(const std::vector<int>& inner, const std::vector<double>& a_in, const std::vector<int>& outer,
            const std::vector<double>& a_out, std::vector<std::array<int, 3>>& tris) {
    const std::size_t ni = inner.size(), no = outer.size();
    std::size_t i = 0, o = 0;
    auto angle = [](const std::vector<double>& a, std::size_t k) {
        return k < a.size() ? a[k] : a[k % a.size()] + 2.0 * M_PI;
    };
    while (i < ni || o < no) {
        const bool take_outer = o < no && (i >= ni || angle(a_out, o + 1) < angle(a_in, i + 1));
        if (take_outer) {
            tris.push_back({inner[i % ni], outer[o % no], outer[(o + 1) % no]});
            ++o;
        } else {
            tris.push_back({inner[i % ni], outer[o % no], inner[(i + 1) % ni]});
            ++i;
        }
    }
}

} // namespace

Mesh disk_mesh(const Vec2& center, double radius, int rings) {
    if (!(radius > 0) || rings < 1) throw ArgumentError("disk_mesh: need radius > 0 and rings >= 1");
    std::vector<Vec2> v{center};
    std::vector<std::array<int, 3>> tris;
    std::vector<int> prev{0};
    std::vector<double> prev_a{0.0};
    for (int k = 1; k <= rings; ++k) {
        const int n = 6 * k;
        const double r = radius * k / rings;
        std::vector<int> ring;
        std::vector<double> ang;
        for (int j = 0; j < n; ++j) {
            const double t = 2.0 * M_PI * j / n;
            ring.push_back(static_cast<int>(v.size()));
            ang.push_back(t);
            v.push_back(center + r * Vec2(std::cos(t), std::sin(t)));
        }
        if (k == 1) {
            for (int j = 0; j < n; ++j) tris.push_back({0, ring[j], ring[(j + 1) % n]});
        } else {
            stitch(prev, prev_a, ring, ang, tris);
        }
        prev = ring;
        prev_a = ang;
    }
    std::vector<BoundaryEdge> edges;
    for (std::size_t j = 0; j < prev.size(); ++j)
        edges.push_back({prev[j], prev[(j + 1) % prev.size()], EdgeTag::dirichlet, -1});
    return Mesh(std::move(v), std::move(tris), std::move(edges), {});
}

Mesh square_mesh(const Vec2& lo, const Vec2& hi, int n) {
    if (n < 1 || !(hi.x() > lo.x()) || !(hi.y() > lo.y())) throw ArgumentError("square_mesh: invalid extent");
    std::vector<Vec2> v;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            v.emplace_back(lo.x() + (hi.x() - lo.x()) * i / n, lo.y() + (hi.y() - lo.y()) * j / n);
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if ((i + j) % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    std::vector<BoundaryEdge> edges;
    for (int i = 0; i < n; ++i) {
        edges.push_back({id(i, 0), id(i + 1, 0), EdgeTag::dirichlet, -1});
        edges.push_back({id(n, i), id(n, i + 1), EdgeTag::dirichlet, -1});
        edges.push_back({id(i + 1, n), id(i, n), EdgeTag::dirichlet, -1});
        edges.push_back({id(0, i + 1), id(0, i), EdgeTag::dirichlet, -1});
    }
    return Mesh(std::move(v), std::move(tris), std::move(edges), {});
}

namespace {

struct BwTriangle {
    std::array<int, 3> v;
    Vec2 cc;
    double r2;
    bool alive = true;
};

BwTriangle make_bw(const std::vector<Vec2>& p, int a, int b, int c) {
    if (signed_area2(p[a], p[b], p[c]) < 0) std::swap(b, c);
    const Vec2 A = p[a], B = p[b] - A, C = p[c] - A;
    const double d = 2.0 * cross(B, C);
    Vec2 cc;
    if (std::abs(d) < 1e-300) {
        cc = Vec2::Constant(std::numeric_limits<double>::infinity());
    } else {
        cc = Vec2((C.y() * B.squaredNorm() - B.y() * C.squaredNorm()) / d,
                  (B.x() * C.squaredNorm() - C.x() * B.squaredNorm()) / d);
    }
    BwTriangle t;
    t.v = {a, b, c};
    t.r2 = cc.squaredNorm();
    t.cc = cc + A;
    return t;
}

std::vector<std::array<int, 3>> bowyer_watson(std::vector<Vec2>& pts) {
    const int n = static_cast<int>(pts.size());
    Vec2 lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec2 mid = 0.5 * (lo + hi);
    const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    pts.push_back(mid + Vec2(-20 * span, -20 * span));
    pts.push_back(mid + Vec2(20 * span, -20 * span));
    pts.push_back(mid + Vec2(0, 20 * span));
    std::vector<BwTriangle> tris{make_bw(pts, n, n + 1, n + 2)};
    for (int ip = 0; ip < n; ++ip) {
        const Vec2& p = pts[ip];
        std::vector<int> bad;
        int home = -1;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!tris[t].alive) continue;
            const auto& v = tris[t].v;
            if (home < 0) {
                const Eigen::Vector3d l = barycentric(p, pts[v[0]], pts[v[1]], pts[v[2]]);
                if (l.minCoeff() >= -1e-12) home = t;
            }
            if ((p - tris[t].cc).squaredNorm() < tris[t].r2 * (1.0 - 1e-12)) bad.push_back(t);
        }
        if (home < 0) throw GeometryError("delaunay insertion failed to locate a point");
        if (std::find(bad.begin(), bad.end(), home) == bad.end()) bad.push_back(home);
        // Keep the component of the cavity connected to the home triangle and
        // shrink it until every boundary edge sees p on its left.
        std::set<int> cavity(bad.begin(), bad.end());
        for (;;) {
            std::map<std::uint64_t, std::vector<int>> owners;
            for (int t : cavity)
                for (int k = 0; k < 3; ++k) owners[edge_key(tris[t].v[k], tris[t].v[(k + 1) % 3])].push_back(t);
            std::set<int> reach{home};
            std::vector<int> stack{home};
            while (!stack.empty()) {
                const int t = stack.back();
                stack.pop_back();
                for (int k = 0; k < 3; ++k)
                    for (int u : owners[edge_key(tris[t].v[k], tris[t].v[(k + 1) % 3])])
                        if (reach.insert(u).second) stack.push_back(u);
            }
            bool changed = reach.size() != cavity.size();
            cavity = reach;
            owners.clear();
            for (int t : cavity)
                for (int k = 0; k < 3; ++k) owners[edge_key(tris[t].v[k], tris[t].v[(k + 1) % 3])].push_back(t);
            for (int t : std::vector<int>(cavity.begin(), cavity.end())) {
                if (t == home) continue;
                for (int k = 0; k < 3; ++k) {
                    const int a = tris[t].v[k], b = tris[t].v[(k + 1) % 3];
                    if (owners[edge_key(a, b)].size() == 1 && signed_area2(pts[a], pts[b], p) <= 0) {
                        cavity.erase(t);
                        changed = true;
                        break;
                    }
                }
            }
            if (!changed) break;
        }
        std::map<std::uint64_t, int> uses;
        for (int t : cavity)
            for (int k = 0; k < 3; ++k) ++uses[edge_key(tris[t].v[k], tris[t].v[(k + 1) % 3])];
        std::vector<std::pair<int, int>> rim;
        for (int t : cavity) {
            for (int k = 0; k < 3; ++k) {
                const int a = tris[t].v[k], b = tris[t].v[(k + 1) % 3];
                if (uses[edge_key(a, b)] == 1) rim.emplace_back(a, b);
            }
            tris[t].alive = false;
        }
        for (const auto& [a, b] : rim)
            if (signed_area2(pts[a], pts[b], p) > 0) tris.push_back(make_bw(pts, a, b, ip));
    }
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris)
        if (t.alive && t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t.v);
    pts.resize(n);
    return out;
}

} // namespace

Mesh delaunay_mesh(DomainShape shape, const Vec2& center, double size, const std::vector<Puncture>& punctures,
                   double h, int n_hole) {
    if (!(size > 0) || !(h > 0)) throw ArgumentError("delaunay_mesh: size and h must be positive");
    if (n_hole < 8) throw ArgumentError("delaunay_mesh: need n_hole >= 8");
    // Signed distance to the outer boundary, positive inside.
    auto inside_distance = [&](const Vec2& p) {
        if (shape == DomainShape::disk) return size - (p - center).norm();
        const Vec2 d = (p - center).cwiseAbs();
        return size - std::max(d.x(), d.y());
    };
    std::vector<Vec2> pts;
    std::vector<int> on_hole;
    if (shape == DomainShape::disk) {
        const int n = std::max(24, static_cast<int>(std::ceil(2 * M_PI * size / h)));
        for (int j = 0; j < n; ++j) {
            const double t = 2 * M_PI * j / n;
            pts.push_back(center + size * Vec2(std::cos(t), std::sin(t)));
            on_hole.push_back(-1);
        }
    } else {
        const int n = std::max(4, static_cast<int>(std::ceil(2 * size / h)));
        const Vec2 c0 = center - Vec2(size, size);
        for (int i = 0; i < 4 * n; ++i) {
            const int side = i / n, k = i % n;
            const double s = 2 * size * k / n;
            Vec2 p;
            if (side == 0) p = c0 + Vec2(s, 0);
            else if (side == 1) p = c0 + Vec2(2 * size, s);
            else if (side == 2) p = c0 + Vec2(2 * size - s, 2 * size);
            else p = c0 + Vec2(0, 2 * size - s);
            pts.push_back(p);
            on_hole.push_back(-1);
        }
    }
    std::vector<double> exclusion(punctures.size(), 0.0);
    for (std::size_t k = 0; k < punctures.size(); ++k) {
        const auto& pk = punctures[k];
        double room = inside_distance(pk.center);
        for (std::size_t l = 0; l < punctures.size(); ++l)
            if (l != k) room = std::min(room, 0.5 * (punctures[l].center - pk.center).norm());
        if (!(pk.radius < room)) throw GeometryError("puncture " + std::to_string(k) + " does not fit in the domain");
        const double q = 1.0 + 2 * M_PI / n_hole;
        double r = pk.radius;
        for (int ring = 0;; ++ring) {
            const double offset = ring % 2 == 0 ? 0.0 : M_PI / n_hole;
            for (int j = 0; j < n_hole; ++j) {
                const double t = 2 * M_PI * j / n_hole + offset;
                pts.push_back(pk.center + r * Vec2(std::cos(t), std::sin(t)));
                on_hole.push_back(ring == 0 ? static_cast<int>(k) : -1);
            }
            exclusion[k] = r;
            const double next = r * q;
            if (2 * M_PI * next / n_hole > 0.8 * h || next + 0.6 * h > room) break;
            r = next;
        }
    }
    // Triangular lattice filling the rest.
    const double dy = h * std::sqrt(3.0) / 2;
    const int m = static_cast<int>(std::ceil(size / dy)) + 1;
    for (int j = -m; j <= m; ++j)
        for (int i = -m - 1; i <= m + 1; ++i) {
            const Vec2 p = center + Vec2((i + 0.5 * (j & 1)) * h, j * dy);
            if (inside_distance(p) < 0.5 * h) continue;
            bool ok = true;
            for (std::size_t k = 0; k < punctures.size(); ++k) {
                const double spacing = 2 * M_PI * exclusion[k] / n_hole;
                if ((p - punctures[k].center).norm() < exclusion[k] + 0.5 * (spacing + h)) ok = false;
            }
            if (ok) {
                pts.push_back(p);
                on_hole.push_back(-1);
            }
        }

    auto tris = bowyer_watson(pts);
    std::vector<std::array<int, 3>> kept;
    for (const auto& t : tris) {
        const Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
        if (inside_distance(c) <= 0) continue;
        bool in_hole = false;
        for (const auto& pk : punctures)
            if ((c - pk.center).norm() < pk.radius) in_hole = true;
        if (in_hole) continue;
        if (signed_area2(pts[t[0]], pts[t[1]], pts[t[2]]) <= 1e-14 * h * h) continue;
        kept.push_back(t);
    }
    // Drop unused vertices and renumber.
    std::vector<int> remap(pts.size(), -1);
    std::vector<Vec2> verts;
    std::vector<int> hole_of;
    for (auto& t : kept)
        for (int& v : t) {
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(verts.size());
                verts.push_back(pts[v]);
                hole_of.push_back(on_hole[v]);
            }
            v = remap[v];
        }
    std::map<std::uint64_t, std::pair<int, int>> single;
    std::map<std::uint64_t, int> count;
    for (const auto& t : kept)
        for (int k = 0; k < 3; ++k) {
            const auto key = edge_key(t[k], t[(k + 1) % 3]);
            ++count[key];
            single[key] = {t[k], t[(k + 1) % 3]};
        }
    std::vector<BoundaryEdge> edges;
    for (const auto& [key, c] : count) {
        if (c != 1) continue;
        const auto [a, b] = single[key];
        if (hole_of[a] >= 0 && hole_of[a] == hole_of[b]) {
            edges.push_back({a, b, EdgeTag::puncture, hole_of[a]});
        } else if (std::abs(inside_distance(verts[a])) < 1e-9 * size && std::abs(inside_distance(verts[b])) < 1e-9 * size) {
            edges.push_back({a, b, EdgeTag::dirichlet, -1});
        } else {
            throw GeometryError("delaunay_mesh: boundary recovery failed; try a smaller h");
        }
    }
    return Mesh(std::move(verts), std::move(kept), std::move(edges), punctures);
}

std::string to_string(EdgeTag tag, int puncture) {
    switch (tag) {
    case EdgeTag::dirichlet:
        return "dirichlet";
    case EdgeTag::free:
        return "free";
    case EdgeTag::puncture:
        return "puncture_" + std::to_string(puncture);
    }
    return "free";
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    os.precision(17);
    os << "cavmesh 1\n" << mesh.num_vertices() << "\n";
    for (const auto& v : mesh.vertices()) os << v.x() << " " << v.y() << "\n";
    os << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles()) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << mesh.boundary_edges().size() << "\n";
    for (const auto& e : mesh.boundary_edges()) os << e.a << " " << e.b << " " << to_string(e.tag, e.puncture) << "\n";
    os << mesh.punctures().size() << "\n";
    for (const auto& p : mesh.punctures()) os << p.center.x() << " " << p.center.y() << " " << p.radius << "\n";
}

Mesh read_mesh(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "cavmesh" || version != 1)
        throw GeometryError("mesh file: expected header 'cavmesh 1'");
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw GeometryError(std::string("mesh file: malformed ") + what);
    };
    std::size_t nv = 0, nt = 0, nb = 0, np = 0;
    need(static_cast<bool>(is >> nv), "vertex count");
    std::vector<Vec2> v(nv);
    for (auto& p : v) need(static_cast<bool>(is >> p.x() >> p.y()), "vertex");
    need(static_cast<bool>(is >> nt), "triangle count");
    std::vector<std::array<int, 3>> t(nt);
    for (auto& tri : t) need(static_cast<bool>(is >> tri[0] >> tri[1] >> tri[2]), "triangle");
    need(static_cast<bool>(is >> nb), "boundary edge count");
    std::vector<BoundaryEdge> e(nb);
    for (auto& be : e) {
        std::string tag;
        need(static_cast<bool>(is >> be.a >> be.b >> tag), "boundary edge");
        if (tag == "dirichlet") {
            be.tag = EdgeTag::dirichlet;
        } else if (tag == "free") {
            be.tag = EdgeTag::free;
        } else if (tag.rfind("puncture_", 0) == 0) {
            be.tag = EdgeTag::puncture;
            be.puncture = std::stoi(tag.substr(9));
        } else {
            throw GeometryError("mesh file: unknown boundary tag '" + tag + "'");
        }
    }
    std::vector<Puncture> p;
    if (is >> np) {
        p.resize(np);
        for (auto& pk : p) need(static_cast<bool>(is >> pk.center.x() >> pk.center.y() >> pk.radius), "puncture");
    }
    return Mesh(std::move(v), std::move(t), std::move(e), std::move(p));
}

} // namespace cavelast
