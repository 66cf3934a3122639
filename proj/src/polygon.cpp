#include "cavelast/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cavelast {

double signed_area(const Polyline& loop) {
    double a = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) a += cross(loop[i], loop[(i + 1) % n]);
    return 0.5 * a;
}

double perimeter(const Polyline& loop) {
    double s = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) s += (loop[(i + 1) % n] - loop[i]).norm();
    return s;
}

Vec2 polygon_centroid(const Polyline& loop) {
    const std::size_t n = loop.size();
    const double a = signed_area(loop);
    if (std::abs(a) < 1e-300) {
        Vec2 c = Vec2::Zero();
        for (const auto& p : loop) c += p;
        return n > 0 ? Vec2(c / static_cast<double>(n)) : c;
    }
    Vec2 c = Vec2::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = loop[i];
        const Vec2& q = loop[(i + 1) % n];
        c += (p + q) * cross(p, q);
    }
    return c / (6.0 * a);
}

Polyline reversed(Polyline loop) {
    std::reverse(loop.begin(), loop.end());
    return loop;
}

namespace {

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); };
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto on = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return c.x() >= std::min(a.x(), b.x()) && c.x() <= std::max(a.x(), b.x()) && c.y() >= std::min(a.y(), b.y()) &&
               c.y() <= std::max(a.y(), b.y());
    };
    if (d1 == 0 && on(q1, q2, p1)) return true;
    if (d2 == 0 && on(q1, q2, p2)) return true;
    if (d3 == 0 && on(p1, p2, q1)) return true;
    if (d4 == 0 && on(p1, p2, q2)) return true;
    return false;
}

} // namespace

bool is_simple(const Polyline& loop) {
    const std::size_t n = loop.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n])) return false;
        }
    return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

double point_loop_distance(const Polyline& loop, const Vec2& p) {
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) d = std::min(d, point_segment_distance(p, loop[i], loop[(i + 1) % n]));
    return d;
}

namespace {

double directed_hausdorff(const Polyline& a, const Polyline& b, int per_edge) {
    double h = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < per_edge; ++k) {
            const double t = static_cast<double>(k) / per_edge;
            h = std::max(h, point_loop_distance(b, (1 - t) * a[i] + t * a[(i + 1) % n]));
        }
    return h;
}

} // namespace

double hausdorff_distance(const Polyline& a, const Polyline& b, int per_edge) {
    return std::max(directed_hausdorff(a, b, per_edge), directed_hausdorff(b, a, per_edge));
}

Grid Grid::covering(const Vec2& lo, const Vec2& hi, double delta, int pad) {
    if (!(delta > 0)) throw ArgumentError("grid cell size must be positive");
    Grid g;
    g.delta = delta;
    g.origin = lo - pad * delta * Vec2::Ones();
    g.nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / delta)) + 2 * pad;
    g.ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / delta)) + 2 * pad;
    return g;
}

std::vector<Polyline> marching_squares(const std::vector<char>& inside, const Grid& grid) {
    if (inside.size() != grid.size()) throw ArgumentError("marching_squares: indicator size mismatch");
    auto in = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < grid.nx && j < grid.ny && inside[grid.index(i, j)] != 0;
    };
    // Edge midpoints keyed by doubled half-integer coordinates relative to
    // cell (0, 0)'s center.
    using Key = std::pair<int, int>;
    std::map<Key, Key> next;
    for (int j = -1; j < grid.ny; ++j)
        for (int i = -1; i < grid.nx; ++i) {
            const bool c[4] = {in(i, j), in(i + 1, j), in(i + 1, j + 1), in(i, j + 1)};
            const Key mid[4] = {{2 * i + 1, 2 * j}, {2 * i + 2, 2 * j + 1}, {2 * i + 1, 2 * j + 2}, {2 * i, 2 * j + 1}};
            // Edge k joins corner k and corner k+1; contours run from in->out
            // edges to the preceding out->in edge.
            for (int k = 0; k < 4; ++k) {
                if (!(c[k] && !c[(k + 1) % 4])) continue;
                int s = k;
                while (c[s]) s = (s + 3) % 4;
                next[mid[k]] = mid[s];
            }
        }
    std::vector<Polyline> out;
    std::map<Key, bool> used;
    for (const auto& [start, unused] : next) {
        if (used[start]) continue;
        Polyline loop;
        Key k = start;
        while (!used[k]) {
            used[k] = true;
            loop.push_back(grid.origin + grid.delta * Vec2(0.5 * k.first + 0.5, 0.5 * k.second + 0.5));
            k = next.at(k);
        }
        out.push_back(std::move(loop));
    }
    return out;
}

} // namespace cavelast
