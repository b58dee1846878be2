#include "scatter/geometry.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace scatter::geometry {

namespace {

double signed_area(const std::vector<Vec2>& v)
{
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        a += cross(v[i], v[(i + 1) % v.size()]);
    }
    return 0.5 * a;
}

int orientation(Vec2 a, Vec2 b, Vec2 c)
{
    const double d = cross(b - a, c - a);
    const double scale = std::max({norm(b - a), norm(c - a), 1e-300});
    if (std::abs(d) <= 1e-14 * scale * scale) {
        return 0;
    }
    return d > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p)
{
    return std::min(a.x, b.x) - 1e-14 <= p.x && p.x <= std::max(a.x, b.x) + 1e-14 &&
           std::min(a.y, b.y) - 1e-14 <= p.y && p.y <= std::max(a.y, b.y) + 1e-14;
}

bool inside_polygon(const Polygon& poly, Vec2 x)
{
    bool inside = false;
    const auto& v = poly.vertices();
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i].y > x.y) != (v[j].y > x.y)) {
            const double xc = v[j].x + (x.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (x.x < xc) {
                inside = !inside;
            }
        }
    }
    return inside;
}

} // namespace

double Polygon::area() const { return signed_area(vertices_); }

Vec2 Polygon::centroid() const
{
    Vec2 c;
    const double a = area();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const Vec2 p = vertices_[i];
        const Vec2 q = vertices_[(i + 1) % vertices_.size()];
        c += cross(p, q) * (p + q);
    }
    return c / (6.0 * a);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2)
{
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) {
        return true;
    }
    return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
           (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

Polygon make_polygon(std::vector<Vec2> vertices)
{
    const std::size_t n = vertices.size();
    if (n < 3) {
        throw Error(ErrorCode::TooFewVertices, "a polygon needs at least 3 vertices");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (vertices[i] == vertices[(i + 1) % n]) {
            throw Error(ErrorCode::DegenerateEdge, "zero-length edge at vertex " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = vertices[i];
        const Vec2 b = vertices[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 c = vertices[j];
            const Vec2 d = vertices[(j + 1) % n];
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) {
                // Shared vertex; only a fold-back overlap counts.
                const Vec2 shared = (j == i + 1) ? b : a;
                const Vec2 u = ((j == i + 1) ? a : b) - shared;
                const Vec2 w = ((j == i + 1) ? d : c) - shared;
                if (std::abs(cross(u, w)) <= 1e-14 * norm(u) * norm(w) && dot(u, w) > 0) {
                    throw Error(ErrorCode::SelfIntersecting, "overlapping adjacent edges");
                }
                continue;
            }
            if (segments_intersect(a, b, c, d)) {
                throw Error(ErrorCode::SelfIntersecting,
                            "edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
            }
        }
    }
    const double area = signed_area(vertices);
    if (area == 0.0) {
        throw Error(ErrorCode::SelfIntersecting, "polygon has zero area");
    }
    if (area < 0.0) {
        std::reverse(vertices.begin(), vertices.end());
    }
    Polygon p;
    p.vertices_ = std::move(vertices);
    return p;
}

Cell make_free_cell(Vec2 a, Vec2 b)
{
    if (a == b) {
        throw Error(ErrorCode::DegenerateEdge, "free cell endpoints coincide");
    }
    return Cell{a, b, normalized(perp(b - a)), CellOwner::FreeSegment, 0, 0};
}

Line make_line(Vec2 point, Vec2 direction)
{
    const double n = norm(direction);
    if (!(n > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "line direction must be nonzero");
    }
    return Line{point, direction / n};
}

Scatterer::Scatterer(std::vector<Polygon> polygons, std::vector<Cell> free_cells)
    : polygons_(std::move(polygons)), free_cells_(std::move(free_cells))
{
    for (std::size_t i = 0; i < free_cells_.size(); ++i) {
        free_cells_[i] = make_free_cell(free_cells_[i].a, free_cells_[i].b);
        free_cells_[i].index = i;
    }
    for (std::size_t i = 0; i < polygons_.size(); ++i) {
        for (std::size_t j = i + 1; j < polygons_.size(); ++j) {
            const auto& p = polygons_[i];
            const auto& q = polygons_[j];
            bool hit = inside_polygon(p, q.vertices()[0]) || inside_polygon(q, p.vertices()[0]);
            for (std::size_t a = 0; a < p.size() && !hit; ++a) {
                for (std::size_t b = 0; b < q.size() && !hit; ++b) {
                    const auto [p1, p2] = p.edge(a);
                    const auto [q1, q2] = q.edge(b);
                    hit = segments_intersect(p1, p2, q1, q2);
                }
            }
            if (hit) {
                throw Error(ErrorCode::OverlappingPolygons,
                            "polygons " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
            }
        }
    }
    for (const auto& p : polygons_) {
        for (const Vec2 v : p.vertices()) {
            bounding_radius_ = std::max(bounding_radius_, norm(v));
        }
    }
    for (const auto& c : free_cells_) {
        bounding_radius_ = std::max({bounding_radius_, norm(c.a), norm(c.b)});
    }
    if (!empty()) {
        exterior_connected_ = check_exterior_connected(*this, bounding_radius_ / 64.0);
    }
}

double Scatterer::boundary_tolerance() const
{
    return 1e-9 * std::max(bounding_radius_, 1e-300);
}

std::vector<Cell> boundary_cells(const Scatterer& s)
{
    std::vector<Cell> cells;
    for (std::size_t p = 0; p < s.polygons().size(); ++p) {
        const auto& poly = s.polygons()[p];
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto [a, b] = poly.edge(i);
            // Counterclockwise boundary: the exterior lies to the right.
            const Vec2 n = -normalized(perp(b - a));
            cells.push_back(Cell{a, b, n, CellOwner::PolygonEdge, p, i});
        }
    }
    cells.insert(cells.end(), s.free_cells().begin(), s.free_cells().end());
    return cells;
}

double distance_to_segment(Vec2 x, Vec2 a, Vec2 b)
{
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(x - a, ab) / len2, 0.0, 1.0) : 0.0;
    return distance(x, a + t * ab);
}

double distance_to_boundary(const Scatterer& s, Vec2 x)
{
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : s.polygons()) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto [a, b] = p.edge(i);
            d = std::min(d, distance_to_segment(x, a, b));
        }
    }
    for (const auto& c : s.free_cells()) {
        d = std::min(d, distance_to_segment(x, c.a, c.b));
    }
    return d;
}

PointClass classify_point(const Scatterer& s, Vec2 x, double tol)
{
    if (distance_to_boundary(s, x) <= tol) {
        return PointClass::OnBoundary;
    }
    for (const auto& p : s.polygons()) {
        if (inside_polygon(p, x)) {
            return PointClass::Interior;
        }
    }
    return PointClass::Exterior;
}

PointClass classify_point(const Scatterer& s, Vec2 x)
{
    return classify_point(s, x, s.boundary_tolerance());
}

bool check_exterior_connected(const Scatterer& s, double h)
{
    const double r = 2.0 * s.bounding_radius();
    if (!(h > 0.0) || r == 0.0) {
        return true;
    }
    const int n = static_cast<int>(std::ceil(2.0 * r / h)) + 1;
    auto node = [&](int i, int j) { return Vec2{-r + i * h, -r + j * h}; };
    const auto cells = boundary_cells(s);

    std::vector<char> open(static_cast<std::size_t>(n) * n, 0);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            open[static_cast<std::size_t>(j) * n + i] =
                classify_point(s, node(i, j), 1e-12 * r) == PointClass::Exterior;
        }
    }
    auto blocked_edge = [&](Vec2 p, Vec2 q) {
        return std::any_of(cells.begin(), cells.end(),
                           [&](const Cell& c) { return segments_intersect(p, q, c.a, c.b); });
    };

    std::vector<char> seen(open.size(), 0);
    std::queue<std::pair<int, int>> queue;
    queue.emplace(0, 0);
    seen[0] = 1;
    while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop();
        constexpr int di[4] = {1, -1, 0, 0};
        constexpr int dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int a = i + di[d];
            const int b = j + dj[d];
            if (a < 0 || b < 0 || a >= n || b >= n) {
                continue;
            }
            const std::size_t id = static_cast<std::size_t>(b) * n + a;
            if (!open[id] || seen[id] || blocked_edge(node(i, j), node(a, b))) {
                continue;
            }
            seen[id] = 1;
            queue.emplace(a, b);
        }
    }
    for (std::size_t id = 0; id < open.size(); ++id) {
        if (open[id] && !seen[id]) {
            return false;
        }
    }
    return true;
}

Vec2 reflect(Vec2 x, const Line& line)
{
    const Vec2 n = line.normal();
    return x - 2.0 * dot(x - line.point, n) * n;
}

std::vector<Vec2> reflect(std::span<const Vec2> polyline, const Line& line)
{
    std::vector<Vec2> out;
    out.reserve(polyline.size());
    for (const Vec2 p : polyline) {
        out.push_back(reflect(p, line));
    }
    return out;
}

std::vector<Interval> line_component(const Scatterer& s, const Line& line, Vec2 seed, double window)
{
    const double t_seed = dot(seed - line.point, line.direction);
    const Vec2 on_line = line.at(t_seed);
    if (classify_point(s, on_line) != PointClass::Exterior) {
        throw Error(ErrorCode::SeedInsideScatterer, "seed lies in the scatterer");
    }

    // Chord of the window disk.
    const double t_mid = -dot(line.point, line.direction);
    const double offset = norm(line.at(t_mid));
    if (offset >= window) {
        return {};
    }
    const double half = std::sqrt(window * window - offset * offset);
    double lo = t_mid - half;
    double hi = t_mid + half;
    if (t_seed <= lo || t_seed >= hi) {
        return {};
    }

    // Every point where the line meets a cell belongs to D and blocks the component.
    const Vec2 n = line.normal();
    for (const Cell& c : boundary_cells(s)) {
        const double da = dot(c.a - line.point, n);
        const double db = dot(c.b - line.point, n);
        std::vector<double> hits;
        const double tol = 1e-14 * std::max(1.0, s.bounding_radius());
        if (std::abs(da) <= tol && std::abs(db) <= tol) {
            hits.push_back(dot(c.a - line.point, line.direction));
            hits.push_back(dot(c.b - line.point, line.direction));
        } else if ((da <= 0.0 && db >= 0.0) || (da >= 0.0 && db <= 0.0)) {
            const double w = da / (da - db);
            hits.push_back(dot(c.at(w) - line.point, line.direction));
        }
        if (hits.size() == 2) {
            const double h0 = std::min(hits[0], hits[1]);
            const double h1 = std::max(hits[0], hits[1]);
            if (h0 <= t_seed && t_seed <= h1) {
                throw Error(ErrorCode::SeedInsideScatterer, "seed lies on a cell");
            }
            if (h1 < t_seed) {
                lo = std::max(lo, h1);
            } else {
                hi = std::min(hi, h0);
            }
        }
        for (const double t : hits) {
            if (t < t_seed) {
                lo = std::max(lo, t);
            } else {
                hi = std::min(hi, t);
            }
        }
    }
    return {Interval{lo, hi}};
}

} // namespace scatter::geometry
