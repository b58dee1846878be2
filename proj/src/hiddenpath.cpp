#include "scatter/hiddenpath.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>
#include <tuple>

namespace scatter::hiddenpath {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t at(int idx) { return static_cast<std::size_t>(idx); }

double degrees(double rad) { return rad * 180.0 / kPi; }

double turn_deg(Vec2 a, Vec2 b) { return degrees(std::acos(std::clamp(dot(a, b), -1.0, 1.0))); }

int sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/// Re u at x, or NaN outside G.
double v_at(const Field& field, Vec2 x)
{
    if (field.status(x) != PointStatus::InG) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return field.eval(x).value.real();
}

/// True when v keeps the sign `s` at `n` interior samples of the segment a -> b and at b.
bool sign_constant(const Field& field, Vec2 a, Vec2 b, int s, int n)
{
    for (int m = 1; m <= n; ++m) {
        const double v = v_at(field, a + (static_cast<double>(m) / n) * (b - a));
        if (std::isnan(v) || sign(v) != s) {
            return false;
        }
    }
    return true;
}

Vec2 position_at(const std::vector<PathSample>& samples, double t)
{
    if (t <= samples.front().t) {
        return samples.front().point;
    }
    if (t >= samples.back().t) {
        return samples.back().point;
    }
    const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                     [](double x, const PathSample& s) { return x < s.t; });
    const PathSample& b = *it;
    const PathSample& a = *(it - 1);
    const double tau = (t - a.t) / (b.t - a.t);
    return a.point + tau * (b.point - a.point);
}

std::vector<PathSample> to_samples(const std::vector<Vec2>& pts)
{
    std::vector<Vec2> clean;
    for (Vec2 p : pts) {
        if (clean.empty() || distance(clean.back(), p) > 1e-12) {
            clean.push_back(p);
        }
    }
    std::vector<PathSample> out(clean.size());
    double t = 0.0;
    for (std::size_t m = 0; m < clean.size(); ++m) {
        if (m > 0) {
            t += distance(clean[m - 1], clean[m]);
        }
        out[m].t = t;
        out[m].point = clean[m];
        if (clean.size() > 1) {
            out[m].tangent = m + 1 < clean.size() ? normalized(clean[m + 1] - clean[m])
                                                  : normalized(clean[m] - clean[m - 1]);
        }
    }
    return out;
}

double max_turn(const std::vector<Vec2>& pts)
{
    double worst = 0.0;
    for (std::size_t m = 1; m + 1 < pts.size(); ++m) {
        const Vec2 a = pts[m] - pts[m - 1];
        const Vec2 b = pts[m + 1] - pts[m];
        if (norm(a) > 0.0 && norm(b) > 0.0) {
            worst = std::max(worst, turn_deg(normalized(a), normalized(b)));
        }
    }
    return worst;
}

std::vector<Vec2> chaikin(const std::vector<Vec2>& p)
{
    if (p.size() < 3) {
        return p;
    }
    // The end segments only lose their inner quarter, so the path keeps leaving the
    // start along the normal and the first sample never creeps onto the boundary.
    std::vector<Vec2> out{p.front()};
    for (std::size_t m = 0; m + 1 < p.size(); ++m) {
        if (m > 0) {
            out.push_back(0.75 * p[m] + 0.25 * p[m + 1]);
        }
        if (m + 2 < p.size()) {
            out.push_back(0.25 * p[m] + 0.75 * p[m + 1]);
        }
    }
    out.push_back(p.back());
    return out;
}

/// Sign changes of v between consecutive samples, located by bisection.
std::vector<Crossing> detect_crossings(const std::vector<PathSample>& samples, const Field& field)
{
    std::vector<Crossing> out;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t m = 1; m < samples.size(); ++m) {
        const double v = v_at(field, samples[m].point);
        if (!std::isnan(prev) && !std::isnan(v) && sign(prev) != sign(v)) {
            Vec2 a = samples[m - 1].point;
            Vec2 b = samples[m].point;
            double va = prev;
            for (int it = 0; it < 60 && distance(a, b) > 1e-14; ++it) {
                const Vec2 mid = 0.5 * (a + b);
                const double vm = v_at(field, mid);
                if (sign(vm) == sign(va) && vm != 0.0) {
                    a = mid;
                    va = vm;
                } else {
                    b = mid;
                }
            }
            Crossing c;
            c.point = 0.5 * (a + b);
            c.t = samples[m - 1].t + distance(samples[m - 1].point, c.point);
            const Vec2 g = field.eval(c.point).real_gradient();
            c.grad_norm = norm(g);
            const Vec2 tangent = normalized(samples[m].point - samples[m - 1].point);
            c.nodal_tangent = c.grad_norm > 0.0 ? perp(g / c.grad_norm) : Vec2{};
            c.angle_deg = c.grad_norm > 0.0 ? turn_deg(tangent, c.nodal_tangent) : 0.0;
            out.push_back(c);
        }
        if (!std::isnan(v) && v != 0.0) {
            prev = v;
        }
    }
    return out;
}

double segment_point_distance(Vec2 a, Vec2 b, Vec2 x) { return geometry::distance_to_segment(x, a, b); }

struct Stub {
    Vec2 from;
    Vec2 center;
    Vec2 to;
    int node_from = -1;
    int node_to = -1;
    double half_length = 0.0;
};

class Builder {
public:
    Builder(const nodal::NodalDecomposition& d, const geometry::Scatterer& s)
        : d_(d), f_(*d.field), field_(*d.field->field), s_(s), lambda_(2.0 * kPi / f_.k)
    {
        for (const nodal::Adjacency& a : d_.adjacency) {
            if (a.witness.min_grad >= d_.thresholds.grad_floor) {
                nbrs_[a.a].push_back(a.b);
                nbrs_[a.b].push_back(a.a);
            }
        }
        for (auto& [dom, list] : nbrs_) {
            std::sort(list.begin(), list.end());
        }
    }

    HiddenPath build(const Start& start, std::optional<Vec2> target, double escape_radius)
    {
        HiddenPath path;
        path.start = start.point;
        path.start_normal = start.normal;
        path.free_anchor = s_.empty();
        path.escape_radius = escape_radius;
        path.target = target;
        if (!s_.empty() && escape_radius <= s_.bounding_radius()) {
            throw Error(ErrorCode::InvalidInput, "escape radius must exceed the scatterer radius");
        }
        escape_ = 2.0 * escape_radius;

        int target_a = -1;
        int target_b = -1;
        Vec2 target_point;
        if (target) {
            std::tie(target_a, target_b, target_point) = locate_target(*target);
        }

        // Entry segment along the normal into the first domain.
        Vec2 entry;
        int entry_node = -1;
        for (double len = 2.0 * f_.h; len <= 0.25 * lambda_; len += f_.h) {
            const Vec2 p = start.point + len * start.normal;
            if (!f_.window.contains(p)) {
                break;
            }
            const int node = f_.nearest(p);
            const int label = d_.labels[at(node)];
            if (label < 0 || distance(f_.point(node), p) > f_.h) {
                continue;
            }
            const int s = d_.domains[at(label)].sign;
            if (sign_constant(field_, start.point + 0.1 * f_.h * start.normal, p, s, 16) &&
                sign_constant(field_, p, f_.point(node), s, 6)) {
                entry = p;
                entry_node = node;
                break;
            }
        }
        if (entry_node < 0) {
            throw Error(ErrorCode::StartInvalid, "no entry segment along the normal reaches a nodal domain");
        }
        const int first = d_.labels[at(entry_node)];

        if (!target) {
            if (auto ray = straight_ray(start, first)) {
                path.samples = to_samples(*ray);
                path.domain_route = {first};
                return path;
            }
        }

        std::vector<int> route;
        std::vector<Vec2> crossing_at;  // preset crossing point per hop, NaN-free when set
        std::vector<bool> preset;
        if (target) {
            auto plan = [&](int a, int b) {
                auto r1 = bfs(first, [&](int x) { return x == a; });
                auto r2 = bfs(b, [&](int x) { return escapes(x); });
                if (r1.empty() || r2.empty()) {
                    return std::vector<int>{};
                }
                r1.insert(r1.end(), r2.begin(), r2.end());
                return r1;
            };
            auto ab = plan(target_a, target_b);
            auto ba = plan(target_b, target_a);
            if (ab.empty() && ba.empty()) {
                throw Error(ErrorCode::NoRouteToInfinity, "no regular route through the target");
            }
            const bool use_ab = !ab.empty() && (ba.empty() || ab.size() <= ba.size());
            route = use_ab ? ab : ba;
            const int before = use_ab ? target_a : target_b;
            std::size_t hop_at = 0;
            for (std::size_t m = 0; m + 1 < route.size(); ++m) {
                if (route[m] == before && route[m + 1] == (use_ab ? target_b : target_a)) {
                    hop_at = m;
                    break;
                }
            }
            preset.assign(route.size(), false);
            crossing_at.assign(route.size(), Vec2{});
            preset[hop_at] = true;
            crossing_at[hop_at] = target_point;
        } else {
            route = bfs(first, [&](int x) { return escapes(x); });
            if (route.empty()) {
                throw Error(ErrorCode::NoRouteToInfinity, "no regular route to the escape circle");
            }
            preset.assign(route.size(), false);
            crossing_at.assign(route.size(), Vec2{});
        }
        path.domain_route = route;

        std::vector<Vec2> pts{start.point, entry};
        int node = entry_node;
        for (std::size_t m = 0; m + 1 < route.size(); ++m) {
            const Stub stub = preset[m] ? make_stub(crossing_at[m], route[m], route[m + 1])
                                        : best_stub(route[m], route[m + 1], pts.back());
            if (stub.node_from < 0) {
                std::ostringstream msg;
                msg << "no crossing stub between domains " << route[m] << " and " << route[m + 1];
                throw Error(ErrorCode::NoRouteToInfinity, msg.str());
            }
            append_route(pts, node, route[m], [&](int n) { return n == stub.node_from; });
            pts.push_back(stub.from);
            pts.push_back(stub.center);
            pts.push_back(stub.to);
            pts.push_back(f_.point(stub.node_to));
            node = stub.node_to;
        }
        const double far = escape_ + f_.h;
        append_route(pts, node, route.back(), [&](int n) { return norm(f_.point(n)) >= far; });

        pts.erase(std::unique(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return distance(a, b) <= 1e-12; }),
                  pts.end());
        for (int it = 0; it < 8 && max_turn(pts) > kSmoothTurnDeg; ++it) {
            pts = chaikin(pts);
        }
        path.samples = to_samples(pts);
        path.crossings = detect_crossings(path.samples, field_);
        if (target) {
            double best = kInf;
            for (const PathSample& s : path.samples) {
                if (distance(s.point, target_point) < best) {
                    best = distance(s.point, target_point);
                    path.target_t = s.t;
                }
            }
            for (const Crossing& c : path.crossings) {
                if (distance(c.point, target_point) <= best) {
                    best = distance(c.point, target_point);
                    path.target_t = c.t;
                }
            }
        }
        return path;
    }

private:
    std::tuple<int, int, Vec2> locate_target(Vec2 y)
    {
        const double h = f_.h;
        for (Vec2 c : d_.critical_points) {
            if (distance(c, y) <= h) {
                throw Error(ErrorCode::TargetOnCriticalPoint, "target within h of a nodal critical point");
            }
        }
        if (field_.status(y) != PointStatus::InG) {
            throw Error(ErrorCode::InvalidInput, "target outside G");
        }
        const Vec2 g = field_.eval(y).real_gradient();
        if (norm(g) < d_.thresholds.grad_floor) {
            throw Error(ErrorCode::TargetOnCriticalPoint, "|grad v| below grad_floor at the target");
        }
        double best = kInf;
        int a = -1;
        int b = -1;
        for (const nodal::Polyline& pl : d_.polylines) {
            for (std::size_t m = 0; m < pl.points.size(); ++m) {
                const auto [sp, sn] = pl.sides[m];
                if (sp < 0 || d_.labels[at(sp)] < 0 || d_.labels[at(sn)] < 0) {
                    continue;
                }
                const double dist = distance(pl.points[m], y);
                if (dist < best) {
                    best = dist;
                    a = d_.labels[at(sp)];
                    b = d_.labels[at(sn)];
                }
            }
        }
        if (best > h) {
            throw Error(ErrorCode::InvalidInput, "target is not on the nodal set");
        }
        Vec2 x = y;
        for (int it = 0; it < 3; ++it) {
            const FieldValue u = field_.eval(x);
            const Vec2 gx = u.real_gradient();
            x -= (u.value.real() / dot(gx, gx)) * gx;
        }
        return {a, b, x};
    }

    std::optional<std::vector<Vec2>> straight_ray(const Start& start, int label)
    {
        const int s = d_.domains[at(label)].sign;
        std::vector<Vec2> pts{start.point};
        const double step = 0.25 * f_.h;
        for (double t = step; t < 4.0 * escape_ + 1.0; t += step) {
            const Vec2 p = start.point + t * start.normal;
            if (!f_.window.contains(p)) {
                return std::nullopt;
            }
            const double v = v_at(field_, p);
            if (std::isnan(v) || sign(v) != s) {
                return std::nullopt;
            }
            pts.push_back(p);
            if (norm(p) >= escape_) {
                return pts;
            }
        }
        return std::nullopt;
    }

    bool escapes(int label)
    {
        if (escape_flags_.empty()) {
            escape_flags_.assign(d_.domains.size(), false);
            const double far = escape_ + f_.h;
            for (int n = 0; n < static_cast<int>(f_.size()); ++n) {
                const int l = d_.labels[at(n)];
                if (l >= 0 && norm(f_.point(n)) >= far) {
                    escape_flags_[at(l)] = true;
                }
            }
        }
        return escape_flags_[at(label)];
    }

    template <class Goal>
    std::vector<int> bfs(int from, Goal goal)
    {
        std::map<int, int> parent{{from, -1}};
        std::deque<int> queue{from};
        while (!queue.empty()) {
            const int x = queue.front();
            queue.pop_front();
            if (goal(x)) {
                std::vector<int> out;
                for (int y = x; y >= 0; y = parent[y]) {
                    out.push_back(y);
                }
                std::reverse(out.begin(), out.end());
                return out;
            }
            for (int y : nbrs_[x]) {
                if (!parent.contains(y)) {
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        return {};
    }

    /// Distance from each node of the domain to its nodal or obstacle boundary.
    const std::vector<double>& clearance(int label)
    {
        auto [it, inserted] = clearance_.try_emplace(label);
        if (!inserted) {
            return it->second;
        }
        std::vector<double>& c = it->second;
        c.assign(f_.size(), kInf);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (int n = 0; n < static_cast<int>(f_.size()); ++n) {
            if (d_.labels[at(n)] != label) {
                continue;
            }
            const int i = n % f_.nx;
            const int j = n / f_.nx;
            bool edge = false;
            for (auto [a, b] : std::array<std::pair<int, int>, 4>{{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}}) {
                if (a >= 0 && b >= 0 && a < f_.nx && b < f_.ny && d_.labels[at(f_.index(a, b))] != label) {
                    edge = true;
                }
            }
            if (edge) {
                c[at(n)] = 0.5 * f_.h;
                heap.emplace(c[at(n)], n);
            }
        }
        while (!heap.empty()) {
            const auto [dist, n] = heap.top();
            heap.pop();
            if (dist > c[at(n)]) {
                continue;
            }
            for_neighbours(n, label, [&](int m, double len) {
                if (dist + len < c[at(m)]) {
                    c[at(m)] = dist + len;
                    heap.emplace(c[at(m)], m);
                }
            });
        }
        return c;
    }

    /// 8-neighbours in the same domain; diagonals only across cells of that domain.
    template <class Visit>
    void for_neighbours(int n, int label, Visit visit) const
    {
        const int i = n % f_.nx;
        const int j = n / f_.nx;
        auto in = [&](int a, int b) {
            return a >= 0 && b >= 0 && a < f_.nx && b < f_.ny && d_.labels[at(f_.index(a, b))] == label;
        };
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                if ((di == 0 && dj == 0) || !in(i + di, j + dj)) {
                    continue;
                }
                if (di != 0 && dj != 0 && !(in(i + di, j) && in(i, j + dj))) {
                    continue;
                }
                visit(f_.index(i + di, j + dj), (di != 0 && dj != 0) ? std::sqrt(2.0) * f_.h : f_.h);
            }
        }
    }

    template <class Goal>
    void append_route(std::vector<Vec2>& pts, int from, int label, Goal goal)
    {
        const std::vector<double>& c = clearance(label);
        const double cap = lambda_ / 8.0;
        std::vector<double> cost(f_.size(), kInf);
        std::vector<int> parent(f_.size(), -1);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        cost[at(from)] = 0.0;
        heap.emplace(0.0, from);
        int reached = -1;
        while (!heap.empty()) {
            const auto [dist, n] = heap.top();
            heap.pop();
            if (dist > cost[at(n)]) {
                continue;
            }
            if (goal(n)) {
                reached = n;
                break;
            }
            for_neighbours(n, label, [&](int m, double len) {
                const double r = cap / std::max(std::min(c[at(m)], cap), 0.25 * f_.h);
                const double next = dist + len * (1.0 + r * r);
                if (next < cost[at(m)]) {
                    cost[at(m)] = next;
                    parent[at(m)] = n;
                    heap.emplace(next, m);
                }
            });
        }
        if (reached < 0) {
            std::ostringstream msg;
            msg << "no grid route inside domain " << label;
            throw Error(ErrorCode::NoRouteToInfinity, msg.str());
        }
        std::vector<int> nodes;
        for (int n = reached; n >= 0; n = parent[at(n)]) {
            nodes.push_back(n);
        }
        std::reverse(nodes.begin(), nodes.end());
        for (int n : nodes) {
            pts.push_back(f_.point(n));
        }
    }

    /// Distance along dir from x until v leaves sign s, capped at `cap`.
    double reach(Vec2 x, Vec2 dir, int s, double cap) const
    {
        const double step = f_.h / 8.0;
        for (double t = step; t <= cap; t += step) {
            const double v = v_at(field_, x + t * dir);
            if (std::isnan(v) || sign(v) != s) {
                return t - step;
            }
        }
        return cap;
    }

    /// Nearest node of the domain within 3h of p, not ahead of p along -away, joined to
    /// p without a sign change.
    int connector(Vec2 p, int label, Vec2 away) const
    {
        const int s = d_.domains[at(label)].sign;
        const int ci = static_cast<int>(std::lround((p.x - f_.window.lo.x) / f_.h));
        const int cj = static_cast<int>(std::lround((p.y - f_.window.lo.y) / f_.h));
        std::vector<std::pair<double, int>> cands;
        for (int dj = -3; dj <= 3; ++dj) {
            for (int di = -3; di <= 3; ++di) {
                const int i = ci + di;
                const int j = cj + dj;
                if (i < 0 || j < 0 || i >= f_.nx || j >= f_.ny) {
                    continue;
                }
                const int n = f_.index(i, j);
                if (d_.labels[at(n)] == label) {
                    cands.emplace_back(distance(f_.point(n), p), n);
                }
            }
        }
        std::sort(cands.begin(), cands.end());
        for (const auto& [dist, n] : cands) {
            if (dist <= 3.0 * f_.h && dot(f_.point(n) - p, away) >= -0.25 * f_.h &&
                sign_constant(field_, p, f_.point(n), s, 8)) {
                return n;
            }
        }
        return -1;
    }

    Stub make_stub(Vec2 w, int from, int to) const
    {
        Stub stub;
        const Vec2 g = field_.eval(w).real_gradient();
        const int s_from = d_.domains[at(from)].sign;
        const int s_to = d_.domains[at(to)].sign;
        if (norm(g) == 0.0 || s_from == s_to) {
            return stub;
        }
        const Vec2 dir = (s_from < 0 ? 1.0 : -1.0) * (g / norm(g));
        const double cap = lambda_ / 16.0;
        const double back = reach(w, -dir, s_from, 2.0 * cap);
        const double ahead = reach(w, dir, s_to, 2.0 * cap);
        stub.half_length = std::min({cap, 0.5 * back, 0.5 * ahead});
        if (stub.half_length <= 0.0) {
            return stub;
        }
        stub.center = w;
        stub.from = w - stub.half_length * dir;
        stub.to = w + stub.half_length * dir;
        stub.node_from = connector(stub.from, from, -dir);
        stub.node_to = connector(stub.to, to, dir);
        if (stub.node_from < 0 || stub.node_to < 0) {
            stub.node_from = -1;
        }
        return stub;
    }

    /// Among witness samples whose stub reaches half the longest one, the nearest to `near`.
    Stub best_stub(int from, int to, Vec2 near) const
    {
        const nodal::Adjacency* adj = d_.find_adjacency(from, to);
        Stub best;
        if (adj == nullptr) {
            return best;
        }
        std::vector<Stub> stubs;
        double longest = 0.0;
        for (Vec2 w : adj->witness.samples) {
            Stub s = make_stub(w, from, to);
            if (s.node_from >= 0) {
                longest = std::max(longest, s.half_length);
                stubs.push_back(s);
            }
        }
        double closest = kInf;
        for (const Stub& s : stubs) {
            if (s.half_length >= 0.5 * longest && distance(s.center, near) < closest) {
                closest = distance(s.center, near);
                best = s;
            }
        }
        return best;
    }

    const nodal::NodalDecomposition& d_;
    const nodal::SampledField& f_;
    const Field& field_;
    const geometry::Scatterer& s_;
    double lambda_;
    double escape_ = 0.0;
    std::map<int, std::vector<int>> nbrs_;
    std::vector<bool> escape_flags_;
    std::map<int, std::vector<double>> clearance_;
};

} // namespace

Start pick_start(const geometry::Scatterer& s, const Field& field, int candidates, std::uint64_t seed,
                 double grad_floor, const std::function<double(Vec2)>& h_near)
{
    std::vector<geometry::Cell> cells;
    for (const geometry::Cell& c : geometry::boundary_cells(s)) {
        if (c.owner == geometry::CellOwner::PolygonEdge) {
            cells.push_back(c);
        }
    }
    if (cells.empty() || candidates <= 0) {
        throw Error(ErrorCode::NoRegularBoundaryPoint, "no polygon edges to start from");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_cell(0, cells.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Start best;
    for (int m = 0; m < candidates; ++m) {
        const geometry::Cell& cell = cells[pick_cell(rng)];
        const double t = 0.1 + 0.4 * (unit(rng) + unit(rng));
        const Vec2 x = cell.at(t);
        const double hn = h_near(x);
        std::array<double, 3> est{};
        bool ok = true;
        for (std::size_t q = 0; q < 3; ++q) {
            const double off = static_cast<double>(2 << q) * hn;
            const double v = v_at(field, x + off * cell.normal);
            if (std::isnan(v)) {
                ok = false;
                break;
            }
            est[q] = v / off;
        }
        if (!ok) {
            continue;
        }
        // Richardson extrapolation of the one-sided quotients.
        const double dvdn = 2.0 * est[0] - est[1];
        if (std::abs(dvdn) > std::abs(best.dv_dn)) {
            best = {x, cell.normal, dvdn};
        }
    }
    if (!(std::abs(best.dv_dn) >= grad_floor)) {
        throw Error(ErrorCode::NoRegularBoundaryPoint, "every candidate has |dv/dn| below grad_floor");
    }
    return best;
}

HiddenPath build_path(const nodal::NodalDecomposition& d, const geometry::Scatterer& s, const Start& start,
                      std::optional<Vec2> target, double escape_radius)
{
    Builder builder(d, s);
    return builder.build(start, target, escape_radius);
}

PathReport verify_path(const HiddenPath& p, const nodal::SampledField& f, double grad_floor,
                       std::span<const Vec2> critical_points)
{
    PathReport r;
    const Field& field = *f.field;
    const double lambda = 2.0 * kPi / f.k;
    auto fail = [&](const std::string& why) { r.failures.push_back(why); };
    if (p.samples.size() < 2) {
        fail("fewer than two samples");
        return r;
    }

    r.parameters_increasing = true;
    for (std::size_t m = 1; m < p.samples.size(); ++m) {
        if (!(p.samples[m].t > p.samples[m - 1].t)) {
            r.parameters_increasing = false;
        }
    }
    if (!r.parameters_increasing) {
        fail("parameters not strictly increasing");
    }

    r.starts_on_boundary = p.samples.front().point == p.start &&
                           (p.free_anchor || field.status(p.start) != PointStatus::InG);
    if (!r.starts_on_boundary) {
        fail("path does not start on the boundary");
    }

    r.stays_in_g = true;
    for (std::size_t m = 1; m < p.samples.size(); ++m) {
        if (field.status(p.samples[m].point) != PointStatus::InG) {
            r.stays_in_g = false;
        }
    }
    if (!r.stays_in_g) {
        fail("a sample leaves G");
    }

    r.target_distance = 0.0;
    r.reaches_target = true;
    if (p.target) {
        r.target_distance = kInf;
        for (std::size_t m = 1; m < p.samples.size(); ++m) {
            r.target_distance = std::min(r.target_distance,
                                         segment_point_distance(p.samples[m - 1].point, p.samples[m].point, *p.target));
        }
        r.reaches_target = r.target_distance <= f.h;
        if (!r.reaches_target) {
            fail("path misses the target");
        }
    }

    r.final_norm = norm(p.samples.back().point);
    r.escapes = r.final_norm >= p.escape_radius;
    if (!r.escapes) {
        fail("path ends inside the escape radius");
    }

    for (std::size_t m = 1; m < p.samples.size(); ++m) {
        r.max_turn_deg = std::max(r.max_turn_deg, turn_deg(p.samples[m - 1].tangent, p.samples[m].tangent));
    }
    r.turns_ok = r.max_turn_deg <= kMaxTurnDeg;
    if (!r.turns_ok) {
        fail("tangent turns too fast");
    }

    r.avoids_critical = true;
    for (Vec2 c : critical_points) {
        for (std::size_t m = 1; m < p.samples.size(); ++m) {
            if (segment_point_distance(p.samples[m - 1].point, p.samples[m].point, c) <= f.h) {
                r.avoids_critical = false;
            }
        }
    }
    if (!r.avoids_critical) {
        fail("path passes within h of a nodal critical point");
    }

    const std::vector<Crossing> found = detect_crossings(p.samples, field);
    r.crossings_ok = true;
    for (std::size_t m = 0; m < found.size(); ++m) {
        CrossingCheck chk;
        chk.crossing = found[m];
        chk.angle_ok = found[m].angle_deg >= kMinCrossingDeg && found[m].angle_deg <= kMaxCrossingDeg;
        chk.grad_ok = found[m].grad_norm >= grad_floor;
        double gap = std::min(found[m].t - p.samples.front().t, p.samples.back().t - found[m].t);
        if (m > 0) {
            gap = std::min(gap, found[m].t - found[m - 1].t);
        }
        if (m + 1 < found.size()) {
            gap = std::min(gap, found[m + 1].t - found[m].t);
        }
        const double half = std::min(lambda / 32.0, 0.25 * gap);
        std::array<double, kMonotoneSamples> v{};
        bool valid = half > 0.0;
        for (int q = 0; q < kMonotoneSamples && valid; ++q) {
            const double t = found[m].t + half * (2.0 * q / (kMonotoneSamples - 1) - 1.0);
            v[static_cast<std::size_t>(q)] = v_at(field, position_at(p.samples, t));
            valid = !std::isnan(v[static_cast<std::size_t>(q)]);
        }
        if (valid) {
            const double dir = v.back() - v.front();
            chk.monotone = dir != 0.0;
            for (std::size_t q = 1; q < v.size(); ++q) {
                if (!((v[q] - v[q - 1]) * dir > 0.0)) {
                    chk.monotone = false;
                }
            }
        }
        if (!(chk.angle_ok && chk.grad_ok && chk.monotone)) {
            r.crossings_ok = false;
            std::ostringstream msg;
            msg << "crossing at t = " << found[m].t << ": angle " << found[m].angle_deg << " deg, |grad v| "
                << found[m].grad_norm << (chk.monotone ? "" : ", v not monotone");
            fail(msg.str());
        }
        r.crossings.push_back(chk);
    }

    r.certified = r.parameters_increasing && r.starts_on_boundary && r.stays_in_g && r.reaches_target && r.escapes &&
                  r.turns_ok && r.avoids_critical && r.crossings_ok;
    return r;
}

Verdict classify(const ReflectionFrame& r)
{
    if (r.oddness_residual <= kOddTolerance * r.field_scale) {
        return Verdict::Odd;
    }
    if (r.oddness_residual >= kRefuteFactor * kOddTolerance * r.field_scale) {
        return Verdict::Refuted;
    }
    return Verdict::Inconclusive;
}

ReflectionFrame reflect_check(const nodal::SampledField& f, const geometry::Scatterer& s,
                              const nodal::FlatSegment& seg)
{
    ReflectionFrame frame;
    frame.line = seg.line;
    const Field& field = *f.field;
    const Vec2 normal = seg.line.normal();
    const double radius = std::max({norm(f.window.lo), norm(f.window.hi), norm(Vec2{f.window.lo.x, f.window.hi.y}),
                                    norm(Vec2{f.window.hi.x, f.window.lo.y})});
    frame.s_tilde = geometry::line_component(s, seg.line, seg.witness_point, radius);

    auto side = [&](Vec2 x) { return dot(x - seg.line.point, normal); };
    auto in_g = [&](Vec2 x) {
        return f.window.contains(x) && field.status(x) == PointStatus::InG &&
               (s.empty() || geometry::classify_point(s, x) == geometry::PointClass::Exterior);
    };
    std::vector<signed char> ok(f.size(), -1);
    auto qualifies = [&](int n) {
        signed char& q = ok[at(n)];
        if (q < 0) {
            const Vec2 x = f.point(n);
            q = (f.in_g(n) && side(x) > 0.0 && in_g(geometry::reflect(x, seg.line))) ? 1 : 0;
        }
        return q == 1;
    };

    int seed = -1;
    double best = kInf;
    const int ci = static_cast<int>(std::lround((seg.witness_point.x - f.window.lo.x) / f.h));
    const int cj = static_cast<int>(std::lround((seg.witness_point.y - f.window.lo.y) / f.h));
    for (int dj = -2; dj <= 2; ++dj) {
        for (int di = -2; di <= 2; ++di) {
            const int i = ci + di;
            const int j = cj + dj;
            if (i < 0 || j < 0 || i >= f.nx || j >= f.ny) {
                continue;
            }
            const int n = f.index(i, j);
            const double dist = distance(f.point(n), seg.witness_point);
            if (qualifies(n) && dist < best) {
                best = dist;
                seed = n;
            }
        }
    }
    if (seed < 0) {
        throw Error(ErrorCode::WindowTooSmall, "no grid node of E+ next to the segment");
    }

    std::vector<int> members{seed};
    std::vector<bool> seen(f.size(), false);
    seen[at(seed)] = true;
    for (std::size_t head = 0; head < members.size(); ++head) {
        const int n = members[head];
        const int i = n % f.nx;
        const int j = n / f.nx;
        for (auto [a, b] : std::array<std::pair<int, int>, 4>{{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}}) {
            if (a < 0 || b < 0 || a >= f.nx || b >= f.ny) {
                continue;
            }
            const int m = f.index(a, b);
            if (!seen[at(m)] && qualifies(m)) {
                seen[at(m)] = true;
                members.push_back(m);
            }
        }
    }
    std::sort(members.begin(), members.end());
    for (int n : members) {
        const Vec2 x = f.point(n);
        frame.e_plus.push_back(x);
        frame.e_minus.push_back(geometry::reflect(x, seg.line));
    }

    const std::size_t stride = (members.size() + kMaxReflectionSamples - 1) / kMaxReflectionSamples;
    for (std::size_t m = 0; m < members.size(); m += stride) {
        const int n = members[m];
        const Complex ux{f.v[at(n)], f.im[at(n)]};
        const Complex ur = field.eval(frame.e_minus[m]).value;
        frame.oddness_residual = std::max(frame.oddness_residual, std::abs(ux + ur));
        frame.field_scale = std::max({frame.field_scale, std::abs(ux), std::abs(ur)});
        ++frame.sampled;
    }
    return frame;
}

std::vector<WalkStep> flat_point_walk(const HiddenPath& p, const nodal::NodalDecomposition& d,
                                      const geometry::Scatterer& s)
{
    const std::vector<nodal::FlatSegment> segments = nodal::flat_points(d);
    const double h = d.field->h;
    std::map<std::size_t, ReflectionFrame> frames;
    std::vector<WalkStep> walk;
    double last_t = -kInf;
    for (const Crossing& c : p.crossings) {
        if (!(c.t > last_t)) {
            continue;
        }
        for (std::size_t q = 0; q < segments.size(); ++q) {
            const nodal::FlatSegment& seg = segments[q];
            const double along = dot(c.point - seg.line.point, seg.line.direction);
            const double across = std::abs(dot(c.point - seg.line.point, seg.line.normal()));
            if (across > seg.max_deviation + h || along < seg.extent.lo - h || along > seg.extent.hi + h) {
                continue;
            }
            auto it = frames.find(q);
            if (it == frames.end()) {
                it = frames.emplace(q, reflect_check(*d.field, s, seg)).first;
            }
            if (classify(it->second) == Verdict::Odd) {
                walk.push_back({c.t, c.point, it->second.oddness_residual});
                last_t = c.t;
                break;
            }
        }
    }
    return walk;
}

} // namespace scatter::hiddenpath
