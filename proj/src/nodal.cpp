#include "scatter/nodal.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace scatter::nodal {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t at(int idx) { return static_cast<std::size_t>(idx); }

std::pair<int, int> ordered(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

bool cell_in_g(const SampledField& f, int i, int j)
{
    return f.in_g(f.index(i, j)) && f.in_g(f.index(i + 1, j)) && f.in_g(f.index(i + 1, j + 1)) &&
           f.in_g(f.index(i, j + 1));
}

struct Vertex {
    Vec2 pos;
    double grad = 0.0;
    double im = 0.0;
    std::pair<int, int> sides{-1, -1};
};

using Key = std::int64_t;

class Contour {
public:
    explicit Contour(const SampledField& f) : f_(f) {}

    void run(bool zero_positive)
    {
        for (int j = 0; j + 1 < f_.ny; ++j) {
            for (int i = 0; i + 1 < f_.nx; ++i) {
                if (cell_in_g(f_, i, j)) {
                    cell(i, j, zero_positive);
                }
            }
        }
    }

    std::vector<Polyline> chain() const
    {
        std::map<Key, std::vector<std::size_t>> incident;
        std::vector<std::pair<Key, Key>> segs(segments_.begin(), segments_.end());
        for (std::size_t s = 0; s < segs.size(); ++s) {
            incident[segs[s].first].push_back(s);
            incident[segs[s].second].push_back(s);
        }
        std::vector<bool> used(segs.size(), false);
        std::vector<Polyline> out;

        auto walk = [&](Key start, std::size_t first_seg) {
            std::vector<Key> keys{start};
            Key cur = start;
            std::size_t seg = first_seg;
            for (;;) {
                used[seg] = true;
                const Key next = segs[seg].first == cur ? segs[seg].second : segs[seg].first;
                keys.push_back(next);
                cur = next;
                const auto& inc = incident.at(cur);
                if (cur == start || inc.size() != 2) {
                    break;
                }
                const std::size_t other = inc[0] == seg ? inc[1] : inc[0];
                if (used[other]) {
                    break;
                }
                seg = other;
            }
            Polyline p;
            p.closed = keys.size() > 2 && keys.front() == keys.back();
            for (Key key : keys) {
                const Vertex& v = vertices_.at(key);
                p.points.push_back(v.pos);
                p.grad_norm.push_back(v.grad);
                p.im_abs.push_back(v.im);
                p.sides.push_back(v.sides);
            }
            out.push_back(std::move(p));
        };

        for (const auto& [key, inc] : incident) {
            if (inc.size() == 2) {
                continue;
            }
            for (std::size_t s : inc) {
                if (!used[s]) {
                    walk(key, s);
                }
            }
        }
        for (const auto& [key, inc] : incident) {
            for (std::size_t s : inc) {
                if (!used[s]) {
                    walk(key, s);
                }
            }
        }
        return out;
    }

private:
    Key node_key(int idx) const { return 2 * static_cast<Key>(f_.size()) + idx; }

    /// Crossing on the grid edge a -> b (b = a + 1 or a + nx).
    Key crossing(int a, int b)
    {
        const double va = f_.v[at(a)];
        const double vb = f_.v[at(b)];
        if (va == 0.0) {
            return add_node(a);
        }
        if (vb == 0.0) {
            return add_node(b);
        }
        const Key key = 2 * static_cast<Key>(a) + (b == a + 1 ? 0 : 1);
        if (!vertices_.contains(key)) {
            const double t = va / (va - vb);
            Vertex v;
            v.pos = f_.point(a) + t * (f_.point(b) - f_.point(a));
            v.grad = norm((1.0 - t) * f_.grad[at(a)] + t * f_.grad[at(b)]);
            v.im = std::abs((1.0 - t) * f_.im[at(a)] + t * f_.im[at(b)]);
            v.sides = va > 0.0 ? std::pair{a, b} : std::pair{b, a};
            vertices_[key] = v;
        }
        return key;
    }

    Key add_node(int idx)
    {
        const Key key = node_key(idx);
        if (!vertices_.contains(key)) {
            vertices_[key] = Vertex{f_.point(idx), norm(f_.grad[at(idx)]), std::abs(f_.im[at(idx)]), zero_sides(idx)};
        }
        return key;
    }

    /// Neighbours of a zero node across the nodal line, along the dominant gradient axis.
    std::pair<int, int> zero_sides(int idx) const
    {
        const Vec2 g = f_.grad[at(idx)];
        const int i = idx % f_.nx;
        const int j = idx / f_.nx;
        int up = -1;
        int down = -1;
        if (std::abs(g.x) >= std::abs(g.y)) {
            if (i > 0 && i + 1 < f_.nx) {
                up = g.x > 0.0 ? idx + 1 : idx - 1;
                down = g.x > 0.0 ? idx - 1 : idx + 1;
            }
        } else if (j > 0 && j + 1 < f_.ny) {
            up = g.y > 0.0 ? idx + f_.nx : idx - f_.nx;
            down = g.y > 0.0 ? idx - f_.nx : idx + f_.nx;
        }
        if (up < 0 || !f_.in_g(up) || !f_.in_g(down) || !(f_.v[at(up)] > 0.0) || !(f_.v[at(down)] < 0.0)) {
            return {-1, -1};
        }
        return {up, down};
    }

    void add_segment(Key a, Key b)
    {
        if (a != b) {
            segments_.insert(std::minmax(a, b));
        }
    }

    void cell(int i, int j, bool zero_positive)
    {
        const std::array<int, 4> c{f_.index(i, j), f_.index(i + 1, j), f_.index(i + 1, j + 1), f_.index(i, j + 1)};
        auto positive = [&](double v) { return v > 0.0 || (v == 0.0 && zero_positive); };
        std::array<bool, 4> pos{};
        for (int m = 0; m < 4; ++m) {
            pos[at(m)] = positive(f_.v[at(c[at(m)])]);
        }
        // Edge m joins corner m and corner m + 1; grid edges run in +x or +y.
        std::array<Key, 4> key{};
        std::array<bool, 4> cut{};
        int cuts = 0;
        for (int m = 0; m < 4; ++m) {
            const int a = c[at(m)];
            const int b = c[at((m + 1) % 4)];
            if (pos[at(m)] != pos[at((m + 1) % 4)]) {
                cut[at(m)] = true;
                key[at(m)] = a < b ? crossing(a, b) : crossing(b, a);
                ++cuts;
            }
        }
        if (cuts == 2) {
            std::array<Key, 2> ends{};
            int n = 0;
            for (int m = 0; m < 4; ++m) {
                if (cut[at(m)]) {
                    ends[at(n++)] = key[at(m)];
                }
            }
            add_segment(ends[0], ends[1]);
        } else if (cuts == 4) {
            double center = 0.0;
            for (int idx : c) {
                center += 0.25 * f_.v[at(idx)];
            }
            if (positive(center) == pos[0]) {
                add_segment(key[0], key[1]);
                add_segment(key[2], key[3]);
            } else {
                add_segment(key[3], key[0]);
                add_segment(key[1], key[2]);
            }
        }
    }

    const SampledField& f_;
    std::map<Key, Vertex> vertices_;
    std::set<std::pair<Key, Key>> segments_;
};

double wrap(double a)
{
    while (a > kPi) {
        a -= 2.0 * kPi;
    }
    while (a <= -kPi) {
        a += 2.0 * kPi;
    }
    return a;
}

int winding(const std::array<Complex, 4>& u)
{
    double total = 0.0;
    for (std::size_t m = 0; m < 4; ++m) {
        total += wrap(std::arg(u[(m + 1) % 4]) - std::arg(u[m]));
    }
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

/// Newton iteration for u = 0 as a real 2x2 system; falls back to `guess`.
Vec2 refine_zero(const Field& field, Vec2 guess, double h, double scale)
{
    Vec2 x = guess;
    for (int it = 0; it < 30; ++it) {
        if (field.status(x) != PointStatus::InG) {
            return guess;
        }
        const FieldValue u = field.eval(x);
        if (std::abs(u.value) <= 1e-13 * scale) {
            return distance(x, guess) <= 2.0 * h ? x : guess;
        }
        const double a = u.gradient[0].real();
        const double b = u.gradient[1].real();
        const double c = u.gradient[0].imag();
        const double d = u.gradient[1].imag();
        const double det = a * d - b * c;
        if (det == 0.0) {
            return guess;
        }
        const double fr = u.value.real();
        const double fi = u.value.imag();
        x -= Vec2{(d * fr - b * fi) / det, (-c * fr + a * fi) / det};
        if (distance(x, guess) > 2.0 * h) {
            return guess;
        }
    }
    return guess;
}

/// Moves x onto v = 0 along grad v.
Vec2 project_to_zero(const Field& field, Vec2 x)
{
    for (int it = 0; it < 3; ++it) {
        if (field.status(x) != PointStatus::InG) {
            return x;
        }
        const FieldValue u = field.eval(x);
        const Vec2 g = u.real_gradient();
        const double gg = dot(g, g);
        if (gg == 0.0) {
            return x;
        }
        x -= (u.value.real() / gg) * g;
    }
    return x;
}

struct Fit {
    Vec2 center;
    Vec2 direction;
    double deviation = 0.0;
};

Fit fit_line(const std::vector<Vec2>& pts, std::size_t first, std::size_t last)
{
    Fit fit;
    const double n = static_cast<double>(last - first + 1);
    for (std::size_t m = first; m <= last; ++m) {
        fit.center += pts[m] / n;
    }
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t m = first; m <= last; ++m) {
        const Vec2 d = pts[m] - fit.center;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    fit.direction = {std::cos(theta), std::sin(theta)};
    const Vec2 normal = perp(fit.direction);
    for (std::size_t m = first; m <= last; ++m) {
        fit.deviation = std::max(fit.deviation, std::abs(dot(pts[m] - fit.center, normal)));
    }
    return fit;
}

} // namespace

Window square_window(double half_width) { return {{-half_width, -half_width}, {half_width, half_width}}; }

int SampledField::nearest(Vec2 x) const
{
    const int i = std::clamp(static_cast<int>(std::lround((x.x - window.lo.x) / h)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::lround((x.y - window.lo.y) / h)), 0, ny - 1);
    return index(i, j);
}

SampledField sample_field(std::shared_ptr<const Field> field, const geometry::Scatterer& s, Window window,
                          double h)
{
    const double k = field->wavenumber();
    const double lambda = 2.0 * kPi / k;
    if (!(h > 0.0) || h > lambda / 20.0 * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "spacing " << h << " exceeds lambda/20 = " << lambda / 20.0;
        throw Error(ErrorCode::ResolutionTooCoarse, msg.str());
    }
    if (!(window.hi.x > window.lo.x) || !(window.hi.y > window.lo.y)) {
        throw Error(ErrorCode::InvalidInput, "empty sampling window");
    }
    SampledField f;
    f.field = field;
    f.window = window;
    f.h = h;
    f.k = k;
    f.complex_valued = field->complex_valued();
    f.nx = static_cast<int>(std::floor((window.hi.x - window.lo.x) / h + 1e-9)) + 1;
    f.ny = static_cast<int>(std::floor((window.hi.y - window.lo.y) / h + 1e-9)) + 1;
    const std::size_t n = static_cast<std::size_t>(f.nx) * static_cast<std::size_t>(f.ny);
    f.v.assign(n, 0.0);
    f.im.assign(n, 0.0);
    f.grad.assign(n, Vec2{});
    f.mask.assign(n, PointStatus::InD);
    double max_v = 0.0;
    for (int j = 0; j < f.ny; ++j) {
        for (int i = 0; i < f.nx; ++i) {
            const std::size_t idx = at(f.index(i, j));
            const Vec2 x = f.point(i, j);
            if (!s.empty() && geometry::classify_point(s, x) != geometry::PointClass::Exterior) {
                continue;
            }
            PointStatus st = field->status(x);
            FieldValue u;
            if (st == PointStatus::InG) {
                try {
                    u = field->eval(x);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::TooCloseToBoundary && e.code() != ErrorCode::PointInsideScatterer) {
                        throw;
                    }
                    st = PointStatus::NearBoundary;
                }
            }
            f.mask[idx] = st;
            if (st != PointStatus::InG) {
                continue;
            }
            f.v[idx] = u.value.real();
            f.im[idx] = u.value.imag();
            f.grad[idx] = u.real_gradient();
            f.max_abs_u = std::max(f.max_abs_u, std::abs(u.value));
            max_v = std::max(max_v, std::abs(f.v[idx]));
        }
    }
    // Values at rounding level are exact zeros of v: grid nodes on a nodal line.
    const double snap = 1e-12 * max_v;
    for (double& v : f.v) {
        if (std::abs(v) <= snap) {
            v = 0.0;
        }
    }
    return f;
}

Thresholds default_thresholds(const SampledField& f)
{
    Thresholds t;
    t.grad_floor = 1e-3 * f.k;
    t.v_floor = 1e-6;
    t.im_floor = 1e-6 * f.max_abs_u;
    t.min_length = 0.25 * 2.0 * kPi / f.k;
    t.dev_tol = f.h;
    return t;
}

double Polyline::length() const
{
    double len = 0.0;
    for (std::size_t m = 1; m < points.size(); ++m) {
        len += distance(points[m - 1], points[m]);
    }
    return len;
}

std::vector<Polyline> extract_nodal_set(const SampledField& f)
{
    Contour contour(f);
    contour.run(true);
    contour.run(false);
    return contour.chain();
}

std::vector<Vec2> find_critical_points(const SampledField& f, double grad_floor, double v_floor)
{
    if (!(grad_floor > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "grad_floor must be positive");
    }
    const Field& field = *f.field;
    const double step = 1e-5 / f.k;
    std::vector<Vec2> found;
    for (int j = 0; j + 1 < f.ny; ++j) {
        for (int i = 0; i + 1 < f.nx; ++i) {
            if (!cell_in_g(f, i, j)) {
                continue;
            }
            const std::array<int, 4> c{f.index(i, j), f.index(i + 1, j), f.index(i + 1, j + 1), f.index(i, j + 1)};
            double gx_lo = std::numeric_limits<double>::infinity();
            double gx_hi = -gx_lo;
            double gy_lo = gx_lo;
            double gy_hi = -gx_lo;
            double v_min = gx_lo;
            double g_max = 0.0;
            for (int idx : c) {
                const Vec2 g = f.grad[at(idx)];
                gx_lo = std::min(gx_lo, g.x);
                gx_hi = std::max(gx_hi, g.x);
                gy_lo = std::min(gy_lo, g.y);
                gy_hi = std::max(gy_hi, g.y);
                v_min = std::min(v_min, std::abs(f.v[at(idx)]));
                g_max = std::max(g_max, norm(g));
            }
            if (gx_lo > 0.0 || gx_hi < 0.0 || gy_lo > 0.0 || gy_hi < 0.0) {
                continue;
            }
            if (v_min > 2.0 * f.h * g_max + v_floor) {
                continue;
            }
            const Vec2 start = f.point(i, j) + Vec2{0.5 * f.h, 0.5 * f.h};
            Vec2 x = start;
            bool ok = false;
            for (int it = 0; it < 40; ++it) {
                if (field.status(x) != PointStatus::InG) {
                    break;
                }
                const FieldValue u = field.eval(x);
                const Vec2 g = u.real_gradient();
                const Vec2 gxp = field.eval(x + Vec2{step, 0.0}).real_gradient();
                const Vec2 gxm = field.eval(x - Vec2{step, 0.0}).real_gradient();
                const Vec2 gyp = field.eval(x + Vec2{0.0, step}).real_gradient();
                const Vec2 gym = field.eval(x - Vec2{0.0, step}).real_gradient();
                const Vec2 hx = (gxp - gxm) / (2.0 * step);
                const Vec2 hy = (gyp - gym) / (2.0 * step);
                const double det = hx.x * hy.y - hy.x * hx.y;
                if (det == 0.0) {
                    break;
                }
                const Vec2 dx{(hy.y * g.x - hy.x * g.y) / det, (-hx.y * g.x + hx.x * g.y) / det};
                x -= dx;
                if (distance(x, start) > 2.0 * f.h) {
                    break;
                }
                if (norm(dx) <= 1e-13 / f.k) {
                    ok = true;
                    break;
                }
            }
            if (!ok || field.status(x) != PointStatus::InG) {
                continue;
            }
            const FieldValue u = field.eval(x);
            if (std::abs(u.value.real()) > v_floor || norm(u.real_gradient()) > grad_floor) {
                continue;
            }
            const bool dup = std::any_of(found.begin(), found.end(), [&](Vec2 p) { return distance(p, x) <= f.h; });
            if (!dup) {
                found.push_back(x);
            }
        }
    }
    return found;
}

int NodalDecomposition::label_at(Vec2 x) const
{
    if (!field->window.contains(x)) {
        return -1;
    }
    return labels[at(field->nearest(x))];
}

const Adjacency* NodalDecomposition::find_adjacency(int a, int b) const
{
    const auto [lo, hi] = ordered(a, b);
    for (const Adjacency& adj : adjacency) {
        if (adj.a == lo && adj.b == hi) {
            return &adj;
        }
    }
    return nullptr;
}

NodalDecomposition nodal_domains(std::shared_ptr<const SampledField> fp)
{
    const Thresholds t = default_thresholds(*fp);
    return nodal_domains(std::move(fp), t);
}

NodalDecomposition nodal_domains(std::shared_ptr<const SampledField> fp, const Thresholds& t)
{
    const SampledField& f = *fp;
    NodalDecomposition d;
    d.field = fp;
    d.thresholds = t;
    d.polylines = extract_nodal_set(f);
    d.critical_points = find_critical_points(f, t.grad_floor, t.v_floor);
    d.labels.assign(f.size(), -1);

    auto sign_of = [&](int idx) {
        const double v = f.v[at(idx)];
        return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    };
    for (int seed = 0; seed < static_cast<int>(f.size()); ++seed) {
        if (!f.in_g(seed) || d.labels[at(seed)] >= 0 || sign_of(seed) == 0) {
            continue;
        }
        Domain dom;
        dom.sign = sign_of(seed);
        dom.seed = seed;
        const int label = static_cast<int>(d.domains.size());
        std::deque<int> queue{seed};
        d.labels[at(seed)] = label;
        while (!queue.empty()) {
            const int idx = queue.front();
            queue.pop_front();
            ++dom.nodes;
            const int i = idx % f.nx;
            const int j = idx / f.nx;
            if (i == 0 || j == 0 || i == f.nx - 1 || j == f.ny - 1) {
                dom.touches_window = true;
            }
            const std::array<std::pair<int, int>, 4> nbrs{{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}};
            for (const auto& [a, b] : nbrs) {
                if (a < 0 || b < 0 || a >= f.nx || b >= f.ny) {
                    continue;
                }
                const int n = f.index(a, b);
                if (!f.in_g(n)) {
                    dom.touches_obstacle = true;
                    continue;
                }
                if (d.labels[at(n)] < 0 && sign_of(n) == dom.sign) {
                    d.labels[at(n)] = label;
                    queue.push_back(n);
                }
            }
        }
        d.domains.push_back(dom);
    }

    struct Run {
        int polyline;
        std::size_t first;
        std::size_t last;
        double length;
    };
    std::map<std::pair<int, int>, std::vector<Run>> runs;
    for (std::size_t p = 0; p < d.polylines.size(); ++p) {
        const Polyline& pl = d.polylines[p];
        std::size_t m = 0;
        while (m < pl.points.size()) {
            const auto [sp, sn] = pl.sides[m];
            if (sp < 0 || pl.grad_norm[m] < t.grad_floor || d.labels[at(sp)] < 0 || d.labels[at(sn)] < 0) {
                ++m;
                continue;
            }
            const std::pair<int, int> pair = ordered(d.labels[at(sp)], d.labels[at(sn)]);
            std::size_t e = m;
            double len = 0.0;
            while (e + 1 < pl.points.size()) {
                const auto [np, nn] = pl.sides[e + 1];
                if (np < 0 || pl.grad_norm[e + 1] < t.grad_floor ||
                    ordered(d.labels[at(np)], d.labels[at(nn)]) != pair) {
                    break;
                }
                len += distance(pl.points[e], pl.points[e + 1]);
                ++e;
            }
            if (e > m) {
                runs[pair].push_back({static_cast<int>(p), m, e, len});
            }
            m = e + 1;
        }
    }

    const Field& field = *f.field;
    for (auto& [pair, list] : runs) {
        std::stable_sort(list.begin(), list.end(), [](const Run& a, const Run& b) { return a.length > b.length; });
        for (std::size_t r = 0; r < std::min<std::size_t>(list.size(), 4); ++r) {
            const Run& run = list[r];
            const Polyline& pl = d.polylines[at(run.polyline)];
            Witness w;
            w.polyline = run.polyline;
            w.min_grad = std::numeric_limits<double>::infinity();
            std::size_t seg = run.first;
            double walked = 0.0;
            bool ok = true;
            for (int s = 0; s < kWitnessSamples; ++s) {
                const double target = run.length * (s + 1.0) / (kWitnessSamples + 1.0);
                double seg_len = distance(pl.points[seg], pl.points[seg + 1]);
                while (walked + seg_len < target && seg + 1 < run.last) {
                    walked += seg_len;
                    ++seg;
                    seg_len = distance(pl.points[seg], pl.points[seg + 1]);
                }
                const double tau = seg_len > 0.0 ? std::clamp((target - walked) / seg_len, 0.0, 1.0) : 0.0;
                const Vec2 guess = pl.points[seg] + tau * (pl.points[seg + 1] - pl.points[seg]);
                const Vec2 x = project_to_zero(field, guess);
                if (distance(x, guess) > f.h || field.status(x) != PointStatus::InG) {
                    ok = false;
                    break;
                }
                w.samples.push_back(x);
                w.min_grad = std::min(w.min_grad, norm(field.eval(x).real_gradient()));
            }
            if (ok && w.min_grad >= t.grad_floor) {
                d.adjacency.push_back({pair.first, pair.second, std::move(w)});
                break;
            }
        }
    }
    return d;
}

std::vector<std::vector<int>> adjacency_components(const NodalDecomposition& d)
{
    const int n = static_cast<int>(d.domains.size());
    std::vector<int> parent(at(n));
    for (int i = 0; i < n; ++i) {
        parent[at(i)] = i;
    }
    auto find = [&](int x) {
        while (parent[at(x)] != x) {
            parent[at(x)] = parent[at(parent[at(x)])];
            x = parent[at(x)];
        }
        return x;
    };
    for (const Adjacency& a : d.adjacency) {
        if (a.witness.min_grad >= d.thresholds.grad_floor) {
            parent[at(find(a.a))] = find(a.b);
        }
    }
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) {
        groups[find(i)].push_back(i);
    }
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : groups) {
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> order_domains(const NodalDecomposition& d, int start)
{
    const int n = static_cast<int>(d.domains.size());
    if (start < 0 || start >= n) {
        throw Error(ErrorCode::InvalidInput, "start domain out of range");
    }
    std::vector<std::vector<int>> nbrs(at(n));
    for (const Adjacency& a : d.adjacency) {
        if (a.witness.min_grad >= d.thresholds.grad_floor) {
            nbrs[at(a.a)].push_back(a.b);
            nbrs[at(a.b)].push_back(a.a);
        }
    }
    for (auto& list : nbrs) {
        std::sort(list.begin(), list.end());
    }
    std::vector<bool> seen(at(n), false);
    std::vector<int> order{start};
    seen[at(start)] = true;
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (int b : nbrs[at(order[head])]) {
            if (!seen[at(b)]) {
                seen[at(b)] = true;
                order.push_back(b);
            }
        }
    }
    if (static_cast<int>(order.size()) != n) {
        const auto comps = adjacency_components(d);
        std::ostringstream msg;
        msg << comps.size() << " components; reached " << order.size() << " of " << n << " domains";
        throw Error(ErrorCode::DisconnectedAdjacency, msg.str());
    }
    return order;
}

bool ordering_valid(const NodalDecomposition& d, const std::vector<int>& ordering, double grad_floor)
{
    const std::size_t n = d.domains.size();
    if (ordering.size() != n) {
        return false;
    }
    std::vector<int> position(n, -1);
    for (std::size_t m = 0; m < n; ++m) {
        const int dom = ordering[m];
        if (dom < 0 || at(dom) >= n || position[at(dom)] >= 0) {
            return false;
        }
        position[at(dom)] = static_cast<int>(m);
    }
    for (std::size_t m = 1; m < n; ++m) {
        const int dom = ordering[m];
        const bool linked = std::any_of(d.adjacency.begin(), d.adjacency.end(), [&](const Adjacency& a) {
            if (a.witness.min_grad < grad_floor || a.witness.samples.size() < 5) {
                return false;
            }
            const int other = a.a == dom ? a.b : (a.b == dom ? a.a : -1);
            return other >= 0 && position[at(other)] < static_cast<int>(m);
        });
        if (!linked) {
            return false;
        }
    }
    return true;
}

namespace {
std::vector<FlatSegment> flat_search(const NodalDecomposition& d, double min_length, double dev_tol, bool restrict_to_u);
} // namespace

std::vector<FlatSegment> flat_points(const NodalDecomposition& d)
{
    return flat_points(d, d.thresholds.min_length, d.thresholds.dev_tol);
}

std::vector<FlatSegment> flat_points(const NodalDecomposition& d, double min_length, double dev_tol)
{
    return flat_search(d, min_length, dev_tol, d.field->complex_valued);
}

std::vector<FlatSegment> flat_points_of_v(const NodalDecomposition& d, double min_length, double dev_tol)
{
    return flat_search(d, min_length, dev_tol, false);
}

namespace {

std::vector<FlatSegment> flat_search(const NodalDecomposition& d, double min_length, double dev_tol, bool restrict_to_u)
{
    std::vector<FlatSegment> out;
    for (std::size_t p = 0; p < d.polylines.size(); ++p) {
        const Polyline& pl = d.polylines[p];
        std::size_t m = 0;
        while (m < pl.points.size()) {
            if (restrict_to_u && pl.im_abs[m] > d.thresholds.im_floor) {
                ++m;
                continue;
            }
            std::size_t end = m;
            while (end + 1 < pl.points.size() && !(restrict_to_u && pl.im_abs[end + 1] > d.thresholds.im_floor)) {
                ++end;
            }
            // Greedy maximal runs inside the admissible stretch [m, end].
            std::size_t i = m;
            while (i < end) {
                std::size_t j = i + 1;
                while (j < end && fit_line(pl.points, i, j + 1).deviation <= dev_tol) {
                    ++j;
                }
                double len = 0.0;
                for (std::size_t q = i; q < j; ++q) {
                    len += distance(pl.points[q], pl.points[q + 1]);
                }
                const Fit fit = fit_line(pl.points, i, j);
                if (len >= min_length && fit.deviation <= dev_tol) {
                    FlatSegment seg;
                    seg.line = geometry::make_line(fit.center, fit.direction);
                    double lo = std::numeric_limits<double>::infinity();
                    double hi = -lo;
                    for (std::size_t q = i; q <= j; ++q) {
                        const double t = dot(pl.points[q] - fit.center, fit.direction);
                        lo = std::min(lo, t);
                        hi = std::max(hi, t);
                    }
                    seg.extent = {lo, hi};
                    seg.max_deviation = fit.deviation;
                    seg.witness_point = pl.points[(i + j) / 2];
                    seg.polyline = static_cast<int>(p);
                    seg.first = static_cast<int>(i);
                    seg.last = static_cast<int>(j);
                    out.push_back(seg);
                    i = j;
                } else {
                    ++i;
                }
            }
            m = end + 1;
        }
    }
    return out;
}

} // namespace

std::vector<Vec2> complex_zeros(const SampledField& f)
{
    std::vector<Vec2> zeros;
    if (!f.complex_valued) {
        return zeros;
    }
    for (int j = 0; j + 1 < f.ny; ++j) {
        for (int i = 0; i + 1 < f.nx; ++i) {
            if (!cell_in_g(f, i, j)) {
                continue;
            }
            const std::array<int, 4> c{f.index(i, j), f.index(i + 1, j), f.index(i + 1, j + 1), f.index(i, j + 1)};
            std::array<Complex, 4> u{};
            for (std::size_t m = 0; m < 4; ++m) {
                u[m] = {f.v[at(c[m])], f.im[at(c[m])]};
            }
            if (winding(u) == 0) {
                continue;
            }
            const Vec2 center = f.point(i, j) + Vec2{0.5 * f.h, 0.5 * f.h};
            zeros.push_back(refine_zero(*f.field, center, f.h, f.max_abs_u));
        }
    }
    return zeros;
}

NodalBound nodal_bound(const SampledField& f, double min_radius)
{
    NodalBound b;
    b.zeros = complex_zeros(f);
    b.r_nodal = min_radius;
    for (Vec2 z : b.zeros) {
        b.r_nodal = std::max(b.r_nodal, norm(z));
    }
    b.annulus_inner = b.r_nodal + f.h;
    b.annulus_outer = 2.0 * b.r_nodal;
    if (b.annulus_outer <= b.annulus_inner) {
        return b;
    }
    const Field& field = *f.field;
    const int nr = static_cast<int>(std::ceil((b.annulus_outer - b.annulus_inner) / f.h));
    const int nt = static_cast<int>(std::ceil(2.0 * kPi * b.annulus_outer / f.h));
    const double dr = (b.annulus_outer - b.annulus_inner) / nr;
    std::vector<Complex> u(static_cast<std::size_t>((nr + 1) * nt));
    std::vector<bool> ok(u.size(), false);
    for (int a = 0; a <= nr; ++a) {
        const double r = b.annulus_inner + a * dr;
        for (int t = 0; t < nt; ++t) {
            const double th = 2.0 * kPi * t / nt;
            const Vec2 x{r * std::cos(th), r * std::sin(th)};
            const std::size_t idx = static_cast<std::size_t>(a * nt + t);
            if (field.status(x) == PointStatus::InG) {
                u[idx] = field.eval(x).value;
                ok[idx] = true;
            }
        }
    }
    for (int a = 0; a < nr; ++a) {
        for (int t = 0; t < nt; ++t) {
            const int t1 = (t + 1) % nt;
            const std::array<std::size_t, 4> c{static_cast<std::size_t>(a * nt + t),
                                               static_cast<std::size_t>(a * nt + t1),
                                               static_cast<std::size_t>((a + 1) * nt + t1),
                                               static_cast<std::size_t>((a + 1) * nt + t)};
            if (!(ok[c[0]] && ok[c[1]] && ok[c[2]] && ok[c[3]])) {
                continue;
            }
            ++b.annulus_cells;
            if (winding({u[c[0]], u[c[1]], u[c[2]], u[c[3]]}) != 0) {
                ++b.annulus_zeros;
            }
        }
    }
    return b;
}

} // namespace scatter::nodal
