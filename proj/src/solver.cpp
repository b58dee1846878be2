#include "scatter/solver.hpp"

#include "scatter/error.hpp"
#include "scatter/quadrature.hpp"
#include "scatter/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

namespace scatter::solver {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};
constexpr double kAdaptiveTol = 1e-12;

// Grading map w(s) = s^q / (s^q + (1-s)^q) on [0, 1] and its first two derivatives.
struct Grading {
    double w, d1, d2;
};

Grading grade(int q, double s)
{
    if (q <= 1) {
        return {s, 1.0, 0.0};
    }
    const double u = 1.0 - s;
    double s2 = 1.0;  // s^(q-2)
    double u2 = 1.0;
    for (int i = 2; i < q; ++i) {
        s2 *= s;
        u2 *= u;
    }
    const double f = s2 * s * s;
    const double g = u2 * u * u;
    const double f1 = q * s2 * s;
    const double g1 = -q * u2 * u;
    const double f2 = q * (q - 1) * s2;
    const double g2 = q * (q - 1) * u2;
    const double den = f + g;
    const double num = f1 * g - f * g1;
    const double num1 = f2 * g - f * g2;
    const double den1 = f1 + g1;
    return {f / den, num / (den * den), (num1 * den - 2.0 * num * den1) / (den * den * den)};
}

double inverse_grading(int q, double t)
{
    if (q <= 1) {
        return t;
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (grade(q, mid).w < t ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct Kernel {
    Complex value;
    Complex gx, gy;
};

// Combined kernel dG/dn_y - i eta G with G = (i/4) H_0(k|x-y|) at offset d = x - y;
// gradient in x on request.
Kernel kernel_at(Vec2 d, Vec2 n, double k, double eta, bool with_gradient)
{
    const double r = norm(d);
    const auto h = specfun::hankel01(k * r);
    const double dn = dot(d, n);
    const Complex slp = 0.25 * kI * h.h0;
    const Complex dlp = 0.25 * kI * k * h.h1 * dn / r;
    Kernel out{dlp - kI * eta * slp, {}, {}};
    if (with_gradient) {
        const Complex gs = -0.25 * kI * k * h.h1 / r;  // times d
        const Complex radial = (k * h.h0 - 2.0 * h.h1 / r) * dn / (r * r);
        const Complex gd_d = 0.25 * kI * k * radial;  // times d
        const Complex gd_n = 0.25 * kI * k * h.h1 / r;  // times n
        out.gx = gd_d * d.x + gd_n * n.x - kI * eta * gs * d.x;
        out.gy = gd_d * d.y + gd_n * n.y - kI * eta * gs * d.y;
    }
    return out;
}

Kernel combined_kernel(Vec2 x, Vec2 y, Vec2 n, double k, double eta, bool with_gradient)
{
    return kernel_at(x - y, n, k, eta, with_gradient);
}

// Combined kernel at offset d split as A log r + smooth, returning {kernel, A}.
std::pair<Complex, Complex> split_kernel(Vec2 d, Vec2 n, double k, double eta)
{
    const double r = norm(d);
    const auto h = specfun::hankel01(k * r);
    const double dn = dot(d, n) / r;
    const Complex value = 0.25 * kI * k * h.h1 * dn - kI * eta * 0.25 * kI * h.h0;
    const double a_slp = -h.h0.real() / (2.0 * kPi);
    const double a_dlp = -(k / (2.0 * kPi)) * h.h1.real() * dn;
    return {value, a_dlp - kI * eta * a_slp};
}

struct CurveSample {
    Vec2 pos, normal;
    double speed;
};

CurveSample sample_curve(const EdgeCurve& e, double s)
{
    const auto p = e.eval(s);
    const double speed = norm(p.d1);
    return {p.pos, -perp(p.d1) / speed, speed};
}

int panels_for(double length, double k, double ppw, double oversample)
{
    const double lambda = 2.0 * kPi / k;
    const double n = oversample * ppw * length / (lambda * kPanelOrder);
    return std::max(kMinPanelsPerEdge, static_cast<int>(std::ceil(n - 1e-12)));
}

void build_panels(Discretization& disc, double k, double ppw)
{
    const auto& rule = quadrature::gauss_legendre(kPanelOrder);
    for (std::size_t e = 0; e < disc.edges.size(); ++e) {
        const EdgeCurve& edge = disc.edges[e];
        const double oversample = edge.grading > 1 ? 2.0 * edge.grading : 2.0;
        const int np = panels_for(edge.length(), k, ppw, oversample);
        std::vector<double> breaks;
        for (int p = 0; p <= np; ++p) {
            breaks.push_back(static_cast<double>(p) / np);
        }
        for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
            Panel panel;
            panel.edge = static_cast<int>(e);
            panel.s0 = breaks[p];
            panel.s1 = breaks[p + 1];
            panel.first = static_cast<int>(disc.nodes.size());
            const double half = 0.5 * (panel.s1 - panel.s0);
            const double mid = 0.5 * (panel.s1 + panel.s0);
            double length = 0.0;
            std::vector<Vec2> pts{edge.eval(panel.s0).pos, edge.eval(panel.s1).pos};
            for (int q = 0; q < kPanelOrder; ++q) {
                const double s = mid + half * rule.nodes[static_cast<std::size_t>(q)];
                const auto c = edge.eval(s);
                const double speed = norm(c.d1);
                Node node;
                node.pos = c.pos;
                node.normal = -perp(c.d1) / speed;
                node.speed = speed;
                node.weight = half * rule.weights[static_cast<std::size_t>(q)] * speed;
                node.s = s;
                node.second_normal = dot(c.d2, node.normal) / (speed * speed);
                node.panel = static_cast<int>(disc.panels.size());
                length += node.weight;
                pts.push_back(c.pos);
                disc.nodes.push_back(node);
            }
            panel.length = length;
            Vec2 c;
            for (const Vec2 q : pts) {
                c += q;
            }
            c = c / static_cast<double>(pts.size());
            double rad = 0.0;
            for (const Vec2 q : pts) {
                rad = std::max(rad, distance(q, c));
            }
            panel.center = c;
            panel.radius = rad;
            disc.panels.push_back(panel);
        }
    }
}

void check_resolution(double k, double ppw)
{
    if (!(k > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "wavenumber must be positive");
    }
    if (!(ppw >= kMinNodesPerWavelength)) {
        throw Error(ErrorCode::ResolutionTooLow, "nodes per wavelength must be >= 6");
    }
}

bool is_near(const Panel& p, Vec2 x) { return distance(x, p.center) < p.radius + p.length; }

// Weights of the panel's nodes for the integral of the combined kernel against the
// interpolated phi * sqrt(speed), target x off the panel.
std::vector<Complex> near_weights(const Discretization& disc, const Panel& panel,
                                  const std::function<Vec2(double)>& offset, double k, double eta)
{
    const auto& rule = quadrature::gauss_legendre(kPanelOrder);
    static const quadrature::LagrangeBasis basis(rule.nodes);
    const EdgeCurve& edge = disc.edges[static_cast<std::size_t>(panel.edge)];
    const double half = 0.5 * (panel.s1 - panel.s0);
    const double mid = 0.5 * (panel.s1 + panel.s0);
    std::vector<double> l(kPanelOrder);
    auto f = [&](double s, std::span<Complex> out) {
        const auto c = sample_curve(edge, s);
        const Complex kv = kernel_at(offset(s), c.normal, k, eta, false).value * std::sqrt(c.speed);
        basis.evaluate((s - mid) / half, l);
        for (int j = 0; j < kPanelOrder; ++j) {
            out[static_cast<std::size_t>(j)] = kv * l[static_cast<std::size_t>(j)];
        }
    };
    auto w = quadrature::integrate_adaptive(f, kPanelOrder, panel.s0, panel.s1, kAdaptiveTol);
    for (int j = 0; j < kPanelOrder; ++j) {
        w[static_cast<std::size_t>(j)] *= std::sqrt(disc.nodes[static_cast<std::size_t>(panel.first + j)].speed);
    }
    return w;
}

// y(to) - y(from) along one edge, exact in the grading parameter for straight edges so
// that points clustered at a corner keep their relative offsets.
Vec2 chord(const EdgeCurve& e, double from, double to)
{
    if (e.kind == EdgeCurve::Kind::Straight) {
        return (grade(e.grading, to).w - grade(e.grading, from).w) * (e.b - e.a);
    }
    return e.eval(to).pos - e.eval(from).pos;
}

bool touches_corner(const EdgeCurve& e, const Panel& p)
{
    return e.kind == EdgeCurve::Kind::Straight && e.grading > 1 && (p.s0 <= 0.0 || p.s1 >= 1.0);
}

// y(s) minus the start (or end) vertex of a straight edge, exact near that vertex.
Vec2 from_vertex(const EdgeCurve& e, double s, bool start)
{
    const Vec2 ab = e.b - e.a;
    return start ? grade(e.grading, s).w * ab : -grade(e.grading, 1.0 - s).w * ab;
}

// x - y(s) for a boundary target x = y_te(ts) and a source on edge se. Points on edges
// meeting at a vertex are differenced relative to that vertex.
Vec2 boundary_offset(const Discretization& disc, int te, double ts, int se, double s)
{
    const EdgeCurve& et = disc.edges[static_cast<std::size_t>(te)];
    const EdgeCurve& es = disc.edges[static_cast<std::size_t>(se)];
    if (te == se) {
        return chord(et, s, ts);
    }
    if (et.kind == EdgeCurve::Kind::Straight && es.kind == EdgeCurve::Kind::Straight) {
        if (et.b == es.a) {
            return from_vertex(et, ts, false) - from_vertex(es, s, true);
        }
        if (et.a == es.b) {
            return from_vertex(et, ts, true) - from_vertex(es, s, false);
        }
    }
    return et.eval(ts).pos - es.eval(s).pos;
}

// Self-panel weights by adaptive quadrature on both sides of the target, with s - s*
// proportional to u^4 to flatten the log singularity. Used on panels at a graded corner,
// where log(|y(s) - y(s*)| / |s - s*|) is far from polynomial.
std::vector<Complex> self_weights_adaptive(const Discretization& disc, const Panel& panel, int local,
                                           double k, double eta)
{
    const auto& rule = quadrature::gauss_legendre(kPanelOrder);
    static const quadrature::LagrangeBasis basis(rule.nodes);
    const EdgeCurve& edge = disc.edges[static_cast<std::size_t>(panel.edge)];
    const double half = 0.5 * (panel.s1 - panel.s0);
    const double mid = 0.5 * (panel.s1 + panel.s0);
    const double target = disc.nodes[static_cast<std::size_t>(panel.first + local)].s;
    std::vector<double> l(kPanelOrder);
    std::vector<Complex> w(kPanelOrder);
    for (const double end : {panel.s0, panel.s1}) {
        const double span = end - target;
        auto f = [&](double u, std::span<Complex> out) {
            const double u3 = u * u * u;
            const double s = target + span * u3 * u;
            const Vec2 d = -chord(edge, target, s);
            if (d == Vec2{}) {
                std::fill(out.begin(), out.end(), Complex{});
                return;
            }
            const auto c = sample_curve(edge, s);
            const Complex kv = kernel_at(d, c.normal, k, eta, false).value * std::sqrt(c.speed);
            basis.evaluate((s - mid) / half, l);
            const double jac = 4.0 * u3 * std::abs(span);
            for (int j = 0; j < kPanelOrder; ++j) {
                out[static_cast<std::size_t>(j)] = kv * jac * l[static_cast<std::size_t>(j)];
            }
        };
        const auto part = quadrature::integrate_adaptive(f, kPanelOrder, 0.0, 1.0, kAdaptiveTol);
        for (int j = 0; j < kPanelOrder; ++j) {
            w[static_cast<std::size_t>(j)] += part[static_cast<std::size_t>(j)];
        }
    }
    for (int j = 0; j < kPanelOrder; ++j) {
        w[static_cast<std::size_t>(j)] *= std::sqrt(disc.nodes[static_cast<std::size_t>(panel.first + j)].speed);
    }
    return w;
}

// Product-integration weights for a target node on the panel itself.
std::vector<Complex> self_weights(const Discretization& disc, const Panel& panel, int local, double k,
                                  double eta)
{
    const auto& rule = quadrature::gauss_legendre(kPanelOrder);
    static const auto log_table = [&] {
        std::vector<std::vector<double>> t;
        for (int i = 0; i < kPanelOrder; ++i) {
            t.push_back(quadrature::log_weights(rule, rule.nodes[static_cast<std::size_t>(i)]));
        }
        return t;
    }();
    const auto& lw = log_table[static_cast<std::size_t>(local)];
    const double half = 0.5 * (panel.s1 - panel.s0);
    const double log_half = std::log(half);
    const Node& target = disc.nodes[static_cast<std::size_t>(panel.first + local)];

    std::vector<Complex> w(kPanelOrder);
    for (int j = 0; j < kPanelOrder; ++j) {
        const Node& src = disc.nodes[static_cast<std::size_t>(panel.first + j)];
        Complex a;
        Complex b;
        if (j == local) {
            a = kI * eta / (2.0 * kPi);
            const Complex b_slp = 0.25 * kI - (std::log(0.5 * k) + specfun::kEulerGamma) / (2.0 * kPi) -
                                  std::log(src.speed) / (2.0 * kPi);
            const double b_dlp = src.second_normal / (4.0 * kPi);
            b = b_dlp - kI * eta * b_slp;
        } else {
            const auto [kv, coeff] = split_kernel(chord(disc.edges[static_cast<std::size_t>(panel.edge)], src.s, target.s), src.normal, k, eta);
            a = coeff;
            b = kv - a * std::log(std::abs(src.s - target.s));
        }
        const double g = rule.weights[static_cast<std::size_t>(j)];
        w[static_cast<std::size_t>(j)] =
            half * src.speed * ((a * log_half + b) * g + a * lw[static_cast<std::size_t>(j)]);
    }
    return w;
}

// Layer potential (D - i eta S) phi and its gradient at an exterior point.
FieldValue layer_potential(const Density& d, Vec2 x)
{
    const auto& sys = *d.system;
    const auto& disc = sys.boundary;
    const double k = sys.wave.k;
    const double eta = sys.eta;
    const auto& rule = quadrature::gauss_legendre(kPanelOrder);
    static const quadrature::LagrangeBasis basis(rule.nodes);

    FieldValue out{};
    std::vector<double> l(kPanelOrder);
    for (const Panel& panel : disc.panels) {
        if (!is_near(panel, x)) {
            for (int j = 0; j < kPanelOrder; ++j) {
                const auto idx = static_cast<std::size_t>(panel.first + j);
                const Node& n = disc.nodes[idx];
                const auto kv = combined_kernel(x, n.pos, n.normal, k, eta, true);
                const Complex m = d.values[static_cast<Eigen::Index>(idx)] * n.weight;
                out.value += kv.value * m;
                out.gradient[0] += kv.gx * m;
                out.gradient[1] += kv.gy * m;
            }
            continue;
        }
        const EdgeCurve& edge = disc.edges[static_cast<std::size_t>(panel.edge)];
        const double half = 0.5 * (panel.s1 - panel.s0);
        const double mid = 0.5 * (panel.s1 + panel.s0);
        std::array<Complex, kPanelOrder> mu{};
        for (int j = 0; j < kPanelOrder; ++j) {
            const auto idx = static_cast<std::size_t>(panel.first + j);
            mu[static_cast<std::size_t>(j)] = d.values[static_cast<Eigen::Index>(idx)] * std::sqrt(disc.nodes[idx].speed);
        }
        auto f = [&](double s, std::span<Complex> o) {
            const auto c = sample_curve(edge, s);
            const auto kv = combined_kernel(x, c.pos, c.normal, k, eta, true);
            basis.evaluate((s - mid) / half, l);
            Complex m;
            for (int j = 0; j < kPanelOrder; ++j) {
                m += mu[static_cast<std::size_t>(j)] * l[static_cast<std::size_t>(j)];
            }
            m *= std::sqrt(c.speed);
            o[0] = kv.value * m;
            o[1] = kv.gx * m;
            o[2] = kv.gy * m;
        };
        const auto v = quadrature::integrate_adaptive(f, 3, panel.s0, panel.s1, kAdaptiveTol);
        out.value += v[0];
        out.gradient[0] += v[1];
        out.gradient[1] += v[2];
    }
    return out;
}

} // namespace

WaveParams make_wave(double k, Vec2 omega)
{
    if (!(k > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "wavenumber must be positive");
    }
    const double n = norm(omega);
    if (!(n > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "incident direction must be nonzero");
    }
    return WaveParams{k, omega / n};
}

EdgeCurve::Point EdgeCurve::eval(double s) const
{
    if (kind == Kind::Straight) {
        const auto g = grade(grading, s);
        const Vec2 ab = b - a;
        return {a + g.w * ab, g.d1 * ab, g.d2 * ab};
    }
    const double span = theta1 - theta0;
    const double th = theta0 + s * span;
    const Vec2 e{std::cos(th), std::sin(th)};
    return {center + radius * e, radius * span * perp(e), -radius * span * span * e};
}

double EdgeCurve::length() const
{
    if (kind == Kind::Straight) {
        return distance(a, b);
    }
    return radius * std::abs(theta1 - theta0);
}

double EdgeCurve::nearest_parameter(Vec2 x) const
{
    if (kind == Kind::Straight) {
        const Vec2 ab = b - a;
        const double t = std::clamp(dot(x - a, ab) / dot(ab, ab), 0.0, 1.0);
        return inverse_grading(grading, t);
    }
    const double span = theta1 - theta0;
    double th = std::atan2(x.y - center.y, x.x - center.x) - theta0;
    const double turn = 2.0 * kPi;
    th = std::fmod(th, turn);
    if (th < 0.0) {
        th += turn;
    }
    if (std::abs(span) >= turn - 1e-12) {
        return th / turn;
    }
    return std::clamp(th / span, 0.0, 1.0);
}

bool Discretization::inside(Vec2 x) const
{
    if (const auto* s = std::get_if<geometry::Scatterer>(&shape)) {
        return geometry::classify_point(*s, x, 0.0) == geometry::PointClass::Interior;
    }
    const auto& disk = std::get<Disk>(shape);
    return distance(x, disk.center) < disk.radius;
}

double Discretization::distance_to_boundary(Vec2 x) const
{
    if (const auto* s = std::get_if<geometry::Scatterer>(&shape)) {
        return geometry::distance_to_boundary(*s, x);
    }
    const auto& disk = std::get<Disk>(shape);
    return std::abs(distance(x, disk.center) - disk.radius);
}

double Discretization::local_panel_length(Vec2 x) const
{
    double best = std::numeric_limits<double>::infinity();
    double length = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const double s = edges[e].nearest_parameter(x);
        const double dist = distance(edges[e].eval(s).pos, x);
        if (dist < best) {
            best = dist;
            for (const Panel& p : panels) {
                if (p.edge == static_cast<int>(e) && s >= p.s0 && s <= p.s1) {
                    length = p.length;
                    break;
                }
            }
        }
    }
    return length;
}

double Discretization::bounding_radius() const
{
    if (const auto* s = std::get_if<geometry::Scatterer>(&shape)) {
        return s->bounding_radius();
    }
    const auto& disk = std::get<Disk>(shape);
    return norm(disk.center) + disk.radius;
}

Discretization discretize(const geometry::Scatterer& s, double k, double nodes_per_wavelength)
{
    if (!s.free_cells().empty()) {
        throw Error(ErrorCode::FreeCellsUnsupported, "crack-type cells need a different formulation");
    }
    check_resolution(k, nodes_per_wavelength);
    Discretization disc;
    disc.shape = s;
    for (const auto& poly : s.polygons()) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto [a, b] = poly.edge(i);
            EdgeCurve e;
            e.kind = EdgeCurve::Kind::Straight;
            e.a = a;
            e.b = b;
            e.grading = kGradingExponent;
            disc.edges.push_back(e);
        }
    }
    build_panels(disc, k, nodes_per_wavelength);
    return disc;
}

Discretization discretize(const Disk& disk, double k, double nodes_per_wavelength)
{
    check_resolution(k, nodes_per_wavelength);
    if (!(disk.radius > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "disk radius must be positive");
    }
    Discretization disc;
    disc.shape = disk;
    EdgeCurve e;
    e.kind = EdgeCurve::Kind::Arc;
    e.center = disk.center;
    e.radius = disk.radius;
    e.theta0 = 0.0;
    e.theta1 = 2.0 * kPi;
    disc.edges.push_back(e);
    build_panels(disc, k, nodes_per_wavelength);
    return disc;
}

BoundarySystem assemble(Discretization boundary, const WaveParams& wave, double nodes_per_wavelength)
{
    BoundarySystem sys;
    sys.boundary = std::move(boundary);
    sys.wave = wave;
    sys.eta = wave.k;
    sys.nodes_per_wavelength = nodes_per_wavelength;
    const auto& disc = sys.boundary;
    const auto n = static_cast<Eigen::Index>(disc.nodes.size());
    const double k = wave.k;
    const double eta = sys.eta;
    sys.matrix = Eigen::MatrixXcd::Zero(n, n);
    sys.rhs.resize(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        const Node& target = disc.nodes[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < disc.panels.size(); ++p) {
            const Panel& panel = disc.panels[p];
            if (static_cast<int>(p) == target.panel) {
                const int local = static_cast<int>(i) - panel.first;
                const auto w = touches_corner(disc.edges[static_cast<std::size_t>(panel.edge)], panel)
                                   ? self_weights_adaptive(disc, panel, local, k, eta)
                                   : self_weights(disc, panel, local, k, eta);
                for (int j = 0; j < kPanelOrder; ++j) {
                    sys.matrix(i, panel.first + j) += w[static_cast<std::size_t>(j)];
                }
            } else if (is_near(panel, target.pos)) {
                const int te = disc.panels[static_cast<std::size_t>(target.panel)].edge;
                const auto w = near_weights(
                    disc, panel, [&](double s) { return boundary_offset(disc, te, target.s, panel.edge, s); },
                    k, eta);
                for (int j = 0; j < kPanelOrder; ++j) {
                    sys.matrix(i, panel.first + j) += w[static_cast<std::size_t>(j)];
                }
            } else {
                for (int j = 0; j < kPanelOrder; ++j) {
                    const Node& src = disc.nodes[static_cast<std::size_t>(panel.first + j)];
                    sys.matrix(i, panel.first + j) +=
                        combined_kernel(target.pos, src.pos, src.normal, k, eta, false).value * src.weight;
                }
            }
        }
        sys.matrix(i, i) += 0.5;
        sys.rhs(i) = -incident_field(wave, target.pos).value;
    }
    return sys;
}

BoundarySystem assemble(const geometry::Scatterer& s, const WaveParams& wave, double nodes_per_wavelength)
{
    return assemble(discretize(s, wave.k, nodes_per_wavelength), wave, nodes_per_wavelength);
}

BoundarySystem assemble(const Disk& disk, const WaveParams& wave, double nodes_per_wavelength)
{
    return assemble(discretize(disk, wave.k, nodes_per_wavelength), wave, nodes_per_wavelength);
}

Density solve_density(std::shared_ptr<const BoundarySystem> system)
{
    Density d;
    d.system = std::move(system);
    const auto& sys = *d.system;
    if (sys.size() == 0) {
        d.values.resize(0);
        d.condition = 1.0;
        return d;
    }
    // Graded corners give tiny weights; solve for sqrt(w) phi so the columns balance.
    Eigen::VectorXd scale(static_cast<Eigen::Index>(sys.size()));
    for (Eigen::Index i = 0; i < scale.size(); ++i) {
        scale(i) = std::sqrt(sys.boundary.nodes[static_cast<std::size_t>(i)].weight);
    }
    const Eigen::MatrixXcd balanced = scale.asDiagonal() * sys.matrix * scale.cwiseInverse().asDiagonal();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(balanced);
    d.values = scale.cwiseInverse().asDiagonal() * lu.solve(scale.asDiagonal() * sys.rhs);
    const double rcond = lu.rcond();
    d.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    d.residual = (sys.matrix * d.values - sys.rhs).norm() / sys.rhs.norm();
    if (!d.values.allFinite() || !(d.residual <= 1e-10) || rcond < 1e-14) {
        std::ostringstream msg;
        msg << "residual " << d.residual << ", condition estimate " << d.condition;
        throw Error(ErrorCode::SingularSystem, msg.str());
    }
    return d;
}

Density solve_density(BoundarySystem system)
{
    return solve_density(std::make_shared<const BoundarySystem>(std::move(system)));
}

FieldValue incident_field(const WaveParams& w, Vec2 x)
{
    const Complex e = std::exp(kI * w.k * dot(w.omega, x));
    return {e, {kI * w.k * w.omega.x * e, kI * w.k * w.omega.y * e}};
}

double near_guard(const Density& d, Vec2 x)
{
    return kNearGuardFraction * d.system->boundary.local_panel_length(x);
}

FieldValue scattered_field(const Density& d, Vec2 x)
{
    const auto& disc = d.system->boundary;
    if (disc.nodes.empty()) {
        return {};
    }
    if (disc.inside(x)) {
        throw Error(ErrorCode::PointInsideScatterer, "evaluation point lies in the obstacle");
    }
    if (disc.distance_to_boundary(x) < near_guard(d, x)) {
        throw Error(ErrorCode::TooCloseToBoundary, "evaluation point closer than the near guard");
    }
    return layer_potential(d, x);
}

FieldValue total_field(const Density& d, Vec2 x)
{
    FieldValue u = scattered_field(d, x);
    const FieldValue inc = incident_field(d.wave(), x);
    u.value += inc.value;
    u.gradient[0] += inc.gradient[0];
    u.gradient[1] += inc.gradient[1];
    return u;
}

double FarFieldPattern::angle(std::size_t m) const
{
    return std::atan2(directions[m].y, directions[m].x);
}

Complex far_field_constant(double k)
{
    return std::exp(kI * (kPi / 4.0)) / std::sqrt(8.0 * kPi * k);
}

Complex far_field_at(const Density& d, Vec2 xhat)
{
    const auto& sys = *d.system;
    const double k = sys.wave.k;
    Complex acc;
    for (std::size_t j = 0; j < sys.boundary.nodes.size(); ++j) {
        const Node& n = sys.boundary.nodes[j];
        const Complex kernel = (-kI * k * dot(xhat, n.normal) - kI * sys.eta) *
                               std::exp(-kI * k * dot(xhat, n.pos));
        acc += kernel * d.values[static_cast<Eigen::Index>(j)] * n.weight;
    }
    return far_field_constant(k) * acc;
}

FarFieldPattern far_field(const Density& d, int directions)
{
    if (directions < 64) {
        throw Error(ErrorCode::InvalidInput, "far-field pattern needs at least 64 directions");
    }
    FarFieldPattern f;
    f.wave = d.wave();
    for (int m = 0; m < directions; ++m) {
        const double th = 2.0 * kPi * m / directions;
        const Vec2 xhat{std::cos(th), std::sin(th)};
        f.directions.push_back(xhat);
        f.values.push_back(far_field_at(d, xhat));
    }
    return f;
}

std::vector<TraceProbe> trace_probes(const Density& d, int per_edge)
{
    std::vector<TraceProbe> probes;
    for (const EdgeCurve& e : d.system->boundary.edges) {
        for (int m = 0; m < per_edge; ++m) {
            const double frac = per_edge == 1 ? 0.5 : 0.2 + 0.6 * m / (per_edge - 1);
            double s = frac;
            if (e.kind == EdgeCurve::Kind::Straight) {
                s = inverse_grading(e.grading, frac);
            }
            const auto c = sample_curve(e, s);
            probes.push_back({c.pos, c.normal});
        }
    }
    return probes;
}

double boundary_trace_check(const Density& d, const std::vector<TraceProbe>& probes, double delta)
{
    double worst = 0.0;
    for (const auto& p : probes) {
        worst = std::max(worst, std::abs(total_field(d, p.boundary_point + delta * p.normal).value));
    }
    return worst;
}

std::vector<double> radial_limit_check(const Density& d, Vec2 xhat, const std::vector<double>& radii)
{
    const double k = d.wave().k;
    const Complex uinf = far_field_at(d, xhat);
    std::vector<double> errors;
    for (const double r : radii) {
        const Complex us = scattered_field(d, r * xhat).value;
        errors.push_back(std::abs(std::sqrt(r) * std::exp(-kI * k * r) * us - uinf));
    }
    return errors;
}

PointStatus ScatteringField::status(Vec2 x) const
{
    const auto& disc = density_->system->boundary;
    if (disc.nodes.empty()) {
        return PointStatus::InG;
    }
    if (disc.inside(x)) {
        return PointStatus::InD;
    }
    if (disc.distance_to_boundary(x) < near_guard(*density_, x)) {
        return PointStatus::NearBoundary;
    }
    return PointStatus::InG;
}

} // namespace scatter::solver
