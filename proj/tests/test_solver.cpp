#include "scatter/error.hpp"
#include "scatter/experiments.hpp"
#include "scatter/oracle.hpp"
#include "scatter/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace scatter;
using namespace scatter::solver;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

geometry::Scatterer square()
{
    return experiments::preset("square");
}

std::shared_ptr<const Density> solve_square(double k, Vec2 omega = {1, 0}, double ppw = 10)
{
    return std::make_shared<const Density>(solve_density(assemble(square(), make_wave(k, omega), ppw)));
}

double max_abs(const FarFieldPattern& p)
{
    double m = 0.0;
    for (const auto& v : p.values) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double max_diff(const FarFieldPattern& a, const FarFieldPattern& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    }
    return m;
}

Vec2 at_angle(double a)
{
    return {std::cos(a), std::sin(a)};
}

} // namespace

TEST_SUITE("solver")
{
    TEST_CASE("incident plane wave")
    {
        const auto w = make_wave(3.0, {1, 0});
        CHECK(incident_field(w, {0, 0}).value == Complex(1, 0));
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-10, 10);
        const auto tilted = make_wave(7.0, {0.6, 0.8});
        for (int i = 0; i < 100; ++i) {
            CHECK(std::abs(std::abs(incident_field(tilted, {u(rng), u(rng)}).value) - 1.0) <= 1e-14);
        }
        const Vec2 x{0.3, -1.2};
        const double s = 1e-6 / tilted.k;
        const auto f = incident_field(tilted, x);
        for (int c = 0; c < 2; ++c) {
            const Vec2 e = c == 0 ? Vec2{s, 0} : Vec2{0, s};
            const Complex fd = (incident_field(tilted, x + e).value - incident_field(tilted, x - e).value) / (2 * s);
            CHECK(std::abs(fd - f.gradient[c]) <= 1e-7 * std::abs(f.gradient[c]));
        }
        CHECK(std::abs(norm(make_wave(1.0, {3, 4}).omega) - 1.0) <= 1e-14);
    }

    TEST_CASE("assembly")
    {
        const auto sys = assemble(square(), make_wave(kTwoPi, {1, 0}), 10);
        CHECK(sys.size() >= 4 * 16);
        CHECK(sys.matrix.rows() == sys.matrix.cols());
        CHECK(static_cast<std::size_t>(sys.matrix.rows()) == sys.size());
        CHECK(sys.matrix.allFinite());
        CHECK(sys.eta == kTwoPi);
        for (std::size_t e = 0; e < 4; ++e) {
            int nodes = 0;
            for (const auto& p : sys.boundary.panels) {
                nodes += p.edge == static_cast<int>(e) ? kPanelOrder : 0;
            }
            CHECK(nodes >= 16);
        }
        const geometry::Scatterer cracked({geometry::make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}})},
                                          {geometry::make_free_cell({2, 0}, {3, 0})});
        try {
            assemble(cracked, make_wave(1.0, {1, 0}), 10);
            FAIL("expected FreeCellsUnsupported");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::FreeCellsUnsupported);
        }
        try {
            assemble(square(), make_wave(1.0, {1, 0}), 5);
            FAIL("expected ResolutionTooLow");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ResolutionTooLow);
        }
    }

    TEST_CASE("corner nodes are graded")
    {
        const auto disc = discretize(square(), kTwoPi, 10);
        double smallest = 1.0;
        double largest = 0.0;
        for (const auto& n : disc.nodes) {
            smallest = std::min(smallest, n.weight);
            largest = std::max(largest, n.weight);
        }
        CHECK(smallest < 1e-3 * largest);
    }

    TEST_CASE("solve residual, determinism and continuity in k")
    {
        auto sys = std::make_shared<const BoundarySystem>(assemble(square(), make_wave(kTwoPi, {1, 0}), 10));
        const auto a = solve_density(sys);
        const auto b = solve_density(sys);
        CHECK(a.residual <= 1e-10);
        CHECK(a.values == b.values);
        const auto c = solve_density(assemble(square(), make_wave(kTwoPi + 1e-3, {1, 0}), 10));
        REQUIRE(c.values.size() == a.values.size());
        CHECK((c.values - a.values).norm() / a.values.norm() <= 0.1);
    }

    TEST_CASE("disk against the modal series")
    {
        const double k = 2.0;
        const auto d = solve_density(assemble(Disk{{}, 1.0}, make_wave(k, {1, 0}), 20));
        const auto p = far_field(d, 64);
        const auto exact = oracle::disk_far_field(k, 1.0, {1, 0}, 64);
        CHECK(max_diff(p, exact) / max_abs(exact) <= 1e-6);
        const Vec2 x{3, 0};
        CHECK(std::abs(total_field(d, x).value - oracle::disk_total_field(k, 1.0, {1, 0}, x).value) <= 1e-8);
        const auto d10 = solve_density(assemble(Disk{{}, 1.0}, make_wave(k, {1, 0}), 10));
        CHECK(max_diff(far_field(d10, 64), p) / max_abs(p) <= 1e-6);
    }

    TEST_CASE("field gradient against finite differences")
    {
        const auto d = solve_square(kTwoPi);
        const Vec2 x{3, 1};
        const auto f = total_field(*d, x);
        const double s = 1e-6;
        for (int c = 0; c < 2; ++c) {
            const Vec2 e = c == 0 ? Vec2{s, 0} : Vec2{0, s};
            const Complex fd = (total_field(*d, x + e).value - total_field(*d, x - e).value) / (2 * s);
            CHECK(std::abs(fd - f.gradient[c]) <= 1e-6 * std::abs(f.gradient[c]));
        }
    }

    TEST_CASE("empty scatterer gives the incident field")
    {
        const auto d = solve_density(assemble(geometry::Scatterer{}, make_wave(3.0, {0, 1}), 10));
        const Vec2 x{0.4, 2.0};
        CHECK(total_field(d, x).value == incident_field(d.wave(), x).value);
        for (const auto& v : far_field(d, 64).values) {
            CHECK(v == Complex(0, 0));
        }
    }

    TEST_CASE("evaluation guards")
    {
        const auto d = solve_square(kTwoPi);
        CHECK_THROWS_AS(total_field(*d, {0, 0}), Error);
        CHECK_THROWS_AS(total_field(*d, {0.5 + 1e-9, 0}), Error);
        const ScatteringField f(d);
        CHECK(f.status({0, 0}) == PointStatus::InD);
        CHECK(f.status({0.5 + 1e-9, 0}) == PointStatus::NearBoundary);
        CHECK(f.status({2, 0}) == PointStatus::InG);
    }

    TEST_CASE("boundary trace decays linearly")
    {
        const auto d = solve_square(kTwoPi);
        const auto probes = trace_probes(*d, 3);
        const double t1 = boundary_trace_check(*d, probes, 1e-2);
        const double t2 = boundary_trace_check(*d, probes, 5e-3);
        double grad = 0.0;
        for (const auto& p : probes) {
            const auto g = total_field(*d, p.boundary_point + 1e-2 * p.normal).gradient;
            grad = std::max(grad, std::hypot(std::abs(g[0]), std::abs(g[1])));
        }
        CHECK(t1 <= 10 * grad * 1e-2);
        CHECK(t2 / t1 >= 0.3);
        CHECK(t2 / t1 <= 0.7);
        CHECK(boundary_trace_check(*d, probes, 1.0) >= 0.1);
    }

    TEST_CASE("reciprocity on the square")
    {
        const double k = kTwoPi;
        std::vector<std::shared_ptr<const Density>> ds;
        std::vector<Vec2> dirs;
        for (int i = 0; i < 5; ++i) {
            dirs.push_back(at_angle(0.3 + kTwoPi * i / 5));
            ds.push_back(solve_square(k, dirs.back()));
        }
        const double scale = max_abs(far_field(*ds[0], 64));
        int pairs = 0;
        for (int i = 0; i < 5; ++i) {
            for (int j = i + 1; j < 5 && pairs < 8; ++j, ++pairs) {
                const Complex a = far_field_at(*ds[i], -dirs[j]);
                const Complex b = far_field_at(*ds[j], -dirs[i]);
                CHECK(std::abs(a - b) <= 1e-6 * scale);
            }
        }
        CHECK(pairs == 8);
    }

    TEST_CASE("radial limit")
    {
        const double k = kTwoPi;
        const auto d = solve_square(k);
        const double peak = max_abs(far_field(*d, 64));
        std::vector<double> spread;
        for (int m = 0; m < 16; ++m) {
            const Vec2 xhat = at_angle(kTwoPi * m / 16);
            const auto e = radial_limit_check(*d, xhat, {50 / k, 100 / k, 1000 / k});
            CHECK(e[1] / e[0] >= 0.35);
            CHECK(e[1] / e[0] <= 0.65);
            CHECK(e[2] / e[1] >= 0.07);
            CHECK(e[2] / e[1] <= 0.13);
            CHECK(e[2] <= 1e-2 * peak);
            spread.push_back(e[1]);
        }
        const auto [lo, hi] = std::minmax_element(spread.begin(), spread.end());
        CHECK(*hi / *lo <= 10.0);
    }

    TEST_CASE("outgoing radiation")
    {
        const double k = kTwoPi;
        const auto d = solve_square(k);
        const double r = 200 / k;
        for (int m = 0; m < 8; ++m) {
            const Vec2 xhat = at_angle(kTwoPi * m / 8 + 0.1);
            const auto us = scattered_field(*d, r * xhat);
            const Complex dr = us.gradient[0] * xhat.x + us.gradient[1] * xhat.y;
            CHECK(std::abs(dr - Complex(0, k) * us.value) <= 1e-2 * k * std::abs(us.value));
        }
    }

    TEST_CASE("far modulus deviation follows the far-field amplitude")
    {
        for (double k : {std::numbers::pi, kTwoPi}) {
            const auto d = solve_square(k);
            const double r = 500 / k;
            double dev = 0.0;
            for (int m = 0; m < 32; ++m) {
                dev = std::max(dev, std::abs(std::abs(total_field(*d, r * at_angle(kTwoPi * m / 32)).value) - 1.0));
            }
            const double predicted = max_abs(far_field(*d, 256)) / std::sqrt(r);
            CAPTURE(k);
            CHECK(dev <= 1.05 * predicted);
            CHECK(dev >= 0.8 * predicted);
        }
    }

    TEST_CASE("self-convergence in the resolution")
    {
        const double k = 6.0 / std::sqrt(0.5);
        const auto p10 = far_field(*solve_square(k, {1, 0}, 10), 64);
        const auto p20 = far_field(*solve_square(k, {1, 0}, 20), 64);
        const auto p40 = far_field(*solve_square(k, {1, 0}, 40), 64);
        const double d1 = max_diff(p10, p20);
        const double d2 = max_diff(p20, p40);
        CHECK(d1 <= 1e-6 * max_abs(p40));
        CHECK(d2 <= 0.3 * d1);
    }
}
