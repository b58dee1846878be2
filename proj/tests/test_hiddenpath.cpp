#include "scatter/error.hpp"
#include "scatter/experiments.hpp"
#include "scatter/hiddenpath.hpp"
#include "scatter/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace scatter;
using namespace scatter::hiddenpath;

namespace {

constexpr double kPi = std::numbers::pi;

struct Synthetic {
    std::shared_ptr<const nodal::SampledField> field;
    nodal::NodalDecomposition d;
};

Synthetic synthetic(const oracle::SyntheticField& f, double half, double h)
{
    auto sf = std::make_shared<const nodal::SampledField>(
        nodal::sample_field(std::make_shared<oracle::SyntheticAdapter>(f), {}, nodal::square_window(half), h));
    return {sf, nodal::nodal_domains(sf)};
}

Synthetic strips()
{
    return synthetic(oracle::plane_standing(kPi, {1, 0}), 3, 0.05);
}

// (u(x) - u(Rx)) / 2 for a reflection R.
class OddPart final : public Field {
public:
    OddPart(oracle::SyntheticField f, geometry::Line l) : f_(std::move(f)), l_(l) {}

    [[nodiscard]] FieldValue eval(Vec2 x) const override
    {
        const auto a = oracle::synthetic_eval(f_, x);
        const auto b = oracle::synthetic_eval(f_, geometry::reflect(x, l_));
        const Vec2 n = l_.normal();
        const Vec2 gb = b.gradient - 2 * dot(b.gradient, n) * n;
        const Vec2 g = 0.5 * (a.gradient - gb);
        return {Complex(0.5 * (a.value - b.value), 0), {Complex(g.x, 0), Complex(g.y, 0)}};
    }
    [[nodiscard]] PointStatus status(Vec2) const override { return PointStatus::InG; }
    [[nodiscard]] double wavenumber() const override { return f_.k; }
    [[nodiscard]] bool complex_valued() const override { return false; }

private:
    oracle::SyntheticField f_;
    geometry::Line l_;
};

nodal::FlatSegment vertical_axis()
{
    nodal::FlatSegment s;
    s.line = geometry::make_line({0, 0}, {0, 1});
    s.extent = {-1, 1};
    s.witness_point = {0, 0};
    return s;
}

HiddenPath straight(Vec2 a, Vec2 b, int n)
{
    HiddenPath p;
    const Vec2 t = normalized(b - a);
    for (int i = 0; i <= n; ++i) {
        p.samples.push_back({distance(a, b) * i / n, a + (static_cast<double>(i) / n) * (b - a), t});
    }
    p.start = a;
    p.start_normal = t;
    p.free_anchor = true;
    p.escape_radius = 0.4 * norm(b);
    return p;
}

struct Computed {
    geometry::Scatterer s;
    std::shared_ptr<const solver::Density> density;
    std::shared_ptr<const nodal::SampledField> field;
    nodal::NodalDecomposition d;
};

Computed computed(const std::string& name)
{
    Computed c;
    c.s = experiments::preset(name);
    c.density = experiments::solve(c.s, solver::make_wave(2 * kPi, {1, 0}), 10, 64).density;
    c.field = std::make_shared<const nodal::SampledField>(nodal::sample_field(
        std::make_shared<solver::ScatteringField>(c.density), c.s, nodal::square_window(3), 1.0 / 20));
    c.d = nodal::nodal_domains(c.field);
    return c;
}

} // namespace

TEST_SUITE("hiddenpath")
{
    TEST_CASE("path across standing-wave strips")
    {
        const auto s = strips();
        const auto p = build_path(s.d, {}, {{-2.5, 0.3}, {1, 0}, 0.0}, Vec2{0, 0.3}, 1.2);
        CHECK(p.free_anchor);
        const auto r = verify_path(p, *s.field, s.d.thresholds.grad_floor, s.d.critical_points);
        CHECK(r.certified);
        CHECK(r.crossings.size() == 3);
        for (const auto& c : r.crossings) {
            CHECK(std::abs(c.crossing.angle_deg - 90.0) <= 5.0);
            CHECK(c.monotone);
        }
        CHECK(r.max_turn_deg <= kMaxTurnDeg);
        CHECK(r.final_norm >= 1.2);
        CHECK(r.target_distance <= s.field->h);

        const auto walk = flat_point_walk(p, s.d, {});
        CHECK(walk.size() == 3);
        for (std::size_t i = 0; i < walk.size(); ++i) {
            CHECK(walk[i].residual <= 1e-10);
            if (i > 0) {
                CHECK(walk[i].t > walk[i - 1].t);
            }
        }
    }

    TEST_CASE("no nodal line ahead gives a straight ray")
    {
        const auto s = strips();
        const auto p = build_path(s.d, {}, {{0.5, 0.3}, {0, 1}, 0.0}, std::nullopt, 1.0);
        CHECK(p.crossings.empty());
        for (const auto& q : p.samples) {
            CHECK(std::abs(q.point.x - 0.5) <= 1e-12);
        }
        const auto r = verify_path(p, *s.field, s.d.thresholds.grad_floor, s.d.critical_points);
        CHECK(r.certified);
        CHECK(r.final_norm >= 1.0);
    }

    TEST_CASE("tangential crossing is rejected")
    {
        const auto s = strips();
        const double a = 20.0 * kPi / 180.0;
        const Vec2 dir{std::sin(a), std::cos(a)};
        const auto p = straight(Vec2{0, 0} - 2.5 * dir, Vec2{0, 0} + 2.5 * dir, 400);
        const auto r = verify_path(p, *s.field, s.d.thresholds.grad_floor, s.d.critical_points);
        CHECK_FALSE(r.certified);
        CHECK_FALSE(r.crossings_ok);
        bool steep = false;
        for (const auto& c : r.crossings) {
            steep = steep || !c.angle_ok;
        }
        CHECK(steep);
    }

    TEST_CASE("path through a critical point is rejected")
    {
        const auto s = synthetic(oracle::sum_of_plane_waves(2 * kPi, {{{1, 0}, 1.0, 0.0}, {{0, 1}, 1.0, 0.0}}), 1,
                                 1.0 / 40);
        REQUIRE_FALSE(s.d.critical_points.empty());
        const Vec2 c = s.d.critical_points.front();
        const auto p = straight(c - Vec2{0.3, 0.05}, c + Vec2{0.3, 0.05}, 200);
        const auto r = verify_path(p, *s.field, s.d.thresholds.grad_floor, s.d.critical_points);
        CHECK_FALSE(r.avoids_critical);
        CHECK_FALSE(r.certified);
    }

    TEST_CASE("target on a critical point")
    {
        const auto s = synthetic(oracle::sum_of_plane_waves(2 * kPi, {{{1, 0}, 1.0, 0.0}, {{0, 1}, 1.0, 0.0}}), 1,
                                 1.0 / 40);
        REQUIRE_FALSE(s.d.critical_points.empty());
        try {
            build_path(s.d, {}, {{-0.9, 0.1}, {1, 0}, 0.0}, s.d.critical_points.front(), 0.5);
            FAIL("expected TargetOnCriticalPoint");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TargetOnCriticalPoint);
        }
    }

    TEST_CASE("vanishing field has no regular boundary point")
    {
        const auto sq = experiments::preset("square");
        const oracle::SyntheticAdapter zero(oracle::sum_of_plane_waves(2 * kPi, {{{1, 0}, 0.0, 0.0}}), sq);
        try {
            pick_start(sq, zero, 16, 1, 1e-3, [](Vec2) { return 1e-4; });
            FAIL("expected NoRegularBoundaryPoint");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoRegularBoundaryPoint);
        }
    }

    TEST_CASE("odd and even fields across the vertical axis")
    {
        const auto odd = synthetic(oracle::plane_standing(kPi, {1, 0}), 3, 0.05);
        const auto r_odd = reflect_check(*odd.field, {}, vertical_axis());
        CHECK(r_odd.sampled > 0);
        CHECK(r_odd.oddness_residual <= 1e-10);
        CHECK(classify(r_odd) == Verdict::Odd);
        REQUIRE(r_odd.e_plus.size() == r_odd.e_minus.size());
        for (std::size_t i = 0; i < r_odd.e_plus.size(); ++i) {
            CHECK(r_odd.e_minus[i] == geometry::reflect(r_odd.e_plus[i], vertical_axis().line));
        }

        const auto even = synthetic(oracle::sum_of_plane_waves(kPi, {{{1, 0}, 1.0, kPi / 2}}), 3, 0.05);
        const auto r_even = reflect_check(*even.field, {}, vertical_axis());
        CHECK(r_even.oddness_residual >= 1.0);
        CHECK(r_even.oddness_residual == doctest::Approx(2 * r_even.field_scale).epsilon(1e-6));
        CHECK(classify(r_even) == Verdict::Refuted);
    }

    TEST_CASE("odd part of any field passes the reflection check")
    {
        const auto line = geometry::make_line({0.2, -0.1}, {1, 2});
        const auto f = oracle::sum_of_plane_waves(
            2 * kPi, {{{1, 0}, 1.0, 0.3}, {{0.6, 0.8}, 0.7, 1.1}, {{-0.28, 0.96}, 0.4, 2.0}});
        auto field = std::make_shared<OddPart>(f, line);
        const auto sf = nodal::sample_field(field, {}, nodal::square_window(1.5), 0.025);
        nodal::FlatSegment seg;
        seg.line = line;
        seg.extent = {-0.5, 0.5};
        seg.witness_point = line.point;
        const auto r = reflect_check(sf, {}, seg);
        CHECK(r.sampled > 0);
        CHECK(r.oddness_residual <= 1e-12 * std::max(1.0, r.field_scale));
    }

    TEST_CASE("segment outside the window")
    {
        const auto s = strips();
        nodal::FlatSegment seg = vertical_axis();
        seg.line.point = {10, 0};
        seg.witness_point = {10, 0};
        try {
            reflect_check(*s.field, {}, seg);
            FAIL("expected WindowTooSmall");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::WindowTooSmall);
        }
    }

    TEST_CASE("square scatterer")
    {
        const auto c = computed("square");
        const auto density = c.density;
        const solver::ScatteringField field(density);
        auto h_near = [density](Vec2 x) { return solver::near_guard(*density, x); };
        const auto start = pick_start(c.s, field, 32, 7, c.d.thresholds.grad_floor, h_near);
        CHECK(std::abs(start.dv_dn) >= c.d.thresholds.grad_floor);
        for (const auto& poly : c.s.polygons()) {
            for (const auto& v : poly.vertices()) {
                CHECK(distance(start.point, v) >= 0.1 - 1e-12);
            }
        }
        const auto again = pick_start(c.s, field, 32, 7, c.d.thresholds.grad_floor, h_near);
        CHECK(again.point == start.point);

        const auto b = nodal::nodal_bound(*c.field, c.s.bounding_radius());
        const nodal::Adjacency* best = &c.d.adjacency.front();
        for (const auto& a : c.d.adjacency) {
            best = a.witness.min_grad > best->witness.min_grad ? &a : best;
        }
        const Vec2 target = best->witness.samples[best->witness.samples.size() / 2];
        const auto p = build_path(c.d, c.s, start, target, 1.1 * b.r_nodal);
        const auto r = verify_path(p, *c.field, c.d.thresholds.grad_floor, c.d.critical_points);
        CHECK(r.certified);
        for (const auto& x : r.crossings) {
            CHECK(x.crossing.angle_deg >= kMinCrossingDeg);
            CHECK(x.crossing.angle_deg <= kMaxCrossingDeg);
            CHECK(x.crossing.grad_norm >= c.d.thresholds.grad_floor);
        }
        CHECK(r.final_norm >= 1.1 * b.r_nodal);
        CHECK(flat_point_walk(p, c.d, c.s).empty());
    }

    TEST_CASE("near-flat pieces of the triangle field are refuted")
    {
        const auto c = computed("triangle");
        const auto candidates = nodal::flat_points_of_v(c.d, c.d.thresholds.min_length, c.d.thresholds.dev_tol);
        REQUIRE_FALSE(candidates.empty());
        for (std::size_t i = 0; i < candidates.size(); i += 6) {
            const auto r = reflect_check(*c.field, c.s, candidates[i]);
            CHECK(r.oddness_residual >= kRefuteFactor * kOddTolerance * r.field_scale);
            CHECK(classify(r) == Verdict::Refuted);
        }
    }
}
