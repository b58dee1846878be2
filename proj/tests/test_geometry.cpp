#include "scatter/error.hpp"
#include "scatter/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace scatter;
using namespace scatter::geometry;

namespace {

Scatterer unit_square()
{
    return Scatterer({make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}})}, {});
}

ErrorCode code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidInput;
}

} // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("unit square")
    {
        const auto p = make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
        CHECK(p.area() == doctest::Approx(1.0));
        CHECK(boundary_cells(Scatterer({p}, {})).size() == 4);
    }

    TEST_CASE("invalid polygons")
    {
        CHECK(code_of([] { make_polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}); }) == ErrorCode::SelfIntersecting);
        CHECK(code_of([] { make_polygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}); }) == ErrorCode::DegenerateEdge);
        CHECK(code_of([] { make_polygon({{0, 0}, {1, 0}}); }) == ErrorCode::TooFewVertices);
    }

    TEST_CASE("clockwise input is reversed")
    {
        const auto p = make_polygon({{0, 0}, {0, 1}, {1, 0}});
        CHECK(p.area() > 0.0);
        const std::vector<Vec2> ccw{{0, 0}, {1, 0}, {0, 1}};
        const auto& v = p.vertices();
        double signed_area = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            signed_area += cross(v[i], v[(i + 1) % v.size()]);
        }
        CHECK(signed_area > 0.0);
        CHECK(std::is_permutation(v.begin(), v.end(), ccw.begin()));
    }

    TEST_CASE("point classification")
    {
        const auto s = unit_square();
        CHECK(classify_point(s, {0.5, 0.5}, 1e-12) == PointClass::Interior);
        CHECK(classify_point(s, {10, 10}, 1e-12) == PointClass::Exterior);
        CHECK(classify_point(s, {0.5, 0}, 1e-12) == PointClass::OnBoundary);
        CHECK(classify_point(s, {0.5, 1e-10}) == PointClass::OnBoundary);
    }

    TEST_CASE("classification is stable under vertex rotation")
    {
        std::vector<Vec2> v{{0, 0}, {2, 0}, {2, 1}, {1, 0.4}, {0, 1}};
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-0.5, 2.5);
        std::vector<Vec2> pts;
        for (int i = 0; i < 200; ++i) {
            pts.push_back({u(rng), u(rng)});
        }
        const Scatterer base({make_polygon(v)}, {});
        for (std::size_t r = 1; r < v.size(); ++r) {
            std::rotate(v.begin(), v.begin() + 1, v.end());
            const Scatterer rotated({make_polygon(v)}, {});
            for (const auto& x : pts) {
                CHECK(classify_point(rotated, x, 1e-12) == classify_point(base, x, 1e-12));
            }
        }
    }

    TEST_CASE("reflection")
    {
        const Line axis = make_line({0, 0}, {1, 0});
        CHECK(reflect(Vec2{1, 2}, axis) == Vec2{1, -2});
        CHECK(reflect(Vec2{3, 0}, axis) == Vec2{3, 0});

        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-5, 5);
        for (int i = 0; i < 100; ++i) {
            const Line l = make_line({u(rng), u(rng)}, {u(rng), u(rng)});
            const Vec2 x{u(rng), u(rng)};
            const Vec2 y{u(rng), u(rng)};
            CHECK(distance(reflect(reflect(x, l), l), x) <= 1e-13);
            CHECK(std::abs(distance(reflect(x, l), reflect(y, l)) - distance(x, y)) <= 1e-13);
        }
        const std::vector<Vec2> poly{{0, 1}, {2, 3}};
        const auto mirrored = reflect(poly, axis);
        CHECK(mirrored[1] == Vec2{2, -3});
    }

    TEST_CASE("boundary cells")
    {
        const auto cells = boundary_cells(unit_square());
        const std::vector<Vec2> normals{{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
        REQUIRE(cells.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(distance(cells[i].normal, normals[i]) <= 1e-14);
            CHECK(cells[i].owner == CellOwner::PolygonEdge);
        }
        const Scatterer with_crack({make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}})}, {make_free_cell({2, 0}, {3, 1})});
        const auto all = boundary_cells(with_crack);
        CHECK(all.size() == 5);
        for (const auto& c : all) {
            CHECK(std::abs(norm(c.normal) - 1.0) <= 1e-14);
            CHECK(std::abs(dot(c.normal, c.b - c.a)) <= 1e-14);
        }
        CHECK(boundary_cells(Scatterer{}).empty());
    }

    TEST_CASE("line components")
    {
        const auto s = unit_square();
        const Line axis = make_line({0, 0}, {1, 0});
        auto left = line_component(s, axis, {-2, 0}, 10);
        REQUIRE(left.size() == 1);
        CHECK(left[0].lo == doctest::Approx(-10));
        CHECK(left[0].hi == doctest::Approx(0));
        auto right = line_component(s, axis, {2, 0}, 10);
        REQUIRE(right.size() == 1);
        CHECK(right[0].lo == doctest::Approx(1));
        CHECK(right[0].hi == doctest::Approx(10));
        auto miss = line_component(s, make_line({0, 3}, {1, 0}), {0, 3}, 10);
        REQUIRE(miss.size() == 1);
        CHECK(miss[0].lo == doctest::Approx(-std::sqrt(91.0)));
        CHECK(miss[0].hi == doctest::Approx(std::sqrt(91.0)));
        CHECK(code_of([&] { line_component(s, make_line({0, 0.5}, {1, 0}), {0.5, 0.5}, 10); }) ==
              ErrorCode::SeedInsideScatterer);
    }

    TEST_CASE("line component interiors avoid the scatterer")
    {
        const Scatterer s({make_polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}), make_polygon({{2, -0.5}, {3, 0}, {2, 0.5}})},
                          {});
        const Line l = make_line({-4, 0.1}, {1, 0.05});
        const auto parts = line_component(s, l, l.at(-0.5), 8);
        REQUIRE(parts.size() == 1);
        for (int i = 1; i < 200; ++i) {
            const double t = parts[0].lo + (parts[0].hi - parts[0].lo) * i / 200.0;
            CHECK(classify_point(s, l.at(t)) == PointClass::Exterior);
        }
    }

    TEST_CASE("bounding radius and exterior connectivity")
    {
        const auto s = unit_square();
        CHECK(s.bounding_radius() >= std::sqrt(2.0) - 1e-12);
        CHECK(s.exterior_connected());
        // A cup closed by a free segment encloses a pocket of the complement.
        const Scatterer cup({make_polygon({{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}})},
                            {make_free_cell({1, 2.5}, {2, 2.5})});
        CHECK_FALSE(cup.exterior_connected());
    }

    TEST_CASE("overlapping polygons are rejected")
    {
        CHECK(code_of([] {
                  Scatterer({make_polygon({{0, 0}, {2, 0}, {2, 2}, {0, 2}}), make_polygon({{1, 1}, {3, 1}, {3, 3}, {1, 3}})},
                            {});
              }) == ErrorCode::OverlappingPolygons);
    }
}
