#pragma once

#include "scatter/vec2.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace scatter::geometry {

/// Simple polygon stored counterclockwise. Construct through make_polygon.
class Polygon {
public:
    [[nodiscard]] const std::vector<Vec2>& vertices() const { return vertices_; }
    [[nodiscard]] std::size_t size() const { return vertices_.size(); }
    [[nodiscard]] std::pair<Vec2, Vec2> edge(std::size_t i) const
    {
        return {vertices_[i], vertices_[(i + 1) % vertices_.size()]};
    }
    [[nodiscard]] double area() const;
    [[nodiscard]] Vec2 centroid() const;

    friend bool operator==(const Polygon&, const Polygon&) = default;

private:
    friend Polygon make_polygon(std::vector<Vec2> vertices);
    std::vector<Vec2> vertices_;
};

/// Validates and normalizes to counterclockwise order.
/// Throws TooFewVertices, DegenerateEdge or SelfIntersecting.
Polygon make_polygon(std::vector<Vec2> vertices);

enum class CellOwner { PolygonEdge, FreeSegment };

struct Cell {
    Vec2 a;
    Vec2 b;
    Vec2 normal;  // unit, points into the exterior for polygon edges
    CellOwner owner = CellOwner::FreeSegment;
    std::size_t polygon = 0;  // owning polygon, PolygonEdge only
    std::size_t index = 0;    // edge index within the polygon, or free-cell index

    [[nodiscard]] double length() const { return distance(a, b); }
    [[nodiscard]] Vec2 at(double t) const { return a + t * (b - a); }

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Free crack-type segment; the normal is the counterclockwise perpendicular of b - a.
Cell make_free_cell(Vec2 a, Vec2 b);

struct Line {
    Vec2 point;
    Vec2 direction;  // unit

    [[nodiscard]] Vec2 at(double t) const { return point + t * direction; }
    [[nodiscard]] Vec2 normal() const { return perp(direction); }
};

Line make_line(Vec2 point, Vec2 direction);

/// Compact polygonal scatterer: union of disjoint simple polygons and free segments.
class Scatterer {
public:
    Scatterer() = default;
    Scatterer(std::vector<Polygon> polygons, std::vector<Cell> free_cells);

    [[nodiscard]] const std::vector<Polygon>& polygons() const { return polygons_; }
    [[nodiscard]] const std::vector<Cell>& free_cells() const { return free_cells_; }
    [[nodiscard]] double bounding_radius() const { return bounding_radius_; }
    [[nodiscard]] bool empty() const { return polygons_.empty() && free_cells_.empty(); }
    /// Grid flood-fill verdict on the connectedness of the complement.
    [[nodiscard]] bool exterior_connected() const { return exterior_connected_; }
    /// Default on-boundary tolerance, 1e-9 times the bounding radius.
    [[nodiscard]] double boundary_tolerance() const;

    friend bool operator==(const Scatterer& a, const Scatterer& b)
    {
        return a.polygons_ == b.polygons_ && a.free_cells_ == b.free_cells_;
    }

private:
    std::vector<Polygon> polygons_;
    std::vector<Cell> free_cells_;
    double bounding_radius_ = 0.0;
    bool exterior_connected_ = true;
};

/// Flood fill on a grid of spacing h over the disk of radius 2R.
bool check_exterior_connected(const Scatterer& s, double h);

enum class PointClass { Interior, OnBoundary, Exterior };

PointClass classify_point(const Scatterer& s, Vec2 x, double tol);
PointClass classify_point(const Scatterer& s, Vec2 x);

double distance_to_segment(Vec2 x, Vec2 a, Vec2 b);
double distance_to_boundary(const Scatterer& s, Vec2 x);
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

Vec2 reflect(Vec2 x, const Line& line);
std::vector<Vec2> reflect(std::span<const Vec2> polyline, const Line& line);

std::vector<Cell> boundary_cells(const Scatterer& s);

struct Interval {
    double lo;
    double hi;
};

/// Maximal open interval of line parameters containing the seed on which the line
/// stays outside the scatterer, clipped to the chord of the disk of the given radius
/// about the origin. Throws SeedInsideScatterer.
std::vector<Interval> line_component(const Scatterer& s, const Line& line, Vec2 seed,
                                     double window);

} // namespace scatter::geometry
