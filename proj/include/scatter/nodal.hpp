#pragma once

#include "scatter/field.hpp"
#include "scatter/geometry.hpp"

#include <memory>
#include <utility>
#include <vector>

// Grid sampling of v = Re u, its zero set, nodal domains and their adjacency, and the
// flatness test for the zero set of u.
namespace scatter::nodal {

struct Window {
    Vec2 lo;
    Vec2 hi;

    [[nodiscard]] bool contains(Vec2 x) const { return x.x >= lo.x && x.x <= hi.x && x.y >= lo.y && x.y <= hi.y; }
    friend bool operator==(const Window&, const Window&) = default;
};

Window square_window(double half_width);

/// Values on the nodes lo + (i h, j h), 0 <= i < nx, 0 <= j < ny.
struct SampledField {
    std::shared_ptr<const Field> field;
    Window window;
    double h = 0.0;
    int nx = 0;
    int ny = 0;
    double k = 0.0;
    bool complex_valued = false;
    double max_abs_u = 0.0;  // over InG nodes
    std::vector<double> v;
    std::vector<double> im;  // zero for real fields
    std::vector<Vec2> grad;
    std::vector<PointStatus> mask;

    [[nodiscard]] int index(int i, int j) const { return j * nx + i; }
    [[nodiscard]] Vec2 point(int i, int j) const { return {window.lo.x + i * h, window.lo.y + j * h}; }
    [[nodiscard]] Vec2 point(int idx) const { return point(idx % nx, idx / nx); }
    [[nodiscard]] bool in_g(int idx) const { return mask[static_cast<std::size_t>(idx)] == PointStatus::InG; }
    [[nodiscard]] std::size_t size() const { return v.size(); }
    /// Nearest grid node, clamped to the window.
    [[nodiscard]] int nearest(Vec2 x) const;
};

/// Nodes in the scatterer, or reported by the field as InD or NearBoundary, are masked.
/// Throws ResolutionTooCoarse if h > lambda / 20.
SampledField sample_field(std::shared_ptr<const Field> field, const geometry::Scatterer& s, Window window,
                          double h);

struct Thresholds {
    double grad_floor = 0.0;
    double v_floor = 1e-6;
    double im_floor = 0.0;
    double min_length = 0.0;
    double dev_tol = 0.0;

    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

/// grad_floor = 1e-3 k, v_floor = 1e-6, im_floor = 1e-6 max|u|, min_length = lambda/4,
/// dev_tol = h.
Thresholds default_thresholds(const SampledField& f);

struct Polyline {
    std::vector<Vec2> points;
    std::vector<double> grad_norm;  // interpolated |grad v|
    std::vector<double> im_abs;     // interpolated |Im u|
    /// Grid nodes on the positive and negative side of each vertex; -1 when the vertex is
    /// a zero node.
    std::vector<std::pair<int, int>> sides;
    bool closed = false;

    [[nodiscard]] double length() const;
    friend bool operator==(const Polyline&, const Polyline&) = default;
};

/// Marching squares on cells whose four corners are in G, with linear interpolation
/// along cell edges.
std::vector<Polyline> extract_nodal_set(const SampledField& f);

/// Points of G with v = 0 and grad v = 0, found by Newton iteration on grad v from cells
/// where both gradient components change sign, kept when |v| <= v_floor and
/// |grad v| <= grad_floor, merged within h.
std::vector<Vec2> find_critical_points(const SampledField& f, double grad_floor, double v_floor);

struct Domain {
    int sign = 0;
    int nodes = 0;
    int seed = 0;  // a grid node of the domain
    bool touches_window = false;
    bool touches_obstacle = false;

    friend bool operator==(const Domain&, const Domain&) = default;
};

/// Points on the common boundary of two domains, projected onto v = 0.
struct Witness {
    std::vector<Vec2> samples;
    double min_grad = 0.0;
    int polyline = -1;

    friend bool operator==(const Witness&, const Witness&) = default;
};

struct Adjacency {
    int a = 0;  // lower index
    int b = 0;
    Witness witness;

    friend bool operator==(const Adjacency&, const Adjacency&) = default;
};

struct NodalDecomposition {
    std::shared_ptr<const SampledField> field;
    Thresholds thresholds;
    std::vector<Polyline> polylines;
    std::vector<Vec2> critical_points;
    std::vector<int> labels;  // per grid node; -1 outside every domain
    std::vector<Domain> domains;
    std::vector<Adjacency> adjacency;
    std::vector<int> ordering;  // empty until ordered

    [[nodiscard]] int label_at(Vec2 x) const;
    [[nodiscard]] const Adjacency* find_adjacency(int a, int b) const;
};

inline constexpr int kWitnessSamples = 7;

/// 4-connected components of the sign classes, adjacency from nodal polylines whose
/// witness stays at |grad v| >= grad_floor.
NodalDecomposition nodal_domains(std::shared_ptr<const SampledField> f, const Thresholds& t);
NodalDecomposition nodal_domains(std::shared_ptr<const SampledField> f);

/// Connected components of the adjacency graph, each sorted ascending.
std::vector<std::vector<int>> adjacency_components(const NodalDecomposition& d);

/// Breadth-first order from start, neighbours by ascending index.
/// Throws DisconnectedAdjacency when some domain is unreachable.
std::vector<int> order_domains(const NodalDecomposition& d, int start);

/// Every domain after the first has an adjacency with min |grad v| >= grad_floor to an
/// earlier one, and the ordering is a permutation of all domains.
bool ordering_valid(const NodalDecomposition& d, const std::vector<int>& ordering, double grad_floor);

struct FlatSegment {
    geometry::Line line;
    geometry::Interval extent;
    double max_deviation = 0.0;
    Vec2 witness_point;
    int polyline = -1;
    int first = 0;
    int last = 0;
};

/// Maximal sub-polylines of length >= min_length whose total-least-squares line stays
/// within dev_tol. For complex fields only vertices with |Im u| <= im_floor count.
std::vector<FlatSegment> flat_points(const NodalDecomposition& d, double min_length, double dev_tol);
std::vector<FlatSegment> flat_points(const NodalDecomposition& d);
/// The same search on the zero set of v alone, ignoring Im u.
std::vector<FlatSegment> flat_points_of_v(const NodalDecomposition& d, double min_length, double dev_tol);

/// Zeros of u in grid cells of nonzero winding number, refined by Newton iteration.
std::vector<Vec2> complex_zeros(const SampledField& f);

struct NodalBound {
    std::vector<Vec2> zeros;
    double r_nodal = 0.0;
    double annulus_inner = 0.0;
    double annulus_outer = 0.0;
    int annulus_zeros = 0;  // zeros of u found in the annulus
    int annulus_cells = 0;  // polar cells examined

    [[nodiscard]] bool annulus_empty() const { return annulus_zeros == 0; }
};

/// R_nodal is the largest norm of a zero of u found in the window, at least min_radius
/// (typically the scatterer's bounding radius). The annulus (R_nodal + h, 2 R_nodal) is
/// then swept on a polar grid of spacing h.
NodalBound nodal_bound(const SampledField& f, double min_radius = 0.0);

} // namespace scatter::nodal
