#pragma once

#include "scatter/field.hpp"
#include "scatter/geometry.hpp"

#include <Eigen/Dense>

#include <memory>
#include <variant>
#include <vector>

// Exterior sound-soft scattering by a combined-field boundary integral equation,
//
//   u^s = (D - i eta S) phi,   (1/2 + K - i eta S) phi = -u^inc on the boundary,
//
// discretized by Nystrom on composite Gauss-Legendre panels. Straight edges are
// parametrized through a polynomial grading map that clusters nodes at both corners.
// Self-panel log singularities use product integration against Legendre moments;
// neighbouring panels use adaptive quadrature on the interpolated phi * sqrt(speed).
namespace scatter::solver {

struct WaveParams {
    double k = 1.0;
    Vec2 omega{1.0, 0.0};
};

WaveParams make_wave(double k, Vec2 omega);

inline constexpr int kPanelOrder = 16;
inline constexpr int kGradingExponent = 3;
inline constexpr int kMinPanelsPerEdge = 4;
inline constexpr double kMinNodesPerWavelength = 6.0;
/// Field evaluation refuses points closer to the boundary than this fraction of the
/// local panel length.
inline constexpr double kNearGuardFraction = 1.0 / 1024.0;

struct Disk {
    Vec2 center;
    double radius = 1.0;
};

/// One smooth boundary piece: a graded straight edge or an ungraded circular arc,
/// traversed counterclockwise around the obstacle.
struct EdgeCurve {
    enum class Kind { Straight, Arc } kind = Kind::Straight;
    Vec2 a, b;            // straight
    Vec2 center;          // arc
    double radius = 0.0;  // arc
    double theta0 = 0.0, theta1 = 0.0;
    int grading = 0;      // 0 = none

    struct Point {
        Vec2 pos, d1, d2;
    };
    [[nodiscard]] Point eval(double s) const;
    [[nodiscard]] double length() const;
    /// Edge parameter of the point of the curve nearest to x.
    [[nodiscard]] double nearest_parameter(Vec2 x) const;
};

struct Panel {
    int edge = 0;
    double s0 = 0.0, s1 = 0.0;
    int first = 0;  // index of the first node
    double length = 0.0;
    Vec2 center;
    double radius = 0.0;  // bounding circle about center
};

struct Node {
    Vec2 pos;
    Vec2 normal;  // unit, into the exterior
    double speed = 0.0;   // |dy/ds|
    double weight = 0.0;  // arc-length quadrature weight
    double s = 0.0;
    double second_normal = 0.0;  // (d2y/ds2 . normal) / speed^2, the signed curvature
    int panel = 0;
};

/// Discretized boundary: geometry, panels and nodes, no wave data yet.
struct Discretization {
    std::variant<geometry::Scatterer, Disk> shape;
    std::vector<EdgeCurve> edges;
    std::vector<Panel> panels;
    std::vector<Node> nodes;

    [[nodiscard]] bool inside(Vec2 x) const;
    [[nodiscard]] double distance_to_boundary(Vec2 x) const;
    /// Length of the panel nearest to x.
    [[nodiscard]] double local_panel_length(Vec2 x) const;
    [[nodiscard]] double bounding_radius() const;
};

/// Panels per edge: max(kMinPanelsPerEdge, ceil(oversample * ppw * L / (lambda * p))),
/// with oversample 2q on graded edges (grading stretches the mid-edge spacing q-fold)
/// and 2 on arcs. Throws FreeCellsUnsupported, ResolutionTooLow.
Discretization discretize(const geometry::Scatterer& s, double k, double nodes_per_wavelength);
Discretization discretize(const Disk& disk, double k, double nodes_per_wavelength);

struct BoundarySystem {
    Discretization boundary;
    WaveParams wave;
    double eta = 1.0;  // coupling, eta = k
    double nodes_per_wavelength = 0.0;
    Eigen::MatrixXcd matrix;
    Eigen::VectorXcd rhs;

    [[nodiscard]] std::size_t size() const { return boundary.nodes.size(); }
};

BoundarySystem assemble(Discretization boundary, const WaveParams& wave, double nodes_per_wavelength);
BoundarySystem assemble(const geometry::Scatterer& s, const WaveParams& wave, double nodes_per_wavelength);
BoundarySystem assemble(const Disk& disk, const WaveParams& wave, double nodes_per_wavelength);

struct Density {
    std::shared_ptr<const BoundarySystem> system;
    Eigen::VectorXcd values;
    double residual = 0.0;        // relative
    double condition = 0.0;       // estimated cond_1 of the sqrt(weight)-balanced system

    [[nodiscard]] const WaveParams& wave() const { return system->wave; }
};

/// Dense LU solve. Throws SingularSystem.
Density solve_density(std::shared_ptr<const BoundarySystem> system);
Density solve_density(BoundarySystem system);

FieldValue incident_field(const WaveParams& w, Vec2 x);

/// Scattered field and gradient. Throws PointInsideScatterer, TooCloseToBoundary.
FieldValue scattered_field(const Density& d, Vec2 x);
/// Incident plus scattered.
FieldValue total_field(const Density& d, Vec2 x);
/// Minimum distance to the boundary at which x may be evaluated.
double near_guard(const Density& d, Vec2 x);

struct FarFieldPattern {
    std::vector<Vec2> directions;
    std::vector<Complex> values;
    WaveParams wave;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double angle(std::size_t m) const;
};

/// Directions at angles 2 pi m / M.
FarFieldPattern far_field(const Density& d, int directions);
Complex far_field_at(const Density& d, Vec2 xhat);
/// e^{i pi/4} / sqrt(8 pi k): the far-field constant of the 2D fundamental solution.
Complex far_field_constant(double k);

struct TraceProbe {
    Vec2 boundary_point;
    Vec2 normal;
};

/// Probes at interior fractions of every edge.
std::vector<TraceProbe> trace_probes(const Density& d, int per_edge);
/// max |u(x + delta nu)| over the probes.
double boundary_trace_check(const Density& d, const std::vector<TraceProbe>& probes, double delta);

/// e(r) = |sqrt(r) e^{-ikr} u^s(r xhat) - u_inf(xhat)|.
std::vector<double> radial_limit_check(const Density& d, Vec2 xhat, const std::vector<double>& radii);

/// Total field of a solved problem as a Field.
class ScatteringField final : public Field {
public:
    explicit ScatteringField(std::shared_ptr<const Density> density) : density_(std::move(density)) {}

    [[nodiscard]] FieldValue eval(Vec2 x) const override { return total_field(*density_, x); }
    [[nodiscard]] PointStatus status(Vec2 x) const override;
    [[nodiscard]] double wavenumber() const override { return density_->wave().k; }
    [[nodiscard]] bool complex_valued() const override { return true; }
    [[nodiscard]] const Density& density() const { return *density_; }

private:
    std::shared_ptr<const Density> density_;
};

} // namespace scatter::solver
