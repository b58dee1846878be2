#pragma once

#include "scatter/field.hpp"
#include "scatter/geometry.hpp"
#include "scatter/nodal.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

// A curve from the obstacle boundary to far away that meets the zero set of v only at
// right angles and away from nodal critical points, plus the odd-reflection test for
// flat pieces of the zero set.
namespace scatter::hiddenpath {

struct Start {
    Vec2 point;
    Vec2 normal;         // unit, into G
    double dv_dn = 0.0;  // one-sided normal derivative of v
};

/// Random midpoint-biased points in the interior of the polygon edges (seeded
/// mt19937_64); keeps the one with the largest |dv/dn|, estimated from v at offsets
/// {2, 4, 8} h_near(x) along the normal. Throws NoRegularBoundaryPoint.
Start pick_start(const geometry::Scatterer& s, const Field& field, int candidates, std::uint64_t seed,
                 double grad_floor, const std::function<double(Vec2)>& h_near);

struct PathSample {
    double t = 0.0;  // arc length
    Vec2 point;
    Vec2 tangent;

    friend bool operator==(const PathSample&, const PathSample&) = default;
};

struct Crossing {
    double t = 0.0;
    Vec2 point;
    Vec2 nodal_tangent;
    double grad_norm = 0.0;
    double angle_deg = 0.0;  // between the path and the nodal line, in [0, 180]

    friend bool operator==(const Crossing&, const Crossing&) = default;
};

struct HiddenPath {
    std::vector<PathSample> samples;
    std::vector<Crossing> crossings;
    Vec2 start;
    Vec2 start_normal;
    bool free_anchor = false;  // start is a point of G rather than of the boundary
    std::optional<Vec2> target;
    double target_t = 0.0;
    double escape_radius = 0.0;
    std::vector<int> domain_route;

    friend bool operator==(const HiddenPath&, const HiddenPath&) = default;
};

inline constexpr double kMaxTurnDeg = 10.0;
inline constexpr double kSmoothTurnDeg = 8.0;
inline constexpr double kMinCrossingDeg = 85.0;
inline constexpr double kMaxCrossingDeg = 95.0;
inline constexpr int kMonotoneSamples = 9;

/// Entry segment along the normal, shortest in-domain grid routes between orthogonal
/// crossing stubs at regular witness points (through the target when given), ending
/// at a grid node of norm >= 2R; Chaikin-smoothed until consecutive tangents turn by
/// at most kSmoothTurnDeg. An empty scatterer makes the start a free anchor.
/// Throws TargetOnCriticalPoint, NoRouteToInfinity, StartInvalid.
HiddenPath build_path(const nodal::NodalDecomposition& d, const geometry::Scatterer& s, const Start& start,
                      std::optional<Vec2> target, double escape_radius);

struct CrossingCheck {
    Crossing crossing;
    bool monotone = false;
    bool angle_ok = false;
    bool grad_ok = false;
};

struct PathReport {
    bool certified = false;
    bool starts_on_boundary = false;
    bool stays_in_g = false;
    bool reaches_target = false;
    bool escapes = false;
    bool turns_ok = false;
    bool parameters_increasing = false;
    bool crossings_ok = false;
    bool avoids_critical = false;
    double max_turn_deg = 0.0;
    double target_distance = 0.0;
    double final_norm = 0.0;
    std::vector<CrossingCheck> crossings;
    std::vector<std::string> failures;
};

/// Re-derives the crossings from sign changes of v along the samples and checks every
/// path condition with exact field evaluations.
PathReport verify_path(const HiddenPath& p, const nodal::SampledField& f, double grad_floor,
                       std::span<const Vec2> critical_points);

struct ReflectionFrame {
    geometry::Line line;
    std::vector<geometry::Interval> s_tilde;
    std::vector<Vec2> e_plus;
    std::vector<Vec2> e_minus;
    double oddness_residual = 0.0;  // max |u(x) + u(Rx)| over the sampled part of E
    double field_scale = 0.0;       // max |u| over the same points
    int sampled = 0;
};

/// Odd-symmetry residual below this fraction of max|u| certifies a flat piece.
inline constexpr double kOddTolerance = 1e-4;
/// Residual above this multiple of the odd tolerance refutes it.
inline constexpr double kRefuteFactor = 10.0;
inline constexpr int kMaxReflectionSamples = 4096;

enum class Verdict { Odd, Refuted, Inconclusive };

Verdict classify(const ReflectionFrame& r);

/// E+ is the grid component, containing the node next to the segment on the positive
/// side, of the nodes of G on that side whose mirror images lie in G on the other side.
/// Throws WindowTooSmall.
ReflectionFrame reflect_check(const nodal::SampledField& f, const geometry::Scatterer& s,
                              const nodal::FlatSegment& seg);

struct WalkStep {
    double t = 0.0;
    Vec2 point;
    double residual = 0.0;
};

/// Crossings of the path, in order, that lie on a flat segment certified odd by
/// reflect_check.
std::vector<WalkStep> flat_point_walk(const HiddenPath& p, const nodal::NodalDecomposition& d,
                                      const geometry::Scatterer& s);

} // namespace scatter::hiddenpath
