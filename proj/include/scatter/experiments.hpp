#pragma once

#include "scatter/geometry.hpp"
#include "scatter/hiddenpath.hpp"
#include "scatter/io.hpp"
#include "scatter/nodal.hpp"
#include "scatter/oracle.hpp"
#include "scatter/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

// Orchestration: uniqueness matrices, oracle validation, the nodal and path pipelines,
// and their file output.
namespace scatter::experiments {

/// Names: square, triangle, l-hexagon, pentagon, rectangle.
geometry::Scatterer preset(const std::string& name);
std::vector<std::string> preset_names();

struct NamedScatterer {
    std::string name;
    geometry::Scatterer shape;
    double nodes_per_wavelength = 0.0;  // 0: the run default
};

struct PathOptions {
    int candidates = 32;
    std::optional<Vec2> anchor;  // free start point, used instead of pick_start
    Vec2 anchor_normal{1.0, 0.0};
    std::optional<Vec2> target;
    bool auto_target = false;       // midpoint of the strongest adjacency witness
    double escape_radius = 0.0;     // 0: escape_factor * R_nodal
    double escape_factor = 1.1;
};

struct OracleOptions {
    std::vector<double> disk_ka{2.0, 10.0};
    double disk_ppw = 20.0;
    int radial_directions = 16;
    std::vector<double> radial_kr{50.0, 100.0, 200.0, 400.0, 800.0};
    int reciprocity_directions = 5;
    std::vector<double> trace_offsets{1e-2, 5e-3, 2.5e-3};
};

struct ExperimentConfig {
    std::vector<NamedScatterer> scatterers;
    solver::WaveParams wave;
    double nodes_per_wavelength = 10.0;
    int directions = 64;
    double window_half_width = 0.0;  // 0: max(3 lambda, 2.5 R)
    double spacing = 0.0;            // 0: lambda / 20
    std::optional<nodal::Thresholds> thresholds;
    std::optional<oracle::SyntheticField> synthetic;
    PathOptions path;
    OracleOptions oracle;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;
};

inline constexpr int kMinDirections = 64;

/// Relative file references resolve against base_dir. Throws InvalidInput.
ExperimentConfig config_from_json(const io::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& file);

using Log = std::function<void(const std::string&)>;

struct Solved {
    std::shared_ptr<const solver::Density> density;
    solver::FarFieldPattern pattern;
};

Solved solve(const geometry::Scatterer& s, const solver::WaveParams& wave, double ppw, int directions);

/// ||a - b|| / max(||a||, ||b||) over uniform directions.
double relative_distance(const solver::FarFieldPattern& a, const solver::FarFieldPattern& b);
/// max |moved - e^{ik(omega - xhat).t} original| / max |original|: the pattern of the
/// scatterer translated by t against that of the original.
double translation_residual(const solver::FarFieldPattern& moved, const solver::FarFieldPattern& original, Vec2 t);

struct DistanceMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> entries;  // NaN where a solve failed
    std::vector<std::string> errors;           // per scatterer, empty on success

    [[nodiscard]] bool failed(std::size_t i) const { return !errors[i].empty(); }
};

struct UniquenessResult {
    DistanceMatrix matrix;
    std::vector<std::optional<solver::FarFieldPattern>> patterns;
    std::vector<double> residuals;
    std::vector<double> conditions;
};

/// One solve per scatterer; a failing scatterer marks its row and column failed.
UniquenessResult run_uniqueness(const ExperimentConfig& cfg, const Log& log = {});

struct DiskCheck {
    double ka = 0.0;
    double ppw = 0.0;
    int unknowns = 0;
    double max_relative_error = 0.0;
    double condition = 0.0;
    double residual = 0.0;
    double seconds = 0.0;  // wall clock, not serialized
};

struct RadialRow {
    double angle = 0.0;
    std::vector<double> errors;  // one per radius
    std::vector<double> ratios;  // e(2r) / e(r)
};

struct ReciprocityPair {
    int i = 0;
    int j = 0;
    double residual = 0.0;  // relative to max |u_inf|
};

struct OracleReport {
    std::vector<DiskCheck> disks;
    std::string scatterer;
    double k = 0.0;
    std::vector<double> radii;
    std::vector<RadialRow> radial;
    std::vector<ReciprocityPair> reciprocity;
    std::vector<double> trace_offsets;
    std::vector<double> trace_values;
    double condition = 0.0;
    double residual = 0.0;
};

/// Mie comparison on the unit disk, then on the first configured scatterer (the square
/// when none): radial convergence, reciprocity over pairs of incidence directions and
/// the boundary trace at shrinking offsets.
OracleReport run_oracle_check(const ExperimentConfig& cfg, const Log& log = {});

struct Candidate {
    nodal::FlatSegment segment;
    hiddenpath::ReflectionFrame frame;
    hiddenpath::Verdict verdict = hiddenpath::Verdict::Inconclusive;
    std::string error;
};

struct NodalResult {
    std::string source;
    std::shared_ptr<const Field> field;
    std::shared_ptr<const solver::Density> density;  // null for synthetic fields
    geometry::Scatterer scatterer;
    std::shared_ptr<const nodal::SampledField> sampled;
    nodal::NodalDecomposition decomposition;
    std::string ordering_error;
    bool ordering_valid = false;
    std::vector<nodal::FlatSegment> flat;
    std::vector<Candidate> candidates;  // near-flat pieces of the zero set of v
    std::optional<nodal::NodalBound> bound;
    double window_radius = 0.0;
    std::optional<double> far_modulus_deviation;  // max ||u| - 1| at r = 500 / k
};

/// The synthetic field when configured, otherwise the first scatterer.
NodalResult run_nodal_pipeline(const ExperimentConfig& cfg, const Log& log = {});

struct PathResult {
    std::optional<hiddenpath::Start> start;
    std::optional<hiddenpath::HiddenPath> path;
    std::optional<hiddenpath::PathReport> report;
    std::vector<hiddenpath::WalkStep> walk;
    std::string error;  // error code name and message when a stage threw
};

PathResult run_path_pipeline(const ExperimentConfig& cfg, const NodalResult& nodal, const Log& log = {});

io::json to_json(const DistanceMatrix& m);
std::string distance_csv(const DistanceMatrix& m);
io::json to_json(const OracleReport& r);
io::json nodal_report(const NodalResult& r);
io::json path_report(const PathResult& r);

/// Files written under cfg.out_dir; returns their paths.
std::vector<std::filesystem::path> emit_uniqueness(const ExperimentConfig& cfg, const UniquenessResult& r);
std::vector<std::filesystem::path> emit_oracle(const ExperimentConfig& cfg, const OracleReport& r);
std::vector<std::filesystem::path> emit_nodal(const ExperimentConfig& cfg, const NodalResult& r);
std::vector<std::filesystem::path> emit_path(const ExperimentConfig& cfg, const NodalResult& n, const PathResult& r);

} // namespace scatter::experiments
