#pragma once

#include "scatter/geometry.hpp"
#include "scatter/hiddenpath.hpp"
#include "scatter/nodal.hpp"
#include "scatter/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

// JSON, CSV and SVG emitters and their parsers.
namespace scatter::io {

using nlohmann::json;

inline constexpr const char* kToolName = "scatter";
inline constexpr const char* kToolVersion = "0.1.0";

json tool_info();

json to_json(Vec2 p);
Vec2 vec2_from_json(const json& j);

/// {"polygons": [[[x, y], ...], ...], "free_cells": [[[x1, y1], [x2, y2]], ...]}.
json to_json(const geometry::Scatterer& s);
geometry::Scatterer scatterer_from_json(const json& j);

/// Header "# k=<k> omega_x=<x> omega_y=<y>", a column line, then one row per direction
/// with 17 significant digits.
std::string far_field_csv(const solver::FarFieldPattern& p);
solver::FarFieldPattern parse_far_field_csv(const std::string& text);
/// Same wave, same angles and values.
bool same_pattern(const solver::FarFieldPattern& a, const solver::FarFieldPattern& b);

/// Everything of a decomposition except the field samples: window, spacing, thresholds,
/// polylines, critical points, run-length encoded labels, domains, adjacency, ordering.
json to_json(const nodal::NodalDecomposition& d);
/// The sampled field comes back with its geometry only (no values, no evaluator).
nodal::NodalDecomposition decomposition_from_json(const json& j);
bool same_decomposition(const nodal::NodalDecomposition& a, const nodal::NodalDecomposition& b);

/// [[label, count], ...] over the grid in row-major order.
json run_length_encode(std::span<const int> labels);
std::vector<int> run_length_decode(const json& j);

json to_json(const nodal::FlatSegment& s);

json to_json(const hiddenpath::HiddenPath& p);
hiddenpath::HiddenPath path_from_json(const json& j);
json to_json(const hiddenpath::PathReport& r);
json to_json(const hiddenpath::ReflectionFrame& r, bool with_points);

struct SvgLayers {
    const nodal::NodalDecomposition* decomposition = nullptr;
    const geometry::Scatterer* scatterer = nullptr;
    const hiddenpath::HiddenPath* path = nullptr;
    std::span<const nodal::FlatSegment> flat;
};

/// Domains tinted by sign, nodal polylines black, critical points, the path red with
/// circles at its crossings, and flat segments as thick overlays.
std::string render_svg(const SvgLayers& layers);

/// Deterministic text: two-space indented JSON with a trailing newline.
std::string dump(const json& j);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

} // namespace scatter::io
