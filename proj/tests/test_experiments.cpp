#include "scatter/error.hpp"
#include "scatter/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace scatter;
using namespace scatter::experiments;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig parse(const std::string& text, const fs::path& base = ".")
{
    return config_from_json(io::json::parse(text), base);
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("scatter_tests_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
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

TEST_SUITE("experiments")
{
    TEST_CASE("presets")
    {
        for (const auto& name : preset_names()) {
            CHECK(preset(name).polygons().size() == 1);
        }
        const auto tri = preset("triangle").polygons()[0];
        CHECK(norm(tri.centroid()) <= 1e-15);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto [a, b] = tri.edge(i);
            CHECK(distance(a, b) == doctest::Approx(1.0));
        }
        CHECK(norm(preset("square").polygons()[0].centroid()) <= 1e-15);
        CHECK(preset("l-hexagon").polygons()[0].area() == doctest::Approx(0.75));
        const auto pentagon = preset("pentagon");
        for (const auto& v : pentagon.polygons()[0].vertices()) {
            CHECK(norm(v) == doctest::Approx(0.6));
        }
        CHECK(preset("rectangle").polygons()[0].area() == doctest::Approx(1.2 * 0.7));
        CHECK_THROWS_AS(preset("circle"), Error);
    }

    TEST_CASE("configuration")
    {
        const auto dir = scratch("config");
        io::write_text(dir / "shape.json", io::dump(io::to_json(preset("pentagon"))));
        const auto cfg = parse(R"({
            "wave": {"k": 3.5, "omega": [0, 2]},
            "ppw": 12, "directions": 128, "seed": 9, "out": "results",
            "scatterers": ["square",
                           {"preset": "square", "translate": [0.3, 0], "name": "moved", "ppw": 20},
                           {"file": "shape.json"},
                           {"polygons": [[[0,0],[1,0],[0,1]]]}],
            "nodal": {"half_width": 2, "spacing": 0.01},
            "path": {"target": "auto", "candidates": 8}
        })",
                               dir);
        CHECK(cfg.wave.k == 3.5);
        CHECK(cfg.wave.omega == Vec2{0, 1});
        CHECK(cfg.nodes_per_wavelength == 12);
        CHECK(cfg.directions == 128);
        CHECK(cfg.seed == 9);
        CHECK(cfg.out_dir == "results");
        REQUIRE(cfg.scatterers.size() == 4);
        CHECK(cfg.scatterers[1].name == "moved");
        CHECK(cfg.scatterers[1].nodes_per_wavelength == 20);
        CHECK(cfg.scatterers[1].shape.polygons()[0].centroid().x == doctest::Approx(0.3));
        CHECK(cfg.scatterers[2].name == "shape");
        CHECK(cfg.scatterers[2].shape == preset("pentagon"));
        CHECK(cfg.window_half_width == 2);
        CHECK(cfg.path.auto_target);
        CHECK(cfg.path.candidates == 8);

        CHECK(code_of([] { parse(R"({"directions": 32})"); }) == ErrorCode::InvalidInput);
        CHECK(code_of([] { parse(R"({"scatterers": [{"file": "missing.json"}]})"); }) == ErrorCode::InvalidInput);
        CHECK(code_of([] { parse(R"({"waves": [{"k": 1}, {"k": 2}]})"); }) == ErrorCode::InvalidInput);
        CHECK(code_of([] { parse(R"({"scatterers": [{"shape": 1}]})"); }) == ErrorCode::InvalidInput);
    }

    TEST_CASE("uniqueness matrix")
    {
        const auto cfg = parse(R"({
            "wave": {"k_over_pi": 2},
            "scatterers": [{"preset": "square", "name": "square10"},
                           {"preset": "square", "name": "square20", "ppw": 20},
                           "triangle",
                           {"name": "cracked", "polygons": [[[0,0],[1,0],[0,1]]], "free_cells": [[[2,0],[3,0]]]}]
        })");
        const auto r = run_uniqueness(cfg);
        const auto& m = r.matrix;
        CHECK(m.failed(3));
        CHECK_FALSE(m.errors[3].empty());
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK_FALSE(m.failed(i));
            CHECK(m.entries[i][i] == 0.0);
            CHECK(std::isnan(m.entries[i][3]));
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(m.entries[i][j] == m.entries[j][i]);
                CHECK(m.entries[i][j] >= 0.0);
            }
        }
        CHECK(m.entries[0][1] <= 1e-5);
        CHECK(m.entries[0][2] >= 1e-2);
        CHECK(distance_csv(m).find("failed") != std::string::npos);
    }

    TEST_CASE("translation phase law")
    {
        const auto w = solver::make_wave(2 * kPi, {1, 0});
        const Vec2 t{0.3, 0};
        const auto base = solve(preset("square"), w, 20, 64);
        const auto moved = solve(parse(R"({"scatterers": [{"preset": "square", "translate": [0.3, 0]}]})")
                                     .scatterers[0]
                                     .shape,
                                 w, 20, 64);
        CHECK(relative_distance(base.pattern, moved.pattern) > 1e-3);
        CHECK(translation_residual(moved.pattern, base.pattern, t) <= 1e-6);
    }

    TEST_CASE("oracle check")
    {
        auto cfg = parse(R"({"wave": {"k_over_pi": 2}, "scatterers": ["square"],
                            "oracle": {"disk_ka": [2, 10], "disk_ppw": 20}})");
        const auto r = run_oracle_check(cfg);
        REQUIRE(r.disks.size() == 2);
        CHECK(r.disks[0].max_relative_error <= 1e-6);
        CHECK(r.disks[1].max_relative_error <= 1e-5);
        for (const auto& d : r.disks) {
            CHECK(d.condition >= 1.0);
            CHECK(d.residual <= 1e-10);
        }
        CHECK(r.reciprocity.size() == 10);
        CHECK(r.radial.size() == 16);
        const auto j = to_json(r);
        CHECK(j.contains("condition"));
        CHECK(j.at("disks")[0].contains("residual"));
    }

    TEST_CASE("nodal pipelines")
    {
        const auto strips = run_nodal_pipeline(parse(R"({
            "wave": {"k_over_pi": 1},
            "synthetic": {"kind": "plane_standing", "normal": [1, 0]},
            "nodal": {"half_width": 3, "spacing": 0.05}
        })"));
        CHECK(strips.flat.size() == 7);
        CHECK(strips.ordering_valid);
        CHECK_FALSE(strips.bound);

        const auto tri = run_nodal_pipeline(parse(R"({"wave": {"k_over_pi": 2}, "scatterers": ["triangle"]})"));
        CHECK(tri.flat.empty());
        CHECK(tri.ordering_valid);
        REQUIRE(tri.bound);
        CHECK(tri.bound->r_nodal < tri.window_radius);
        CHECK(tri.bound->annulus_empty());
        for (const auto& c : tri.candidates) {
            CHECK(c.verdict == hiddenpath::Verdict::Refuted);
        }
    }

    TEST_CASE("path pipelines")
    {
        const auto cfg = parse(R"({
            "wave": {"k_over_pi": 2},
            "synthetic": {"kind": "sum_of_plane_waves",
                          "terms": [{"direction": [1, 0]}, {"direction": [0, 1]}]},
            "nodal": {"half_width": 1, "spacing": 0.025},
            "path": {"anchor": [-0.9, 0.1], "normal": [1, 0], "target": [0.25, -0.25], "escape_radius": 0.5}
        })");
        const auto n = run_nodal_pipeline(cfg);
        const auto r = run_path_pipeline(cfg, n);
        CHECK_FALSE(r.path);
        CHECK(r.error.find("TargetOnCriticalPoint") != std::string::npos);
        CHECK(path_report(r).at("error").get<std::string>() == r.error);

        const auto square_cfg = parse(R"({"wave": {"k_over_pi": 2}, "scatterers": ["square"], "seed": 7,
                                          "path": {"target": "auto"}})");
        const auto sq = run_nodal_pipeline(square_cfg);
        const auto p = run_path_pipeline(square_cfg, sq);
        REQUIRE(p.report);
        CHECK(p.report->certified);
        CHECK(p.walk.empty());
    }

    TEST_CASE("runs are deterministic")
    {
        const auto a_dir = scratch("det_a");
        const auto b_dir = scratch("det_b");
        auto cfg = parse(R"({"wave": {"k_over_pi": 2}, "scatterers": ["square"], "seed": 3,
                             "nodal": {"half_width": 1.5}})");
        std::vector<std::string> texts[2];
        for (int run = 0; run < 2; ++run) {
            cfg.out_dir = run == 0 ? a_dir : b_dir;
            const auto n = run_nodal_pipeline(cfg);
            const auto p = run_path_pipeline(cfg, n);
            for (const auto& f : emit_nodal(cfg, n)) {
                texts[run].push_back(io::read_text(f));
            }
            for (const auto& f : emit_path(cfg, n, p)) {
                texts[run].push_back(io::read_text(f));
            }
        }
        CHECK(texts[0].size() >= 5);
        CHECK(texts[0] == texts[1]);
        CHECK(io::json::parse(texts[0][0]).at("tool").at("version") == io::kToolVersion);
    }

    TEST_CASE("uniqueness files")
    {
        auto cfg = parse(R"({"wave": {"k_over_pi": 1}, "scatterers": ["square", "triangle"]})");
        cfg.out_dir = scratch("uniq");
        const auto r = run_uniqueness(cfg);
        const auto files = emit_uniqueness(cfg, r);
        CHECK(files.size() == 4);
        const auto j = io::json::parse(io::read_text(cfg.out_dir / "distance_matrix.json"));
        CHECK(j.at("labels") == io::json::array({"square", "triangle"}));
        CHECK(j.at("entries")[0][1].get<double>() == r.matrix.entries[0][1]);
        const auto back = io::parse_far_field_csv(io::read_text(cfg.out_dir / "farfield_square.csv"));
        CHECK(io::same_pattern(back, *r.patterns[0]));
    }
}
