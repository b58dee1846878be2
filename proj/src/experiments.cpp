#include "scatter/experiments.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace scatter::experiments {

using io::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& what)
{
    throw Error(ErrorCode::InvalidInput, what);
}

void say(const Log& log, const std::string& msg)
{
    if (log) {
        log(msg);
    }
}

class Timer {
public:
    [[nodiscard]] double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

geometry::Scatterer polygon(std::vector<Vec2> v)
{
    return geometry::Scatterer({geometry::make_polygon(std::move(v))}, {});
}

geometry::Scatterer translated(const geometry::Scatterer& s, Vec2 t)
{
    std::vector<geometry::Polygon> polys;
    for (const auto& p : s.polygons()) {
        auto v = p.vertices();
        for (auto& x : v) {
            x += t;
        }
        polys.push_back(geometry::make_polygon(std::move(v)));
    }
    std::vector<geometry::Cell> cells;
    for (const auto& c : s.free_cells()) {
        cells.push_back(geometry::make_free_cell(c.a + t, c.b + t));
    }
    return geometry::Scatterer(std::move(polys), std::move(cells));
}

double wavenumber_from(const json& j, double fallback)
{
    if (j.contains("k")) {
        return j.at("k").get<double>();
    }
    if (j.contains("k_over_pi")) {
        return j.at("k_over_pi").get<double>() * std::numbers::pi;
    }
    return fallback;
}

NamedScatterer scatterer_entry(const json& j, const fs::path& base, std::size_t index)
{
    NamedScatterer out;
    if (j.is_string()) {
        out.name = j.get<std::string>();
        out.shape = preset(out.name);
        return out;
    }
    if (j.contains("preset")) {
        out.shape = preset(j.at("preset").get<std::string>());
        out.name = j.at("preset").get<std::string>();
    } else if (j.contains("file")) {
        const fs::path file = base / j.at("file").get<std::string>();
        if (!fs::exists(file)) {
            bad("scatterer file not found: " + file.string());
        }
        out.shape = io::scatterer_from_json(json::parse(io::read_text(file)));
        out.name = file.stem().string();
    } else if (j.contains("polygons") || j.contains("free_cells")) {
        out.shape = io::scatterer_from_json(j);
        out.name = "scatterer" + std::to_string(index);
    } else {
        bad("scatterer entry needs preset, file or polygons");
    }
    if (j.contains("translate")) {
        out.shape = translated(out.shape, io::vec2_from_json(j.at("translate")));
    }
    out.name = j.value("name", out.name);
    out.nodes_per_wavelength = j.value("ppw", 0.0);
    return out;
}

oracle::SyntheticField synthetic_from(const json& j, double k_default)
{
    const std::string kind = j.at("kind").get<std::string>();
    const double k = wavenumber_from(j, k_default);
    if (kind == "plane_standing") {
        return oracle::plane_standing(k, io::vec2_from_json(j.value("normal", json::array({1.0, 0.0}))));
    }
    if (kind == "radial_bessel") {
        return oracle::radial_bessel(k, io::vec2_from_json(j.value("center", json::array({0.0, 0.0}))));
    }
    if (kind == "sum_of_plane_waves") {
        std::vector<oracle::PlaneTerm> terms;
        for (const auto& t : j.at("terms")) {
            terms.push_back({io::vec2_from_json(t.at("direction")), t.value("amplitude", 1.0), t.value("phase", 0.0)});
        }
        return oracle::sum_of_plane_waves(k, std::move(terms));
    }
    bad("unknown synthetic kind: " + kind);
}

std::string error_text(const std::exception& e)
{
    return e.what();
}

double lambda_of(double k)
{
    return 2.0 * std::numbers::pi / k;
}

json verdict_json(hiddenpath::Verdict v)
{
    switch (v) {
    case hiddenpath::Verdict::Odd:
        return "odd";
    case hiddenpath::Verdict::Refuted:
        return "refuted";
    case hiddenpath::Verdict::Inconclusive:
        break;
    }
    return "inconclusive";
}

json with_tool(json j)
{
    j["tool"] = io::tool_info();
    return j;
}

fs::path write(const ExperimentConfig& cfg, const std::string& name, const std::string& text)
{
    const fs::path file = cfg.out_dir / name;
    io::write_text(file, text);
    return file;
}

} // namespace

geometry::Scatterer preset(const std::string& name)
{
    if (name == "square") {
        return polygon({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
    }
    if (name == "triangle") {
        const double r = std::sqrt(3.0) / 6.0;
        return polygon({{-0.5, -r}, {0.5, -r}, {0.0, 2.0 * r}});
    }
    if (name == "l-hexagon") {
        return polygon({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.0}, {0.0, 0.0}, {0.0, 0.5}, {-0.5, 0.5}});
    }
    if (name == "pentagon") {
        std::vector<Vec2> v;
        for (int i = 0; i < 5; ++i) {
            const double a = 0.5 * std::numbers::pi + 2.0 * std::numbers::pi * i / 5.0;
            v.push_back({0.6 * std::cos(a), 0.6 * std::sin(a)});
        }
        return polygon(std::move(v));
    }
    if (name == "rectangle") {
        return polygon({{-0.6, -0.35}, {0.6, -0.35}, {0.6, 0.35}, {-0.6, 0.35}});
    }
    bad("unknown preset: " + name);
}

std::vector<std::string> preset_names()
{
    return {"square", "triangle", "l-hexagon", "pentagon", "rectangle"};
}

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir)
{
    ExperimentConfig cfg;
    if (j.contains("waves")) {
        bad("exactly one incident wave per run");
    }
    const json wave = j.value("wave", json::object());
    cfg.wave = solver::make_wave(wavenumber_from(wave, 2.0 * std::numbers::pi),
                                 io::vec2_from_json(wave.value("omega", json::array({1.0, 0.0}))));
    cfg.nodes_per_wavelength = j.value("ppw", cfg.nodes_per_wavelength);
    cfg.directions = j.value("directions", cfg.directions);
    if (cfg.directions < kMinDirections) {
        bad("at least " + std::to_string(kMinDirections) + " far-field directions are required");
    }
    const auto scatterers = j.value("scatterers", json::array());
    for (std::size_t i = 0; i < scatterers.size(); ++i) {
        cfg.scatterers.push_back(scatterer_entry(scatterers[i], base_dir, i));
    }
    if (j.contains("nodal")) {
        const auto& n = j.at("nodal");
        cfg.window_half_width = n.value("half_width", 0.0);
        cfg.spacing = n.value("spacing", 0.0);
        if (n.contains("thresholds")) {
            const auto& t = n.at("thresholds");
            nodal::Thresholds th;
            th.grad_floor = t.at("grad_floor").get<double>();
            th.v_floor = t.value("v_floor", th.v_floor);
            th.im_floor = t.at("im_floor").get<double>();
            th.min_length = t.at("min_length").get<double>();
            th.dev_tol = t.at("dev_tol").get<double>();
            cfg.thresholds = th;
        }
    }
    if (j.contains("synthetic")) {
        cfg.synthetic = synthetic_from(j.at("synthetic"), cfg.wave.k);
    }
    if (j.contains("path")) {
        const auto& p = j.at("path");
        cfg.path.candidates = p.value("candidates", cfg.path.candidates);
        if (p.contains("anchor")) {
            cfg.path.anchor = io::vec2_from_json(p.at("anchor"));
        }
        if (p.contains("normal")) {
            cfg.path.anchor_normal = normalized(io::vec2_from_json(p.at("normal")));
        }
        if (p.contains("target")) {
            if (p.at("target").is_string()) {
                if (p.at("target").get<std::string>() != "auto") {
                    bad("path.target must be a point or \"auto\"");
                }
                cfg.path.auto_target = true;
            } else {
                cfg.path.target = io::vec2_from_json(p.at("target"));
            }
        }
        cfg.path.escape_radius = p.value("escape_radius", 0.0);
        cfg.path.escape_factor = p.value("escape_factor", cfg.path.escape_factor);
    }
    if (j.contains("oracle")) {
        const auto& o = j.at("oracle");
        cfg.oracle.disk_ka = o.value("disk_ka", cfg.oracle.disk_ka);
        cfg.oracle.disk_ppw = o.value("disk_ppw", cfg.oracle.disk_ppw);
        cfg.oracle.radial_directions = o.value("radial_directions", cfg.oracle.radial_directions);
        cfg.oracle.radial_kr = o.value("radial_kr", cfg.oracle.radial_kr);
        cfg.oracle.reciprocity_directions = o.value("reciprocity_directions", cfg.oracle.reciprocity_directions);
        cfg.oracle.trace_offsets = o.value("trace_offsets", cfg.oracle.trace_offsets);
    }
    cfg.out_dir = j.value("out", std::string("out"));
    cfg.seed = j.value("seed", std::uint64_t{1});
    return cfg;
}

ExperimentConfig load_config(const fs::path& file)
{
    json j;
    try {
        j = json::parse(io::read_text(file));
    } catch (const json::exception& e) {
        bad(file.string() + ": " + e.what());
    }
    try {
        return config_from_json(j, file.parent_path());
    } catch (const json::exception& e) {
        bad(file.string() + ": " + e.what());
    }
}

Solved solve(const geometry::Scatterer& s, const solver::WaveParams& wave, double ppw, int directions)
{
    auto density = std::make_shared<const solver::Density>(solver::solve_density(solver::assemble(s, wave, ppw)));
    auto pattern = solver::far_field(*density, directions);
    return {std::move(density), std::move(pattern)};
}

double relative_distance(const solver::FarFieldPattern& a, const solver::FarFieldPattern& b)
{
    if (a.size() != b.size()) {
        bad("patterns have different direction counts");
    }
    double diff = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) {
        diff += std::norm(a.values[m] - b.values[m]);
        na += std::norm(a.values[m]);
        nb += std::norm(b.values[m]);
    }
    const double scale = std::max(na, nb);
    return scale > 0.0 ? std::sqrt(diff / scale) : 0.0;
}

double translation_residual(const solver::FarFieldPattern& moved, const solver::FarFieldPattern& original, Vec2 t)
{
    if (moved.size() != original.size()) {
        bad("patterns have different direction counts");
    }
    const double k = original.wave.k;
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t m = 0; m < original.size(); ++m) {
        const Complex phase = std::exp(Complex(0.0, k * dot(original.wave.omega - original.directions[m], t)));
        worst = std::max(worst, std::abs(moved.values[m] - phase * original.values[m]));
        scale = std::max(scale, std::abs(original.values[m]));
    }
    return worst / scale;
}

UniquenessResult run_uniqueness(const ExperimentConfig& cfg, const Log& log)
{
    if (cfg.scatterers.size() < 2) {
        bad("uniqueness needs at least two scatterers");
    }
    const std::size_t n = cfg.scatterers.size();
    UniquenessResult r;
    r.matrix.errors.assign(n, "");
    r.patterns.resize(n);
    r.residuals.assign(n, std::numeric_limits<double>::quiet_NaN());
    r.conditions.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = cfg.scatterers[i];
        r.matrix.labels.push_back(s.name);
        const double ppw = s.nodes_per_wavelength > 0.0 ? s.nodes_per_wavelength : cfg.nodes_per_wavelength;
        Timer timer;
        try {
            if (!s.shape.free_cells().empty()) {
                throw Error(ErrorCode::FreeCellsUnsupported, "uniqueness runs take polygons only");
            }
            auto solved = solve(s.shape, cfg.wave, ppw, cfg.directions);
            r.residuals[i] = solved.density->residual;
            r.conditions[i] = solved.density->condition;
            r.patterns[i] = std::move(solved.pattern);
            say(log, s.name + ": solved in " + fmt("%.2f s", timer.seconds()));
        } catch (const std::exception& e) {
            r.matrix.errors[i] = error_text(e);
            say(log, s.name + ": failed: " + r.matrix.errors[i]);
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.matrix.entries.assign(n, std::vector<double>(n, nan));
    for (std::size_t i = 0; i < n; ++i) {
        if (r.matrix.failed(i)) {
            continue;
        }
        r.matrix.entries[i][i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!r.matrix.failed(j)) {
                const double d = relative_distance(*r.patterns[i], *r.patterns[j]);
                r.matrix.entries[i][j] = d;
                r.matrix.entries[j][i] = d;
            }
        }
    }
    return r;
}

OracleReport run_oracle_check(const ExperimentConfig& cfg, const Log& log)
{
    OracleReport r;
    for (const double ka : cfg.oracle.disk_ka) {
        Timer timer;
        const solver::WaveParams wave = solver::make_wave(ka, cfg.wave.omega);
        const auto density = solver::solve_density(solver::assemble(solver::Disk{{}, 1.0}, wave, cfg.oracle.disk_ppw));
        const auto computed = solver::far_field(density, cfg.directions);
        const auto exact = oracle::disk_far_field(ka, 1.0, wave.omega, cfg.directions);
        double err = 0.0;
        double scale = 0.0;
        for (std::size_t m = 0; m < exact.size(); ++m) {
            err = std::max(err, std::abs(computed.values[m] - exact.values[m]));
            scale = std::max(scale, std::abs(exact.values[m]));
        }
        r.disks.push_back({ka, cfg.oracle.disk_ppw, static_cast<int>(density.system->size()), err / scale,
                           density.condition, density.residual, timer.seconds()});
        say(log, "disk ka=" + fmt("%g", ka) + ": error " + fmt("%.3g", err / scale) + " in " +
                     fmt("%.2f s", timer.seconds()));
    }

    const NamedScatterer s = cfg.scatterers.empty() ? NamedScatterer{"square", preset("square"), 0.0}
                                                    : cfg.scatterers.front();
    const double ppw = s.nodes_per_wavelength > 0.0 ? s.nodes_per_wavelength : cfg.nodes_per_wavelength;
    r.scatterer = s.name;
    r.k = cfg.wave.k;
    Timer timer;
    const auto base = solve(s.shape, cfg.wave, ppw, cfg.directions);
    r.condition = base.density->condition;
    r.residual = base.density->residual;
    say(log, s.name + ": solved in " + fmt("%.2f s", timer.seconds()));

    for (const double kr : cfg.oracle.radial_kr) {
        r.radii.push_back(kr / cfg.wave.k);
    }
    for (int m = 0; m < cfg.oracle.radial_directions; ++m) {
        const double a = 2.0 * std::numbers::pi * m / cfg.oracle.radial_directions;
        RadialRow row;
        row.angle = a;
        row.errors = solver::radial_limit_check(*base.density, {std::cos(a), std::sin(a)}, r.radii);
        for (std::size_t i = 1; i < row.errors.size(); ++i) {
            row.ratios.push_back(row.errors[i] / row.errors[i - 1]);
        }
        r.radial.push_back(std::move(row));
    }

    const int nd = cfg.oracle.reciprocity_directions;
    std::vector<std::shared_ptr<const solver::Density>> densities;
    std::vector<Vec2> omegas;
    std::vector<double> peaks;
    for (int i = 0; i < nd; ++i) {
        const double a = 0.3 + 2.0 * std::numbers::pi * i / nd;
        omegas.push_back({std::cos(a), std::sin(a)});
        auto solved = solve(s.shape, solver::make_wave(cfg.wave.k, omegas.back()), ppw, cfg.directions);
        double peak = 0.0;
        for (const auto& v : solved.pattern.values) {
            peak = std::max(peak, std::abs(v));
        }
        peaks.push_back(peak);
        densities.push_back(std::move(solved.density));
    }
    for (int i = 0; i < nd; ++i) {
        for (int j = i + 1; j < nd; ++j) {
            const Complex a = solver::far_field_at(*densities[i], -omegas[j]);
            const Complex b = solver::far_field_at(*densities[j], -omegas[i]);
            r.reciprocity.push_back({i, j, std::abs(a - b) / std::max(peaks[i], peaks[j])});
        }
    }

    const auto probes = solver::trace_probes(*base.density, 3);
    for (const double delta : cfg.oracle.trace_offsets) {
        r.trace_offsets.push_back(delta);
        r.trace_values.push_back(solver::boundary_trace_check(*base.density, probes, delta));
    }
    return r;
}

NodalResult run_nodal_pipeline(const ExperimentConfig& cfg, const Log& log)
{
    NodalResult r;
    Timer timer;
    double k = cfg.wave.k;
    if (cfg.synthetic) {
        k = cfg.synthetic->k;
        r.field = std::make_shared<oracle::SyntheticAdapter>(*cfg.synthetic);
        r.source = "synthetic";
    } else {
        if (cfg.scatterers.empty()) {
            bad("the nodal pipeline needs a scatterer or a synthetic field");
        }
        const auto& s = cfg.scatterers.front();
        const double ppw = s.nodes_per_wavelength > 0.0 ? s.nodes_per_wavelength : cfg.nodes_per_wavelength;
        r.scatterer = s.shape;
        r.source = s.name;
        r.density = std::make_shared<const solver::Density>(
            solver::solve_density(solver::assemble(s.shape, cfg.wave, ppw)));
        r.field = std::make_shared<solver::ScatteringField>(r.density);
        say(log, "solved in " + fmt("%.2f s", timer.seconds()));
    }
    const double lambda = lambda_of(k);
    const double half = cfg.window_half_width > 0.0
                            ? cfg.window_half_width
                            : std::max(3.0 * lambda, 2.5 * r.scatterer.bounding_radius());
    const double h = cfg.spacing > 0.0 ? cfg.spacing : lambda / 20.0;
    r.window_radius = half;
    r.sampled = std::make_shared<const nodal::SampledField>(
        nodal::sample_field(r.field, r.scatterer, nodal::square_window(half), h));
    say(log, "sampled " + std::to_string(r.sampled->nx) + "x" + std::to_string(r.sampled->ny) + " nodes at " +
                 fmt("%.2f s", timer.seconds()));

    r.decomposition = cfg.thresholds ? nodal::nodal_domains(r.sampled, *cfg.thresholds)
                                     : nodal::nodal_domains(r.sampled);
    auto& d = r.decomposition;
    if (!d.domains.empty()) {
        try {
            d.ordering = nodal::order_domains(d, 0);
        } catch (const Error& e) {
            r.ordering_error = e.what();
        }
    }
    r.ordering_valid = !d.ordering.empty() && nodal::ordering_valid(d, d.ordering, d.thresholds.grad_floor);
    say(log, std::to_string(d.domains.size()) + " domains, " + std::to_string(d.adjacency.size()) +
                 " adjacencies at " + fmt("%.2f s", timer.seconds()));

    r.flat = nodal::flat_points(d);
    for (auto& seg : nodal::flat_points_of_v(d, d.thresholds.min_length, d.thresholds.dev_tol)) {
        Candidate c;
        c.segment = seg;
        try {
            c.frame = hiddenpath::reflect_check(*r.sampled, r.scatterer, seg);
            c.verdict = hiddenpath::classify(c.frame);
        } catch (const Error& e) {
            c.error = e.what();
        }
        r.candidates.push_back(std::move(c));
    }
    say(log, std::to_string(r.flat.size()) + " flat points, " + std::to_string(r.candidates.size()) +
                 " candidates checked at " + fmt("%.2f s", timer.seconds()));

    if (r.density) {
        r.bound = nodal::nodal_bound(*r.sampled, r.scatterer.bounding_radius());
        const double radius = 500.0 / k;
        double dev = 0.0;
        for (int m = 0; m < 32; ++m) {
            const double a = 2.0 * std::numbers::pi * m / 32;
            const Complex u = solver::total_field(*r.density, radius * Vec2{std::cos(a), std::sin(a)}).value;
            dev = std::max(dev, std::abs(std::abs(u) - 1.0));
        }
        r.far_modulus_deviation = dev;
    }
    return r;
}

PathResult run_path_pipeline(const ExperimentConfig& cfg, const NodalResult& n, const Log& log)
{
    PathResult r;
    const auto& d = n.decomposition;
    Timer timer;
    try {
        if (cfg.path.anchor) {
            r.start = hiddenpath::Start{*cfg.path.anchor, normalized(cfg.path.anchor_normal), 0.0};
        } else if (n.density) {
            const auto density = n.density;
            r.start = hiddenpath::pick_start(n.scatterer, *n.field, cfg.path.candidates, cfg.seed,
                                             d.thresholds.grad_floor,
                                             [density](Vec2 x) { return solver::near_guard(*density, x); });
        } else {
            bad("a synthetic field needs path.anchor");
        }
        double escape = cfg.path.escape_radius;
        if (escape <= 0.0) {
            if (!n.bound) {
                bad("a synthetic field needs path.escape_radius");
            }
            escape = cfg.path.escape_factor * n.bound->r_nodal;
        }
        std::optional<Vec2> target = cfg.path.target;
        if (cfg.path.auto_target) {
            const nodal::Adjacency* best = nullptr;
            for (const auto& a : d.adjacency) {
                if (!best || a.witness.min_grad > best->witness.min_grad) {
                    best = &a;
                }
            }
            if (best) {
                target = best->witness.samples[best->witness.samples.size() / 2];
            }
        }
        r.path = hiddenpath::build_path(d, n.scatterer, *r.start, target, escape);
        r.report = hiddenpath::verify_path(*r.path, *n.sampled, d.thresholds.grad_floor, d.critical_points);
        r.walk = hiddenpath::flat_point_walk(*r.path, d, n.scatterer);
        say(log, std::string(r.report->certified ? "certified" : "not certified") + " path with " +
                     std::to_string(r.path->crossings.size()) + " crossings in " + fmt("%.2f s", timer.seconds()));
    } catch (const Error& e) {
        r.error = e.what();
        say(log, "path pipeline: " + r.error);
    }
    return r;
}

json to_json(const DistanceMatrix& m)
{
    return {{"labels", m.labels}, {"entries", m.entries}, {"errors", m.errors}};
}

std::string distance_csv(const DistanceMatrix& m)
{
    std::string out = "label";
    for (const auto& l : m.labels) {
        out += "," + l;
    }
    out += "\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out += m.labels[i];
        for (const double e : m.entries[i]) {
            out += "," + (std::isnan(e) ? std::string("failed") : fmt("%.17g", e));
        }
        out += "\n";
    }
    return out;
}

json to_json(const OracleReport& r)
{
    json disks = json::array();
    for (const auto& d : r.disks) {
        disks.push_back({{"ka", d.ka},
                         {"ppw", d.ppw},
                         {"unknowns", d.unknowns},
                         {"max_relative_error", d.max_relative_error},
                         {"condition", d.condition},
                         {"residual", d.residual}});
    }
    json radial = json::array();
    for (const auto& row : r.radial) {
        radial.push_back({{"angle", row.angle}, {"errors", row.errors}, {"ratios", row.ratios}});
    }
    json recip = json::array();
    for (const auto& p : r.reciprocity) {
        recip.push_back({{"i", p.i}, {"j", p.j}, {"residual", p.residual}});
    }
    return with_tool({{"disks", disks},
                      {"scatterer", r.scatterer},
                      {"k", r.k},
                      {"condition", r.condition},
                      {"residual", r.residual},
                      {"radii", r.radii},
                      {"radial", radial},
                      {"reciprocity", recip},
                      {"trace", {{"offsets", r.trace_offsets}, {"max_abs_u", r.trace_values}}}});
}

json nodal_report(const NodalResult& r)
{
    const auto& d = r.decomposition;
    json flat = json::array();
    for (const auto& s : r.flat) {
        flat.push_back(io::to_json(s));
    }
    json candidates = json::array();
    for (const auto& c : r.candidates) {
        json e = {{"segment", io::to_json(c.segment)}, {"verdict", verdict_json(c.verdict)}};
        if (c.error.empty()) {
            e["reflection"] = io::to_json(c.frame, false);
        } else {
            e["error"] = c.error;
        }
        candidates.push_back(std::move(e));
    }
    json out = {{"source", r.source},
                {"window_radius", r.window_radius},
                {"h", r.sampled->h},
                {"domains", d.domains.size()},
                {"adjacencies", d.adjacency.size()},
                {"critical_points", d.critical_points.size()},
                {"ordering", d.ordering},
                {"ordering_valid", r.ordering_valid},
                {"ordering_error", r.ordering_error},
                {"flat_points", flat},
                {"near_flat_candidates", candidates}};
    if (r.bound) {
        out["bound"] = {{"zeros", json::array()},
                        {"r_nodal", r.bound->r_nodal},
                        {"annulus_inner", r.bound->annulus_inner},
                        {"annulus_outer", r.bound->annulus_outer},
                        {"annulus_zeros", r.bound->annulus_zeros},
                        {"annulus_cells", r.bound->annulus_cells},
                        {"annulus_empty", r.bound->annulus_empty()}};
        for (const auto& z : r.bound->zeros) {
            out["bound"]["zeros"].push_back(io::to_json(z));
        }
    }
    if (r.far_modulus_deviation) {
        out["far_modulus_deviation"] = *r.far_modulus_deviation;
    }
    return with_tool(std::move(out));
}

json path_report(const PathResult& r)
{
    json out = {{"error", r.error}};
    if (r.start) {
        out["start"] = {{"point", io::to_json(r.start->point)},
                        {"normal", io::to_json(r.start->normal)},
                        {"dv_dn", r.start->dv_dn}};
    }
    if (r.report) {
        out["certification"] = io::to_json(*r.report);
    }
    json walk = json::array();
    for (const auto& s : r.walk) {
        walk.push_back({{"t", s.t}, {"point", io::to_json(s.point)}, {"residual", s.residual}});
    }
    out["walk"] = walk;
    return with_tool(std::move(out));
}

std::vector<fs::path> emit_uniqueness(const ExperimentConfig& cfg, const UniquenessResult& r)
{
    std::vector<fs::path> files;
    json out = to_json(r.matrix);
    out["k"] = cfg.wave.k;
    out["omega"] = io::to_json(cfg.wave.omega);
    out["directions"] = cfg.directions;
    out["residuals"] = r.residuals;
    out["conditions"] = r.conditions;
    files.push_back(write(cfg, "distance_matrix.json", io::dump(with_tool(out))));
    files.push_back(write(cfg, "distance_matrix.csv", distance_csv(r.matrix)));
    for (std::size_t i = 0; i < r.patterns.size(); ++i) {
        if (r.patterns[i]) {
            files.push_back(write(cfg, "farfield_" + r.matrix.labels[i] + ".csv", io::far_field_csv(*r.patterns[i])));
        }
    }
    return files;
}

std::vector<fs::path> emit_oracle(const ExperimentConfig& cfg, const OracleReport& r)
{
    return {write(cfg, "oracle_report.json", io::dump(to_json(r)))};
}

std::vector<fs::path> emit_nodal(const ExperimentConfig& cfg, const NodalResult& r)
{
    std::vector<fs::path> files;
    files.push_back(write(cfg, "nodal.json", io::dump(with_tool(io::to_json(r.decomposition)))));
    files.push_back(write(cfg, "nodal_report.json", io::dump(nodal_report(r))));
    io::SvgLayers layers;
    layers.decomposition = &r.decomposition;
    layers.scatterer = &r.scatterer;
    layers.flat = r.flat;
    files.push_back(write(cfg, "nodal.svg", io::render_svg(layers)));
    return files;
}

std::vector<fs::path> emit_path(const ExperimentConfig& cfg, const NodalResult& n, const PathResult& r)
{
    std::vector<fs::path> files;
    if (r.path) {
        files.push_back(write(cfg, "path.json", io::dump(with_tool(io::to_json(*r.path)))));
    }
    files.push_back(write(cfg, "path_report.json", io::dump(path_report(r))));
    io::SvgLayers layers;
    layers.decomposition = &n.decomposition;
    layers.scatterer = &n.scatterer;
    layers.path = r.path ? &*r.path : nullptr;
    layers.flat = n.flat;
    files.push_back(write(cfg, "path.svg", io::render_svg(layers)));
    return files;
}

} // namespace scatter::experiments
