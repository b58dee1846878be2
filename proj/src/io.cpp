#include "scatter/io.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scatter::io {

namespace {

std::string g17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json points_json(std::span<const Vec2> pts)
{
    json a = json::array();
    for (const auto& p : pts) {
        a.push_back(to_json(p));
    }
    return a;
}

std::vector<Vec2> points_from(const json& j)
{
    std::vector<Vec2> out;
    out.reserve(j.size());
    for (const auto& p : j) {
        out.push_back(vec2_from_json(p));
    }
    return out;
}

[[noreturn]] void bad(const std::string& what)
{
    throw Error(ErrorCode::InvalidInput, what);
}

} // namespace

json tool_info()
{
    return {{"name", kToolName}, {"version", kToolVersion}};
}

json to_json(Vec2 p)
{
    return json::array({p.x, p.y});
}

Vec2 vec2_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 2) {
        bad("expected a point [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const geometry::Scatterer& s)
{
    json polys = json::array();
    for (const auto& p : s.polygons()) {
        polys.push_back(points_json(p.vertices()));
    }
    json cells = json::array();
    for (const auto& c : s.free_cells()) {
        cells.push_back(json::array({to_json(c.a), to_json(c.b)}));
    }
    return {{"polygons", polys}, {"free_cells", cells}};
}

geometry::Scatterer scatterer_from_json(const json& j)
{
    std::vector<geometry::Polygon> polys;
    for (const auto& p : j.value("polygons", json::array())) {
        polys.push_back(geometry::make_polygon(points_from(p)));
    }
    std::vector<geometry::Cell> cells;
    for (const auto& c : j.value("free_cells", json::array())) {
        if (c.size() != 2) {
            bad("free cell needs two endpoints");
        }
        cells.push_back(geometry::make_free_cell(vec2_from_json(c[0]), vec2_from_json(c[1])));
    }
    return geometry::Scatterer(std::move(polys), std::move(cells));
}

std::string far_field_csv(const solver::FarFieldPattern& p)
{
    std::string out = "# k=" + g17(p.wave.k) + " omega_x=" + g17(p.wave.omega.x) +
                      " omega_y=" + g17(p.wave.omega.y) + "\n";
    out += "angle_radians,re_uinf,im_uinf\n";
    for (std::size_t m = 0; m < p.size(); ++m) {
        out += g17(p.angle(m)) + "," + g17(p.values[m].real()) + "," + g17(p.values[m].imag()) + "\n";
    }
    return out;
}

solver::FarFieldPattern parse_far_field_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    solver::FarFieldPattern p;
    if (!std::getline(in, line) ||
        std::sscanf(line.c_str(), "# k=%lf omega_x=%lf omega_y=%lf", &p.wave.k, &p.wave.omega.x,
                    &p.wave.omega.y) != 3) {
        bad("far-field CSV header");
    }
    if (!std::getline(in, line) || line != "angle_radians,re_uinf,im_uinf") {
        bad("far-field CSV column line");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        double a = 0.0;
        double re = 0.0;
        double im = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &re, &im) != 3) {
            bad("far-field CSV row: " + line);
        }
        p.directions.push_back({std::cos(a), std::sin(a)});
        p.values.emplace_back(re, im);
    }
    return p;
}

bool same_pattern(const solver::FarFieldPattern& a, const solver::FarFieldPattern& b)
{
    if (a.wave.k != b.wave.k || !(a.wave.omega == b.wave.omega) || a.size() != b.size()) {
        return false;
    }
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (a.values[m] != b.values[m] || a.angle(m) != b.angle(m)) {
            return false;
        }
    }
    return true;
}

json run_length_encode(std::span<const int> labels)
{
    json out = json::array();
    std::size_t i = 0;
    while (i < labels.size()) {
        std::size_t j = i;
        while (j < labels.size() && labels[j] == labels[i]) {
            ++j;
        }
        out.push_back(json::array({labels[i], j - i}));
        i = j;
    }
    return out;
}

std::vector<int> run_length_decode(const json& j)
{
    std::vector<int> out;
    for (const auto& run : j) {
        out.insert(out.end(), run.at(1).get<std::size_t>(), run.at(0).get<int>());
    }
    return out;
}

json to_json(const nodal::NodalDecomposition& d)
{
    const auto& f = *d.field;
    json polylines = json::array();
    for (const auto& p : d.polylines) {
        json sides = json::array();
        for (const auto& [pos, neg] : p.sides) {
            sides.push_back(json::array({pos, neg}));
        }
        polylines.push_back({{"points", points_json(p.points)},
                             {"grad_norm", p.grad_norm},
                             {"im_abs", p.im_abs},
                             {"sides", sides},
                             {"closed", p.closed}});
    }
    json domains = json::array();
    for (const auto& dom : d.domains) {
        domains.push_back({{"sign", dom.sign},
                           {"nodes", dom.nodes},
                           {"seed", dom.seed},
                           {"touches_window", dom.touches_window},
                           {"touches_obstacle", dom.touches_obstacle}});
    }
    json adjacency = json::array();
    for (const auto& a : d.adjacency) {
        adjacency.push_back({{"a", a.a},
                             {"b", a.b},
                             {"witness",
                              {{"samples", points_json(a.witness.samples)},
                               {"min_grad", a.witness.min_grad},
                               {"polyline", a.witness.polyline}}}});
    }
    const auto& t = d.thresholds;
    return {{"grid",
             {{"lo", to_json(f.window.lo)},
              {"hi", to_json(f.window.hi)},
              {"h", f.h},
              {"nx", f.nx},
              {"ny", f.ny},
              {"k", f.k},
              {"complex_valued", f.complex_valued},
              {"max_abs_u", f.max_abs_u}}},
            {"thresholds",
             {{"grad_floor", t.grad_floor},
              {"v_floor", t.v_floor},
              {"im_floor", t.im_floor},
              {"min_length", t.min_length},
              {"dev_tol", t.dev_tol}}},
            {"polylines", polylines},
            {"critical_points", points_json(d.critical_points)},
            {"labels", run_length_encode(d.labels)},
            {"domains", domains},
            {"adjacency", adjacency},
            {"ordering", d.ordering}};
}

nodal::NodalDecomposition decomposition_from_json(const json& j)
{
    auto f = std::make_shared<nodal::SampledField>();
    const auto& g = j.at("grid");
    f->window = {vec2_from_json(g.at("lo")), vec2_from_json(g.at("hi"))};
    f->h = g.at("h").get<double>();
    f->nx = g.at("nx").get<int>();
    f->ny = g.at("ny").get<int>();
    f->k = g.at("k").get<double>();
    f->complex_valued = g.at("complex_valued").get<bool>();
    f->max_abs_u = g.at("max_abs_u").get<double>();

    nodal::NodalDecomposition d;
    d.field = f;
    const auto& t = j.at("thresholds");
    d.thresholds = {t.at("grad_floor").get<double>(), t.at("v_floor").get<double>(), t.at("im_floor").get<double>(),
                    t.at("min_length").get<double>(), t.at("dev_tol").get<double>()};
    for (const auto& p : j.at("polylines")) {
        nodal::Polyline line;
        line.points = points_from(p.at("points"));
        line.grad_norm = p.at("grad_norm").get<std::vector<double>>();
        line.im_abs = p.at("im_abs").get<std::vector<double>>();
        for (const auto& s : p.at("sides")) {
            line.sides.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
        }
        line.closed = p.at("closed").get<bool>();
        d.polylines.push_back(std::move(line));
    }
    d.critical_points = points_from(j.at("critical_points"));
    d.labels = run_length_decode(j.at("labels"));
    if (d.labels.size() != static_cast<std::size_t>(f->nx) * f->ny) {
        bad("label grid size does not match nx * ny");
    }
    for (const auto& dom : j.at("domains")) {
        d.domains.push_back({dom.at("sign").get<int>(), dom.at("nodes").get<int>(), dom.at("seed").get<int>(),
                             dom.at("touches_window").get<bool>(), dom.at("touches_obstacle").get<bool>()});
    }
    for (const auto& a : j.at("adjacency")) {
        const auto& w = a.at("witness");
        d.adjacency.push_back({a.at("a").get<int>(), a.at("b").get<int>(),
                               {points_from(w.at("samples")), w.at("min_grad").get<double>(),
                                w.at("polyline").get<int>()}});
    }
    d.ordering = j.at("ordering").get<std::vector<int>>();
    return d;
}

bool same_decomposition(const nodal::NodalDecomposition& a, const nodal::NodalDecomposition& b)
{
    const auto& fa = *a.field;
    const auto& fb = *b.field;
    return fa.window == fb.window && fa.h == fb.h && fa.nx == fb.nx && fa.ny == fb.ny && fa.k == fb.k &&
           fa.complex_valued == fb.complex_valued && fa.max_abs_u == fb.max_abs_u &&
           a.thresholds == b.thresholds && a.polylines == b.polylines && a.critical_points == b.critical_points &&
           a.labels == b.labels && a.domains == b.domains && a.adjacency == b.adjacency &&
           a.ordering == b.ordering;
}

json to_json(const nodal::FlatSegment& s)
{
    return {{"point", to_json(s.line.point)},
            {"direction", to_json(s.line.direction)},
            {"extent", json::array({s.extent.lo, s.extent.hi})},
            {"max_deviation", s.max_deviation},
            {"witness_point", to_json(s.witness_point)},
            {"polyline", s.polyline},
            {"first", s.first},
            {"last", s.last}};
}

json to_json(const hiddenpath::HiddenPath& p)
{
    json samples = json::array();
    for (const auto& s : p.samples) {
        samples.push_back(json::array({s.t, s.point.x, s.point.y, s.tangent.x, s.tangent.y}));
    }
    json crossings = json::array();
    for (const auto& c : p.crossings) {
        crossings.push_back({{"t", c.t},
                             {"point", to_json(c.point)},
                             {"nodal_tangent", to_json(c.nodal_tangent)},
                             {"grad_norm", c.grad_norm},
                             {"angle_deg", c.angle_deg}});
    }
    return {{"start", to_json(p.start)},
            {"start_normal", to_json(p.start_normal)},
            {"free_anchor", p.free_anchor},
            {"target", p.target ? to_json(*p.target) : json(nullptr)},
            {"target_t", p.target_t},
            {"escape_radius", p.escape_radius},
            {"domain_route", p.domain_route},
            {"samples", samples},
            {"crossings", crossings}};
}

hiddenpath::HiddenPath path_from_json(const json& j)
{
    hiddenpath::HiddenPath p;
    p.start = vec2_from_json(j.at("start"));
    p.start_normal = vec2_from_json(j.at("start_normal"));
    p.free_anchor = j.at("free_anchor").get<bool>();
    if (!j.at("target").is_null()) {
        p.target = vec2_from_json(j.at("target"));
    }
    p.target_t = j.at("target_t").get<double>();
    p.escape_radius = j.at("escape_radius").get<double>();
    p.domain_route = j.at("domain_route").get<std::vector<int>>();
    for (const auto& s : j.at("samples")) {
        if (s.size() != 5) {
            bad("path sample needs [t, x, y, tx, ty]");
        }
        p.samples.push_back({s[0].get<double>(),
                             {s[1].get<double>(), s[2].get<double>()},
                             {s[3].get<double>(), s[4].get<double>()}});
    }
    for (const auto& c : j.at("crossings")) {
        p.crossings.push_back({c.at("t").get<double>(), vec2_from_json(c.at("point")),
                               vec2_from_json(c.at("nodal_tangent")), c.at("grad_norm").get<double>(),
                               c.at("angle_deg").get<double>()});
    }
    return p;
}

json to_json(const hiddenpath::PathReport& r)
{
    json crossings = json::array();
    for (const auto& c : r.crossings) {
        crossings.push_back({{"t", c.crossing.t},
                             {"point", to_json(c.crossing.point)},
                             {"angle_deg", c.crossing.angle_deg},
                             {"grad_norm", c.crossing.grad_norm},
                             {"monotone", c.monotone},
                             {"angle_ok", c.angle_ok},
                             {"grad_ok", c.grad_ok}});
    }
    return {{"certified", r.certified},
            {"starts_on_boundary", r.starts_on_boundary},
            {"stays_in_g", r.stays_in_g},
            {"reaches_target", r.reaches_target},
            {"escapes", r.escapes},
            {"turns_ok", r.turns_ok},
            {"parameters_increasing", r.parameters_increasing},
            {"crossings_ok", r.crossings_ok},
            {"avoids_critical", r.avoids_critical},
            {"max_turn_deg", r.max_turn_deg},
            {"target_distance", r.target_distance},
            {"final_norm", r.final_norm},
            {"crossings", crossings},
            {"failures", r.failures}};
}

json to_json(const hiddenpath::ReflectionFrame& r, bool with_points)
{
    json intervals = json::array();
    for (const auto& i : r.s_tilde) {
        intervals.push_back(json::array({i.lo, i.hi}));
    }
    json out = {{"point", to_json(r.line.point)},
                {"direction", to_json(r.line.direction)},
                {"s_tilde", intervals},
                {"e_plus_nodes", r.e_plus.size()},
                {"e_minus_nodes", r.e_minus.size()},
                {"oddness_residual", r.oddness_residual},
                {"field_scale", r.field_scale},
                {"sampled", r.sampled}};
    if (with_points) {
        out["e_plus"] = points_json(r.e_plus);
        out["e_minus"] = points_json(r.e_minus);
    }
    return out;
}

std::string render_svg(const SvgLayers& layers)
{
    nodal::Window w{{-1.0, -1.0}, {1.0, 1.0}};
    const nodal::SampledField* f = layers.decomposition ? layers.decomposition->field.get() : nullptr;
    if (f) {
        w = f->window;
    } else if (layers.scatterer && !layers.scatterer->empty()) {
        const double r = 1.2 * layers.scatterer->bounding_radius();
        w = {{-r, -r}, {r, r}};
    }
    const double scale = 600.0 / std::max(w.hi.x - w.lo.x, w.hi.y - w.lo.y);
    const double width = (w.hi.x - w.lo.x) * scale;
    const double height = (w.hi.y - w.lo.y) * scale;
    auto px = [&](Vec2 p) { return g17((p.x - w.lo.x) * scale) + "," + g17((w.hi.y - p.y) * scale); };
    auto path_d = [&](std::span<const Vec2> pts, bool closed) {
        std::string d;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            d += (i == 0 ? "M" : " L") + px(pts[i]);
        }
        return closed ? d + " Z" : d;
    };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + g17(width) + "\" height=\"" +
                      g17(height) + "\" viewBox=\"0 0 " + g17(width) + " " + g17(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (layers.decomposition) {
        const auto& d = *layers.decomposition;
        const double cell = f->h * scale;
        out += "<g stroke=\"none\">\n";
        for (int j = 0; j < f->ny; ++j) {
            int i = 0;
            while (i < f->nx) {
                const int label = d.labels[static_cast<std::size_t>(f->index(i, j))];
                const int sign = label < 0 ? 0 : d.domains[static_cast<std::size_t>(label)].sign;
                int e = i;
                while (e < f->nx) {
                    const int l2 = d.labels[static_cast<std::size_t>(f->index(e, j))];
                    const int s2 = l2 < 0 ? 0 : d.domains[static_cast<std::size_t>(l2)].sign;
                    if (s2 != sign) {
                        break;
                    }
                    ++e;
                }
                if (sign != 0) {
                    const Vec2 corner = f->point(i, j) + Vec2{-0.5 * f->h, 0.5 * f->h};
                    out += "<rect x=\"" + g17((corner.x - w.lo.x) * scale) + "\" y=\"" +
                           g17((w.hi.y - corner.y) * scale) + "\" width=\"" + g17((e - i) * cell) +
                           "\" height=\"" + g17(cell) + "\" fill=\"" + (sign > 0 ? "#f4c7a1" : "#a9c8ef") +
                           "\"/>\n";
                }
                i = e;
            }
        }
        out += "</g>\n";
    }
    if (layers.scatterer) {
        for (const auto& p : layers.scatterer->polygons()) {
            out += "<path d=\"" + path_d(p.vertices(), true) + "\" fill=\"#777\" stroke=\"#333\"/>\n";
        }
        for (const auto& c : layers.scatterer->free_cells()) {
            const Vec2 ends[] = {c.a, c.b};
            out += "<path d=\"" + path_d(ends, false) + "\" stroke=\"#333\" stroke-width=\"3\"/>\n";
        }
    }
    if (layers.decomposition) {
        for (const auto& p : layers.decomposition->polylines) {
            out += "<path d=\"" + path_d(p.points, p.closed) + "\" fill=\"none\" stroke=\"black\"/>\n";
        }
        for (const auto& c : layers.decomposition->critical_points) {
            out += "<rect x=\"" + g17((c.x - w.lo.x) * scale - 3) + "\" y=\"" + g17((w.hi.y - c.y) * scale - 3) +
                   "\" width=\"6\" height=\"6\" fill=\"purple\"/>\n";
        }
    }
    for (const auto& s : layers.flat) {
        const Vec2 ends[] = {s.line.at(s.extent.lo), s.line.at(s.extent.hi)};
        out += "<path d=\"" + path_d(ends, false) +
               "\" stroke=\"#1a7f37\" stroke-width=\"6\" stroke-opacity=\"0.7\"/>\n";
    }
    if (layers.path) {
        std::vector<Vec2> pts;
        pts.reserve(layers.path->samples.size());
        for (const auto& s : layers.path->samples) {
            pts.push_back(s.point);
        }
        out += "<path d=\"" + path_d(pts, false) + "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
        for (const auto& c : layers.path->crossings) {
            const Vec2 q{(c.point.x - w.lo.x) * scale, (w.hi.y - c.point.y) * scale};
            out += "<circle cx=\"" + g17(q.x) + "\" cy=\"" + g17(q.y) +
                   "\" r=\"5\" fill=\"none\" stroke=\"red\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& file, const std::string& text)
{
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        bad("cannot write " + file.string());
    }
    out << text;
}

std::string read_text(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        bad("cannot read " + file.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace scatter::io
