#include "scatter/error.hpp"
#include "scatter/experiments.hpp"
#include "scatter/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

using namespace scatter;
namespace ex = scatter::experiments;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

ex::ExperimentConfig configure(const Options& o)
{
    auto cfg = o.config.empty() ? ex::config_from_json(io::json::object(), ".") : ex::load_config(o.config);
    if (!o.out.empty()) {
        cfg.out_dir = o.out;
    }
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    return cfg;
}

ex::Log logger(const Options& o)
{
    if (!o.verbose) {
        return {};
    }
    return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

void list(const std::vector<std::filesystem::path>& files)
{
    for (const auto& f : files) {
        std::cout << "wrote " << f.string() << '\n';
    }
}

const ex::NamedScatterer& first_scatterer(const ex::ExperimentConfig& cfg)
{
    if (cfg.scatterers.empty()) {
        throw Error(ErrorCode::InvalidInput, "no scatterer configured");
    }
    return cfg.scatterers.front();
}

double ppw_of(const ex::ExperimentConfig& cfg, const ex::NamedScatterer& s)
{
    return s.nodes_per_wavelength > 0.0 ? s.nodes_per_wavelength : cfg.nodes_per_wavelength;
}

int cmd_solve(const Options& o)
{
    const auto cfg = configure(o);
    const auto& s = first_scatterer(cfg);
    const auto solved = ex::solve(s.shape, cfg.wave, ppw_of(cfg, s), cfg.directions);
    io::json report = {{"scatterer", io::to_json(s.shape)},
                       {"name", s.name},
                       {"k", cfg.wave.k},
                       {"omega", io::to_json(cfg.wave.omega)},
                       {"ppw", ppw_of(cfg, s)},
                       {"unknowns", solved.density->system->size()},
                       {"condition", solved.density->condition},
                       {"residual", solved.density->residual},
                       {"tool", io::tool_info()}};
    const auto file = cfg.out_dir / "solve.json";
    io::write_text(file, io::dump(report));
    std::printf("%s: %zu unknowns, condition %.3g, residual %.3g\n", s.name.c_str(), solved.density->system->size(),
                solved.density->condition, solved.density->residual);
    list({file});
    return 0;
}

int cmd_farfield(const Options& o)
{
    const auto cfg = configure(o);
    if (cfg.scatterers.empty()) {
        throw Error(ErrorCode::InvalidInput, "no scatterer configured");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& s : cfg.scatterers) {
        const auto solved = ex::solve(s.shape, cfg.wave, ppw_of(cfg, s), cfg.directions);
        files.push_back(cfg.out_dir / ("farfield_" + s.name + ".csv"));
        io::write_text(files.back(), io::far_field_csv(solved.pattern));
    }
    list(files);
    return 0;
}

void print_nodal(const ex::NodalResult& r)
{
    const auto& d = r.decomposition;
    std::printf("%s: %zu polylines, %zu domains, %zu adjacencies, %zu critical points\n", r.source.c_str(),
                d.polylines.size(), d.domains.size(), d.adjacency.size(), d.critical_points.size());
    std::printf("ordering %s%s%s\n", r.ordering_valid ? "valid" : "invalid", r.ordering_error.empty() ? "" : ": ",
                r.ordering_error.c_str());
    std::printf("flat points on the nodal set of u: %zu; near-flat candidates of v: %zu\n", r.flat.size(),
                r.candidates.size());
    if (r.bound) {
        std::printf("R_nodal %.6g, annulus (%.6g, %.6g) %s\n", r.bound->r_nodal, r.bound->annulus_inner,
                    r.bound->annulus_outer, r.bound->annulus_empty() ? "empty" : "not empty");
    }
    if (r.far_modulus_deviation) {
        std::printf("max ||u| - 1| at r = 500/k: %.3g\n", *r.far_modulus_deviation);
    }
}

int cmd_nodal(const Options& o)
{
    const auto cfg = configure(o);
    const auto r = ex::run_nodal_pipeline(cfg, logger(o));
    print_nodal(r);
    list(ex::emit_nodal(cfg, r));
    return 0;
}

int cmd_path(const Options& o)
{
    const auto cfg = configure(o);
    const auto n = ex::run_nodal_pipeline(cfg, logger(o));
    print_nodal(n);
    const auto r = ex::run_path_pipeline(cfg, n, logger(o));
    if (!r.error.empty()) {
        std::printf("path: %s\n", r.error.c_str());
    } else {
        std::printf("path: %s, %zu crossings, max turn %.3g deg, walk %zu\n",
                    r.report->certified ? "certified" : "not certified", r.path->crossings.size(),
                    r.report->max_turn_deg, r.walk.size());
        for (const auto& f : r.report->failures) {
            std::printf("  %s\n", f.c_str());
        }
    }
    list(ex::emit_nodal(cfg, n));
    list(ex::emit_path(cfg, n, r));
    return 0;
}

int cmd_uniqueness(const Options& o)
{
    const auto cfg = configure(o);
    const auto r = ex::run_uniqueness(cfg, logger(o));
    std::cout << ex::distance_csv(r.matrix);
    list(ex::emit_uniqueness(cfg, r));
    return 0;
}

int cmd_oracle(const Options& o)
{
    const auto cfg = configure(o);
    const auto r = ex::run_oracle_check(cfg, logger(o));
    for (const auto& d : r.disks) {
        std::printf("disk ka=%g: max relative error %.3g (%d unknowns, condition %.3g)\n", d.ka,
                    d.max_relative_error, d.unknowns, d.condition);
    }
    double worst = 0.0;
    for (const auto& p : r.reciprocity) {
        worst = std::max(worst, p.residual);
    }
    std::printf("%s: reciprocity worst %.3g over %zu pairs\n", r.scatterer.c_str(), worst, r.reciprocity.size());
    list(ex::emit_oracle(cfg, r));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sound-soft polygonal scattering: far fields, nodal domains and hidden paths"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "JSON configuration")->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "output directory");
    app.add_option("--seed", o.seed, "random seed");
    app.add_flag("--verbose", o.verbose, "progress and timings on stderr");

    int status = 0;
    const auto add = [&](const char* name, const char* help, int (*run)(const Options&)) {
        app.add_subcommand(name, help)->callback([&, run] { status = run(o); });
    };
    add("solve", "solve for the first scatterer", cmd_solve);
    add("farfield", "far-field CSV per scatterer", cmd_farfield);
    add("nodal", "nodal decomposition, ordering, flat points and nodal bound", cmd_nodal);
    add("path", "nodal pipeline followed by the hidden path", cmd_path);
    add("uniqueness", "pairwise far-field distances", cmd_uniqueness);
    add("oracle-check", "disk, radial, reciprocity and boundary trace checks", cmd_oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return status;
}
