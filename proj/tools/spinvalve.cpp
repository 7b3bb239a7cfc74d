#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "spinvalve/commands.hpp"

namespace {

using spinvalve::Paths;
using spinvalve::RunConfig;

struct Options {
    std::string config;
    std::string out;
    std::string format;
    int jobs = 1;
};

RunConfig resolve_config(const Options& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : spinvalve::load_config(o.config);
    if (!o.out.empty()) cfg.output.dir = o.out;
    if (!o.format.empty()) cfg.output.format = o.format;
    cfg.validate();
    return cfg;
}

int fail(const char* kind, const std::string& what, int code) {
    std::fprintf(stderr, "spinvalve: %s: %s\n", kind, what.c_str());
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-resolved scattering off a localized spinor condensate"};
    app.require_subcommand(1);

    Options opt;
    const std::map<std::string, std::function<Paths(const RunConfig&, int)>> commands{
        {"modes", [](const RunConfig& c, int) { return spinvalve::cmd_modes(c); }},
        {"texture", [](const RunConfig& c, int) { return spinvalve::cmd_texture(c); }},
        {"smatrix", [](const RunConfig& c, int) { return spinvalve::cmd_smatrix(c); }},
        {"criticals", [](const RunConfig& c, int) { return spinvalve::cmd_criticals(c); }},
        {"map", [](const RunConfig& c, int j) { return spinvalve::cmd_map(c, j); }},
        {"isolate", [](const RunConfig& c, int) { return spinvalve::cmd_isolate(c); }},
        {"convert", [](const RunConfig& c, int) { return spinvalve::cmd_convert(c); }},
        {"simulate", [](const RunConfig& c, int) { return spinvalve::cmd_simulate(c); }},
        {"reproduce-fig2", [](const RunConfig& c, int) { return spinvalve::reproduce_fig2(c); }},
        {"reproduce-fig3", [](const RunConfig& c, int j) { return spinvalve::reproduce_fig3(c, j); }},
        {"reproduce-fig4", [](const RunConfig& c, int j) { return spinvalve::reproduce_fig4(c, j); }},
        {"reproduce-supp", [](const RunConfig& c, int j) { return spinvalve::reproduce_supp(c, j); }},
    };
    const std::map<std::string, std::string> help{
        {"modes", "dispersion and localized-mode energy curves"},
        {"texture", "spin textures of transmission and localized modes"},
        {"smatrix", "scattering amplitudes over a quasimomentum scan"},
        {"criticals", "transparency, blockade, isolation and conversion points at (g, lambda)"},
        {"map", "feasibility heatmaps over (g, lambda) for every critical-point kind"},
        {"isolate", "spin isolation point at g"},
        {"convert", "maximal spin-conversion energies"},
        {"simulate", "time-domain wavepacket run with analytic comparison"},
        {"reproduce-fig2", "mode, energy and texture datasets"},
        {"reproduce-fig3", "critical-point heatmaps on the default grid"},
        {"reproduce-fig4", "all time-domain presets"},
        {"reproduce-supp", "supplementary S-matrix scans and alpha = pi/10 textures"},
    };

    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", opt.config, "INI or JSON config, or an output file carrying a config echo");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--jobs", opt.jobs, "concurrent jobs")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(spinvalve::ExitCode::validation);
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const RunConfig cfg = resolve_config(opt);
        for (const auto& path : commands.at(name)(cfg, opt.jobs)) std::printf("%s\n", path.string().c_str());
        return 0;
    } catch (const spinvalve::InfeasibleError& e) {
        return fail("infeasible", e.what(), static_cast<int>(e.code()));
    } catch (const spinvalve::NumericalError& e) {
        return fail("numerical failure", e.what(), static_cast<int>(e.code()));
    } catch (const spinvalve::Error& e) {
        return fail("invalid input", e.what(), static_cast<int>(e.code()));
    } catch (const std::exception& e) {
        return fail("error", e.what(), static_cast<int>(spinvalve::ExitCode::numerical));
    }
}
