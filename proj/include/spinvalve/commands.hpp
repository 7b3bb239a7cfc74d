#pragma once

// Experiment commands behind the command-line tool. Each command takes a validated
// RunConfig and writes its tables under cfg.output.dir.

#include <array>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "spinvalve/config.hpp"
#include "spinvalve/criticals.hpp"
#include "spinvalve/io.hpp"
#include "spinvalve/modes.hpp"
#include "spinvalve/parallel.hpp"
#include "spinvalve/scattering.hpp"
#include "spinvalve/simulator.hpp"

namespace spinvalve {

using Paths = std::vector<std::filesystem::path>;

namespace detail {

inline RunConfig with_dir(RunConfig cfg, const std::string& sub) {
    cfg.output.dir = (std::filesystem::path(cfg.output.dir) / sub).string();
    return cfg;
}

inline std::vector<Cell> texture_row(site_index n, const SpinVector& s) {
    return {static_cast<std::int64_t>(n), s.x, s.y, s.z};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Modes and textures

inline Paths cmd_modes(const RunConfig& cfg) {
    Table disp{"dispersion", {"phi", "omega"}, {}, {}};
    for (double phi : linspace(cfg.scan.phi_min, cfg.scan.phi_max, cfg.scan.phi_steps))
        disp.rows.push_back({phi, dispersion(phi)});

    Table loc{"localized_energy", {"lambda", "g", "Omega", "kappa", "atom_number_times_gamma"}, {}, {}};
    for (double lam : cfg.scan.lambda_set) {
        for (double g : linspace(cfg.scan.g_min, cfg.scan.g_max, cfg.scan.g_steps)) {
            const double omega = localized_energy(g, lam);
            const double kappa = omega < -2.0 ? decay_factor(omega) : 1.0;
            loc.rows.push_back({lam, g, omega, kappa, -2.0 * omega / (1.0 + lam)});
        }
    }
    return {write_table(disp, cfg), write_table(loc, cfg)};
}

inline Paths cmd_texture(const RunConfig& cfg) {
    const auto& s = cfg.system;
    Table tr{"transmission_texture", {"n", "sign", "sx", "sy", "sz"}, {}, {}};
    tr.add_meta("rotation_period_sites", pi / s.alpha);
    for (int sign : {1, -1}) {
        for (site_index n = cfg.scan.n_min; n <= cfg.scan.n_max; ++n) {
            const SpinVector v = transmission_spin_texture(sign, n, s.a, s.b, s.alpha);
            tr.rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(sign), v.x, v.y, v.z});
        }
    }

    const double omega = cfg.scan.texture_omega.value_or(localized_energy(s.g, s.lambda));
    Table loc{"localized_texture", {"n", "sx", "sy", "sz"}, {}, {}};
    loc.add_meta("Omega", omega);
    loc.add_meta("rotation_period_sites", pi / s.alpha);
    for (site_index n = cfg.scan.n_min; n <= cfg.scan.n_max; ++n)
        loc.rows.push_back(
            detail::texture_row(n, localized_spin_texture(n, omega, s.g, s.gamma, s.epsilon, s.alpha)));
    return {write_table(tr, cfg), write_table(loc, cfg)};
}

// ---------------------------------------------------------------------------
// S-matrix scan

inline Table smatrix_table(const RunConfig& cfg, const std::string& name = "smatrix") {
    const ScatterParams sp = cfg.system.scatter();
    Table t{name, {"phi_over_pi", "omega", "mu", "abs_s11", "abs_s33", "abs_s31", "abs_s13", "flux_residual", "note"},
            {}, {}};
    t.add_meta("c_y", c_y(sp.a, sp.b, sp.epsilon));
    t.add_meta("epsilon", sp.epsilon);
    double worst = 0.0;
    for (double phi : linspace(cfg.scan.phi_min, cfg.scan.phi_max, cfg.scan.phi_steps)) {
        const double omega = std::clamp(dispersion(phi), -2.0, 2.0);
        const SMatrix s = s_matrix(omega, sp);
        std::string note;
        if (s.band_edge) note = "band edge";
        else if (s.pole != Pole::none) note = std::string("pole ") + pole_name(s.pole);
        else if (std::abs(s.mu - 2.0) < 1e-4) note = "near pole mu=2";
        else if (std::abs(s.mu - 2.0 - 2.0 * sp.lambda) < 1e-4) note = "near pole mu=2+2*lambda";
        const double flux = max_flux_residual(s);
        worst = std::max(worst, flux);
        t.rows.push_back({phi / pi, omega, s.mu, std::abs(s.s11), std::abs(s.s33), std::abs(s.s31), std::abs(s.s13),
                          flux, note});
    }
    t.add_meta("max_flux_residual", worst);
    return t;
}

inline Paths cmd_smatrix(const RunConfig& cfg) { return {write_table(smatrix_table(cfg), cfg)}; }

// ---------------------------------------------------------------------------
// Critical points

inline std::string main_text_label(CriticalKind k) {
    for (const auto& alias : main_text_labels)
        if (alias.kind == k) return std::string(alias.label);
    return "";
}

inline Paths cmd_criticals(const RunConfig& cfg) {
    const auto& s = cfg.system;
    const ScatterParams sp = s.scatter();
    Table t{"criticals", {"kind", "label", "g", "lambda", "mu", "omega", "feasible", "affected_branch", "abs_s11",
                          "abs_s33"},
            {}, {}};
    auto add = [&](const CriticalPoint& cp) {
        double s11 = std::numeric_limits<double>::quiet_NaN();
        double s33 = s11;
        if (cp.feasible) {
            ScatterParams at = sp;
            at.lambda = cp.lambda;
            if (cp.kind == CriticalKind::conversion) at.epsilon = cp.epsilon;
            const SMatrix m = s_matrix(cp.omega, at);
            s11 = std::abs(m.s11);
            s33 = std::abs(m.s33);
        }
        t.rows.push_back({std::string(kind_name(cp.kind)), main_text_label(cp.kind), cp.g, cp.lambda,
                          cp.mu.value_or(std::numeric_limits<double>::quiet_NaN()), cp.omega,
                          static_cast<std::int64_t>(cp.feasible), static_cast<std::int64_t>(cp.affected_branch), s11,
                          s33});
    };
    for (CriticalKind k : {CriticalKind::t_plus, CriticalKind::t_minus, CriticalKind::b_plus, CriticalKind::b_minus})
        add(critical_point(k, s.g, s.lambda));
    add(isolation_point(s.g));
    const ConversionResult conv = conversion_point(s.g, s.lambda, s.a, s.b);
    for (const CriticalPoint& cp : conv.roots) add(cp);
    if (conv.roots.empty()) t.add_meta("conversion", conv.diagnostic);
    return {write_table(t, cfg)};
}

inline Table map_table(CriticalKind kind, const RunConfig& cfg, int jobs) {
    const std::vector<double> gs = linspace(cfg.scan.g_min, cfg.scan.g_max, cfg.scan.g_steps);
    const std::vector<double> ls = linspace(cfg.scan.lambda_min, cfg.scan.lambda_max, cfg.scan.lambda_steps);
    const std::vector<MapCell> cells = feasibility_map(kind, gs, ls, jobs, cfg.system.a, cfg.system.b);
    Table t{std::string("map_") + kind_name(kind), {"g", "lambda", "mu", "omega", "feasible"}, {}, {}};
    for (const MapCell& c : cells)
        t.rows.push_back({c.g, c.lambda, c.mu, c.omega, static_cast<std::int64_t>(c.feasible)});
    return t;
}

inline Paths cmd_map(const RunConfig& cfg, int jobs) {
    Paths out;
    for (CriticalKind k : all_critical_kinds) out.push_back(write_table(map_table(k, cfg, jobs), cfg));
    return out;
}

inline Paths cmd_isolate(const RunConfig& cfg) {
    const CriticalPoint cp = isolation_point(cfg.system.g);
    if (!cp.feasible)
        throw InfeasibleError("isolation point for g=" + detail::fmt_real(cfg.system.g) + " sits at omega=" +
                              detail::fmt_real(cp.omega) + ", outside the band");
    ScatterParams sp = cfg.system.scatter();
    sp.lambda = cp.lambda;
    const SMatrix s = s_matrix(cp.omega, sp);
    Table t{"isolation", {"g", "lambda", "mu", "omega", "c_y", "abs_s11", "abs_s21", "abs_s33", "abs_s43"}, {}, {}};
    t.rows.push_back({cp.g, cp.lambda, *cp.mu, cp.omega, s.c_y, std::abs(s.s11), std::abs(s.s21), std::abs(s.s33),
                      std::abs(s.s43)});
    return {write_table(t, cfg)};
}

inline Paths cmd_convert(const RunConfig& cfg) {
    const auto& s = cfg.system;
    const ConversionResult r = conversion_point(s.g, s.lambda, s.a, s.b);
    if (r.roots.empty())
        throw InfeasibleError("no maximal-conversion point for g=" + detail::fmt_real(s.g) +
                              ", lambda=" + detail::fmt_real(s.lambda) + ": " + r.diagnostic);
    Table t{"conversion", {"omega", "mu", "epsilon", "re_s11", "im_s11", "abs_s11", "abs_s33", "abs_s31", "abs_s13"},
            {}, {}};
    ScatterParams sp = s.scatter();
    sp.epsilon = r.epsilon;
    for (const CriticalPoint& cp : r.roots) {
        const SMatrix m = s_matrix(cp.omega, sp);
        t.rows.push_back({cp.omega, *cp.mu, r.epsilon, m.s11.real(), m.s11.imag(), std::abs(m.s11), std::abs(m.s33),
                          std::abs(m.s31), std::abs(m.s13)});
    }
    return {write_table(t, cfg)};
}

// ---------------------------------------------------------------------------
// Simulation

/// Energy of the incident packet from sim.omega or sim.operating_point.
inline double resolve_omega(const RunConfig& cfg) {
    const auto& s = cfg.system;
    const std::string& op = cfg.sim.operating_point;
    double omega = 0.0;
    if (op.empty()) {
        if (!cfg.sim.omega) throw ValidationError("simulation needs sim.omega or sim.operating_point");
        omega = *cfg.sim.omega;
    } else if (op == "splitting") {
        omega = splitting_point(s.g, s.lambda, s.a).omega;
    } else {
        const CriticalKind kind = parse_kind(op);
        if (kind == CriticalKind::conversion) {
            const ConversionResult r = conversion_point(s.g, s.lambda, s.a, s.b);
            if (r.roots.empty()) throw InfeasibleError(r.diagnostic);
            const double d = std::abs(std::remainder(s.epsilon - r.epsilon, 2.0 * pi));
            if (d > 1e-9)
                throw ValidationError("conversion needs the reciprocal condensate spin epsilon=" +
                                      detail::fmt_real(r.epsilon) + " (set epsilon = reciprocal)");
            omega = r.roots.front().omega;
        } else {
            CriticalPoint cp;
            if (kind == CriticalKind::isolation) {
                if (std::abs(s.lambda - isolation_lambda) > 1e-12)
                    throw ValidationError("isolation needs lambda = 1/3");
                cp = isolation_point(s.g);
            } else {
                cp = critical_point(kind, s.g, s.lambda);
            }
            if (!cp.feasible)
                throw InfeasibleError(std::string(kind_name(kind)) + " for g=" + detail::fmt_real(s.g) +
                                      ", lambda=" + detail::fmt_real(s.lambda) + " maps to omega=" +
                                      detail::fmt_real(cp.omega) + ", outside the band [-2, 2]");
            omega = cp.omega;
        }
    }
    if (!(omega > -2.0 && omega < 2.0))
        throw InfeasibleError("packet energy omega=" + detail::fmt_real(omega) +
                              " is not inside the propagating band (-2, 2)");
    return omega;
}

struct SimulationOutcome {
    double omega{};
    WavepacketSpec packet;
    Window window;
    double t_final{};
    SimResult result;
    /// Closed-form |S|^2 for (transmitted +, transmitted -, reflected +, reflected -).
    std::array<double, 4> analytic{};
    std::vector<std::string> warnings;
};

inline std::array<double, 4> population_of(const PopulationSplit& s) {
    return {s.transmitted_plus, s.transmitted_minus, s.reflected_plus, s.reflected_minus};
}

inline SimulationOutcome run_simulation(const RunConfig& cfg, const std::function<void(const SimSample&)>& rec = {}) {
    cfg.validate();
    const SystemParams& p = cfg.system;
    SimulationOutcome out;
    out.omega = resolve_omega(cfg);
    if (!cfg.sim.s0 && !p.has_condensate())
        throw ValidationError("sim.s0 must be given explicitly when gamma = 0");
    const double s0 = cfg.sim.s0.value_or(0.01 * std::sqrt(p.g / std::max(p.gamma, 1e-300)));
    out.packet = WavepacketSpec{s0, cfg.sim.s_p, cfg.sim.n0, cfg.sim.branch, quasimomentum(out.omega)};

    const RunPlan plan = plan_run(p, out.packet);
    out.window = cfg.sim.window.value_or(plan.window);
    out.t_final = cfg.sim.t_final.value_or(plan.t_final);

    LatticeState state = init_state(p, out.packet, out.window, &out.warnings);
    EvolveOptions opt;
    opt.dt = cfg.sim.dt;
    opt.t_final = out.t_final;
    opt.record_interval = cfg.sim.record_interval;
    opt.n_cut = cfg.sim.n_cut.value_or(plan.n_cut);
    opt.s0 = s0;
    out.result = evolve(state, p, opt, rec);
    out.warnings.insert(out.warnings.end(), out.result.warnings.begin(), out.result.warnings.end());

    const auto col = s_matrix(out.omega, p.scatter()).column(cfg.sim.branch);
    out.analytic = {std::norm(col[0]), std::norm(col[2]), std::norm(col[1]), std::norm(col[3])};
    return out;
}

inline Paths write_simulation(const RunConfig& cfg, const SimulationOutcome& o) {
    Table series{"simulation_series",
                 {"t", "transmitted_plus", "transmitted_minus", "reflected_plus", "reflected_minus", "core",
                  "condensate_fidelity", "norm", "energy"},
                 {}, {}};
    for (const SimSample& s : o.result.series)
        series.rows.push_back({s.t, s.split.transmitted_plus, s.split.transmitted_minus, s.split.reflected_plus,
                               s.split.reflected_minus, s.split.core, s.split.fidelity, s.norm, s.energy});

    Table summary{"simulation_summary", {"channel", "simulated", "analytic", "difference"}, {}, {}};
    const std::array<const char*, 4> names{"transmitted_plus", "transmitted_minus", "reflected_plus",
                                           "reflected_minus"};
    const auto sim = population_of(o.result.final_split);
    for (std::size_t i = 0; i < 4; ++i)
        summary.rows.push_back({std::string(names[i]), sim[i], o.analytic[i], sim[i] - o.analytic[i]});
    summary.rows.push_back({std::string("core"), o.result.final_split.core, 0.0, o.result.final_split.core});
    summary.add_meta("omega", o.omega);
    summary.add_meta("phi", o.packet.phi);
    summary.add_meta("s0", o.packet.s0);
    summary.add_meta("window", fmt::format("{} {}", o.window.n_min, o.window.n_max));
    summary.add_meta("t_final", o.t_final);
    summary.add_meta("n_cut", std::to_string(o.result.n_cut));
    summary.add_meta("packet_norm", o.result.packet_norm);
    summary.add_meta("norm_drift", o.result.norm_drift);
    summary.add_meta("energy_drift", o.result.energy_drift);
    summary.add_meta("condensate_fidelity", o.result.final_split.fidelity);
    for (const std::string& w : o.warnings) summary.add_meta("warning", w);
    return {write_table(series, cfg), write_table(summary, cfg)};
}

inline Paths cmd_simulate(const RunConfig& cfg) { return write_simulation(cfg, run_simulation(cfg)); }

// ---------------------------------------------------------------------------
// Presets

struct Preset {
    std::string name;
    RunConfig cfg;
};

/// Shared settings of the time-domain presets: b = pi/2, condensate spin along l_+.
inline RunConfig sim_preset(double g, double lambda, const std::string& op, int branch) {
    RunConfig c;
    c.system.g = g;
    c.system.lambda = lambda;
    c.system.a = pi / 4.0;
    c.system.b = pi / 2.0;
    c.epsilon_rule = op == "conversion" ? "reciprocal" : "aligned";
    resolve_epsilon(c);
    c.sim.s_p = 0.0005;
    c.sim.n0 = -150;
    c.sim.operating_point = op;
    c.sim.branch = branch;
    return c;
}

inline std::vector<Preset> fig4_presets() {
    return {
        {"a_transparency_plus", sim_preset(0.9, 0.025, "t_plus", 1)},
        {"b_transparency_minus", sim_preset(0.9, 0.025, "t_plus", 3)},
        {"c_splitting_plus", sim_preset(0.69, 0.1, "splitting", 1)},
        {"d_splitting_minus", sim_preset(0.69, 0.1, "splitting", 3)},
        {"e_blockade_plus", sim_preset(0.75, 0.1, "b_plus", 1)},
        {"f_blockade_minus", sim_preset(0.75, 0.1, "b_plus", 3)},
        {"g_isolation_plus", sim_preset(0.7788, isolation_lambda, "isolation", 1)},
        {"g_isolation_minus", sim_preset(0.7788, isolation_lambda, "isolation", 3)},
        {"h_conversion", sim_preset(0.5, 1.0, "conversion", 1)},
    };
}

inline RunConfig scan_preset(double g, double lambda, double a, double b, const std::string& rule,
                             double offset = 0.0) {
    RunConfig c;
    c.system.g = g;
    c.system.lambda = lambda;
    c.system.a = a;
    c.system.b = b;
    c.epsilon_rule = rule;
    c.epsilon_offset = offset;
    resolve_epsilon(c);
    return c;
}

inline std::vector<Preset> supp_scan_presets() {
    const double q = pi / 4.0;
    return {
        {"reciprocal", scan_preset(0.69, 0.1, q, q, "reciprocal")},
        {"nonreciprocal", scan_preset(0.69, 0.1, q, q, "reciprocal", -pi / 4.0)},
        {"aligned_g0.9_l0.025", scan_preset(0.9, 0.025, q, pi / 2.0, "aligned")},
        {"aligned_g0.69_l0.1", scan_preset(0.69, 0.1, q, pi / 2.0, "aligned")},
        {"aligned_g0.75_l0.1", scan_preset(0.75, 0.1, q, pi / 2.0, "aligned")},
        {"aligned_g0.7788_l1_3", scan_preset(0.7788, isolation_lambda, q, pi / 2.0, "aligned")},
        {"conversion_g0.5_l1", scan_preset(0.5, 1.0, q, pi / 2.0, "reciprocal")},
    };
}

inline RunConfig fig2_preset(double alpha) {
    RunConfig c;
    c.system.alpha = alpha;
    c.system.g = 0.9;
    c.system.gamma = 0.002;
    c.system.a = pi / 4.0;
    c.system.b = pi / 2.0;
    c.system.epsilon = pi / 4.0;
    c.scan.texture_omega = -2.01;
    c.scan.g_min = 0.0;
    c.scan.g_max = 3.0;
    c.scan.g_steps = 301;
    return c;
}

/// Runs `presets` with output under `<base dir>/<preset name>`, up to `jobs` at a time.
template <class Fn>
Paths run_presets(const std::vector<Preset>& presets, const RunConfig& base, int jobs, Fn&& command) {
    std::vector<Paths> per(presets.size());
    parallel_for(presets.size(), jobs, [&](std::size_t i) {
        RunConfig c = presets[i].cfg;
        c.output = base.output;
        c = detail::with_dir(c, presets[i].name);
        c.validate();
        per[i] = command(c);
    });
    Paths out;
    for (auto& p : per) out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline Paths reproduce_fig2(const RunConfig& base) {
    RunConfig c = fig2_preset(pi / 20.0);
    c.output = base.output;
    Paths out = cmd_modes(c);
    Paths tex = cmd_texture(c);
    out.insert(out.end(), tex.begin(), tex.end());
    return out;
}

inline Paths reproduce_fig3(const RunConfig& base, int jobs) {
    RunConfig c;
    c.output = base.output;
    c.system.a = pi / 4.0;
    c.system.b = pi / 2.0;
    return cmd_map(c, jobs);
}

inline Paths reproduce_fig4(const RunConfig& base, int jobs) {
    return run_presets(fig4_presets(), base, jobs, [](const RunConfig& c) { return cmd_simulate(c); });
}

inline Paths reproduce_supp(const RunConfig& base, int jobs) {
    Paths out = run_presets(supp_scan_presets(), base, jobs, [](const RunConfig& c) { return cmd_smatrix(c); });
    RunConfig tex = fig2_preset(pi / 10.0);
    tex.output = base.output;
    tex = detail::with_dir(tex, "texture_alpha_pi_10");
    Paths t = cmd_texture(tex);
    out.insert(out.end(), t.begin(), t.end());
    return out;
}

}  // namespace spinvalve
