#pragma once

// Nonlinear time evolution of the spinor lattice Gross-Pitaevskii equation
//   i d psi_n/dt = -R psi_{n-1} - R^dag psi_{n+1}
//                  - delta_{n0} gamma (|psi_0s|^2 + lambda |psi_0,-s|^2) psi_0s
// with hard walls at the window edges, plus wavepacket initialization and the
// spin-resolved transmission/reflection measurement.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinvalve/errors.hpp"
#include "spinvalve/modes.hpp"
#include "spinvalve/scattering.hpp"
#include "spinvalve/spinor.hpp"

namespace spinvalve {

/// All tunables of one experiment. gamma = 0 switches the condensate off (free lattice).
struct SystemParams {
    double alpha = pi / 20.0;
    double gamma = 0.002;
    double lambda = 0.025;
    double g = 0.9;
    double epsilon = 0.0;
    double a = pi / 4.0;
    double b = pi / 2.0;

    void validate() const {
        for (auto [v, name] : {std::pair{alpha, "alpha"}, {gamma, "gamma"}, {lambda, "lambda"}, {g, "g"},
                               {epsilon, "epsilon"}, {a, "a"}, {b, "b"}})
            detail::require_finite(v, name);
        detail::require(g > 0.0, "localization grade g must be positive");
        detail::require(lambda > 0.0, "interaction ratio lambda must be positive");
        detail::require(gamma >= 0.0, "interaction strength gamma must be non-negative");
        (void)SpinBasisAngles(a, b);
    }

    bool has_condensate() const { return gamma > 0.0; }
    std::optional<LocalizedMode> condensate() const {
        if (!has_condensate()) return std::nullopt;
        return LocalizedMode({g, lambda, gamma, epsilon, alpha});
    }
    ScatterParams scatter() const { return {g, lambda, epsilon, a, b, alpha}; }
};

struct Window {
    site_index n_min = -400;
    site_index n_max = 400;

    std::size_t size() const { return static_cast<std::size_t>(n_max - n_min + 1); }
    bool contains(site_index n) const { return n >= n_min && n <= n_max; }
    std::size_t index(site_index n) const { return static_cast<std::size_t>(n - n_min); }
    site_index site(std::size_t i) const { return n_min + static_cast<site_index>(i); }
    void validate() const {
        detail::require(n_min < 0 && n_max > 0, "lattice window must contain the origin strictly inside");
    }
};

struct LatticeState {
    Window window;
    std::vector<Spinor> psi;
    double t = 0.0;

    LatticeState() = default;
    explicit LatticeState(const Window& w) : window(w), psi(w.size()) {}

    Spinor& at(site_index n) { return psi[window.index(n)]; }
    const Spinor& at(site_index n) const { return psi[window.index(n)]; }

    double norm() const {
        double total = 0.0;
        for (const Spinor& s : psi) total += s.norm2();
        return total;
    }
};

// ---------------------------------------------------------------------------
// Equation of motion

/// d psi/dt for every site of the window; sites outside the window count as zero.
inline void gpe_rhs(const SystemParams& p, const Window& w, std::span<const Spinor> psi, std::span<Spinor> out) {
    const double c = std::cos(p.alpha);
    const double s = std::sin(p.alpha);
    const std::size_t n = psi.size();
    for (std::size_t i = 0; i < n; ++i) {
        complex up{};
        complex dn{};
        if (i > 0) {  // R psi_{n-1}
            const Spinor& l = psi[i - 1];
            up += c * l.up - s * l.down;
            dn += s * l.up + c * l.down;
        }
        if (i + 1 < n) {  // R^dag psi_{n+1}
            const Spinor& r = psi[i + 1];
            up += c * r.up + s * r.down;
            dn += -s * r.up + c * r.down;
        }
        out[i] = {complex(-up.imag(), up.real()), complex(-dn.imag(), dn.real())};
    }
    if (p.gamma > 0.0 && w.contains(0)) {
        const std::size_t i0 = w.index(0);
        const Spinor& v = psi[i0];
        const double nu = std::norm(v.up);
        const double nd = std::norm(v.down);
        out[i0].up += imag_unit * (p.gamma * (nu + p.lambda * nd)) * v.up;
        out[i0].down += imag_unit * (p.gamma * (nd + p.lambda * nu)) * v.down;
    }
}

inline std::vector<Spinor> gpe_rhs(const SystemParams& p, const LatticeState& state) {
    std::vector<Spinor> out(state.psi.size());
    gpe_rhs(p, state.window, state.psi, out);
    return out;
}

/// H = -sum_n (psi_{n+1}^dag R psi_n + c.c.) - (gamma/2)(|u|^4 + |d|^4 + 2 lambda |u|^2 |d|^2) at n = 0.
inline double energy(const LatticeState& state, const SystemParams& p) {
    const Matrix2 r = rotation_matrix(p.alpha, 1);
    double h = 0.0;
    for (std::size_t i = 0; i + 1 < state.psi.size(); ++i)
        h -= 2.0 * inner(state.psi[i + 1], r * state.psi[i]).real();
    if (state.window.contains(0)) {
        const Spinor& v = state.at(0);
        const double nu = std::norm(v.up);
        const double nd = std::norm(v.down);
        h -= 0.5 * p.gamma * (nu * nu + nd * nd + 2.0 * p.lambda * nu * nd);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Initial state

struct WavepacketSpec {
    double s0 = 0.0;       ///< peak amplitude
    double s_p = 0.002;    ///< inverse squared width, sites^-2
    site_index n0 = -150;  ///< centre site
    int branch = 1;
    double phi = pi / 2.0;  ///< carrier quasimomentum

    static WavepacketSpec at_energy(double omega, double s0, double s_p, site_index n0, int branch) {
        return {s0, s_p, n0, branch, quasimomentum(omega)};
    }
};

/// Largest s0 / sqrt(g/gamma) accepted as a weak probe.
inline constexpr double max_relative_probe_amplitude = 0.05;

/// Condensate d_n plus the Gaussian packet s0 exp(-s_p (n - n0)^2) L_n^(j), where L is
/// cut to n <= -1 for left incidence (j = 1, 3) and n >= 0 for right incidence (j = 2, 4).
inline LatticeState init_state(const SystemParams& p, const WavepacketSpec& packet, const Window& window,
                               std::vector<std::string>* warnings = nullptr) {
    p.validate();
    window.validate();
    detail::require(packet.s0 >= 0.0 && std::isfinite(packet.s0), "packet amplitude s0 must be non-negative");
    detail::require(packet.s_p > 0.0, "packet width parameter s_p must be positive");
    detail::require(window.contains(packet.n0), "packet centre n0 lies outside the lattice window");
    const auto condensate = p.condensate();
    if (condensate && packet.s0 > max_relative_probe_amplitude * condensate->amplitude())
        throw ValidationError("packet amplitude s0=" + std::to_string(packet.s0) + " exceeds " +
                              std::to_string(max_relative_probe_amplitude) +
                              " * sqrt(g/gamma); the probe is no longer weak");

    const TransmissionMode mode(packet.branch, packet.phi, SpinBasisAngles(p.a, p.b), p.alpha);
    const bool left = mode.right_moving();
    if (left != (packet.n0 < 0))
        throw ValidationError("packet centre must sit on the incident side of the origin");

    LatticeState state(window);
    for (site_index n = window.n_min; n <= window.n_max; ++n) {
        Spinor v = condensate ? condensate->at(n) : Spinor{};
        const bool support = left ? n <= -1 : n >= 0;
        if (support && packet.s0 > 0.0) {
            const double dx = static_cast<double>(n - packet.n0);
            v += (packet.s0 * std::exp(-packet.s_p * dx * dx)) * mode.at(n);
        }
        state.at(n) = v;
    }

    const double edge_site = left ? -1.0 : 0.0;
    const double at_origin = std::exp(-packet.s_p * (edge_site - packet.n0) * (edge_site - packet.n0));
    if (warnings && packet.s0 > 0.0 && at_origin > 1e-3)
        warnings->push_back("packet tail overlaps the origin (envelope " + std::to_string(at_origin) +
                            " of s0 next to site 0)");
    if (warnings && condensate)
        warnings->insert(warnings->end(), condensate->warnings().begin(), condensate->warnings().end());
    return state;
}

// ---------------------------------------------------------------------------
// Measurement

struct PopulationSplit {
    double transmitted_plus{};   ///< n > n_cut along R^n l_+
    double transmitted_minus{};  ///< n > n_cut along R^n l_-
    double reflected_plus{};     ///< n < -n_cut along R^n l_+
    double reflected_minus{};    ///< n < -n_cut along R^n l_-
    double core{};               ///< residual inside |n| <= n_cut
    double fidelity = 1.0;       ///< overlap of the core with the reference condensate
    bool reliable = true;

    double total() const { return transmitted_plus + transmitted_minus + reflected_plus + reflected_minus + core; }
    PopulationSplit scaled(double f) const {
        PopulationSplit s = *this;
        s.transmitted_plus *= f;
        s.transmitted_minus *= f;
        s.reflected_plus *= f;
        s.reflected_minus *= f;
        s.core *= f;
        return s;
    }
};

inline constexpr double min_condensate_fidelity = 0.99;

/// Smallest n with (g/gamma) kappa^{2n} < 1e-6 s0^2: beyond it the condensate tail is
/// below the measurement floor.
inline site_index default_n_cut(const SystemParams& p, double s0) {
    const auto condensate = p.condensate();
    if (!condensate) return 0;
    const double floor = s0 > 0.0 ? 1e-6 * s0 * s0 : 1e-12;
    const double ratio = p.g / p.gamma;
    const double k2 = condensate->kappa() * condensate->kappa();
    site_index n = 0;
    double tail = ratio;
    while (tail >= floor && n < 100000) {
        tail *= k2;
        ++n;
    }
    return n;
}

/// Splits psi - d_n e^{-i Omega t} into spin-resolved outgoing populations. Outside
/// |n| <= n_cut the residual is projected on the local basis {R^n l_+, R^n l_-}/sqrt 2.
inline PopulationSplit measure_populations(const LatticeState& state, const SystemParams& p, site_index n_cut) {
    const auto condensate = p.condensate();
    const SpinBasis basis = spin_basis(p.a, p.b);
    const complex phase = condensate ? std::polar(1.0, -condensate->omega() * state.t) : complex(1.0);

    PopulationSplit out;
    complex overlap{};
    double ref_norm = 0.0;
    double core_norm = 0.0;
    for (site_index n = state.window.n_min; n <= state.window.n_max; ++n) {
        const Spinor& psi = state.at(n);
        const Spinor ref = condensate ? phase * condensate->at(n) : Spinor{};
        const Spinor residual = psi - ref;
        const site_index m = n < 0 ? -n : n;
        if (m <= n_cut) {
            out.core += residual.norm2();
            overlap += inner(ref, psi);
            ref_norm += ref.norm2();
            core_norm += psi.norm2();
            continue;
        }
        const Matrix2 rn = rotation_matrix(p.alpha, n);
        const double pp = std::norm(inner(rn * basis.plus, residual)) / 2.0;
        const double pm = std::norm(inner(rn * basis.minus, residual)) / 2.0;
        if (n > 0) {
            out.transmitted_plus += pp;
            out.transmitted_minus += pm;
        } else {
            out.reflected_plus += pp;
            out.reflected_minus += pm;
        }
    }
    if (condensate && ref_norm > 0.0 && core_norm > 0.0) out.fidelity = std::norm(overlap) / (ref_norm * core_norm);
    out.reliable = out.fidelity >= min_condensate_fidelity;
    return out;
}

/// Sum of |psi_n - d_n e^{-i Omega t}|^2 over the window.
inline double packet_norm(const LatticeState& state, const SystemParams& p) {
    const auto condensate = p.condensate();
    const complex phase = condensate ? std::polar(1.0, -condensate->omega() * state.t) : complex(1.0);
    double total = 0.0;
    for (site_index n = state.window.n_min; n <= state.window.n_max; ++n) {
        const Spinor ref = condensate ? phase * condensate->at(n) : Spinor{};
        total += (state.at(n) - ref).norm2();
    }
    return total;
}

// ---------------------------------------------------------------------------
// Time integration

struct EvolveOptions {
    double dt = 0.01;
    double t_final = 600.0;
    double record_interval = 1.0;
    site_index n_cut = -1;  ///< negative: default_n_cut from the packet amplitude
    double s0 = 0.0;        ///< packet amplitude used for the default n_cut
    site_index edge_margin = 10;
    double edge_threshold = 1e-6;  ///< of the packet norm
    /// Integrate in the frame co-rotating with the condensate. Same trajectory, but the
    /// dominant condensate phase no longer feeds the RK4 truncation error.
    bool rotating_frame = true;
};

struct SimSample {
    double t{};
    PopulationSplit split;  ///< normalized by the initial packet norm
    double norm{};
    double energy{};
};

struct SimResult {
    std::vector<SimSample> series;
    PopulationSplit final_split;  ///< fractions of the initial packet norm
    double packet_norm{};
    double initial_norm{};
    double norm_drift{};    ///< |N(T) - N(0)| / N(0)
    double energy_drift{};  ///< |H(T) - H(0)| / |H(0)|
    site_index n_cut{};
    std::vector<std::string> warnings;
};

/// Fixed-step classic RK4 from state.t to state.t + t_final. Throws NumericalError when
/// the packet reaches the hard walls.
inline SimResult evolve(LatticeState& state, const SystemParams& p, const EvolveOptions& opt,
                        const std::function<void(const SimSample&)>& recorder = {}) {
    p.validate();
    detail::require(opt.dt > 0.0 && opt.dt <= 0.02, "time step must lie in (0, 0.02]");
    detail::require(opt.t_final >= 0.0, "final time must be non-negative");
    detail::require(opt.record_interval > 0.0, "record interval must be positive");

    const auto condensate = p.condensate();
    const double frame = (opt.rotating_frame && condensate) ? condensate->omega() : 0.0;
    const double t0 = state.t;

    SimResult result;
    result.n_cut = opt.n_cut >= 0 ? opt.n_cut : default_n_cut(p, opt.s0);
    result.packet_norm = packet_norm(state, p);
    result.initial_norm = state.norm();
    const double h0 = energy(state, p);
    const double scale = result.packet_norm > 0.0 ? 1.0 / result.packet_norm : 1.0;

    auto sample = [&] {
        SimSample s;
        s.t = state.t;
        s.split = measure_populations(state, p, result.n_cut).scaled(scale);
        s.norm = state.norm();
        s.energy = energy(state, p);
        return s;
    };
    auto check_edges = [&] {
        if (result.packet_norm <= 0.0) return;
        double left = 0.0;
        double right = 0.0;
        const std::size_t m = static_cast<std::size_t>(opt.edge_margin);
        const std::size_t n = state.psi.size();
        for (std::size_t i = 0; i < std::min(m, n); ++i) {
            left += state.psi[i].norm2();
            right += state.psi[n - 1 - i].norm2();
        }
        const double limit = opt.edge_threshold * result.packet_norm;
        if (left > limit || right > limit)
            throw NumericalError("wavepacket reached the " + std::string(left > limit ? "left" : "right") +
                                 " lattice edge at t=" + std::to_string(state.t) +
                                 "; enlarge the window or shorten the run");
    };

    // Work in chi = e^{i frame t} psi: d chi/dt = rhs(chi) + i frame chi.
    const std::size_t n = state.psi.size();
    std::vector<Spinor> chi(state.psi), k1(n), k2(n), k3(n), k4(n), tmp(n);
    const complex rot = imag_unit * frame;
    auto rhs = [&](const std::vector<Spinor>& in, std::vector<Spinor>& out) {
        gpe_rhs(p, state.window, in, out);
        if (frame != 0.0)
            for (std::size_t i = 0; i < n; ++i) out[i] += rot * in[i];
    };
    auto to_lab = [&](double t) {
        const complex ph = std::polar(1.0, -frame * (t - t0));
        for (std::size_t i = 0; i < n; ++i) state.psi[i] = ph * chi[i];
        state.t = t;
    };

    const auto steps = static_cast<long long>(std::llround(opt.t_final / opt.dt));
    const auto record_every = std::max<long long>(1, std::llround(opt.record_interval / opt.dt));
    const double dt = opt.dt;

    auto record = [&] {
        SimSample s = sample();
        if (recorder) recorder(s);
        result.series.push_back(std::move(s));
    };
    record();
    for (long long step = 1; step <= steps; ++step) {
        rhs(chi, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = chi[i] + (0.5 * dt) * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = chi[i] + (0.5 * dt) * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = chi[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < n; ++i) chi[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        if (step % record_every == 0 || step == steps) {
            to_lab(t0 + static_cast<double>(step) * dt);
            check_edges();
            record();
        }
    }
    to_lab(t0 + static_cast<double>(steps) * dt);

    result.final_split = measure_populations(state, p, result.n_cut).scaled(scale);
    result.norm_drift = std::abs(state.norm() - result.initial_norm) / result.initial_norm;
    result.energy_drift = h0 != 0.0 ? std::abs(energy(state, p) - h0) / std::abs(h0) : 0.0;
    if (!result.final_split.reliable)
        result.warnings.push_back("condensate fidelity " + std::to_string(result.final_split.fidelity) +
                                  " below " + std::to_string(min_condensate_fidelity) +
                                  "; measurement unreliable");
    return result;
}

// ---------------------------------------------------------------------------
// Run planning

struct RunPlan {
    Window window;
    double t_final{};
    site_index n_cut{};
};

/// Picks a run length that carries the scattered packets (carrier speed 2 sin phi,
/// dispersive broadening included) clear of |n| <= n_cut, and a window that keeps
/// them away from the walls until then.
inline RunPlan plan_run(const SystemParams& p, const WavepacketSpec& packet, double clearance_sigmas = 4.0) {
    const double v = 2.0 * std::sin(packet.phi);
    detail::require(v > 1e-3, "carrier quasimomentum too close to a band edge to plan a run");
    const double sigma0 = 0.5 / std::sqrt(packet.s_p);
    const double sigma_v = 2.0 * std::abs(std::cos(packet.phi)) * std::sqrt(packet.s_p);
    const site_index n_cut = default_n_cut(p, packet.s0);
    const double start = std::abs(static_cast<double>(packet.n0));

    double t = (start + static_cast<double>(n_cut)) / v;
    auto width = [&](double tt) { return std::sqrt(sigma0 * sigma0 + sigma_v * sigma_v * tt * tt); };
    for (int i = 0; i < 50; ++i) t = (start + static_cast<double>(n_cut) + clearance_sigmas * width(t)) / v;

    double reach = std::max(start + 7.0 * sigma0, v * t - start + 7.5 * width(t));
    // Four-wave mixing with the condensate radiates at 2 omega - Omega, often faster than
    // the probe. Emission starts while the packet crosses the origin.
    if (const auto condensate = p.condensate()) {
        const double mixed = 2.0 * dispersion(packet.phi) - condensate->omega();
        if (mixed > -2.0 && mixed < 2.0) {
            const double v_mixed = 2.0 * std::sin(quasimomentum(mixed));
            const double t_cross = start / v;
            const double spread = width(t_cross) / v;
            reach = std::max(reach, v_mixed * (t - t_cross + 3.0 * spread));
        }
    }
    reach += 20.0;
    const auto half = static_cast<site_index>(std::ceil(reach));
    RunPlan plan;
    plan.window = {-half, half};
    plan.t_final = std::ceil(t);
    plan.n_cut = n_cut;
    return plan;
}

}  // namespace spinvalve
