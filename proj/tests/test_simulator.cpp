#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "spinvalve/simulator.hpp"

using namespace spinvalve;

namespace {

SystemParams transparency_system() {
    SystemParams p;
    p.g = 0.9;
    p.lambda = 0.025;
    p.epsilon = wrap_angle(pi / 4 - pi / 2);
    return p;
}

double max_deviation_from_condensate(const LatticeState& st, const LocalizedMode& mode) {
    const complex phase = std::polar(1.0, -mode.omega() * st.t);
    double worst = 0.0;
    for (site_index n = st.window.n_min; n <= st.window.n_max; ++n)
        worst = std::max(worst, std::sqrt((st.at(n) - phase * mode.at(n)).norm2()));
    return worst;
}

}  // namespace

TEST(GpeRhs, IsGradientOfEnergy) {
    // i d psi/dt = dH/d psi^*, checked against central differences of H
    SystemParams p;
    p.gamma = 0.3;
    p.lambda = 0.6;
    p.alpha = 0.37;
    const Window w{-4, 5};
    LatticeState st(w);
    std::mt19937 rng(4);
    std::normal_distribution<double> n01;
    for (Spinor& s : st.psi) s = {{n01(rng), n01(rng)}, {n01(rng), n01(rng)}};
    const std::vector<Spinor> rhs = gpe_rhs(p, st);

    const double h = 1e-6;
    for (std::size_t i = 0; i < st.psi.size(); ++i) {
        for (int comp = 0; comp < 2; ++comp) {
            auto slot = [&](LatticeState& s) -> complex& { return comp == 0 ? s.psi[i].up : s.psi[i].down; };
            auto partial = [&](complex dir) {
                LatticeState a = st;
                LatticeState b = st;
                slot(a) += h * dir;
                slot(b) -= h * dir;
                return (energy(a, p) - energy(b, p)) / (2.0 * h);
            };
            const complex grad = 0.5 * complex(partial(1.0), partial(imag_unit));
            const complex expected = -imag_unit * grad;
            const complex got = comp == 0 ? rhs[i].up : rhs[i].down;
            EXPECT_NEAR(std::abs(got - expected), 0.0, 1e-7) << "site " << w.site(i) << " comp " << comp;
        }
    }
}

TEST(GpeRhs, CondensateRotatesAtOmega) {
    const SystemParams p = transparency_system();
    const LocalizedMode mode = *p.condensate();
    LatticeState st({-60, 60});
    for (site_index n = -60; n <= 60; ++n) st.at(n) = mode.at(n);
    const std::vector<Spinor> rhs = gpe_rhs(p, st);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < st.psi.size(); ++i)
        worst = std::max(worst, std::sqrt((rhs[i] + imag_unit * mode.omega() * st.psi[i]).norm2()));
    EXPECT_LT(worst, 1e-10);
}

TEST(GpeRhs, HardWallsDropOutsideSites) {
    SystemParams p;
    p.gamma = 0.0;
    const Window w{-1, 1};
    LatticeState st(w);
    st.at(1) = {1.0, 0.0};
    const std::vector<Spinor> rhs = gpe_rhs(p, st);
    // only site 0 couples to site 1; nothing leaks past n = 1
    EXPECT_GT(rhs[1].norm2(), 0.0);
    EXPECT_EQ(rhs[2].norm2(), 0.0);
    EXPECT_EQ(rhs[0].norm2(), 0.0);
}

TEST(Evolve, CondensateAloneIsStationary) {
    const SystemParams p = transparency_system();
    const LocalizedMode mode = *p.condensate();
    LatticeState st = init_state(p, {0.0, 0.002, -150, 1, pi / 2}, {-200, 200});
    EvolveOptions opt;
    opt.t_final = 100.0;
    opt.record_interval = 50.0;
    const SimResult r = evolve(st, p, opt);
    EXPECT_LT(max_deviation_from_condensate(st, mode), 1e-6);
    EXPECT_LT(r.norm_drift, 1e-8);
    EXPECT_EQ(r.packet_norm, 0.0);
}

TEST(Evolve, LabAndRotatingFramesAgree) {
    // both frames are fourth order, so their gap shrinks ~16x or more when dt halves
    const SystemParams p = transparency_system();
    const double s0 = 0.01 * p.condensate()->amplitude();
    const WavepacketSpec packet{s0, 0.01, -40, 1, 1.2};
    auto gap = [&](double dt) {
        LatticeState a = init_state(p, packet, {-120, 120});
        LatticeState b = a;
        EvolveOptions opt;
        opt.dt = dt;
        opt.t_final = 30.0;
        opt.record_interval = 30.0;
        evolve(a, p, opt);
        opt.rotating_frame = false;
        evolve(b, p, opt);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.psi.size(); ++i)
            worst = std::max(worst, std::sqrt((a.psi[i] - b.psi[i]).norm2()));
        return worst / p.condensate()->amplitude();
    };
    const double coarse = gap(0.01);
    const double fine = gap(0.005);
    EXPECT_LT(coarse, 1e-5);
    EXPECT_GT(coarse / fine, 14.0);
}

TEST(Evolve, NormAndEnergyConservedWithPacket) {
    const SystemParams p = transparency_system();
    const double s0 = 0.01 * p.condensate()->amplitude();
    LatticeState st = init_state(p, {s0, 0.002, -150, 1, quasimomentum(-1.0)}, {-400, 400});
    EvolveOptions opt;
    opt.t_final = 600.0;
    opt.record_interval = 100.0;
    opt.edge_threshold = std::numeric_limits<double>::infinity();
    const SimResult r = evolve(st, p, opt);
    EXPECT_LT(r.norm_drift, 1e-8);
    EXPECT_LT(r.energy_drift, 1e-6);
    EXPECT_EQ(r.series.size(), 7u);
}

TEST(Evolve, FreePacketMovesAtGroupVelocity) {
    SystemParams p;
    p.gamma = 0.0;
    const double phi = 1.0;
    LatticeState st = init_state(p, {1.0, 0.002, -100, 1, phi}, {-300, 300});
    auto centroid = [&] {
        double m = 0.0;
        double w = 0.0;
        for (site_index n = st.window.n_min; n <= st.window.n_max; ++n) {
            const double d = st.at(n).norm2();
            m += d * static_cast<double>(n);
            w += d;
        }
        return m / w;
    };
    const double c0 = centroid();
    EvolveOptions opt;
    opt.t_final = 50.0;
    opt.record_interval = 50.0;
    evolve(st, p, opt);
    EXPECT_NEAR((centroid() - c0) / 50.0, 2.0 * std::sin(phi), 2e-3);
}

TEST(Evolve, AbortsWhenPacketReachesEdge) {
    SystemParams p;
    p.gamma = 0.0;
    LatticeState st = init_state(p, {1.0, 0.01, -20, 1, pi / 2}, {-60, 60});
    EvolveOptions opt;
    opt.t_final = 100.0;
    EXPECT_THROW(evolve(st, p, opt), NumericalError);
}

TEST(Evolve, RejectsLargeTimeStep) {
    const SystemParams p = transparency_system();
    LatticeState st = init_state(p, {0.0, 0.002, -150, 1, pi / 2}, {-200, 200});
    EvolveOptions opt;
    opt.dt = 0.05;
    EXPECT_THROW(evolve(st, p, opt), ValidationError);
}

TEST(InitState, Validation) {
    const SystemParams p = transparency_system();
    const double amp = p.condensate()->amplitude();
    const Window w{-400, 400};
    EXPECT_THROW(init_state(p, {0.06 * amp, 0.002, -150, 1, 1.0}, w), ValidationError);
    EXPECT_NO_THROW(init_state(p, {0.05 * amp, 0.002, -150, 1, 1.0}, w));
    EXPECT_THROW(init_state(p, {0.01 * amp, 0.002, 150, 1, 1.0}, w), ValidationError);
    EXPECT_THROW(init_state(p, {0.01 * amp, 0.002, -150, 2, 1.0}, w), ValidationError);
    EXPECT_THROW(init_state(p, {0.01 * amp, 0.002, -500, 1, 1.0}, w), ValidationError);
    EXPECT_THROW(init_state(p, {0.01 * amp, 0.0, -150, 1, 1.0}, w), ValidationError);
    EXPECT_THROW(init_state(p, {0.01 * amp, 0.002, -150, 1, 1.0}, {5, 400}), ValidationError);
}

TEST(InitState, WarnsWhenPacketOverlapsOrigin) {
    const SystemParams p = transparency_system();
    const double s0 = 0.01 * p.condensate()->amplitude();
    std::vector<std::string> warnings;
    init_state(p, {s0, 0.002, -20, 1, 1.0}, {-200, 200}, &warnings);
    EXPECT_FALSE(warnings.empty());
    warnings.clear();
    init_state(p, {s0, 0.002, -150, 1, 1.0}, {-400, 400}, &warnings);
    EXPECT_TRUE(warnings.empty());
}

TEST(Measure, IncomingPacketProjectsOntoItsSpinChannel) {
    const SystemParams p = transparency_system();
    const double s0 = 0.01 * p.condensate()->amplitude();
    const site_index n_cut = default_n_cut(p, s0);
    for (int j : {1, 3}) {
        const LatticeState st = init_state(p, {s0, 0.002, -150, j, 1.0}, {-400, 400});
        const PopulationSplit split = measure_populations(st, p, n_cut).scaled(1.0 / packet_norm(st, p));
        const double same = j == 1 ? split.reflected_plus : split.reflected_minus;
        const double other = j == 1 ? split.reflected_minus : split.reflected_plus;
        EXPECT_NEAR(same, 1.0, 1e-12);
        EXPECT_NEAR(other, 0.0, 1e-12);
        EXPECT_NEAR(split.transmitted_plus + split.transmitted_minus, 0.0, 1e-12);
        EXPECT_NEAR(split.fidelity, 1.0, 1e-12);
        EXPECT_TRUE(split.reliable);
    }
}

TEST(Measure, DefaultCutoffPutsTailBelowFloor) {
    const SystemParams p = transparency_system();
    const LocalizedMode mode = *p.condensate();
    const double s0 = 0.01 * mode.amplitude();
    const site_index n = default_n_cut(p, s0);
    const double tail = [&](site_index m) { return (p.g / p.gamma) * std::pow(mode.kappa(), 2.0 * m); }(n);
    EXPECT_LT(tail, 1e-6 * s0 * s0);
    EXPECT_GE((p.g / p.gamma) * std::pow(mode.kappa(), 2.0 * (n - 1)), 1e-6 * s0 * s0);
}

TEST(Plan, ClearsCoreAndKeepsPacketInside) {
    const SystemParams p = transparency_system();
    const double s0 = 0.01 * p.condensate()->amplitude();
    const WavepacketSpec packet{s0, 0.0005, -150, 1, quasimomentum(-1.97)};
    const RunPlan plan = plan_run(p, packet);
    const double v = 2.0 * std::sin(packet.phi);
    EXPECT_GT(v * plan.t_final - 150.0, static_cast<double>(plan.n_cut));
    EXPECT_GT(plan.window.n_max, static_cast<site_index>(v * plan.t_final - 150.0));
    EXPECT_TRUE(plan.window.contains(packet.n0));
}
