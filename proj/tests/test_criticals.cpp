#include <gtest/gtest.h>

#include "spinvalve/criticals.hpp"

using namespace spinvalve;

namespace {

ScatterParams aligned(double g, double lambda) { return {g, lambda, aligned_epsilon(pi / 4), pi / 4, pi / 2, pi / 20}; }

}  // namespace

TEST(Kinds, NamesAndAliases) {
    EXPECT_EQ(parse_kind("T_plus"), CriticalKind::t_plus);
    EXPECT_EQ(parse_kind("b_minus"), CriticalKind::b_minus);
    EXPECT_EQ(parse_kind("T1"), CriticalKind::t_plus);
    EXPECT_EQ(parse_kind("t2"), CriticalKind::t_minus);
    EXPECT_EQ(parse_kind("B1"), CriticalKind::b_plus);
    EXPECT_EQ(parse_kind("B2"), CriticalKind::b_minus);
    EXPECT_EQ(parse_kind("Isolation"), CriticalKind::isolation);
    EXPECT_THROW(parse_kind("T3"), ValidationError);
}

TEST(CriticalMu, DefiningEquations) {
    for (double lam : {0.025, 0.1, 0.5, 1.0, 2.0}) {
        EXPECT_NEAR(xy(critical_mu(CriticalKind::t_plus, lam), lam).sum(), 0.0, 1e-12);
        if (lam != 1.0) { EXPECT_NEAR(xy(critical_mu(CriticalKind::t_minus, lam), lam).diff(), 0.0, 1e-12); }
        EXPECT_NEAR(critical_mu(CriticalKind::b_plus, lam), 2.0 * lam + 2.0, 0.0);
        EXPECT_NEAR(critical_mu(CriticalKind::b_minus, lam), 2.0, 0.0);
    }
    EXPECT_FALSE(critical_point(CriticalKind::t_minus, 0.5, 1.0).feasible);
    EXPECT_NEAR(xy(1.9, 1.0).diff(), 2.0, 1e-12);
    EXPECT_THROW(critical_mu(CriticalKind::isolation, 0.1), ValidationError);
    EXPECT_THROW(critical_mu(CriticalKind::t_plus, -0.1), ValidationError);
}

TEST(MuToOmega, RoundTripAndInfeasibility) {
    const OmegaPoint p = mu_to_omega(2.0, 0.7, 0.3);
    ASSERT_TRUE(p.feasible);
    EXPECT_NEAR(mu_of_omega(p.omega, localized_energy(0.7, 0.3), 0.7), 2.0, 1e-12);
    // T_minus has non-positive mu for lambda >= 3
    const CriticalPoint t = critical_point(CriticalKind::t_minus, 0.5, 3.5);
    EXPECT_FALSE(t.feasible);
    EXPECT_TRUE(std::isnan(t.omega));
    // very strong localization pushes every point below the band
    EXPECT_FALSE(critical_point(CriticalKind::t_plus, 5.0, 1.0).feasible);
}

TEST(CriticalPoints, TransparencyAndBlockadeAmplitudes) {
    for (auto [g, lam] : {std::pair{0.9, 0.025}, {0.69, 0.1}, {0.75, 0.1}, {0.5, 0.5}}) {
        const CriticalPoint t = critical_point(CriticalKind::t_plus, g, lam);
        const CriticalPoint bl = critical_point(CriticalKind::b_plus, g, lam);
        if (t.feasible) { EXPECT_NEAR(std::abs(s_matrix(t.omega, aligned(g, lam)).s11), 1.0, 1e-10); }
        if (bl.feasible) { EXPECT_LT(std::abs(s_matrix(bl.omega, aligned(g, lam)).s11), 1e-10); }
        // the minus points act on branch 3 with the same spin setting
        const CriticalPoint tm = critical_point(CriticalKind::t_minus, g, lam);
        const CriticalPoint bm = critical_point(CriticalKind::b_minus, g, lam);
        if (tm.feasible) { EXPECT_NEAR(std::abs(s_matrix(tm.omega, aligned(g, lam)).s33), 1.0, 1e-10); }
        if (bm.feasible) { EXPECT_LT(std::abs(s_matrix(bm.omega, aligned(g, lam)).s33), 1e-10); }
    }
}

TEST(Isolation, AlignedPassesAntiAlignedBlocked) {
    const CriticalPoint iso = isolation_point(0.7788);
    ASSERT_TRUE(iso.feasible);
    EXPECT_NEAR(iso.lambda, 1.0 / 3.0, 0.0);
    EXPECT_NEAR(iso.omega, -1.9720266146, 1e-9);
    const SMatrix s = s_matrix(iso.omega, aligned(0.7788, iso.lambda));
    EXPECT_NEAR(std::abs(s.s11), 1.0, 1e-10);
    EXPECT_LT(std::abs(s.s33), 1e-10);
    EXPECT_THROW(require_physical_isolation_lambda(-1.0), ValidationError);
    EXPECT_THROW(isolation_point(0.0), ValidationError);
}

TEST(Epsilon, AlignedAndReciprocal) {
    EXPECT_NEAR(c_y(pi / 4, pi / 2, aligned_epsilon(pi / 4)), -1.0, 1e-15);
    EXPECT_NEAR(c_y(pi / 4, pi / 2, aligned_epsilon(pi / 4, 1)), 1.0, 1e-15);
    for (double a : {0.1, pi / 4, 1.5, 2.5}) {
        for (double b : {0.0, 0.7, pi / 2, 3.0}) {
            const double e = reciprocal_epsilon(a, b);
            EXPECT_NEAR(c_y(a, b, e), 0.0, 1e-14) << a << " " << b;
            EXPECT_NEAR(std::abs(conversion_factor(a, b, e)), 1.0, 1e-14);
        }
    }
    EXPECT_NEAR(reciprocal_epsilon(pi / 4, pi / 2), pi / 4, 1e-15);
    EXPECT_THROW(aligned_epsilon(0.1, 0), ValidationError);
}

TEST(Conversion, MaximalSplitAtSingleRoot) {
    const ConversionResult r = conversion_point(0.5, 1.0, pi / 4, pi / 2);
    ASSERT_EQ(r.roots.size(), 1u);
    const CriticalPoint& cp = r.roots.front();
    EXPECT_NEAR(cp.omega, -1.9401358871, 1e-9);
    EXPECT_NEAR(*cp.mu, 3.105494707, 1e-8);
    const SMatrix s = s_matrix(cp.omega, {0.5, 1.0, r.epsilon, pi / 4, pi / 2, pi / 20});
    EXPECT_NEAR(std::abs(s.s11 - 0.5), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.s33 - 0.5), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.s31), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(s.s13), 0.5, 1e-12);
}

TEST(Conversion, ResidualVanishesAtRoot) {
    const ConversionResult r = conversion_point(0.5, 1.0, pi / 4, pi / 2);
    ASSERT_FALSE(r.roots.empty());
    EXPECT_NEAR(conversion_residual(r.roots.front().omega, 0.5, 1.0), 0.0, 1e-9);
}

TEST(Conversion, DiagnosticWhenUnreachable) {
    const ConversionResult r = conversion_point(4.0, 0.1, pi / 4, pi / 2);
    EXPECT_TRUE(r.roots.empty());
    EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Splitting, HalfTransmissionBetweenTransparencyAndBlockade) {
    const SplittingPoint sp = splitting_point(0.69, 0.1, pi / 4);
    const CriticalPoint t = critical_point(CriticalKind::t_plus, 0.69, 0.1);
    const CriticalPoint bl = critical_point(CriticalKind::b_plus, 0.69, 0.1);
    EXPECT_GT(sp.omega, std::min(t.omega, bl.omega));
    EXPECT_LT(sp.omega, std::max(t.omega, bl.omega));
    EXPECT_NEAR(sp.transmission, 0.5, 1e-10);
    EXPECT_THROW(splitting_point(0.69, 0.1, pi / 4, 1.5), ValidationError);
}

TEST(FeasibilityMap, BoundaryWhereOmegaLeavesBand) {
    const std::vector<double> gs = linspace(0.05, 2.0, 40);
    const std::vector<double> ls = linspace(0.05, 2.0, 30);
    const auto cells = feasibility_map(CriticalKind::t_plus, gs, ls, 2);
    ASSERT_EQ(cells.size(), gs.size() * ls.size());
    for (const MapCell& c : cells) {
        EXPECT_EQ(c.feasible, c.omega >= -2.0 && c.omega <= 2.0);
        if (c.feasible) { EXPECT_NEAR(mu_of_omega(c.omega, localized_energy(c.g, c.lambda), c.g), c.mu, 1e-9); }
    }
    // feasibility is monotone in g along each lambda column for t_plus
    for (std::size_t j = 0; j < ls.size(); ++j) {
        bool seen_infeasible = false;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            const MapCell& c = cells[i * ls.size() + j];
            if (!c.feasible) seen_infeasible = true;
            else EXPECT_FALSE(seen_infeasible) << "g=" << c.g << " lambda=" << c.lambda;
        }
    }
}

TEST(FeasibilityMap, IsolationPinsLambda) {
    const std::vector<double> gs = linspace(0.1, 2.0, 20);
    const std::vector<double> ls = linspace(0.1, 2.0, 7);
    const auto cells = feasibility_map(CriticalKind::isolation, gs, ls);
    ASSERT_EQ(cells.size(), gs.size());
    for (const MapCell& c : cells) EXPECT_EQ(c.lambda, isolation_lambda);
}

TEST(FeasibilityMap, ParallelMatchesSerial) {
    const std::vector<double> gs = linspace(0.1, 1.5, 12);
    const std::vector<double> ls = linspace(0.1, 1.5, 9);
    const auto serial = feasibility_map(CriticalKind::conversion, gs, ls, 1);
    const auto threaded = feasibility_map(CriticalKind::conversion, gs, ls, 3);
    ASSERT_EQ(serial.size(), threaded.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].feasible, threaded[i].feasible);
        if (serial[i].feasible) { EXPECT_EQ(serial[i].omega, threaded[i].omega); }
    }
}
