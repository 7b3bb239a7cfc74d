#pragma once

// Operating points of the valve: transparency, blockade, spin isolation, maximal
// spin conversion, and 50/50 beam splitting, as functions of (g, lambda).
//
// Points are named by their defining condition in mu:
//
//   t_plus   X + Y = 0           mu = (3/2)(lambda + 1)        main-text label T1
//   t_minus  X - Y = 0           mu = -(1/2)(lambda - 3)(lambda + 1)     T2
//   b_plus   pole of X + Y       mu = 2 lambda + 2                      B1
//   b_minus  pole of X - Y       mu = 2                                 B2
//
// With the condensate aligned to l_+ (C_Y = -1: b = pi/2, eps = a - pi/2) branch 1
// is transparent at t_plus and blocked at b_plus; branch 3 is transparent at
// t_minus and blocked at b_minus. C_Y = +1 swaps the branches.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinvalve/errors.hpp"
#include "spinvalve/parallel.hpp"
#include "spinvalve/scattering.hpp"

namespace spinvalve {

enum class CriticalKind { t_plus, t_minus, b_plus, b_minus, isolation, conversion };

inline constexpr std::array<CriticalKind, 6> all_critical_kinds{CriticalKind::t_plus,  CriticalKind::t_minus,
                                                                CriticalKind::b_plus,  CriticalKind::b_minus,
                                                                CriticalKind::isolation, CriticalKind::conversion};

inline const char* kind_name(CriticalKind k) {
    switch (k) {
        case CriticalKind::t_plus: return "T_plus";
        case CriticalKind::t_minus: return "T_minus";
        case CriticalKind::b_plus: return "B_plus";
        case CriticalKind::b_minus: return "B_minus";
        case CriticalKind::isolation: return "isolation";
        case CriticalKind::conversion: return "conversion";
    }
    return "?";
}

struct KindAlias {
    std::string_view label;
    CriticalKind kind;
};

/// Main-text labels for the four mu-defined points.
inline constexpr std::array<KindAlias, 4> main_text_labels{{{"T1", CriticalKind::t_plus},
                                                            {"T2", CriticalKind::t_minus},
                                                            {"B1", CriticalKind::b_plus},
                                                            {"B2", CriticalKind::b_minus}}};

inline CriticalKind parse_kind(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    for (CriticalKind k : all_critical_kinds) {
        std::string name = kind_name(k);
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        if (t == name) return k;
    }
    for (const auto& alias : main_text_labels) {
        std::string label(alias.label);
        std::transform(label.begin(), label.end(), label.begin(), [](unsigned char c) { return std::tolower(c); });
        if (t == label) return alias.kind;
    }
    throw ValidationError("unknown operating-point kind '" + std::string(text) + "'");
}

inline double critical_mu(CriticalKind kind, double lambda) {
    detail::require(lambda > 0.0, "interaction ratio lambda must be positive");
    switch (kind) {
        case CriticalKind::t_plus: return 1.5 * (lambda + 1.0);
        case CriticalKind::t_minus: return -0.5 * (lambda - 3.0) * (lambda + 1.0);
        case CriticalKind::b_plus: return 2.0 * lambda + 2.0;
        case CriticalKind::b_minus: return 2.0;
        case CriticalKind::isolation:
        case CriticalKind::conversion: break;
    }
    throw ValidationError(std::string("critical_mu is not defined for ") + kind_name(kind) +
                          "; use isolation_point / conversion_point");
}

struct OmegaPoint {
    double omega = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
};

/// omega = 2 Omega(g, lambda) + sqrt(mu^2 g^2 + 4). Non-positive mu is reported infeasible.
inline OmegaPoint mu_to_omega(double mu, double g, double lambda) {
    detail::require(g > 0.0, "localization grade g must be positive");
    detail::require(lambda > 0.0, "interaction ratio lambda must be positive");
    if (!(mu > 0.0)) return {};
    const double omega = omega_of_mu(mu, localized_energy(g, lambda), g);
    return {omega, omega >= -2.0 && omega <= 2.0};
}

/// eps = a -/+ pi/2 aligns the condensate spin with l_+/l_- when b = pi/2 (C_Y = -/+1).
inline double aligned_epsilon(double a, int c_y_sign = -1) {
    if (c_y_sign != 1 && c_y_sign != -1) throw ValidationError("C_Y sign must be +1 or -1");
    return wrap_angle(a + c_y_sign * pi / 2.0);
}

/// Principal branch of eps = arctan(tan a sin b); gives C_Y = 0 and |M| = 1.
inline double reciprocal_epsilon(double a, double b) {
    const SpinBasisAngles ang(a, b);
    double theta = std::atan2(std::sin(ang.a) * std::sin(ang.b), std::cos(ang.a));
    if (theta > pi / 2.0) theta -= pi;
    return wrap_angle(theta);
}

struct SpinRequirement {
    bool reciprocal = false;  ///< true: tan eps = tan a sin b (C_Y = 0)
    double c_y = -1.0;        ///< required C_Y when not reciprocal
};

struct CriticalPoint {
    CriticalKind kind{};
    double g{};
    double lambda{};
    std::optional<double> mu;
    double omega = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
    SpinRequirement spin;
    /// Branch that is transparent (t_*, isolation) or blocked (b_*) under C_Y = -1; 0 for conversion.
    int affected_branch = 0;
    double epsilon = std::numeric_limits<double>::quiet_NaN();  ///< suggested condensate spin angle, if known
};

inline int affected_branch(CriticalKind kind) {
    switch (kind) {
        case CriticalKind::t_plus:
        case CriticalKind::b_plus:
        case CriticalKind::isolation: return 1;
        case CriticalKind::t_minus:
        case CriticalKind::b_minus: return 3;
        case CriticalKind::conversion: return 0;
    }
    return 0;
}

inline CriticalPoint critical_point(CriticalKind kind, double g, double lambda) {
    CriticalPoint cp;
    cp.kind = kind;
    cp.g = g;
    cp.lambda = lambda;
    cp.mu = critical_mu(kind, lambda);
    cp.affected_branch = affected_branch(kind);
    // at lambda = 1 the t_minus root sits on the mu = 2 pole, where X - Y = 2 identically
    if (kind == CriticalKind::t_minus && lambda == 1.0) return cp;
    const OmegaPoint op = mu_to_omega(*cp.mu, g, lambda);
    cp.omega = op.omega;
    cp.feasible = op.feasible;
    return cp;
}

inline constexpr double isolation_lambda = 1.0 / 3.0;

/// t_plus and b_minus coincide at lambda = 1/3 (mu = 2): with C_Y = -1 branch 1 is fully
/// transmitted and branch 3 fully reflected at the same energy.
inline CriticalPoint isolation_point(double g) {
    detail::require(g > 0.0, "localization grade g must be positive");
    CriticalPoint cp;
    cp.kind = CriticalKind::isolation;
    cp.g = g;
    cp.lambda = isolation_lambda;
    cp.mu = 2.0;
    const OmegaPoint op = mu_to_omega(2.0, g, isolation_lambda);
    cp.omega = op.omega;
    cp.feasible = op.feasible;
    cp.affected_branch = 1;
    return cp;
}

/// Rejects the second overlap (t_minus with b_plus) which needs lambda = -1.
inline void require_physical_isolation_lambda(double lambda) {
    if (!(lambda > 0.0))
        throw ValidationError("isolation with lambda=" + std::to_string(lambda) +
                              " requires a repulsive interspecies ratio; only lambda = 1/3 is supported");
}

// ---------------------------------------------------------------------------
// Maximal conversion

/// 4 - omega^2 - g^2 (Y^2 - X^2) = 4 - omega^2 + g^2 (X+Y)(X-Y); zero where |S31| = 1/2.
inline double conversion_residual(double omega, double g, double lambda) {
    const double mu = mu_of_omega(omega, localized_energy(g, lambda), g);
    XYIntermediates v;
    v.mu = mu;
    v.lambda = lambda;
    return 4.0 - omega * omega + g * g * v.sum() * v.diff();
}

struct ConversionResult {
    std::vector<CriticalPoint> roots;
    double epsilon{};
    std::string diagnostic;
};

namespace detail {

/// Sub-intervals of (-2, 2) free of the X/Y poles.
inline std::vector<std::pair<double, double>> pole_free_intervals(double g, double lambda) {
    constexpr double edge = 1e-12;
    std::vector<double> cuts{-2.0 + edge};
    for (double pole_mu : {2.0, 2.0 + 2.0 * lambda}) {
        const OmegaPoint op = mu_to_omega(pole_mu, g, lambda);
        if (op.feasible) cuts.push_back(op.omega);
    }
    cuts.push_back(2.0 - edge);
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double gap = 1e-9 * std::max(1.0, std::abs(cuts[i]));
        const double lo = cuts[i] + (i == 0 ? 0.0 : gap);
        const double hi = cuts[i + 1] - (i + 2 == cuts.size() ? 0.0 : gap);
        if (hi > lo) out.emplace_back(lo, hi);
    }
    return out;
}

template <class F>
double bisect(F&& f, double lo, double hi, double f_lo) {
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Energies where conversion is maximal (|S31| = |S13| = 1/2) once the condensate spin
/// satisfies tan eps = tan a sin b. Sign changes of the residual are bracketed on a
/// grid inside each pole-free energy window and refined by bisection.
inline ConversionResult conversion_point(double g, double lambda, double a, double b, std::size_t samples = 4000) {
    detail::require(g > 0.0, "localization grade g must be positive");
    detail::require(lambda > 0.0, "interaction ratio lambda must be positive");
    ConversionResult result;
    result.epsilon = reciprocal_epsilon(a, b);
    const ScatterParams sp{g, lambda, result.epsilon, a, b, 0.0};

    auto f = [&](double w) { return conversion_residual(w, g, lambda); };
    for (const auto& [lo, hi] : detail::pole_free_intervals(g, lambda)) {
        const std::vector<double> grid = linspace(lo, hi, samples);
        double prev_w = grid.front();
        double prev_f = f(prev_w);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double w = grid[i];
            const double fw = f(w);
            if (std::isfinite(prev_f) && std::isfinite(fw) && (prev_f < 0.0) != (fw < 0.0)) {
                const double root = prev_f == 0.0 ? prev_w : detail::bisect(f, prev_w, w, prev_f);
                const SMatrix s = s_matrix(root, sp);
                if (std::abs(std::abs(s.s31) - 0.5) < 1e-8) {
                    CriticalPoint cp;
                    cp.kind = CriticalKind::conversion;
                    cp.g = g;
                    cp.lambda = lambda;
                    cp.mu = s.mu;
                    cp.omega = root;
                    cp.feasible = true;
                    cp.spin = {true, 0.0};
                    cp.epsilon = result.epsilon;
                    result.roots.push_back(cp);
                }
            }
            prev_w = w;
            prev_f = fw;
        }
    }
    if (result.roots.empty())
        result.diagnostic = "no energy in the band satisfies 4 - omega^2 = g^2 (Y^2 - X^2); Y^2 <= X^2 throughout";
    return result;
}

// ---------------------------------------------------------------------------
// 50/50 splitter

struct SplittingPoint {
    double omega{};
    double mu{};
    double transmission{};  ///< |S11|^2 at omega
};

/// Energy between t_plus and b_plus where branch 1 (C_Y = -1) transmits `target` of its
/// intensity.
inline SplittingPoint splitting_point(double g, double lambda, double a, double target = 0.5) {
    detail::require(target > 0.0 && target < 1.0, "splitting target must lie in (0, 1)");
    const CriticalPoint t = critical_point(CriticalKind::t_plus, g, lambda);
    const CriticalPoint bl = critical_point(CriticalKind::b_plus, g, lambda);
    if (!t.feasible || !bl.feasible)
        throw InfeasibleError("beam splitting needs both T_plus and B_plus inside the band for g=" +
                              std::to_string(g) + ", lambda=" + std::to_string(lambda));
    const ScatterParams sp{g, lambda, aligned_epsilon(a, -1), a, pi / 2.0, 0.0};
    auto f = [&](double w) { return std::norm(s_matrix(w, sp).s11) - target; };
    const double lo = std::min(t.omega, bl.omega);
    const double hi = std::max(t.omega, bl.omega);
    const double f_lo = f(lo);
    if ((f_lo < 0.0) == (f(hi) < 0.0)) throw NumericalError("splitting target not bracketed");
    const double w = detail::bisect(f, lo, hi, f_lo);
    const SMatrix s = s_matrix(w, sp);
    return {w, s.mu, std::norm(s.s11)};
}

// ---------------------------------------------------------------------------
// Feasibility maps

struct MapCell {
    double g{};
    double lambda{};
    CriticalKind kind{};
    double mu = std::numeric_limits<double>::quiet_NaN();
    double omega = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
};

inline MapCell evaluate_cell(CriticalKind kind, double g, double lambda, double a, double b) {
    MapCell cell{g, lambda, kind};
    if (kind == CriticalKind::isolation) {
        const CriticalPoint cp = isolation_point(g);
        cell.lambda = cp.lambda;
        cell.mu = *cp.mu;
        cell.omega = cp.omega;
        cell.feasible = cp.feasible;
    } else if (kind == CriticalKind::conversion) {
        const ConversionResult r = conversion_point(g, lambda, a, b, 1000);
        if (!r.roots.empty()) {
            cell.mu = *r.roots.front().mu;
            cell.omega = r.roots.front().omega;
            cell.feasible = true;
        }
    } else {
        const CriticalPoint cp = critical_point(kind, g, lambda);
        cell.mu = *cp.mu;
        cell.omega = cp.omega;
        cell.feasible = cp.feasible;
    }
    return cell;
}

/// Cells in row-major (g outer, lambda inner) order. The isolation map pins lambda to 1/3
/// and so is a single curve over g_grid.
inline std::vector<MapCell> feasibility_map(CriticalKind kind, std::span<const double> g_grid,
                                            std::span<const double> lambda_grid, int jobs = 1,
                                            double a = pi / 4.0, double b = pi / 2.0) {
    const std::vector<double> iso_lambda{isolation_lambda};
    const std::span<const double> lambdas =
        kind == CriticalKind::isolation ? std::span<const double>(iso_lambda) : lambda_grid;
    std::vector<MapCell> cells(g_grid.size() * lambdas.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        const double g = g_grid[i / lambdas.size()];
        const double lam = lambdas[i % lambdas.size()];
        cells[i] = evaluate_cell(kind, g, lam, a, b);
    });
    return cells;
}

}  // namespace spinvalve
