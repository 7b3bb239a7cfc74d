#pragma once

// Closed-form scattering matrix of a weak spinful wave off the localized condensate.
//
// Everything is expressed through the evanescent parameter
//     mu = sqrt((2 Omega - omega)^2 - 4) / g
// and two real intermediates X(mu), Y(mu). With phit = 2 sin(phi) / g and
// den = (i phit + X)^2 - Y^2 the left-incidence amplitudes are
//     S11 = S21 + 1 = i phit (i phit + X + Y C_Y) / den
//     S31 = S41     = i phit (i Y) M / den,      M = i e^{ib} sin a sin e - C_e cos e
//     S33 = S43 + 1 = i phit (i phit + X - Y C_Y) / den
//     S13 = S23     = i phit (i Y) M' / den,     M' = i e^{-ib} sin a sin e + C_e^* cos e
// Right incidence follows from the mirror symmetry S_{j'j} = S_{P(j') P(j)},
// P = (1 2)(3 4).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "spinvalve/errors.hpp"
#include "spinvalve/modes.hpp"
#include "spinvalve/spinor.hpp"

namespace spinvalve {

/// Distance in mu below which X and Y are treated as sitting on a pole.
inline constexpr double pole_tolerance = 1e-9;

struct ScatterParams {
    double g = 0.9;
    double lambda = 0.025;
    double epsilon = 0.0;
    double a = 0.0;
    double b = 0.0;
    double alpha = pi / 20.0;

    void validate() const {
        detail::require_finite(g, "g");
        detail::require_finite(lambda, "lambda");
        detail::require_finite(epsilon, "epsilon");
        detail::require_finite(alpha, "alpha");
        detail::require(g > 0.0, "localization grade g must be positive");
        detail::require(lambda > 0.0, "interaction ratio lambda must be positive");
        (void)SpinBasisAngles(a, b);
    }

    double localized_energy() const { return spinvalve::localized_energy(g, lambda); }
};

// ---------------------------------------------------------------------------
// Energy <-> mu

inline double mu_of_omega(double omega, double omega_loc, double g) {
    detail::require_finite(omega, "omega");
    if (omega < -2.0 || omega > 2.0)
        throw ValidationError("energy omega=" + std::to_string(omega) + " lies outside the band [-2, 2]");
    detail::require(g > 0.0, "localization grade g must be positive");
    detail::require(omega_loc < -2.0, "localized energy must be below -2");
    const double nu = 2.0 * omega_loc - omega;
    return std::sqrt(nu * nu - 4.0) / g;
}

inline double omega_of_mu(double mu, double omega_loc, double g) {
    return 2.0 * omega_loc + std::sqrt(mu * mu * g * g + 4.0);
}

// ---------------------------------------------------------------------------
// X, Y intermediates

enum class Pole { none, mu_two, mu_two_plus_two_lambda };

inline const char* pole_name(Pole p) {
    switch (p) {
        case Pole::none: return "none";
        case Pole::mu_two: return "mu=2";
        case Pole::mu_two_plus_two_lambda: return "mu=2+2*lambda";
    }
    return "?";
}

struct XYIntermediates {
    double mu{};
    double lambda{};
    Pole pole = Pole::none;
    /// Raw X and Y; NaN when `pole` is set.
    double x = std::numeric_limits<double>::quiet_NaN();
    double y = std::numeric_limits<double>::quiet_NaN();

    // X + Y = 2(lambda+1) + (lambda+1)^2 / (mu - 2 - 2 lambda)
    // X - Y = 2 + (lambda-1)^2 / (mu - 2)
    double sum_residue() const { return (lambda + 1.0) * (lambda + 1.0); }
    double sum_offset() const { return mu - 2.0 - 2.0 * lambda; }
    double diff_residue() const { return (lambda - 1.0) * (lambda - 1.0); }
    double diff_offset() const { return mu - 2.0; }

    /// Factored X + Y = (lambda+1)(2 mu - 3 lambda - 3) / (mu - 2 lambda - 2).
    double sum() const { return (lambda + 1.0) * (2.0 * mu - 3.0 * lambda - 3.0) / sum_offset(); }
    /// Factored X - Y = (2 mu + lambda^2 - 2 lambda - 3) / (mu - 2).
    double diff() const { return (2.0 * mu + lambda * lambda - 2.0 * lambda - 3.0) / diff_offset(); }
};

inline XYIntermediates xy(double mu, double lambda) {
    detail::require_finite(mu, "mu");
    detail::require(mu > 0.0, "mu must be positive");
    detail::require(lambda > 0.0, "interaction ratio lambda must be positive");

    XYIntermediates r;
    r.mu = mu;
    r.lambda = lambda;
    if (std::abs(mu - 2.0) < pole_tolerance) {
        r.pole = Pole::mu_two;
    } else if (std::abs(mu - 2.0 - 2.0 * lambda) < pole_tolerance) {
        r.pole = Pole::mu_two_plus_two_lambda;
    }
    if (r.pole != Pole::none) return r;

    const double l2 = lambda * lambda;
    const double den = (mu - 2.0) * (mu - 2.0 - 2.0 * lambda);
    r.x = (2.0 + lambda) + ((l2 + 1.0) * mu - l2 * lambda - lambda - 2.0) / den;
    r.y = lambda * (1.0 + (2.0 * mu + l2 - 2.0 * lambda - 3.0) / den);

    const double scale = std::max({1.0, std::abs(r.x), std::abs(r.y)});
    if (std::abs(r.x + r.y - r.sum()) > 1e-10 * scale || std::abs(r.x - r.y - r.diff()) > 1e-10 * scale)
        throw NumericalError("X/Y factored forms disagree at mu=" + std::to_string(mu));
    return r;
}

// ---------------------------------------------------------------------------
// Spin-geometry factors

/// C_Y = sin e cos a - cos e sin a sin b, in [-1, 1].
inline double c_y(double a, double b, double epsilon) {
    return std::sin(epsilon) * std::cos(a) - std::cos(epsilon) * std::sin(a) * std::sin(b);
}

/// C_e = cos^2(a/2) + e^{2ib} sin^2(a/2).
inline complex c_eps(double a, double b) {
    const double c = std::cos(a / 2.0);
    const double s = std::sin(a / 2.0);
    return c * c + std::polar(s * s, 2.0 * b);
}

/// M = i e^{ib} sin a sin e - C_e cos e; |M|^2 + C_Y^2 = 1.
inline complex conversion_factor(double a, double b, double epsilon) {
    return imag_unit * std::polar(std::sin(a) * std::sin(epsilon), b) - c_eps(a, b) * std::cos(epsilon);
}

/// Counterpart of M entering S13.
inline complex conversion_factor_reverse(double a, double b, double epsilon) {
    return imag_unit * std::polar(std::sin(a) * std::sin(epsilon), -b) + std::conj(c_eps(a, b)) * std::cos(epsilon);
}

// ---------------------------------------------------------------------------
// S matrix

struct SMatrix {
    double omega{};
    double phi{};
    double phi_tilde{};
    double mu{};
    double x = std::numeric_limits<double>::quiet_NaN();
    double y = std::numeric_limits<double>::quiet_NaN();
    Pole pole = Pole::none;
    bool band_edge = false;
    double c_y{};
    complex c_eps{};

    complex s11{}, s21{}, s31{}, s41{};
    complex s13{}, s23{}, s33{}, s43{};

    /// Amplitude S_{out,in} for any incident branch in {1..4}.
    complex element(int out, int in) const {
        detail::require_branch(out);
        detail::require_branch(in);
        if (in == 2 || in == 4) {
            // mirror: swap 1<->2 and 3<->4 on both indices
            auto mirror = [](int j) { return j % 2 == 1 ? j + 1 : j - 1; };
            return element(mirror(out), mirror(in));
        }
        const std::array<complex, 4> col = column(in);
        return col[static_cast<std::size_t>(out - 1)];
    }

    /// (S_1j, S_2j, S_3j, S_4j) for incident branch j.
    std::array<complex, 4> column(int in) const {
        detail::require_branch(in);
        if (in == 1) return {s11, s21, s31, s41};
        if (in == 3) return {s13, s23, s33, s43};
        return {element(1, in), element(2, in), element(3, in), element(4, in)};
    }
};

namespace detail {

/// i phit / (i phit + base + residue / offset), evaluated without forming the pole.
inline complex pole_safe_ratio(double phit, double base, double residue, double offset) {
    const complex ip = imag_unit * phit;
    if (residue == 0.0) return ip / (ip + base);
    return ip * offset / ((ip + base) * offset + residue);
}

}  // namespace detail

inline SMatrix s_matrix(double omega, const ScatterParams& p) {
    p.validate();
    detail::require_finite(omega, "omega");
    if (omega < -2.0 || omega > 2.0)
        throw ValidationError("energy omega=" + std::to_string(omega) + " lies outside the band [-2, 2]");

    SMatrix s;
    s.omega = omega;
    s.phi = std::acos(-omega / 2.0);
    s.phi_tilde = 2.0 * std::sin(s.phi) / p.g;
    s.c_y = c_y(p.a, p.b, p.epsilon);
    s.c_eps = c_eps(p.a, p.b);
    const double omega_loc = p.localized_energy();
    s.mu = mu_of_omega(omega, omega_loc, p.g);

    if (omega == -2.0 || omega == 2.0 || s.phi_tilde == 0.0) {
        s.band_edge = true;
        s.s21 = -1.0;
        s.s43 = -1.0;
        return s;
    }

    const XYIntermediates xyv = xy(s.mu, p.lambda);
    s.pole = xyv.pole;
    s.x = xyv.x;
    s.y = xyv.y;

    const complex ip = imag_unit * s.phi_tilde;
    const complex m = conversion_factor(p.a, p.b, p.epsilon);
    const complex m_rev = conversion_factor_reverse(p.a, p.b, p.epsilon);

    if (xyv.pole == Pole::none) {
        const complex den = (ip + s.x) * (ip + s.x) - s.y * s.y;
        s.s11 = ip * (ip + s.x + s.y * s.c_y) / den;
        s.s31 = ip * (imag_unit * s.y) * m / den;
        s.s33 = ip * (ip + s.x - s.y * s.c_y) / den;
        s.s13 = ip * (imag_unit * s.y) * m_rev / den;
    } else {
        // Partial fractions over the factored X +/- Y; the divergent channel drops out.
        const double lam = p.lambda;
        const complex t_sum =
            detail::pole_safe_ratio(s.phi_tilde, 2.0 * (lam + 1.0), xyv.sum_residue(), xyv.sum_offset());
        const complex t_diff = detail::pole_safe_ratio(s.phi_tilde, 2.0, xyv.diff_residue(), xyv.diff_offset());
        s.s11 = 0.5 * (1.0 + s.c_y) * t_diff + 0.5 * (1.0 - s.c_y) * t_sum;
        s.s33 = 0.5 * (1.0 - s.c_y) * t_diff + 0.5 * (1.0 + s.c_y) * t_sum;
        s.s31 = 0.5 * imag_unit * m * (t_diff - t_sum);
        s.s13 = 0.5 * imag_unit * m_rev * (t_diff - t_sum);
    }
    s.s21 = s.s11 - 1.0;
    s.s41 = s.s31;
    s.s43 = s.s33 - 1.0;
    s.s23 = s.s13;

    for (const complex& v : {s.s11, s.s31, s.s33, s.s13}) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError(std::string("non-finite scattering amplitude near pole ") + pole_name(xyv.pole) +
                                 " (mu=" + std::to_string(s.mu) + ")");
    }
    return s;
}

/// |sum_j' |S_j'j|^2 - 1| for incident branch j.
inline double flux_residual(const SMatrix& s, int incident = 1) {
    double total = 0.0;
    for (const complex& v : s.column(incident)) total += std::norm(v);
    return std::abs(total - 1.0);
}

inline double max_flux_residual(const SMatrix& s) { return std::max(flux_residual(s, 1), flux_residual(s, 3)); }

}  // namespace spinvalve
