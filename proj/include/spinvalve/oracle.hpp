#pragma once

// Brute-force solution of the linearized scattering problem, independent of the
// closed-form amplitudes in scattering.hpp.
//
// A weak field phi_n = p_n e^{-i omega t} + q_n e^{-i nu t}, nu = 2 Omega - omega, on top
// of the condensate obeys
//   omega p_n = -R p_{n-1} - R^dag p_{n+1} - delta_{n0} (L p_0 + C q_0^*)
//   nu    q_n = -R q_{n-1} - R^dag q_{n+1} - delta_{n0} (L q_0 + C p_0^*)
// where L and C are the Wirtinger derivatives d f/d psi and d f/d psi^* of the on-site
// nonlinearity f_s = gamma (|psi_s|^2 + lambda |psi_-s|^2) psi_s at the condensate
// amplitude (phase e^{-i Omega t} stripped). With plane-wave ansatz for p and an
// evanescent q_n = chi^|n| R^n q_0, the rows n = -1 and n = 0 fix the four amplitudes
// and q_0. Conjugation makes the system real-linear, so it is solved over the 12 real
// and imaginary parts.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "spinvalve/errors.hpp"
#include "spinvalve/modes.hpp"
#include "spinvalve/scattering.hpp"
#include "spinvalve/spinor.hpp"

namespace spinvalve::oracle {

/// Condition number above which the 12x12 system is reported singular.
inline constexpr double max_condition = 1e12;

struct Couplings {
    Matrix2 direct;     ///< L: d f / d psi
    Matrix2 conjugate;  ///< C: d f / d psi^*
};

/// Wirtinger derivatives of the on-site nonlinearity at spinor `psi`.
inline Couplings nonlinearity_jacobian(const Spinor& psi, double gamma, double lambda) {
    const complex u = psi.up;
    const complex d = psi.down;
    const double nu = std::norm(u);
    const double nd = std::norm(d);
    Couplings c;
    c.direct = {gamma * (2.0 * nu + lambda * nd), gamma * lambda * std::conj(d) * u,
                gamma * lambda * std::conj(u) * d, gamma * (2.0 * nd + lambda * nu)};
    c.conjugate = {gamma * u * u, gamma * lambda * d * u, gamma * lambda * u * d, gamma * d * d};
    return c;
}

/// Couplings for the scattering problem; gamma drops out, so gamma = 1, |d_0s| = sqrt(g).
inline Couplings scattering_couplings(const ScatterParams& p) {
    const LocalizedMode mode({p.g, p.lambda, 1.0, p.epsilon, p.alpha});
    return nonlinearity_jacobian(mode.at(0), 1.0, p.lambda);
}

struct OracleColumn {
    int incident{};
    std::array<complex, 4> s{};  ///< S_{1j}..S_{4j}
    Spinor q0;
    double nu{};
    double chi{};
    double condition{};
    double residual{};  ///< largest equation residual at n in [-3, 3] after solving
};

class LinearScatterSystem {
 public:
    LinearScatterSystem(double omega, const ScatterParams& params, int incident)
        : params_(params), incident_(detail::require_branch(incident)) {
        params.validate();
        detail::require_finite(omega, "omega");
        if (!(omega > -2.0 && omega < 2.0))
            throw ValidationError("oracle needs omega strictly inside (-2, 2), got " + std::to_string(omega));
        omega_ = omega;
        phi_ = std::acos(-omega / 2.0);
        nu_ = 2.0 * params.localized_energy() - omega;
        chi_ = 2.0 / (-nu_ + std::sqrt(nu_ * nu_ - 4.0));
        couplings_ = scattering_couplings(params);
        const SpinBasisAngles ang(params.a, params.b);
        for (int j = 1; j <= 4; ++j) modes_[static_cast<std::size_t>(j - 1)] = TransmissionMode(j, phi_, ang, params.alpha);
    }

    double omega() const { return omega_; }
    double nu() const { return nu_; }
    double chi() const { return chi_; }
    int incident() const { return incident_; }

    /// Unknowns: z = (S_1j, S_2j, S_3j, S_4j, q0_up, q0_down).
    using Unknowns = std::array<complex, 6>;

    Spinor p(site_index n, const Unknowns& z) const {
        const bool incident_side = (incident_ == 1 || incident_ == 3) ? n <= -1 : n >= 0;
        Spinor out;
        if (incident_side) out = mode(incident_).at(n);
        if (n >= 0)
            out += z[0] * mode(1).at(n) + z[2] * mode(3).at(n);
        else
            out += z[1] * mode(2).at(n) + z[3] * mode(4).at(n);
        return out;
    }

    Spinor q(site_index n, const Unknowns& z) const {
        const double m = static_cast<double>(n < 0 ? -n : n);
        return std::pow(chi_, m) * (rotation_matrix(params_.alpha, n) * Spinor{z[4], z[5]});
    }

    Spinor p_row(site_index n, const Unknowns& z) const {
        const Matrix2 r = rotation_matrix(params_.alpha, 1);
        Spinor res = omega_ * p(n, z) + r * p(n - 1, z) + r.adjoint() * p(n + 1, z);
        if (n == 0) res += couplings_.direct * p(0, z) + couplings_.conjugate * q(0, z).conj();
        return res;
    }

    Spinor q_row(site_index n, const Unknowns& z) const {
        const Matrix2 r = rotation_matrix(params_.alpha, 1);
        Spinor res = nu_ * q(n, z) + r * q(n - 1, z) + r.adjoint() * q(n + 1, z);
        if (n == 0) res += couplings_.direct * q(0, z) + couplings_.conjugate * p(0, z).conj();
        return res;
    }

    /// The six complex equations pinning the unknowns.
    std::array<complex, 6> equations(const Unknowns& z) const {
        const Spinor e1 = p_row(-1, z);
        const Spinor e2 = p_row(0, z);
        const Spinor e3 = q_row(0, z);
        return {e1.up, e1.down, e2.up, e2.down, e3.up, e3.down};
    }

    OracleColumn solve() const {
        using Mat12 = Eigen::Matrix<double, 12, 12>;
        using Vec12 = Eigen::Matrix<double, 12, 1>;

        const Unknowns zero{};
        const std::array<complex, 6> base = equations(zero);
        Mat12 a;
        Vec12 rhs;
        for (int k = 0; k < 6; ++k) {
            rhs(2 * k) = -base[static_cast<std::size_t>(k)].real();
            rhs(2 * k + 1) = -base[static_cast<std::size_t>(k)].imag();
        }
        for (int col = 0; col < 12; ++col) {
            Unknowns probe{};
            probe[static_cast<std::size_t>(col / 2)] = (col % 2 == 0) ? complex(1.0, 0.0) : imag_unit;
            const std::array<complex, 6> e = equations(probe);
            for (int k = 0; k < 6; ++k) {
                const complex d = e[static_cast<std::size_t>(k)] - base[static_cast<std::size_t>(k)];
                a(2 * k, col) = d.real();
                a(2 * k + 1, col) = d.imag();
            }
        }

        const Eigen::JacobiSVD<Mat12> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double condition = sv(11) > 0.0 ? sv(0) / sv(11) : std::numeric_limits<double>::infinity();
        if (!(condition < max_condition))
            throw NumericalError("oracle system is singular at omega=" + std::to_string(omega_) +
                                 " (condition estimate " + std::to_string(condition) + ")");
        const Vec12 x = svd.solve(rhs);

        Unknowns z;
        for (int k = 0; k < 6; ++k) z[static_cast<std::size_t>(k)] = complex(x(2 * k), x(2 * k + 1));

        OracleColumn out;
        out.incident = incident_;
        out.s = {z[0], z[1], z[2], z[3]};
        out.q0 = {z[4], z[5]};
        out.nu = nu_;
        out.chi = chi_;
        out.condition = condition;
        out.residual = max_residual(z, 3);
        return out;
    }

    /// Largest residual of both lattice equations over n in [-half_width, half_width].
    double max_residual(const Unknowns& z, site_index half_width) const {
        double worst = 0.0;
        for (site_index n = -half_width; n <= half_width; ++n)
            worst = std::max({worst, std::sqrt(p_row(n, z).norm2()), std::sqrt(q_row(n, z).norm2())});
        return worst;
    }

    static Unknowns unknowns_of(const OracleColumn& c) {
        return {c.s[0], c.s[1], c.s[2], c.s[3], c.q0.up, c.q0.down};
    }

 private:
    const TransmissionMode& mode(int j) const { return *modes_[static_cast<std::size_t>(j - 1)]; }

    ScatterParams params_;
    int incident_;
    double omega_{};
    double phi_{};
    double nu_{};
    double chi_{};
    Couplings couplings_;
    std::array<std::optional<TransmissionMode>, 4> modes_;
};

inline OracleColumn solve_numeric(double omega, const ScatterParams& params, int incident) {
    return LinearScatterSystem(omega, params, incident).solve();
}

/// Rebuilds the solved fields on a (2 half_width + 1)-site lattice and returns the largest
/// residual of the coupled equations there.
inline double lattice_residual(double omega, const ScatterParams& params, const OracleColumn& column,
                               site_index half_width = 200) {
    const LinearScatterSystem sys(omega, params, column.incident);
    return sys.max_residual(LinearScatterSystem::unknowns_of(column), half_width);
}

/// Left-incidence columns packed in the closed-form layout (x, y, mu left unset).
inline SMatrix oracle_s_matrix(double omega, const ScatterParams& params) {
    const OracleColumn c1 = solve_numeric(omega, params, 1);
    const OracleColumn c3 = solve_numeric(omega, params, 3);
    SMatrix s;
    s.omega = omega;
    s.phi = std::acos(-omega / 2.0);
    s.phi_tilde = 2.0 * std::sin(s.phi) / params.g;
    s.c_y = c_y(params.a, params.b, params.epsilon);
    s.c_eps = c_eps(params.a, params.b);
    s.s11 = c1.s[0];
    s.s21 = c1.s[1];
    s.s31 = c1.s[2];
    s.s41 = c1.s[3];
    s.s13 = c3.s[0];
    s.s23 = c3.s[1];
    s.s33 = c3.s[2];
    s.s43 = c3.s[3];
    return s;
}

/// Largest |S_{j'j} - S_{P(j') P(j)}| between directly solved right-incidence columns
/// (j = 2, 4) and the mirrored left-incidence ones.
inline double isotropy_check(double omega, const ScatterParams& params) {
    std::array<OracleColumn, 4> cols;
    for (int j = 1; j <= 4; ++j) cols[static_cast<std::size_t>(j - 1)] = solve_numeric(omega, params, j);
    auto mirror = [](int j) { return j % 2 == 1 ? j + 1 : j - 1; };
    double worst = 0.0;
    for (int in : {2, 4}) {
        for (int out = 1; out <= 4; ++out) {
            const complex direct = cols[static_cast<std::size_t>(in - 1)].s[static_cast<std::size_t>(out - 1)];
            const complex mirrored =
                cols[static_cast<std::size_t>(mirror(in) - 1)].s[static_cast<std::size_t>(mirror(out) - 1)];
            worst = std::max(worst, std::abs(direct - mirrored));
        }
    }
    return worst;
}

}  // namespace spinvalve::oracle
