#pragma once

// Free transmission modes of the spin-orbit-coupled lattice and the strong
// localized condensate mode pinned at the interacting site.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spinvalve/errors.hpp"
#include "spinvalve/spinor.hpp"

namespace spinvalve {

inline constexpr double angle_tolerance = 1e-12;

/// Wraps any finite angle into [0, 2pi).
inline double wrap_angle(double angle) {
    detail::require_finite(angle, "angle");
    double w = std::fmod(angle, 2.0 * pi);
    if (w < 0.0) w += 2.0 * pi;
    if (w >= 2.0 * pi) w = 0.0;
    return w;
}

namespace detail {

inline double require_half_turn(double angle, const char* name) {
    require_finite(angle, name);
    if (angle < -angle_tolerance || angle > pi + angle_tolerance)
        throw ValidationError(std::string(name) + " must lie in [0, pi], got " + std::to_string(angle));
    return std::clamp(angle, 0.0, pi);
}

}  // namespace detail

/// Orientation (a, b) of the transmission-mode spin basis; both in [0, pi].
struct SpinBasisAngles {
    double a = 0.0;
    double b = 0.0;

    SpinBasisAngles() = default;
    SpinBasisAngles(double a_in, double b_in)
        : a(detail::require_half_turn(a_in, "spin angle a")), b(detail::require_half_turn(b_in, "spin angle b")) {}
};

/// sigma_y eigenstates u_+ = (1, i), u_- = (1, -i).
inline constexpr Spinor sigma_y_up{1.0, imag_unit};
inline constexpr Spinor sigma_y_down{1.0, -imag_unit};

struct SpinBasis {
    Spinor plus;
    Spinor minus;
};

/// Orthogonal pair l_+, l_- (each of norm^2 2) obtained by tilting u_+/u_- by (a, b).
inline SpinBasis spin_basis(const SpinBasisAngles& angles) {
    const double c = std::cos(angles.a / 2.0);
    const double s = std::sin(angles.a / 2.0);
    const complex eb = std::polar(1.0, angles.b);
    return {c * sigma_y_up + (eb * s) * sigma_y_down, (-std::conj(eb) * s) * sigma_y_up + c * sigma_y_down};
}

inline SpinBasis spin_basis(double a, double b) { return spin_basis(SpinBasisAngles(a, b)); }

inline double dispersion(double phi) { return -2.0 * std::cos(phi); }

/// Principal-branch quasimomentum phi = arccos(-omega/2) in [0, pi].
inline double quasimomentum(double omega) {
    detail::require_finite(omega, "omega");
    if (omega < -2.0 || omega > 2.0)
        throw ValidationError("energy omega=" + std::to_string(omega) + " lies outside the band [-2, 2]");
    return std::acos(-omega / 2.0);
}

namespace detail {

inline int require_branch(int branch) {
    if (branch < 1 || branch > 4)
        throw ValidationError("transmission branch must be 1, 2, 3 or 4, got " + std::to_string(branch));
    return branch;
}

inline double require_quasimomentum(double phi) {
    require_finite(phi, "phi");
    if (phi < -angle_tolerance || phi > pi + angle_tolerance)
        throw ValidationError("quasimomentum phi must lie in [0, pi], got " + std::to_string(phi));
    return std::clamp(phi, 0.0, pi);
}

}  // namespace detail

/// One of the four degenerate plane-wave states at energy omega = -2 cos(phi):
///   1: e^{+in phi} R^n l_+     2: e^{-in phi} R^n l_+
///   3: e^{+in phi} R^n l_-     4: e^{-in phi} R^n l_-
/// Branches 1 and 3 move towards +n, branches 2 and 4 towards -n.
class TransmissionMode {
 public:
    TransmissionMode(int branch, double phi, const SpinBasisAngles& angles, double alpha)
        : branch_(detail::require_branch(branch)), phi_(detail::require_quasimomentum(phi)), angles_(angles),
          alpha_(alpha), basis_(spin_basis(angles)) {
        detail::require_finite(alpha, "alpha");
    }

    int branch() const { return branch_; }
    double phi() const { return phi_; }
    double omega() const { return dispersion(phi_); }
    double alpha() const { return alpha_; }
    const SpinBasisAngles& angles() const { return angles_; }
    bool right_moving() const { return branch_ == 1 || branch_ == 3; }
    double group_velocity() const { return (right_moving() ? 2.0 : -2.0) * std::sin(phi_); }
    const Spinor& spin_part() const { return branch_ <= 2 ? basis_.plus : basis_.minus; }

    Spinor at(site_index n) const {
        const double k = right_moving() ? phi_ : -phi_;
        return std::polar(1.0, k * static_cast<double>(n)) * (rotation_matrix(alpha_, n) * spin_part());
    }

 private:
    int branch_;
    double phi_;
    SpinBasisAngles angles_;
    double alpha_;
    SpinBasis basis_;
};

inline Spinor transmission_mode(int branch, double phi, double a, double b, double alpha, site_index n) {
    return TransmissionMode(branch, phi, SpinBasisAngles(a, b), alpha).at(n);
}

/// Closed-form spin texture of R^n l_+ (sign=+1) or R^n l_- (sign=-1).
inline SpinVector transmission_spin_texture(int sign, site_index n, double a, double b, double alpha) {
    if (sign != 1 && sign != -1) throw ValidationError("texture sign must be +1 or -1");
    const SpinBasisAngles ang(a, b);
    const double turn = ang.b + 2.0 * static_cast<double>(n) * alpha;
    const double s = 2.0 * sign;
    return {s * std::sin(ang.a) * std::sin(turn), s * std::cos(ang.a), s * std::sin(ang.a) * std::cos(turn)};
}

// ---------------------------------------------------------------------------
// Localized condensate

/// Eigenenergy Omega = -sqrt((1+lambda)^2 g^2 + 4) of the localized mode.
inline double localized_energy(double g, double lambda) {
    const double G = g * (1.0 + lambda);
    return -std::sqrt(G * G + 4.0);
}

/// Spatial decay factor kappa in (0, 1) for an eigenenergy Omega < -2.
inline double decay_factor(double omega_loc) {
    if (!(omega_loc < -2.0)) throw ValidationError("localized energy must be below -2");
    return 2.0 / (-omega_loc + std::sqrt(omega_loc * omega_loc - 4.0));
}

struct LocalizedModeParams {
    double g = 0.9;
    double lambda = 0.025;
    double gamma = 0.002;
    double epsilon = 0.0;
    double alpha = pi / 20.0;
};

/// d_n = sqrt(g/gamma) kappa^|n| R^n (e^{i eps}, 1)^T with energy Omega.
class LocalizedMode {
 public:
    explicit LocalizedMode(const LocalizedModeParams& p) : p_(p) {
        detail::require_finite(p.g, "g");
        detail::require_finite(p.lambda, "lambda");
        detail::require_finite(p.gamma, "gamma");
        detail::require_finite(p.alpha, "alpha");
        detail::require(p.g > 0.0, "localization grade g must be positive");
        detail::require(p.lambda > 0.0, "interaction ratio lambda must be positive");
        detail::require(p.gamma > 0.0, "interaction strength gamma must be positive");
        p_.epsilon = wrap_angle(p.epsilon);
        if (p.gamma * (1.0 + p.lambda) >= 0.1)
            warnings_.push_back("gamma*(1+lambda) >= 0.1: weak-interaction assumption is marginal");

        const double G = p.g * (1.0 + p.lambda);
        omega_ = localized_energy(p.g, p.lambda);
        kappa_ = 2.0 / (G + std::sqrt(G * G + 4.0));
        atom_number_ = -2.0 * omega_ / ((1.0 + p.lambda) * p.gamma);
        amplitude_ = std::sqrt(p.g / p.gamma);
        spin_ = {std::polar(1.0, p_.epsilon), 1.0};
    }

    const LocalizedModeParams& params() const { return p_; }
    double g() const { return p_.g; }
    double lambda() const { return p_.lambda; }
    double gamma() const { return p_.gamma; }
    double epsilon() const { return p_.epsilon; }
    double alpha() const { return p_.alpha; }

    double omega() const { return omega_; }
    double kappa() const { return kappa_; }
    double atom_number() const { return atom_number_; }
    /// Per-component amplitude sqrt(g/gamma) at the origin.
    double amplitude() const { return amplitude_; }
    const Spinor& spin_part() const { return spin_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// amplitude * kappa^|n|; log-domain past |n| = 500 so deep tails underflow cleanly.
    double envelope(site_index n) const {
        const auto m = static_cast<double>(n < 0 ? -n : n);
        if (m > 500.0) return std::exp(std::log(amplitude_) + m * std::log(kappa_));
        return amplitude_ * std::pow(kappa_, m);
    }

    Spinor at(site_index n) const { return envelope(n) * (rotation_matrix(p_.alpha, n) * spin_); }

    /// Sum over all sites of d_n^dagger d_n (geometric series).
    double norm() const {
        const double k2 = kappa_ * kappa_;
        return 2.0 * amplitude_ * amplitude_ * (1.0 + k2) / (1.0 - k2);
    }

 private:
    LocalizedModeParams p_;
    double omega_{};
    double kappa_{};
    double atom_number_{};
    double amplitude_{};
    Spinor spin_{};
    std::vector<std::string> warnings_;
};

inline LocalizedMode localized_mode(double g, double lambda, double gamma, double epsilon, double alpha) {
    return LocalizedMode({g, lambda, gamma, epsilon, alpha});
}

/// Texture 2(g/gamma) kappa^{2|n|} [cos e cos 2n alpha, -sin e, -cos e sin 2n alpha] with kappa
/// taken from an explicitly supplied Omega. Lets plots use an (Omega, g) pair that is not tied
/// by the Omega(g, lambda) relation.
inline SpinVector localized_spin_texture(site_index n, double omega_loc, double g, double gamma, double epsilon,
                                         double alpha) {
    detail::require(g > 0.0 && gamma > 0.0, "g and gamma must be positive");
    const double kappa = decay_factor(omega_loc);
    const auto m = static_cast<double>(n < 0 ? -n : n);
    const double scale = 2.0 * (g / gamma) * std::pow(kappa, 2.0 * m);
    const double turn = 2.0 * static_cast<double>(n) * alpha;
    return {scale * std::cos(epsilon) * std::cos(turn), -scale * std::sin(epsilon),
            -scale * std::cos(epsilon) * std::sin(turn)};
}

inline SpinVector localized_spin_texture(site_index n, const LocalizedMode& mode) {
    return localized_spin_texture(n, mode.omega(), mode.g(), mode.gamma(), mode.epsilon(), mode.alpha());
}

}  // namespace spinvalve
