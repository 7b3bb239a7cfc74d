#pragma once

// Complex 2-vector / 2x2-matrix algebra for spin-1/2 lattice fields.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

#include "spinvalve/errors.hpp"

namespace spinvalve {

using complex = std::complex<double>;
using site_index = std::int64_t;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr complex imag_unit{0.0, 1.0};

/// Two-component field amplitude (pseudo-spin up, pseudo-spin down) at one site.
struct Spinor {
    complex up{};
    complex down{};

    constexpr Spinor& operator+=(const Spinor& o) {
        up += o.up;
        down += o.down;
        return *this;
    }
    constexpr Spinor& operator-=(const Spinor& o) {
        up -= o.up;
        down -= o.down;
        return *this;
    }
    constexpr Spinor& operator*=(complex s) {
        up *= s;
        down *= s;
        return *this;
    }

    double norm2() const { return std::norm(up) + std::norm(down); }
    Spinor conj() const { return {std::conj(up), std::conj(down)}; }
    bool is_finite() const {
        return std::isfinite(up.real()) && std::isfinite(up.imag()) && std::isfinite(down.real()) &&
               std::isfinite(down.imag());
    }

    friend constexpr Spinor operator+(Spinor a, const Spinor& b) { return a += b; }
    friend constexpr Spinor operator-(Spinor a, const Spinor& b) { return a -= b; }
    friend constexpr Spinor operator-(const Spinor& a) { return {-a.up, -a.down}; }
    friend constexpr Spinor operator*(complex s, Spinor a) { return a *= s; }
    friend constexpr Spinor operator*(Spinor a, complex s) { return a *= s; }
    friend constexpr Spinor operator*(double s, Spinor a) { return a *= complex(s); }
    friend constexpr bool operator==(const Spinor&, const Spinor&) = default;
};

/// Hermitian inner product a^dagger b (conjugate-linear in the first argument).
inline complex inner(const Spinor& a, const Spinor& b) {
    return std::conj(a.up) * b.up + std::conj(a.down) * b.down;
}

/// 2x2 complex matrix, entries stored row-major.
struct Matrix2 {
    complex m00{}, m01{}, m10{}, m11{};

    static constexpr Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Matrix2 diagonal(complex d0, complex d1) { return {d0, 0.0, 0.0, d1}; }

    Matrix2 adjoint() const { return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)}; }
    Matrix2 conj() const { return {std::conj(m00), std::conj(m01), std::conj(m10), std::conj(m11)}; }
    complex det() const { return m00 * m11 - m01 * m10; }
    complex trace() const { return m00 + m11; }

    Matrix2 inverse() const {
        const complex d = det();
        if (d == complex(0.0)) throw NumericalError("singular 2x2 matrix");
        return {m11 / d, -m01 / d, -m10 / d, m00 / d};
    }

    double max_abs_diff(const Matrix2& o) const {
        return std::max({std::abs(m00 - o.m00), std::abs(m01 - o.m01), std::abs(m10 - o.m10),
                         std::abs(m11 - o.m11)});
    }

    friend constexpr Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
        return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
    }
    friend constexpr Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
        return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
    }
    friend constexpr Matrix2 operator*(complex s, const Matrix2& a) {
        return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
    }
    friend constexpr Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
        return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
    }
    friend constexpr Spinor operator*(const Matrix2& a, const Spinor& v) {
        return {a.m00 * v.up + a.m01 * v.down, a.m10 * v.up + a.m11 * v.down};
    }
    friend constexpr bool operator==(const Matrix2&, const Matrix2&) = default;
};

/// Real 3-vector psi^dagger sigma psi.
struct SpinVector {
    double x{}, y{}, z{};

    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
    double dot(const SpinVector& o) const { return x * o.x + y * o.y + z * o.z; }

    friend constexpr SpinVector operator*(double s, const SpinVector& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend constexpr SpinVector operator-(const SpinVector& v) { return {-v.x, -v.y, -v.z}; }
    friend constexpr SpinVector operator-(const SpinVector& a, const SpinVector& b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
};

enum class Axis { x, y, z };

constexpr Matrix2 pauli(Axis axis) {
    switch (axis) {
        case Axis::x: return {0.0, 1.0, 1.0, 0.0};
        case Axis::y: return {0.0, -imag_unit, imag_unit, 0.0};
        case Axis::z: return {1.0, 0.0, 0.0, -1.0};
    }
    return Matrix2::identity();
}

inline Axis parse_axis(std::string_view tag) {
    if (tag == "x") return Axis::x;
    if (tag == "y") return Axis::y;
    if (tag == "z") return Axis::z;
    throw ValidationError("unknown Pauli axis '" + std::string(tag) + "' (expected x, y or z)");
}

inline Matrix2 pauli(std::string_view tag) { return pauli(parse_axis(tag)); }

/// R^n = exp(-i sigma_y n alpha), evaluated in closed form so large |n| does not
/// accumulate rounding from repeated products.
inline Matrix2 rotation_matrix(double alpha, site_index n) {
    const double angle = static_cast<double>(n) * alpha;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c, -s, s, c};
}

inline SpinVector spin_expectation(const Spinor& psi) {
    const complex cross = std::conj(psi.up) * psi.down;
    return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(psi.up) - std::norm(psi.down)};
}

/// Active rotation of a 3-vector about +y by `angle`.
inline SpinVector rotate_about_y(const SpinVector& v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x + s * v.z, v.y, -s * v.x + c * v.z};
}

}  // namespace spinvalve
