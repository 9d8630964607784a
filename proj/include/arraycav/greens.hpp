#pragma once

// Free-space dyadic Green's function and the scalar dipole-dipole kernel.
// Units: lambda = gamma = 1 by default; every function takes q explicitly
// through the Scalar-typed template so long double oracles can reuse it.

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "arraycav/types.hpp"

namespace arraycav {

template <typename T>
using Vec2T = Eigen::Matrix<T, 2, 1>;
template <typename T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <typename T>
using CVec2T = Eigen::Matrix<std::complex<T>, 2, 1>;
template <typename T>
using CMat3T = Eigen::Matrix<std::complex<T>, 3, 3>;

template <typename T>
CVec2T<T> circular_dipole() {
    const T s = T(1) / std::sqrt(T(2));
    return CVec2T<T>(std::complex<T>(s, 0), std::complex<T>(0, s));
}

// G = A(r) I + C(r) r r^T, plus (1/r) dA/dr and (1/r) dC/dr.
// Im parts below qr = 2 come from Bessel series; the closed forms cancel badly there.
template <typename T>
struct RadialParts {
    std::complex<T> A, C, dA, dC;
};

namespace detail {

template <typename T>
struct SeriesValues {
    T f1, f2, df1, df2;  // f1 = j0 - j1/x, f2 = j2/x^2, dfi = fi'(x)/x
};

template <typename T>
SeriesValues<T> bessel_series(T x) {
    const T x2 = x * x;
    T inv_odd_fact = 1;     // 1/(2k+1)!
    T s = T(1) / T(3);      // 1/(2^k k! (2k+3)!!)
    T u = T(1) / T(15);     // 1/(2^k k! (2k+5)!!)
    T pw = 1;               // x^(2k)
    T pw_prev = 0;          // x^(2k-2)
    SeriesValues<T> out{0, 0, 0, 0};
    T sign = 1;
    for (int k = 0; k < 40; ++k) {
        if (k > 0) {
            inv_odd_fact /= T(2 * k) * T(2 * k + 1);
            s /= T(2 * k) * T(2 * k + 3);
            u /= T(2 * k) * T(2 * k + 5);
            pw_prev = pw;
            pw *= x2;
            sign = -sign;
        }
        const T c = sign * (inv_odd_fact - s);
        const T d = sign * u;
        out.f1 += c * pw;
        out.f2 += d * pw;
        if (k > 0) {
            out.df1 += T(2 * k) * c * pw_prev;
            out.df2 += T(2 * k) * d * pw_prev;
        }
        if (k > 4 && std::abs(pw * inv_odd_fact) < std::numeric_limits<T>::epsilon() * T(1e-3)) break;
    }
    return out;
}

}  // namespace detail

template <typename T>
RadialParts<T> radial_parts(T r, T q) {
    using C = std::complex<T>;
    const T x = q * r;
    const T pref = q / (T(4) * T(kPi));
    const C e = std::exp(C(0, x));
    const T x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x, x6 = x5 * x;
    const C alpha(T(1) / x - T(1) / x3, T(1) / x2);
    const C beta(-T(1) / x3 + T(3) / x5, -T(3) / x4);
    const C dalpha(-T(1) / x2 + T(3) / x4, -T(2) / x3);
    const C dbeta(T(3) / x4 - T(15) / x6, T(12) / x5);
    const C I(0, 1);
    RadialParts<T> p;
    p.A = pref * e * alpha;
    p.C = pref * q * q * e * beta;
    p.dA = pref * q * q * e * (I * alpha + dalpha) / x;
    p.dC = pref * q * q * q * q * e * (I * beta + dbeta) / x;
    if (x < T(2)) {
        const auto s = detail::bessel_series(x);
        p.A.imag(pref * s.f1);
        p.C.imag(pref * q * q * s.f2);
        p.dA.imag(pref * q * q * s.df1);
        p.dC.imag(pref * q * q * q * q * s.df2);
    }
    return p;
}

template <typename T>
CMat3T<T> dyadic_green_fs(const Vec3T<T>& r, T q = T(kTwoPi)) {
    const T rn = r.norm();
    if (!(rn > T(0))) throw NumericError("dyadic Green's function is singular at zero displacement");
    const auto p = radial_parts(rn, q);
    CMat3T<T> G = p.C * (r * r.transpose()).template cast<std::complex<T>>();
    G.diagonal().array() += p.A;
    return G;
}

// D_fs = -i (3/2) gamma lambda e_d^dagger G e_d; origin -> gamma/2 + 0i.
template <typename T>
std::complex<T> kernel_fs(const Vec2T<T>& r_perp, T dz, const CVec2T<T>& e = circular_dipole<T>(),
                          T lambda = T(1), T gamma = T(1)) {
    const T q = T(kTwoPi) / lambda;
    const T rn = std::sqrt(r_perp.squaredNorm() + dz * dz);
    if (rn == T(0)) return {gamma / T(2), T(0)};
    const auto p = radial_parts(rn, q);
    const std::complex<T> er = e(0) * r_perp(0) + e(1) * r_perp(1);
    const std::complex<T> ege = p.A * e.squaredNorm() + p.C * std::norm(er);
    return std::complex<T>(0, -T(1.5) * gamma * lambda) * ege;
}

// e_d^dagger (d^2/dz^2 G) e_d at dz = 0, for r_perp != 0.
template <typename T>
std::complex<T> green_fs_d2z(const Vec2T<T>& r_perp, const CVec2T<T>& e = circular_dipole<T>(), T q = T(kTwoPi)) {
    const T rho = r_perp.norm();
    if (!(rho > T(0))) throw NumericError("green_fs_d2z is singular at zero displacement");
    const auto p = radial_parts(rho, q);
    const std::complex<T> er = e(0) * r_perp(0) + e(1) * r_perp(1);
    return p.dA * e.squaredNorm() + p.dC * std::norm(er);
}

// Im of e^dagger F e as rho -> 0, F = (4 pi / q^3) d^2 G / dz^2.
template <typename T>
T green_fs_d2z_limit_im() {
    return detail::bessel_series(T(0)).df1;
}

// d^2 D_fs / dz^2 at dz = 0; origin -> -q^2 gamma / 5 + 0i.
template <typename T>
std::complex<T> kernel_fs_d2z(const Vec2T<T>& r_perp, const CVec2T<T>& e = circular_dipole<T>(), T lambda = T(1),
                              T gamma = T(1)) {
    const T q = T(kTwoPi) / lambda;
    if (r_perp.squaredNorm() == T(0)) return {-q * q * gamma / T(5), T(0)};
    return std::complex<T>(0, -T(1.5) * gamma * lambda) * green_fs_d2z<T>(r_perp, e, q);
}

// Transverse-momentum representation: D(r) = int d^2k/(2pi)^2 e^{ik.r} kernel_fs_momentum(k, dz).
template <typename T>
std::complex<T> kernel_fs_momentum(const Vec2T<T>& k_perp, T dz, const CVec2T<T>& e = circular_dipole<T>(),
                                   T lambda = T(1), T gamma = T(1)) {
    using C = std::complex<T>;
    const T q = T(kTwoPi) / lambda;
    const T k2 = k_perp.squaredNorm();
    const T kz2 = q * q - k2;
    if (std::abs(kz2) <= T(1e-14) * q * q) throw NumericError("grazing wavevector: |k_perp| = q is a branch point");
    const C kz = kz2 > 0 ? C(std::sqrt(kz2), 0) : C(0, std::sqrt(-kz2));
    const C ke = k_perp(0) * e(0) + k_perp(1) * e(1);
    const T weight = T(1) - std::norm(ke) / (q * q);
    return T(1.5) * gamma * lambda * std::exp(C(0, 1) * kz * std::abs(dz)) / (T(2) * kz) * weight;
}

inline cplx kernel_fs(const Vec2& r, double dz = 0.0) { return kernel_fs<double>(r, dz); }
inline cplx kernel_fs_d2z(const Vec2& r) { return kernel_fs_d2z<double>(r); }

}  // namespace arraycav
