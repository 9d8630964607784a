#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "arraycav/types.hpp"

namespace arraycav {

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h0 = 0.0;  // 0: picked from the first derivative
    long max_steps = 10'000'000;
};

struct OdeSample {
    double t;
    CVecX y;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
};

// Dormand-Prince 5(4) with steps clipped to land on every output time t0 + k dt_out.
template <typename Rhs>
std::vector<OdeSample> integrate_dopri(Rhs&& f, CVecX y, double t0, double t1, double dt_out, const OdeOptions& opt = {},
                                       OdeStats* stats = nullptr) {
    if (!(dt_out > 0.0) || !(t1 >= t0)) throw NumericError("integrator needs t1 >= t0 and dt_out > 0");
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    std::vector<OdeSample> out;
    out.push_back({t0, y});
    const long n_out = static_cast<long>(std::floor((t1 - t0) / dt_out + 1e-9));
    OdeStats st;
    double t = t0;
    CVecX k1 = f(t, y), k2, k3, k4, k5, k6, k7, ytmp, ynew;
    double h = opt.h0;
    if (h <= 0.0) {
        const double d0 = y.norm() / std::sqrt(double(y.size())) + 1e-30;
        const double d1 = k1.norm() / std::sqrt(double(y.size())) + 1e-30;
        h = std::min(0.01 * std::max(d0, opt.atol) / d1, dt_out);
    }
    long steps = 0;
    for (long i = 1; i <= n_out + 1; ++i) {
        const double target = i <= n_out ? t0 + i * dt_out : t1;
        if (i == n_out + 1 && target - t <= 1e-12 * std::max(1.0, std::abs(t1))) break;
        while (t < target) {
            if (++steps > opt.max_steps) throw NumericError("integrator exceeded the step budget");
            bool last = false;
            double hs = h;
            if (t + hs >= target) {
                hs = target - t;
                last = true;
            }
            ytmp = y + hs * a21 * k1;
            k2 = f(t + c2 * hs, ytmp);
            ytmp = y + hs * (a31 * k1 + a32 * k2);
            k3 = f(t + c3 * hs, ytmp);
            ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
            k4 = f(t + c4 * hs, ytmp);
            ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            k5 = f(t + c5 * hs, ytmp);
            ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            k6 = f(t + hs, ytmp);
            ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            k7 = f(t + hs, ynew);
            const CVecX err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double acc = 0.0;
            for (Eigen::Index j = 0; j < y.size(); ++j) {
                const double sc = opt.atol + opt.rtol * std::max(std::abs(y(j)), std::abs(ynew(j)));
                const double r = std::abs(err(j)) / sc;
                acc += r * r;
            }
            const double en = std::sqrt(acc / double(y.size()));
            if (!std::isfinite(en)) throw NumericError("integrator produced a non-finite state");
            if (en <= 1.0) {
                t = last ? target : t + hs;
                y = ynew;
                k1 = k7;
                ++st.accepted;
                const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
                if (!last || fac < 1.0) h = hs * fac;
            } else {
                ++st.rejected;
                h = hs * std::max(0.2, 0.9 * std::pow(en, -0.2));
                if (h < 1e-14 * std::max(1.0, std::abs(t))) throw NumericError("integrator step size underflow");
            }
        }
        out.push_back({t, y});
    }
    if (stats) *stats = st;
    return out;
}

}  // namespace arraycav
