#include "arraycav/om_dynamics.hpp"

#include <cmath>
#include <limits>

namespace arraycav {

namespace {

std::vector<OmState> unpack(const std::vector<OdeSample>& samples, int nb) {
    std::vector<OmState> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.y(0), s.y.tail(nb), s.t});
    return out;
}

}  // namespace

std::vector<OmState> evolve_multimode(const Config& cfg, const OmParams& params, const CMatX& C, const OmState& init,
                                      double t_final, double dt_out, const OdeOptions& opt) {
    const int nb = static_cast<int>(init.b.size());
    if (nb < 1 || nb > kMaxMechanicalModes)
        throw NumericError("multimode evolution needs 1 to " + std::to_string(kMaxMechanicalModes) + " modes");
    if (C.rows() != nb || C.cols() != nb) throw NumericError("coupling matrix does not match the mode count");
    const cplx detune(-0.5 * cfg.cavity.kappa_c, cfg.drive.delta_c - params.Delta_AC);
    const double g = params.g, wm = params.omega_m, Omega = cfg.drive.Omega;
    const MatX imC = C.imag();
    CVecX y0(nb + 1);
    y0(0) = init.a;
    y0.tail(nb) = init.b;
    auto rhs = [&](double, const CVecX& y) -> CVecX {
        const cplx a = y(0);
        const VecX x = 2.0 * y.tail(nb).real();
        const double n = std::norm(a);
        const cplx cxx = x.cast<cplx>().dot(C * x.cast<cplx>());
        CVecX d(nb + 1);
        d(0) = detune * a - kI * g * x(0) * a + cxx * a - kI * Omega;
        d.tail(nb) = -kI * wm * y.tail(nb) + (2.0 * kI * n) * (imC * x).cast<cplx>();
        d(1) -= kI * g * n;
        return d;
    };
    return unpack(integrate_dopri(rhs, y0, init.t, init.t + t_final, dt_out, opt), nb);
}

std::vector<OmState> evolve_reduced(const Config& cfg, const OmParams& params, const OmState& init, double t_final,
                                    double dt_out, const OdeOptions& opt) {
    if (init.b.size() != 1) throw NumericError("reduced model carries a single mechanical mode");
    const cplx detune(-0.5 * (cfg.cavity.kappa_c + params.kappa_sc), cfg.drive.delta_c - params.Delta_AC);
    const double g = params.g, g2 = params.g2, wm = params.omega_m, Omega = cfg.drive.Omega;
    CVecX y0(2);
    y0 << init.a, init.b(0);
    auto rhs = [&](double, const CVecX& y) -> CVecX {
        const cplx a = y(0), b = y(1);
        const double x = 2.0 * b.real(), n = std::norm(a);
        CVecX d(2);
        d(0) = detune * a - kI * g * x * a - kI * g2 * x * x * a - kI * Omega;
        d(1) = -kI * wm * b - kI * g * n - 2.0 * kI * g2 * x * n;
        return d;
    };
    return unpack(integrate_dopri(rhs, y0, init.t, init.t + t_final, dt_out, opt), 1);
}

double energy_functional(const Config& cfg, const OmParams& params, const CMatX& C, const OmState& s) {
    const double n = std::norm(s.a);
    const VecX x = 2.0 * s.b.real();
    const MatX imC = C.imag();
    return -(cfg.drive.delta_c - params.Delta_AC) * n + params.omega_m * s.b.squaredNorm() + params.g * n * x(0) -
           n * x.dot(imC * x);
}

StandardModel standard_model_report(const Config& cfg, const OmParams& params) {
    StandardModel m;
    m.cavity_shift = params.Delta_AC;
    m.kappa_c = cfg.cavity.kappa_c;
    m.kappa_sc = params.kappa_sc;
    m.kappa = m.kappa_c + m.kappa_sc;
    m.g = params.g;
    m.g2 = params.g2;
    m.omega_m = params.omega_m;
    m.noise = make_noise_contract(m.kappa_c, m.kappa_sc);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    m.g_over_kappa_sc = params.kappa_sc > 0.0 ? params.g / params.kappa_sc : nan;
    const double s2qz = std::sin(2.0 * cfg.physical.q * cfg.cavity.z0);
    m.g_over_kappa_sc_closed = 6.0 * s2qz * params.delta_minus_Delta /
                               (params.eta * std::sqrt(params.N_a) * params.epsilon * cfg.physical.gamma);
    m.frequency_pull = cfg.trap.x0 > 0.0 ? params.g / cfg.trap.x0 : nan;
    m.sideband_resolved = params.omega_m > m.kappa;
    return m;
}

}  // namespace arraycav
