#include "arraycav/cavity_dynamics.hpp"

#include <cmath>

#include "arraycav/parallel.hpp"

namespace arraycav {

double max_excitation(const SystemState& s) { return s.sigma.size() ? s.sigma.cwiseAbs().maxCoeff() : 0.0; }

TwoModeModel build_two_mode(const Config& cfg, const CooperativeK0& dispersion) {
    const auto report = validate_regime(cfg, dispersion.Gamma, dispersion.Delta);
    for (const char* name : {"paraxial_waist", "subwavelength_lattice", "rayleigh_range", "markov_optical_period",
                             "markov_retardation"})
        if (!report.at(name).pass) throw NumericError(std::string("regime violation: ") + name);
    TwoModeModel m;
    const double s = cfg.sin_qz0();
    m.g_eff = std::sqrt(s * s * cfg.cavity.l_fsr * (cfg.physical.gamma + dispersion.Gamma));
    m.delta_c = cfg.drive.delta_c;
    m.delta_minus_Delta = cfg.drive.delta - dispersion.Delta;
    m.kappa_c = cfg.cavity.kappa_c;
    m.Omega = cfg.drive.Omega;
    return m;
}

SystemState steady_state_two_mode(const TwoModeModel& m) {
    SystemState st;
    st.sigma.resize(1);
    if (m.delta_minus_Delta == 0.0) {
        if (m.g_eff == 0.0) throw NumericError("no steady state: undamped dipole decoupled from the cavity");
        st.a = 0.0;
        st.sigma(0) = -m.Omega / m.g_eff;
        return st;
    }
    const cplx denom(-0.5 * m.kappa_c, m.delta_c - m.g_eff * m.g_eff / m.delta_minus_Delta);
    if (std::abs(denom) == 0.0) throw NumericError("singular two-mode system");
    st.a = kI * m.Omega / denom;
    st.sigma(0) = m.g_eff * st.a / m.delta_minus_Delta;
    return st;
}

std::vector<SpectrumSample> spectrum_scan(const TwoModeModel& m, double dc_min, double dc_max, int samples,
                                          int threads) {
    if (samples < 2) throw ConfigError("samples", "need at least two samples");
    if (!std::isfinite(dc_min) || !std::isfinite(dc_max)) throw ConfigError("delta_c", "range must be finite");
    std::vector<SpectrumSample> out(samples);
    parallel_for(samples, threads, [&](int i) {
        TwoModeModel mm = m;
        mm.delta_c = dc_min + (dc_max - dc_min) * i / (samples - 1);
        const auto st = steady_state_two_mode(mm);
        out[i] = {mm.delta_c, std::norm(st.a), std::arg(st.a)};
    });
    return out;
}

CMatX FullModel::generator() const {
    const int N = sites();
    CMatX G = CMatX::Zero(N + 1, N + 1);
    G(0, 0) = cplx(-0.5 * kappa_c, delta_c);
    G.block(0, 1, 1, N) = (-2.0 * kI * s) * g.transpose().cast<cplx>();
    G.block(1, 0, N, 1) = (-2.0 * kI * s) * g.cast<cplx>();
    G.block(1, 1, N, N) = -D;
    G.block(1, 1, N, N).diagonal().array() += kI * delta;
    return G;
}

CVecX FullModel::forcing() const {
    CVecX f = CVecX::Zero(sites() + 1);
    f(0) = -kI * Omega;
    return f;
}

FullModel build_full_model(const Config& cfg, const KernelMatrix& kernel, double Gamma) {
    const int N = cfg.lattice.size();
    if (kernel.entries.rows() != N || kernel.dz_order != 0) throw NumericError("kernel does not match the lattice");
    if (N > 10000) throw NumericError("dense evolution limited to 10^4 sites");
    FullModel m;
    m.D = kernel.entries;
    const auto u = cavity_profile(cfg.lattice, cfg.cavity.w);
    m.g = std::sqrt((cfg.physical.gamma + Gamma) * cfg.cavity.l_fsr / 4.0) * u.weights.real();
    m.s = cfg.sin_qz0();
    m.delta = cfg.drive.delta;
    m.delta_c = cfg.drive.delta_c;
    m.kappa_c = cfg.cavity.kappa_c;
    m.Omega = cfg.drive.Omega;
    return m;
}

std::vector<SystemState> evolve_full(const FullModel& m, const SystemState& init, double t_final, double dt_out,
                                     const OdeOptions& opt) {
    const int N = m.sites();
    if (init.sigma.size() != N) throw NumericError("initial state does not match the lattice");
    const CMatX G = m.generator();
    const CVecX f = m.forcing();
    CVecX y0(N + 1);
    y0(0) = init.a;
    y0.tail(N) = init.sigma;
    auto rhs = [&](double, const CVecX& y) -> CVecX { return G * y + f; };
    const auto samples = integrate_dopri(rhs, y0, init.t, init.t + t_final, dt_out, opt);
    std::vector<SystemState> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s.y(0), s.y.tail(N), s.t});
    return out;
}

namespace {

// y = -i 2 s (D - i delta)^{-1} g, so that sigma = a y in steady state.
CVecX response(const FullModel& m) {
    CMatX A = m.D;
    A.diagonal().array() -= kI * m.delta;
    Eigen::PartialPivLU<CMatX> lu(A);
    const CVecX y = (-2.0 * kI * m.s) * lu.solve(m.g.cast<cplx>());
    if (!y.allFinite()) throw NumericError("singular atomic response matrix");
    return y;
}

}  // namespace

SystemState steady_state_full(const FullModel& m) {
    const CVecX y = response(m);
    const cplx self = -2.0 * kI * m.s * m.g.cast<cplx>().dot(y);
    const cplx denom = cplx(-0.5 * m.kappa_c, m.delta_c) + self;
    if (std::abs(denom) == 0.0) throw NumericError("singular full system");
    SystemState st;
    st.a = kI * m.Omega / denom;
    st.sigma = st.a * y;
    return st;
}

std::vector<SpectrumSample> spectrum_full(const FullModel& m, const std::vector<double>& delta_c) {
    const CVecX y = response(m);
    const cplx self = -2.0 * kI * m.s * m.g.cast<cplx>().dot(y);
    std::vector<SpectrumSample> out;
    for (double dc : delta_c) {
        const cplx a = kI * m.Omega / (cplx(-0.5 * m.kappa_c, dc) + self);
        out.push_back({dc, std::norm(a), std::arg(a)});
    }
    return out;
}

}  // namespace arraycav
