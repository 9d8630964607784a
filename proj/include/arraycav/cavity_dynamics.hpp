#pragma once

#include <vector>

#include "arraycav/config.hpp"
#include "arraycav/confined.hpp"
#include "arraycav/lattice_sums.hpp"
#include "arraycav/ode.hpp"

namespace arraycav {

struct SystemState {
    cplx a = 0.0;
    CVecX sigma;  // one entry (collective dipole) or one per site
    double t = 0.0;
};

double max_excitation(const SystemState& s);
inline constexpr double kSaturationWarning = 0.1;

struct TwoModeModel {
    double g_eff = 0.0;
    double delta_c = 0.0;
    double delta_minus_Delta = 0.0;
    double kappa_c = 0.0;
    double Omega = 0.0;
};

// g_eff^2 = sin^2(q z0) (c/l) (gamma + Gamma). Throws NumericError if the geometry checks fail.
TwoModeModel build_two_mode(const Config& cfg, const CooperativeK0& dispersion);

SystemState steady_state_two_mode(const TwoModeModel& m);

struct SpectrumSample {
    double delta_c = 0.0;
    double abs_a2 = 0.0;
    double phase = 0.0;
};

std::vector<SpectrumSample> spectrum_scan(const TwoModeModel& m, double dc_min, double dc_max, int samples,
                                          int threads = 1);

// Site-resolved linear model: d/dt [a; sigma] = G [a; sigma] + f.
struct FullModel {
    CMatX D;      // projected kernel
    VecX g;       // g_n
    double s = 0.0;  // sin(q z0)
    double delta = 0.0;
    double delta_c = 0.0;
    double kappa_c = 0.0;
    double Omega = 0.0;

    int sites() const { return static_cast<int>(g.size()); }
    CMatX generator() const;
    CVecX forcing() const;
};

// g_n = sqrt((gamma + Gamma)(c/l) / 4) u_n with u the normalized cavity profile.
FullModel build_full_model(const Config& cfg, const KernelMatrix& kernel, double Gamma);

std::vector<SystemState> evolve_full(const FullModel& m, const SystemState& init, double t_final, double dt_out,
                                     const OdeOptions& opt = {});

SystemState steady_state_full(const FullModel& m);

// One linear solve serves every detuning.
std::vector<SpectrumSample> spectrum_full(const FullModel& m, const std::vector<double>& delta_c);

}  // namespace arraycav
