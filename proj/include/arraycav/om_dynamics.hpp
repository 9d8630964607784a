#pragma once

#include <vector>

#include "arraycav/config.hpp"
#include "arraycav/ode.hpp"
#include "arraycav/optomech.hpp"

namespace arraycav {

struct OmState {
    cplx a = 0.0;
    CVecX b;  // one entry per mechanical mode, or a single entry for the reduced model
    double t = 0.0;
};

inline constexpr int kMaxMechanicalModes = 512;

// Mean-field multimode equations; C is nu x nu with nu = init.b.size().
std::vector<OmState> evolve_multimode(const Config& cfg, const OmParams& params, const CMatX& C, const OmState& init,
                                      double t_final, double dt_out, const OdeOptions& opt = {});

// Single mode with total damping kappa_c + kappa_sc and quadratic coupling g2.
std::vector<OmState> evolve_reduced(const Config& cfg, const OmParams& params, const OmState& init, double t_final,
                                    double dt_out, const OdeOptions& opt = {});

// -(delta_c - Delta_AC)|a|^2 + omega_m sum |b|^2 + g |a|^2 x_0 - |a|^2 x^T Im[C] x, x = b + b*.
double energy_functional(const Config& cfg, const OmParams& params, const CMatX& C, const OmState& s);

struct StandardModel {
    double cavity_shift = 0.0;  // omega_c' - omega_c = Delta_AC
    double kappa = 0.0;
    double kappa_c = 0.0;
    double kappa_sc = 0.0;
    double g = 0.0;
    double g2 = 0.0;
    double omega_m = 0.0;
    NoiseContract noise;
    double g_over_kappa_sc = 0.0;
    double g_over_kappa_sc_closed = 0.0;  // 6 sin(2 q z0) (delta - Delta) / (eta sqrt(N_a) epsilon gamma)
    double frequency_pull = 0.0;          // g / x0: cavity shift per unit array displacement
    bool sideband_resolved = false;       // omega_m > kappa
};

StandardModel standard_model_report(const Config& cfg, const OmParams& params);

}  // namespace arraycav
