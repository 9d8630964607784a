#pragma once

#include <cstdint>
#include <vector>

#include "arraycav/config.hpp"
#include "arraycav/confined.hpp"
#include "arraycav/kernel_cache.hpp"
#include "arraycav/lattice_sums.hpp"

namespace arraycav {

struct OmParams {
    double g = 0.0;
    double g_bar = 0.0;
    double g2 = 0.0;          // cos^2 form
    double g2_alt = 0.0;      // (cos^2 - sin^2) form from the mode-sum evaluation
    double kappa_sc = 0.0;
    double Delta_AC = 0.0;
    double Delta_sc = 0.0;    // no closed form; filled from numerics when available
    double eta = 0.0;
    double N_a = 0.0;
    double epsilon = 0.0;
    double g_eff = 0.0;
    double omega_m = 0.0;
    double delta_minus_Delta = 0.0;
};

// Throws NumericError unless |delta - Delta| >= 10 (gamma + Gamma).
OmParams closed_form_params(const Config& cfg, double Gamma, double Delta);

struct MechanicalBasis {
    MatX V;  // column nu is V^nu; column 0 ~ exp(-2 r^2 / w^2)
    std::string completion;
};

MechanicalBasis mechanical_basis(const LatticeSpec& lattice, double w, std::uint64_t completion_seed);

// exp(-2 r^2 / w^2), unit 2-norm.
VecX intensity_profile(const LatticeSpec& lattice, double w);

// Dispersion inputs: Gamma, Delta at k = 0 and Delta_k on the finite lattice's Brillouin grid.
struct OmDispersion {
    double Gamma = 0.0;
    double Delta = 0.0;
    BandGrid grid;
    bool flat = false;  // Delta_k forced to Delta
};

OmDispersion make_om_dispersion(const Config& cfg, bool flat = false);

// Projected kernel and its second z-derivative, by displacement.
struct OmKernels {
    DisplacementKernel d;
    DisplacementKernel d2;
    std::vector<CacheRecord> cache;
};

OmKernels make_om_kernels(const Config& cfg);

// Circulant Brillouin sums on the lattice torus: P(d) = (1/N) sum_k e^{ik.d} (delta-Delta)/(delta-Delta_k),
// H(d) the same with (delta-Delta)/(delta-Delta_k)^2. Indexed by (dx mod n, dy mod n).
struct BrillouinSums {
    MatX P;
    MatX H;
};

BrillouinSums brillouin_sums(const Config& cfg, const OmDispersion& disp);

struct GridCheck {
    double rel_change = 0.0;
    bool converged = true;
};

// Compares P(0) and H(0) against the doubled grid; flags > 1 % changes.
GridCheck refine_brillouin(const Config& cfg, const OmDispersion& disp);

MatX coupling_matrix_M(const Config& cfg, const OmKernels& kernels, const OmDispersion& disp);

CMatX coupling_matrix_C(const Config& cfg, const MechanicalBasis& basis, const OmDispersion& disp,
                        const OmKernels& kernels);

// Tr C and C_00 without building the basis.
struct CouplingTraces {
    cplx trace = 0.0;
    cplx c00 = 0.0;
};

CouplingTraces coupling_traces(const Config& cfg, const OmDispersion& disp, const OmKernels& kernels);
CouplingTraces traces_of(const CMatX& C);

struct KappaScReport {
    double kappa_sc_closed = 0.0;
    double kappa_sc_trace = 0.0;  // -2 sum_{nu != 0} Re C_nunu
    double kappa_2 = 0.0;         // -2 Re C_00
    double Delta_sc = 0.0;        // -sum_{nu != 0} Im C_nunu
    double g2_numeric = 0.0;      // -Im C_00
    double g2_closed = 0.0;
    double g2_alt = 0.0;
};

KappaScReport kappa_sc_consistency(const Config& cfg, const CouplingTraces& traces, const OmDispersion& disp);

struct KscAverage {
    cplx value = 0.0;      // Re: kappa_sc, Im: unretained shift
    double first = 0.0;    // sin^2 single-atom term
    double middle = 0.0;   // sin^2 inter-atom term (projected kernel)
    double last = 0.0;     // cos^2 term
};

KscAverage k_sc_ground_state_average(const Config& cfg, const OmKernels& kernels, const OmDispersion& disp);

}  // namespace arraycav
