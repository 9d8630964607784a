#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arraycav/greens.hpp"
#include "arraycav/types.hpp"

namespace arraycav {

enum class SumMethod { real_space, reciprocal };
std::string to_string(SumMethod m);

struct DispersionPoint {
    Vec2 k_perp = Vec2::Zero();
    double gamma_k = 0.0;              // Gamma_k; total decay is gamma + gamma_k
    std::optional<double> delta_k;     // unset on the reciprocal route
    SumMethod method = SumMethod::reciprocal;
    double residual = 0.0;             // Richardson residual (real-space only)
};

struct DiffractionOrder {
    Eigen::Vector2i m = Eigen::Vector2i::Zero();
    Vec2 q_vec = Vec2::Zero();
    cplx k_z = 0.0;
    bool propagating() const { return k_z.imag() == 0.0 && k_z.real() > 0.0; }
};

std::vector<DiffractionOrder> diffraction_orders(const Vec2& k_perp, double a, int m_max = 8);

// Exact decay from the propagating orders; throws NumericError on a grazing order.
DispersionPoint cooperative_rates_reciprocal(const Vec2& k_perp, double a, const CVec2& dipole = circular_dipole<double>(),
                                             int m_max = 8);

struct RealSpaceOptions {
    double radius = 0.0;       // 0: 30 / eps0, at least 20
    double eps0 = 0.0;         // 0: eps_ratio * distance of the nearest order to the light circle
    double eps_ratio = 0.025;
    int levels = 5;            // damping values eps0 * 2^j
    double rho_floor = 0.05;   // lower bound on that distance, units of q
    double tolerance = 1e-3;   // on the Richardson residual, units of gamma
    CVec2 dipole = circular_dipole<double>();
};

// Damped lattice sums extrapolated to zero damping. Throws ConvergenceError.
DispersionPoint cooperative_rates_real_space(const Vec2& k_perp, double a, const RealSpaceOptions& opt = {});

// Samples evenly spaced in arc length; grazing samples are shifted by 1e-6 q along the path.
std::vector<DispersionPoint> dispersion_curve(const std::vector<Vec2>& path, int samples, double a,
                                              const RealSpaceOptions& opt = {}, int threads = 1);

std::vector<Vec2> standard_path(const std::string& spec, double a);

// Infinite-lattice Gamma_k, Delta_k on the n_side x n_side Brillouin grid of a finite lattice,
// k = (2 pi / (n_side a)) (i, j) with i, j in [0, n_side).
struct BandGrid {
    int n_side = 0;
    double a = 0.0;
    MatX gamma;
    MatX delta;
    double max_residual = 0.0;
    Vec2 k(int i, int j) const;
};

BandGrid band_grid(int n_side, double a, const RealSpaceOptions& opt = {});

// Gamma and Delta at k = 0: Gamma exact, Delta real-space.
struct CooperativeK0 {
    double Gamma = 0.0;
    double Delta = 0.0;
};
CooperativeK0 cooperative_k0(double a, const CVec2& dipole = circular_dipole<double>());

}  // namespace arraycav
