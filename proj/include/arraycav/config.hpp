#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arraycav/types.hpp"

namespace arraycav {

// Internal units: lambda = gamma = hbar = 1, time in 1/gamma.
struct PhysicalConfig {
    double lambda = 1.0;
    double gamma = 1.0;
    double q = kTwoPi;
    CVec2 dipole = CVec2(cplx(1.0 / std::sqrt(2.0), 0.0), cplx(0.0, 1.0 / std::sqrt(2.0)));
    // Transition frequency in units of gamma; only used by the Markov checks.
    double omega_a = 1e8;
};

struct LatticeSpec {
    double a = 0.5;
    int n_side = 32;
    Eigen::Matrix2Xd positions;  // site n = iy * n_side + ix

    int size() const { return n_side * n_side; }
    double extent() const { return n_side * a; }
};

struct CavitySpec {
    double w = 4.0;
    double l_fsr = 100.0;  // c/l
    double kappa_c = 0.5;
    double z0 = 0.125;
    double k_cut = 0.0;  // units of q
    double z_R = 0.0;
};

struct TrapSpec {
    double omega_m = 0.01;
    double eta = 0.1;
    double x0 = 0.0;
};

struct DriveSpec {
    double Omega = 0.01;
    double delta_c = 0.0;
    double delta = 100.0;
};

struct NoiseChannel {
    double rate = 0.0;
    bool delta_correlated = true;
};

struct NoiseContract {
    std::map<std::string, NoiseChannel> correlators;
};

NoiseContract make_noise_contract(double kappa_c, double kappa_sc);

struct Config {
    PhysicalConfig physical;
    LatticeSpec lattice;
    CavitySpec cavity;
    TrapSpec trap;
    DriveSpec drive;
    std::vector<std::string> warnings;

    double sin_qz0() const { return std::sin(physical.q * cavity.z0); }
    double cos_qz0() const { return std::cos(physical.q * cavity.z0); }
    double k_cut_abs() const { return cavity.k_cut * physical.q; }
};

LatticeSpec make_lattice(double a, int n_side);

Config parse_config(const std::string& text);
Config load_config(const std::string& path);
std::string emit_config(const Config& cfg);

// Fills derived quantities and checks invariants; throws ConfigError.
void finalize(Config& cfg);

struct RegimeCheck {
    std::string name;
    std::string relation;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double threshold = 10.0;
    bool pass = false;
};

struct RegimeReport {
    std::vector<RegimeCheck> checks;
    bool all_pass() const;
    const RegimeCheck& at(const std::string& name) const;
};

// Gamma, Delta: cooperative decay and shift at k = 0.
RegimeReport validate_regime(const Config& cfg, double Gamma, double Delta);
RegimeReport validate_regime(const Config& cfg);

}  // namespace arraycav
