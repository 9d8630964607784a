#pragma once

#include <cstdio>
#include <string>

#include "arraycav/config.hpp"

namespace testing_support {

struct Knobs {
    double a = 0.5;
    int n_side = 32;
    double w = 4.0;
    double l_fsr = 100.0;
    double kappa_c = 0.5;
    double z0 = 0.125;
    double omega_m = 0.01;
    double eta = 0.1;
    double Omega = 0.01;
    double delta_c = 0.0;
    double delta = 100.0;
    double k_cut = 0.0;  // 0: default 4/(w q)
};

inline std::string config_text(const Knobs& k) {
    char cut[64] = "";
    if (k.k_cut > 0) std::snprintf(cut, sizeof cut, "k_cut = %.17g\n", k.k_cut);
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "[physical]\n[lattice]\na = %.17g\nn_side = %d\n[cavity]\nw = %.17g\nl_fsr = %.17g\n"
                  "kappa_c = %.17g\nz0 = %.17g\n%s[trap]\nomega_m = %.17g\neta = %.17g\n"
                  "[drive]\nOmega = %.17g\ndelta_c = %.17g\ndelta = %.17g\n",
                  k.a, k.n_side, k.w, k.l_fsr, k.kappa_c, k.z0,
                  cut, k.omega_m, k.eta,
                  k.Omega, k.delta_c, k.delta);
    return buf;
}

inline arraycav::Config make_config(const Knobs& k = {}) { return arraycav::parse_config(config_text(k)); }

}  // namespace testing_support
