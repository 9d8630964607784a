#pragma once

#include <string>

#include "arraycav/config.hpp"
#include "arraycav/greens.hpp"
#include "arraycav/types.hpp"

namespace arraycav {

enum class ProfileLabel { cavity_gaussian, uniform, custom };

struct ModeProfile {
    CVecX weights;
    ProfileLabel label = ProfileLabel::custom;
};

// u_n ~ exp(-r_n^2 / w^2), normalized on the lattice. Throws if the array is narrower than 4w.
ModeProfile cavity_profile(const LatticeSpec& lattice, double w);
ModeProfile uniform_profile(const LatticeSpec& lattice);

enum class KernelKind { fs, confined, projected };
std::string to_string(KernelKind k);

struct KernelMatrix {
    CMatX entries;
    KernelKind kind = KernelKind::fs;
    int dz_order = 0;  // 0: D, 2: d^2 D / dz^2 at dz = 0
    std::string provenance;
};

// Translation-invariant kernel on an n_side x n_side lattice, stored by site displacement:
// table(dx + n_side - 1, dy + n_side - 1) = K(dx a, dy a).
struct DisplacementKernel {
    int n_side = 0;
    double a = 0.0;
    CMatX table;
    KernelKind kind = KernelKind::fs;
    int dz_order = 0;
    std::string provenance;

    cplx at(int dx, int dy) const { return table(dx + n_side - 1, dy + n_side - 1); }
    int size() const { return n_side * n_side; }
    KernelMatrix dense() const;
    // (K u)_n = sum_m K(r_n - r_m) u_m, via zero-padded FFT.
    CVecX apply(const CVecX& u) const;
    cplx quadratic(const CVecX& u) const { return u.dot(apply(u)); }
};

struct KernelOptions {
    CVec2 dipole = circular_dipole<double>();
    int dz_order = 0;
    double quad_tol = 1e-12;  // absolute, units of gamma (times q^2 for dz_order 2)
};

DisplacementKernel kernel_fs_table(const LatticeSpec& lattice, const KernelOptions& opt = {});

// Radiative components with |k_perp| <= k_cut (absolute units), 1D Gauss-Legendre over the polar angle.
// All atoms share the plane z0, so the result does not depend on it.
DisplacementKernel confined_kernel_table(const LatticeSpec& lattice, double z0, double k_cut,
                                         const KernelOptions& opt = {});

// Re from fs minus confined, Im from fs.
DisplacementKernel projected_kernel(const DisplacementKernel& fs, const DisplacementKernel& confined);
KernelMatrix projected_kernel(const KernelMatrix& fs, const KernelMatrix& confined);

inline constexpr int kMaxDenseSites = 4096;

KernelMatrix kernel_matrix_fs(const LatticeSpec& lattice, const KernelOptions& opt = {});
KernelMatrix confined_kernel_paraxial(const LatticeSpec& lattice, double z0, double k_cut,
                                      const KernelOptions& opt = {});

// Hermite-Gauss mode sum with p + p' <= p_max, radiative part only (pole residue at k = q).
KernelMatrix confined_kernel_hg(const LatticeSpec& lattice, double z0, double w, int p_max);

double mode_decay_rate(const ModeProfile& profile, const KernelMatrix& kernel);
double mode_decay_rate(const ModeProfile& profile, const DisplacementKernel& kernel);

// Gauss-Legendre nodes and weights on [lo, hi].
void gauss_legendre(int n, double lo, double hi, VecX& x, VecX& w);

}  // namespace arraycav
