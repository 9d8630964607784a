#include "arraycav/confined.hpp"

#include <cmath>
#include <sstream>

#include "arraycav/dft.hpp"

namespace arraycav {

namespace {

constexpr double kQ = kTwoPi;

void check_same_lattice(const DisplacementKernel& x, const DisplacementKernel& y) {
    if (x.n_side != y.n_side || x.a != y.a || x.dz_order != y.dz_order)
        throw NumericError("kernel shape mismatch");
}

DisplacementKernel empty_table(const LatticeSpec& lattice, KernelKind kind, int order) {
    DisplacementKernel k;
    k.n_side = lattice.n_side;
    k.a = lattice.a;
    k.kind = kind;
    k.dz_order = order;
    k.table = CMatX::Zero(2 * lattice.n_side - 1, 2 * lattice.n_side - 1);
    return k;
}

std::string describe(const LatticeSpec& l, const KernelOptions& opt) {
    std::ostringstream o;
    o.precision(17);
    o << "a=" << l.a << ";n_side=" << l.n_side << ";dz_order=" << opt.dz_order << ";dipole=" << opt.dipole(0).real()
      << "," << opt.dipole(0).imag() << "," << opt.dipole(1).real() << "," << opt.dipole(1).imag();
    return o.str();
}

// Radial integrals of the confined kernel at fixed transverse distance rho:
// I0 = int sin t (1 - sin^2 t / 2) J0(q rho sin t) w(t) dt, I2 = int sin^3 t J2(q rho sin t) w(t) dt,
// with w = 1 for the kernel and w = -q^2 cos^2 t for its second z-derivative.
struct RadialQuadrature {
    VecX t, wt, sin_t, w_extra;

    RadialQuadrature(int n, double theta_c, int order) {
        gauss_legendre(n, 0.0, theta_c, t, wt);
        sin_t = t.array().sin();
        w_extra = order == 2 ? VecX(-(kQ * kQ) * t.array().cos().square()) : VecX(VecX::Ones(n));
    }

    std::pair<double, double> eval(double rho, bool need_j2) const {
        double i0 = 0.0, i2 = 0.0;
        for (Eigen::Index j = 0; j < t.size(); ++j) {
            const double s = sin_t(j);
            const double x = kQ * rho * s;
            const double f = wt(j) * s * w_extra(j);
            i0 += f * (1.0 - 0.5 * s * s) * std::cyl_bessel_j(0.0, x);
            if (need_j2) i2 += f * s * s * std::cyl_bessel_j(2.0, x);
        }
        return {i0, i2};
    }
};

double hermite(int p, double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (p == 0) return h0;
    for (int k = 1; k < p; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

double hg_1d(int p, double x, double w) {
    double fact = 1.0;
    for (int k = 2; k <= p; ++k) fact *= k;
    const double norm = std::pow(2.0 / kPi, 0.25) / std::sqrt(std::pow(2.0, p) * fact * w);
    return norm * hermite(p, std::sqrt(2.0) * x / w) * std::exp(-x * x / (w * w));
}

}  // namespace

void gauss_legendre(int n, double lo, double hi, VecX& x, VecX& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        x(i) = 0.5 * (hi + lo) - 0.5 * (hi - lo) * z;
        w(i) = (hi - lo) / ((1.0 - z * z) * dp * dp);
    }
}

std::string to_string(KernelKind k) {
    switch (k) {
        case KernelKind::fs: return "fs";
        case KernelKind::confined: return "confined";
        case KernelKind::projected: return "projected";
    }
    return "?";
}

ModeProfile cavity_profile(const LatticeSpec& lattice, double w) {
    if (lattice.extent() < 4.0 * w) throw NumericError("lattice too small: n_side*a must be at least 4w");
    ModeProfile p;
    p.label = ProfileLabel::cavity_gaussian;
    p.weights.resize(lattice.size());
    for (int n = 0; n < lattice.size(); ++n) p.weights(n) = std::exp(-lattice.positions.col(n).squaredNorm() / (w * w));
    p.weights /= p.weights.norm();
    return p;
}

ModeProfile uniform_profile(const LatticeSpec& lattice) {
    ModeProfile p;
    p.label = ProfileLabel::uniform;
    p.weights = CVecX::Constant(lattice.size(), 1.0 / std::sqrt(double(lattice.size())));
    return p;
}

KernelMatrix DisplacementKernel::dense() const {
    const int N = size();
    if (N > kMaxDenseSites) throw NumericError("dense kernel limited to " + std::to_string(kMaxDenseSites) + " sites");
    KernelMatrix m;
    m.kind = kind;
    m.dz_order = dz_order;
    m.provenance = provenance;
    m.entries.resize(N, N);
    for (int n = 0; n < N; ++n) {
        const int nx = n % n_side, ny = n / n_side;
        for (int k = 0; k < N; ++k) m.entries(n, k) = at(nx - k % n_side, ny - k / n_side);
    }
    return m;
}

CVecX DisplacementKernel::apply(const CVecX& u) const {
    const int n = n_side, L = 2 * n_side;
    CMatX kc = CMatX::Zero(L, L), uc = CMatX::Zero(L, L);
    for (int dx = -(n - 1); dx <= n - 1; ++dx)
        for (int dy = -(n - 1); dy <= n - 1; ++dy) kc((dx + L) % L, (dy + L) % L) = at(dx, dy);
    for (int i = 0; i < size(); ++i) uc(i % n, i / n) = u(i);
    const CMatX conv = fft2(fft2(kc).cwiseProduct(fft2(uc)), true);
    CVecX out(size());
    for (int i = 0; i < size(); ++i) out(i) = conv(i % n, i / n);
    return out;
}

DisplacementKernel kernel_fs_table(const LatticeSpec& lattice, const KernelOptions& opt) {
    auto k = empty_table(lattice, KernelKind::fs, opt.dz_order);
    const int n = lattice.n_side;
    for (int dx = -(n - 1); dx <= n - 1; ++dx)
        for (int dy = -(n - 1); dy <= n - 1; ++dy) {
            const Vec2 r(dx * lattice.a, dy * lattice.a);
            k.table(dx + n - 1, dy + n - 1) =
                opt.dz_order == 2 ? kernel_fs_d2z<double>(r, opt.dipole) : kernel_fs<double>(r, 0.0, opt.dipole);
        }
    k.provenance = "fs;" + describe(lattice, opt);
    return k;
}

DisplacementKernel confined_kernel_table(const LatticeSpec& lattice, double z0, double k_cut, const KernelOptions& opt) {
    if (!(k_cut > 0.0 && k_cut < kQ)) throw NumericError("confined kernel needs 0 < k_cut < q");
    if (opt.dz_order != 0 && opt.dz_order != 2) throw NumericError("dz_order must be 0 or 2");
    auto k = empty_table(lattice, KernelKind::confined, opt.dz_order);
    const int n = lattice.n_side;
    const double theta_c = std::asin(k_cut / kQ);
    const CVec2& e = opt.dipole;
    const double pc = 0.5 * (std::norm(e(0)) - std::norm(e(1)));
    const double ps = (std::conj(e(0)) * e(1)).real();
    const bool aniso = std::abs(pc) > 1e-15 || std::abs(ps) > 1e-15;
    const double pref = 3.0 * kQ / (8.0 * kPi);

    // Node count from the largest argument, then doubled until stable there.
    const double rho_max = std::sqrt(2.0) * (n - 1) * lattice.a;
    int nodes = 32 + static_cast<int>(std::ceil(k_cut * rho_max));
    double scale = opt.dz_order == 2 ? kQ * kQ : 1.0;
    for (;;) {
        RadialQuadrature q1(nodes, theta_c, opt.dz_order), q2(2 * nodes, theta_c, opt.dz_order);
        double err = 0.0;
        for (double rho : {0.0, 0.5 * rho_max, rho_max}) {
            const auto a1 = q1.eval(rho, aniso), a2 = q2.eval(rho, aniso);
            err = std::max({err, std::abs(a1.first - a2.first), std::abs(a1.second - a2.second)});
        }
        if (pref * err <= opt.quad_tol * scale) break;
        nodes *= 2;
        if (nodes > 8192) throw ConvergenceError("confined kernel quadrature did not converge", pref * err);
    }
    const RadialQuadrature quad(nodes, theta_c, opt.dz_order);

    for (int dx = 0; dx < n; ++dx)
        for (int dy = 0; dy <= dx; ++dy) {
            const double rho = lattice.a * std::hypot(double(dx), double(dy));
            const auto [i0, i2] = quad.eval(rho, aniso);
            for (int sx : {1, -1})
                for (int sy : {1, -1})
                    for (int swap = 0; swap < 2; ++swap) {
                        const int x = swap ? sy * dy : sx * dx;
                        const int y = swap ? sx * dx : sy * dy;
                        double v = i0;
                        if (aniso && rho > 0.0) {
                            const double phi = std::atan2(double(y), double(x));
                            v += i2 * (pc * std::cos(2.0 * phi) + ps * std::sin(2.0 * phi));
                        }
                        k.table(x + n - 1, y + n - 1) = pref * v;
                    }
        }
    std::ostringstream o;
    o.precision(17);
    o << "confined;" << describe(lattice, opt) << ";k_cut=" << k_cut << ";z0=" << z0 << ";nodes=" << nodes;
    k.provenance = o.str();
    return k;
}

DisplacementKernel projected_kernel(const DisplacementKernel& fs, const DisplacementKernel& confined) {
    check_same_lattice(fs, confined);
    DisplacementKernel p = fs;
    p.kind = KernelKind::projected;
    p.table.real() = fs.table.real() - confined.table.real();
    p.provenance = "projected[" + fs.provenance + "][" + confined.provenance + "]";
    return p;
}

KernelMatrix projected_kernel(const KernelMatrix& fs, const KernelMatrix& confined) {
    if (fs.entries.rows() != confined.entries.rows() || fs.entries.cols() != confined.entries.cols() ||
        fs.dz_order != confined.dz_order)
        throw NumericError("kernel shape mismatch");
    KernelMatrix p = fs;
    p.kind = KernelKind::projected;
    p.entries.real() = fs.entries.real() - confined.entries.real();
    p.provenance = "projected[" + fs.provenance + "][" + confined.provenance + "]";
    return p;
}

KernelMatrix kernel_matrix_fs(const LatticeSpec& lattice, const KernelOptions& opt) {
    return kernel_fs_table(lattice, opt).dense();
}

KernelMatrix confined_kernel_paraxial(const LatticeSpec& lattice, double z0, double k_cut, const KernelOptions& opt) {
    return confined_kernel_table(lattice, z0, k_cut, opt).dense();
}

KernelMatrix confined_kernel_hg(const LatticeSpec& lattice, double z0, double w, int p_max) {
    if (p_max < 0 || p_max > 6) throw NumericError("Hermite-Gauss oracle limited to p_max <= 6");
    const int N = lattice.size();
    if (N > 400) throw NumericError("Hermite-Gauss oracle limited to 400 sites");
    const double zR = kPi * w * w;
    const double wz = w * std::sqrt(1.0 + (z0 / zR) * (z0 / zR));
    // Wavefront curvature 1/R(z0); the Gouy phase cancels within each mode.
    const double inv_R = z0 / (z0 * z0 + zR * zR);

    MatX modes(N, 0);
    for (int p = 0; p <= p_max; ++p)
        for (int pp = 0; p + pp <= p_max; ++pp) {
            VecX col(N);
            for (int n = 0; n < N; ++n)
                col(n) = hg_1d(p, lattice.positions(0, n), wz) * hg_1d(pp, lattice.positions(1, n), wz);
            modes.conservativeResize(N, modes.cols() + 1);
            modes.col(modes.cols() - 1) = col;
        }
    VecX phase(N);
    for (int n = 0; n < N; ++n) phase(n) = 0.5 * kQ * lattice.positions.col(n).squaredNorm() * inv_R;

    KernelMatrix k;
    k.kind = KernelKind::confined;
    k.entries = CMatX::Zero(N, N);
    const MatX outer = modes * modes.transpose();
    // Both propagation directions: residue 1/(2q) each, combined with the curvature phase.
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m) k.entries(n, m) = 3.0 / (4.0 * kQ) * outer(n, m) * std::cos(phase(n) - phase(m));
    std::ostringstream o;
    o.precision(17);
    o << "hg;a=" << lattice.a << ";n_side=" << lattice.n_side << ";w=" << w << ";z0=" << z0 << ";p_max=" << p_max;
    k.provenance = o.str();
    return k;
}

double mode_decay_rate(const ModeProfile& profile, const KernelMatrix& kernel) {
    const CVecX& u = profile.weights;
    return 2.0 * u.dot(kernel.entries.real().cast<cplx>() * u).real();
}

double mode_decay_rate(const ModeProfile& profile, const DisplacementKernel& kernel) {
    DisplacementKernel re = kernel;
    re.table = kernel.table.real().cast<cplx>();
    return 2.0 * re.quadratic(profile.weights).real();
}

}  // namespace arraycav
