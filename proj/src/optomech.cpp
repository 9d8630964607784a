#include "arraycav/optomech.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/QR>

#include "arraycav/dft.hpp"

namespace arraycav {

namespace {

struct Trig {
    double s2, c2;
};

Trig trig(const Config& cfg) {
    const double s = cfg.sin_qz0(), c = cfg.cos_qz0();
    return {s * s, c * c};
}

int wrap(int d, int n) { return ((d % n) + n) % n; }

// (T v)_n = sum_m T((r_n - r_m) mod n) v_m on the lattice torus.
VecX circulant_apply(const MatX& table, const VecX& v) {
    const int n = static_cast<int>(table.rows());
    CMatX vc(n, n);
    for (int i = 0; i < n * n; ++i) vc(i % n, i / n) = v(i);
    const CMatX out = fft2(fft2(table.cast<cplx>()).cwiseProduct(fft2(vc)), true);
    VecX r(n * n);
    for (int i = 0; i < n * n; ++i) r(i) = out(i % n, i / n).real();
    return r;
}

MatX transposed_table(const MatX& t) {
    const int n = static_cast<int>(t.rows());
    MatX r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = t(wrap(-i, n), wrap(-j, n));
    return r;
}

MatX circulant_dense(const MatX& table) {
    const int n = static_cast<int>(table.rows()), N = n * n;
    MatX M(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) M(a, b) = table(wrap(a % n - b % n, n), wrap(a / n - b / n, n));
    return M;
}

std::string kernel_key(const Config& cfg, const char* kind, int dz_order) {
    std::ostringstream o;
    o.precision(17);
    const auto& e = cfg.physical.dipole;
    o << "kind=" << kind << ";a=" << cfg.lattice.a << ";n_side=" << cfg.lattice.n_side << ";dz_order=" << dz_order
      << ";dipole=" << e(0).real() << "," << e(0).imag() << "," << e(1).real() << "," << e(1).imag();
    if (std::string(kind) == "confined") o << ";k_cut=" << cfg.k_cut_abs();
    return o.str();
}

}  // namespace

OmParams closed_form_params(const Config& cfg, double Gamma, double Delta) {
    const double gam = cfg.physical.gamma, q = cfg.physical.q;
    const double dD = cfg.drive.delta - Delta;
    if (!(std::abs(dD) >= 10.0 * (gam + Gamma)))
        throw NumericError("regime violation: |delta - Delta| must be at least 10 (gamma + Gamma)");
    const auto [s2, c2] = trig(cfg);
    const double w = cfg.cavity.w, a = cfg.lattice.a, l = cfg.cavity.l_fsr, eta = cfg.trap.eta;
    const double qw2 = q * q * w * w;
    OmParams p;
    p.eta = eta;
    p.N_a = kPi * w * w / (a * a);
    p.delta_minus_Delta = dD;
    p.omega_m = cfg.trap.omega_m;
    p.g_bar = l * (gam / dD) * std::sqrt(p.N_a) * 3.0 / qw2;
    p.g = std::sin(2.0 * q * cfg.cavity.z0) * eta * p.g_bar;
    p.Delta_AC = s2 * l * (gam + Gamma) / dD;
    p.epsilon = 6.0 * (c2 + 0.4 * s2);
    p.kappa_sc = eta * eta * p.N_a * l * (gam / dD) * (gam / dD) * (p.epsilon / 2.0) / qw2;
    p.g2 = eta * eta * l * (gam / dD) * 4.0 * c2 / qw2;
    p.g2_alt = eta * eta * l * (gam / dD) * 4.0 * (c2 - s2) / qw2;
    p.g_eff = std::sqrt(s2 * l * (gam + Gamma));
    return p;
}

VecX intensity_profile(const LatticeSpec& lattice, double w) {
    VecX v(lattice.size());
    for (int n = 0; n < lattice.size(); ++n) v(n) = std::exp(-2.0 * lattice.positions.col(n).squaredNorm() / (w * w));
    return v / v.norm();
}

MechanicalBasis mechanical_basis(const LatticeSpec& lattice, double w, std::uint64_t completion_seed) {
    if (lattice.extent() < 4.0 * w) throw NumericError("lattice too small: n_side*a must be at least 4w");
    const int N = lattice.size();
    if (N > kMaxDenseSites) throw NumericError("mechanical basis limited to " + std::to_string(kMaxDenseSites) + " sites");
    const VecX v0 = intensity_profile(lattice, w);
    std::mt19937_64 rng(completion_seed);
    std::normal_distribution<double> normal;
    MatX A(N, N);
    A.col(0) = v0;
    for (int j = 1; j < N; ++j)
        for (int i = 0; i < N; ++i) A(i, j) = normal(rng);
    Eigen::HouseholderQR<MatX> qr(A);
    MechanicalBasis b;
    b.V = qr.householderQ() * MatX::Identity(N, N);
    if (b.V.col(0).dot(v0) < 0.0) b.V.col(0) *= -1.0;
    b.completion = "householder-qr;mt19937_64;seed=" + std::to_string(completion_seed);
    return b;
}

OmDispersion make_om_dispersion(const Config& cfg, bool flat) {
    OmDispersion d;
    const auto k0 = cooperative_k0(cfg.lattice.a, cfg.physical.dipole);
    d.Gamma = k0.Gamma;
    d.Delta = k0.Delta;
    d.flat = flat;
    const int n = cfg.lattice.n_side;
    if (flat) {
        d.grid.n_side = n;
        d.grid.a = cfg.lattice.a;
        d.grid.gamma = MatX::Constant(n, n, k0.Gamma);
        d.grid.delta = MatX::Constant(n, n, k0.Delta);
        return d;
    }
    RealSpaceOptions opt;
    opt.dipole = cfg.physical.dipole;
    opt.rho_floor = 0.2;
    d.grid = band_grid(n, cfg.lattice.a, opt);
    return d;
}

OmKernels make_om_kernels(const Config& cfg) {
    OmKernels k;
    auto build = [&](int order) {
        KernelOptions opt;
        opt.dipole = cfg.physical.dipole;
        opt.dz_order = order;
        CacheRecord rf, rc;
        const auto fs = load_or_build(kernel_key(cfg, "fs", order), [&] { return kernel_fs_table(cfg.lattice, opt); }, &rf);
        const auto conf = load_or_build(
            kernel_key(cfg, "confined", order),
            [&] { return confined_kernel_table(cfg.lattice, cfg.cavity.z0, cfg.k_cut_abs(), opt); }, &rc);
        k.cache.push_back(rf);
        k.cache.push_back(rc);
        return projected_kernel(fs, conf);
    };
    k.d = build(0);
    k.d2 = build(2);
    return k;
}

namespace {

BrillouinSums sums_on(const BandGrid& grid, double delta, double Delta) {
    const int n = grid.n_side;
    const double dD = delta - Delta;
    CMatX p(n, n), h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double r = dD / (delta - grid.delta(i, j));
            p(i, j) = r;
            h(i, j) = r / (delta - grid.delta(i, j));
        }
    return {fft2(p, true).real(), fft2(h, true).real()};
}

}  // namespace

BrillouinSums brillouin_sums(const Config& cfg, const OmDispersion& disp) {
    if (disp.grid.n_side != cfg.lattice.n_side) throw NumericError("dispersion grid does not match the lattice");
    return sums_on(disp.grid, cfg.drive.delta, disp.Delta);
}

GridCheck refine_brillouin(const Config& cfg, const OmDispersion& disp) {
    GridCheck chk;
    if (disp.flat) return chk;
    const auto coarse = brillouin_sums(cfg, disp);
    RealSpaceOptions opt;
    opt.dipole = cfg.physical.dipole;
    opt.rho_floor = 0.2;
    const auto fine = sums_on(band_grid(2 * cfg.lattice.n_side, cfg.lattice.a, opt), cfg.drive.delta, disp.Delta);
    const double dD = cfg.drive.delta - disp.Delta;
    const double rp = std::abs(fine.P(0, 0) - coarse.P(0, 0)) / std::abs(fine.P(0, 0));
    const double rh = std::abs(fine.H(0, 0) - coarse.H(0, 0)) * std::abs(dD) / std::abs(fine.H(0, 0) * dD);
    chk.rel_change = std::max(rp, rh);
    chk.converged = chk.rel_change <= 0.01;
    return chk;
}

MatX coupling_matrix_M(const Config& cfg, const OmKernels& kernels, const OmDispersion& disp) {
    const int N = cfg.lattice.size();
    if (N > kMaxDenseSites) throw NumericError("dense coupling matrix limited to " + std::to_string(kMaxDenseSites) + " sites");
    const auto [s2, c2] = trig(cfg);
    const double q = cfg.physical.q, dD = cfg.drive.delta - disp.Delta;
    const auto sums = brillouin_sums(cfg, disp);
    // Element-wise conjugate: the real circulant appears twice, the gamma term cancels.
    MatX M = -2.0 * c2 * circulant_dense(sums.P);
    const MatX imd2 = kernels.d2.dense().entries.imag();
    M += s2 * 2.0 * imd2 / (q * q * dD);
    return M;
}

CMatX coupling_matrix_C(const Config& cfg, const MechanicalBasis& basis, const OmDispersion& disp,
                        const OmKernels& kernels) {
    const int N = cfg.lattice.size();
    if (basis.V.rows() != N) throw NumericError("basis does not match the lattice");
    const auto [s2, c2] = trig(cfg);
    const auto p = closed_form_params(cfg, disp.Gamma, disp.Delta);
    const double q = cfg.physical.q, dD = p.delta_minus_Delta;
    const VecX v0 = basis.V.col(0);
    const VecX S = v0.cwiseMax(0.0).cwiseSqrt();
    const auto sums = brillouin_sums(cfg, disp);
    const MatX gam = 2.0 * kernels.d.dense().entries.real();
    const MatX Hg = circulant_dense(sums.H) * gam;
    CMatX X = circulant_dense(sums.P).cast<cplx>() - (0.5 * kI) * Hg.cast<cplx>();
    CMatX Y = (s2 / (q * q * dD)) * kernels.d2.dense().entries - (kI * c2) * X;
    Y = S.asDiagonal() * Y * S.asDiagonal();
    Y.diagonal() += (kI * s2) * v0.cast<cplx>();
    const CMatX Vc = basis.V.cast<cplx>();
    return (p.eta * p.eta * p.g_bar) * (Vc.transpose() * Y * Vc);
}

CouplingTraces traces_of(const CMatX& C) { return {C.trace(), C(0, 0)}; }

CouplingTraces coupling_traces(const Config& cfg, const OmDispersion& disp, const OmKernels& kernels) {
    const int n = cfg.lattice.n_side, N = n * n, L = 2 * n;
    const auto [s2, c2] = trig(cfg);
    const auto p = closed_form_params(cfg, disp.Gamma, disp.Delta);
    const double q = cfg.physical.q, dD = p.delta_minus_Delta, pre = p.eta * p.eta * p.g_bar;
    const VecX v0 = intensity_profile(cfg.lattice, cfg.cavity.w);
    const double sum_v0 = v0.sum();
    const auto sums = brillouin_sums(cfg, disp);

    // sum_n V0_n (H gamma)_nn = sum_d H(d) gamma(-d) c(d), c(d) = sum_{n, n-d in lattice} V0_n.
    CMatX vp = CMatX::Zero(L, L), ip = CMatX::Zero(L, L);
    for (int i = 0; i < N; ++i) {
        vp(i % n, i / n) = v0(i);
        ip(i % n, i / n) = 1.0;
    }
    const CMatX corr = fft2(fft2(vp).cwiseProduct(fft2(ip).conjugate()), true);
    double hg_diag = 0.0;
    for (int dx = -(n - 1); dx <= n - 1; ++dx)
        for (int dy = -(n - 1); dy <= n - 1; ++dy)
            hg_diag += sums.H(wrap(dx, n), wrap(dy, n)) * 2.0 * kernels.d.at(-dx, -dy).real() *
                       corr(wrap(dx, L), wrap(dy, L)).real();

    CouplingTraces t;
    t.trace = pre * (kI * s2 * sum_v0 + s2 * kernels.d2.at(0, 0) * sum_v0 / (q * q * dD) -
                     kI * c2 * sums.P(0, 0) * sum_v0 - 0.5 * c2 * hg_diag);

    const VecX v = v0.array().pow(1.5).matrix();
    const double vpv = v.dot(circulant_apply(sums.P, v));
    const VecX htv = circulant_apply(transposed_table(sums.H), v);
    const VecX gv = 2.0 * kernels.d.apply(v.cast<cplx>()).real();
    const cplx vd2v = kernels.d2.quadratic(v.cast<cplx>());
    t.c00 = pre * (kI * s2 * v0.array().cube().sum() + s2 * vd2v / (q * q * dD) - kI * c2 * vpv - 0.5 * c2 * htv.dot(gv));
    return t;
}

KappaScReport kappa_sc_consistency(const Config& cfg, const CouplingTraces& traces, const OmDispersion& disp) {
    const auto p = closed_form_params(cfg, disp.Gamma, disp.Delta);
    KappaScReport r;
    r.kappa_sc_closed = p.kappa_sc;
    r.kappa_sc_trace = -2.0 * (traces.trace.real() - traces.c00.real());
    r.kappa_2 = -2.0 * traces.c00.real();
    r.Delta_sc = -(traces.trace.imag() - traces.c00.imag());
    r.g2_numeric = -traces.c00.imag();
    r.g2_closed = p.g2;
    r.g2_alt = p.g2_alt;
    return r;
}

KscAverage k_sc_ground_state_average(const Config& cfg, const OmKernels& kernels, const OmDispersion& disp) {
    const auto [s2, c2] = trig(cfg);
    const auto p = closed_form_params(cfg, disp.Gamma, disp.Delta);
    const double q = cfg.physical.q, dD = p.delta_minus_Delta, pre = p.eta * p.eta * p.g_bar;
    const VecX v0 = intensity_profile(cfg.lattice, cfg.cavity.w);
    const double sum_v0 = v0.sum();
    const auto sums = brillouin_sums(cfg, disp);
    const CVecX sq = v0.cwiseSqrt().cast<cplx>();
    const cplx inter = sq.dot(kernels.d2.apply(sq));

    KscAverage k;
    k.first = 2.0 * s2 * pre * sum_v0 / (5.0 * dD);
    k.middle = 2.0 * s2 * pre * inter.real() / (q * q * dD);
    k.last = c2 * pre * sum_v0 * sums.H(0, 0) * cfg.physical.gamma;
    const double im = -2.0 * s2 * pre * sum_v0 + 2.0 * s2 * pre * inter.imag() / (q * q * dD) +
                      2.0 * c2 * pre * sum_v0 * sums.P(0, 0);
    k.value = cplx(k.first + k.middle + k.last, im);
    return k;
}

}  // namespace arraycav
