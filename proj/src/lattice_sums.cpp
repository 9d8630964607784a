#include "arraycav/lattice_sums.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "arraycav/dft.hpp"
#include "arraycav/parallel.hpp"

namespace arraycav {

namespace {

constexpr double kQ = kTwoPi;

// Distance of the nearest diffraction order to the light circle.
double light_circle_distance(const Vec2& k, double a) {
    const double g = kTwoPi / a;
    const int m = static_cast<int>(std::ceil((kQ + k.norm()) / g)) + 1;
    double best = std::numeric_limits<double>::infinity();
    for (int mx = -m; mx <= m; ++mx)
        for (int my = -m; my <= m; ++my) {
            const double kk = (k + g * Vec2(mx, my)).norm();
            best = std::min(best, std::abs(kk - kQ));
        }
    return best;
}

struct Schedule {
    double eps0 = 0.0;
    double radius = 0.0;
    int levels = 4;
};

Schedule make_schedule(double rho, const RealSpaceOptions& opt) {
    if (opt.levels < 2) throw NumericError("real-space sums need at least two damping levels");
    Schedule s;
    s.levels = opt.levels;
    const double r = std::min(std::max(rho, opt.rho_floor * kQ), kQ);
    s.eps0 = opt.eps0 > 0.0 ? opt.eps0 : opt.eps_ratio * r;
    s.radius = opt.radius > 0.0 ? opt.radius : std::max(20.0, 30.0 / s.eps0);
    if (s.radius < 20.0) throw NumericError("real-space radius must be at least 20 lambda");
    return s;
}

// Polynomial extrapolation to eps = 0 through (eps_j, f_j); returns {value, residual}.
std::pair<double, double> richardson(const std::vector<double>& eps, const std::vector<double>& f) {
    const int n = static_cast<int>(f.size());
    std::vector<double> p = f;
    std::vector<double> diag(n);
    diag[0] = p[0];
    for (int m = 1; m < n; ++m) {
        for (int i = n - 1; i >= m; --i)
            p[i] = (eps[i] * p[i - 1] - eps[i - m] * p[i]) / (eps[i] - eps[i - m]);
        diag[m] = p[m];
    }
    return {diag[n - 1], std::abs(diag[n - 1] - diag[n - 2])};
}

// e^dagger G e at dz = 0 times -i 3/2.
inline cplx lattice_kernel(const Vec2& r, const CVec2& e) { return kernel_fs<double>(r, 0.0, e); }

template <typename Visit>
void visit_half_plane(double a, double radius, Visit&& visit) {
    const int M = static_cast<int>(std::floor(radius / a));
    const double R2 = radius * radius;
    for (int ix = 0; ix <= M; ++ix) {
        for (int iy = -M; iy <= M; ++iy) {
            if (ix == 0 && iy <= 0) continue;
            const double x = ix * a, y = iy * a;
            const double r2 = x * x + y * y;
            if (r2 > R2) continue;
            visit(ix, iy, Vec2(x, y), std::sqrt(r2));
        }
    }
}

}  // namespace

std::string to_string(SumMethod m) { return m == SumMethod::real_space ? "real_space" : "reciprocal"; }

std::vector<DiffractionOrder> diffraction_orders(const Vec2& k_perp, double a, int m_max) {
    std::vector<DiffractionOrder> out;
    const double g = kTwoPi / a;
    for (int mx = -m_max; mx <= m_max; ++mx)
        for (int my = -m_max; my <= m_max; ++my) {
            DiffractionOrder o;
            o.m = Eigen::Vector2i(mx, my);
            o.q_vec = g * Vec2(mx, my);
            const double kz2 = kQ * kQ - (k_perp + o.q_vec).squaredNorm();
            o.k_z = kz2 >= 0.0 ? cplx(std::sqrt(kz2), 0.0) : cplx(0.0, std::sqrt(-kz2));
            out.push_back(o);
        }
    return out;
}

DispersionPoint cooperative_rates_reciprocal(const Vec2& k_perp, double a, const CVec2& dipole, int m_max) {
    double total = 0.0;
    for (const auto& o : diffraction_orders(k_perp, a, m_max)) {
        const Vec2 kq = k_perp + o.q_vec;
        const double kz2 = kQ * kQ - kq.squaredNorm();
        if (std::abs(kz2) <= 1e-12 * kQ * kQ) {
            std::ostringstream msg;
            msg << "grazing diffraction order (" << o.m(0) << "," << o.m(1)
                << "): |k+Q| = q; shift k_perp by an infinitesimal amount";
            throw NumericError(msg.str());
        }
        if (kz2 <= 0.0) continue;
        const cplx ke = kq(0) * dipole(0) + kq(1) * dipole(1);
        total += (1.0 - std::norm(ke) / (kQ * kQ)) / std::sqrt(kz2);
    }
    DispersionPoint p;
    p.k_perp = k_perp;
    p.gamma_k = 3.0 / (2.0 * a * a) * total - 1.0;
    p.method = SumMethod::reciprocal;
    return p;
}

DispersionPoint cooperative_rates_real_space(const Vec2& k_perp, double a, const RealSpaceOptions& opt) {
    const Schedule s = make_schedule(light_circle_distance(k_perp, a), opt);
    const int L = s.levels;
    std::vector<double> gam(L, 0.0), del(L, 0.0), eps(L);
    for (int j = 0; j < L; ++j) eps[j] = s.eps0 * std::pow(2.0, j);

    visit_half_plane(a, s.radius, [&](int, int, const Vec2& r, double rn) {
        const cplx d = lattice_kernel(r, opt.dipole);
        const double c = 2.0 * std::cos(k_perp.dot(r));  // the +r, -r pair
        double w = std::exp(-s.eps0 * rn);
        for (int j = 0; j < L; ++j) {
            gam[j] += 2.0 * c * d.real() * w;
            del[j] += c * d.imag() * w;
            w *= w;
        }
    });

    const auto [g0, rg] = richardson(eps, gam);
    const auto [d0, rd] = richardson(eps, del);
    DispersionPoint p;
    p.k_perp = k_perp;
    p.gamma_k = g0;
    p.delta_k = d0;
    p.method = SumMethod::real_space;
    p.residual = std::max(rg, rd);
    if (p.residual > opt.tolerance) throw ConvergenceError("real-space lattice sum did not converge", p.residual);
    return p;
}

std::vector<Vec2> standard_path(const std::string& spec, double a) {
    std::vector<Vec2> out;
    std::stringstream ss(spec);
    std::string tok;
    const double b = kPi / a;
    while (std::getline(ss, tok, ',')) {
        if (tok == "G" || tok == "Gamma" || tok == "\xCE\x93")
            out.emplace_back(0.0, 0.0);
        else if (tok == "X")
            out.emplace_back(b, 0.0);
        else if (tok == "Y")
            out.emplace_back(0.0, b);
        else if (tok == "M")
            out.emplace_back(b, b);
        else
            throw ConfigError("path", "unknown waypoint '" + tok + "'");
    }
    if (out.size() < 2) throw ConfigError("path", "need at least two waypoints");
    return out;
}

std::vector<DispersionPoint> dispersion_curve(const std::vector<Vec2>& path, int samples, double a,
                                              const RealSpaceOptions& opt, int threads) {
    if (path.size() < 2) throw ConfigError("path", "need at least two waypoints");
    if (samples < 2) throw ConfigError("samples", "need at least two samples");
    std::vector<double> cum(path.size(), 0.0);
    for (size_t i = 1; i < path.size(); ++i) cum[i] = cum[i - 1] + (path[i] - path[i - 1]).norm();
    const double total = cum.back();

    std::vector<Vec2> ks(samples);
    for (int i = 0; i < samples; ++i) {
        if (i == 0) {
            ks[i] = path.front();
            continue;
        }
        if (i == samples - 1) {
            ks[i] = path.back();
            continue;
        }
        const double s = total * i / (samples - 1);
        size_t seg = 1;
        while (seg < path.size() - 1 && cum[seg] < s) ++seg;
        const double len = cum[seg] - cum[seg - 1];
        const double t = len > 0.0 ? (s - cum[seg - 1]) / len : 0.0;
        ks[i] = path[seg - 1] + t * (path[seg] - path[seg - 1]);
    }
    for (int i = 0; i < samples; ++i) {
        if (light_circle_distance(ks[i], a) > 1e-9 * kQ) continue;
        Vec2 dir = (i > 0 ? ks[i - 1] : ks[i + 1]) - ks[i];
        if (dir.norm() == 0.0) dir = Vec2(-1.0, -0.5);
        ks[i] += 1e-6 * kQ * dir.normalized();
    }

    std::vector<DispersionPoint> out(samples);
    parallel_for(samples, threads, [&](int i) {
        DispersionPoint p = cooperative_rates_reciprocal(ks[i], a, opt.dipole);
        // the shift diverges on the light circle; leave it unset there instead of summing forever
        if (light_circle_distance(ks[i], a) < opt.rho_floor * kQ) {
            p.residual = std::numeric_limits<double>::quiet_NaN();
            out[i] = p;
            return;
        }
        const DispersionPoint r = cooperative_rates_real_space(ks[i], a, opt);
        p.delta_k = r.delta_k;
        p.residual = r.residual;
        out[i] = p;
    });
    return out;
}

Vec2 BandGrid::k(int i, int j) const { return (kTwoPi / (n_side * a)) * Vec2(i, j); }

BandGrid band_grid(int n_side, double a, const RealSpaceOptions& opt) {
    BandGrid g;
    g.n_side = n_side;
    g.a = a;
    double rho = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_side; ++i)
        for (int j = 0; j < n_side; ++j) rho = std::min(rho, light_circle_distance(g.k(i, j), a));
    const Schedule s = make_schedule(rho, opt);
    const int L = s.levels;
    std::vector<CMatX> acc(L, CMatX::Zero(n_side, n_side));
    auto wrap = [n_side](int i) { return ((i % n_side) + n_side) % n_side; };
    visit_half_plane(a, s.radius, [&](int ix, int iy, const Vec2& r, double rn) {
        const cplx d = lattice_kernel(r, opt.dipole);
        const int px = wrap(ix), py = wrap(iy), mx = wrap(-ix), my = wrap(-iy);
        double w = std::exp(-s.eps0 * rn);
        for (int j = 0; j < L; ++j) {
            acc[j](px, py) += d * w;
            acc[j](mx, my) += d * w;
            w *= w;
        }
    });
    std::vector<CMatX> spec(L);
    for (int j = 0; j < L; ++j) spec[j] = fft2(acc[j]);
    std::vector<double> eps(L);
    for (int j = 0; j < L; ++j) eps[j] = s.eps0 * std::pow(2.0, j);

    g.gamma.resize(n_side, n_side);
    g.delta.resize(n_side, n_side);
    std::vector<double> fr(L), fi(L);
    for (int i = 0; i < n_side; ++i)
        for (int j = 0; j < n_side; ++j) {
            for (int l = 0; l < L; ++l) {
                fr[l] = 2.0 * spec[l](i, j).real();
                fi[l] = spec[l](i, j).imag();
            }
            const auto [gv, rg] = richardson(eps, fr);
            const auto [dv, rd] = richardson(eps, fi);
            g.gamma(i, j) = gv;
            g.delta(i, j) = dv;
            g.max_residual = std::max({g.max_residual, rg, rd});
        }
    return g;
}

CooperativeK0 cooperative_k0(double a, const CVec2& dipole) {
    RealSpaceOptions opt;
    opt.dipole = dipole;
    CooperativeK0 c;
    c.Gamma = cooperative_rates_reciprocal(Vec2::Zero(), a, dipole).gamma_k;
    c.Delta = *cooperative_rates_real_space(Vec2::Zero(), a, opt).delta_k;
    return c;
}

}  // namespace arraycav
