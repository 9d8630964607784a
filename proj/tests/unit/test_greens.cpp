#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "arraycav/greens.hpp"

using namespace arraycav;

namespace {

const double q = kTwoPi;

cplx d2z_fd(const Vec2& r) {
    // Richardson-combined central differences, O(h^4)
    auto cd = [&](double h) { return (kernel_fs(r, h) - 2.0 * kernel_fs(r, 0.0) + kernel_fs(r, -h)) / (h * h); };
    const double h = 2e-3;
    return (4.0 * cd(h / 2) - cd(h)) / 3.0;
}

}  // namespace

TEST_CASE("dyadic tensor symmetry") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<Vec3> rs = {Vec3(0.3, 0, 0)};
    for (int i = 0; i < 10; ++i) rs.emplace_back(u(rng), u(rng), u(rng));
    for (const auto& r : rs) {
        const auto G = dyadic_green_fs<double>(r);
        CHECK((G - dyadic_green_fs<double>(Vec3(-r)).transpose()).norm() <= 1e-14 * G.norm());
        CHECK((G - G.transpose()).norm() <= 1e-14 * G.norm());
    }
    CHECK_THROWS_AS(dyadic_green_fs<double>(Vec3::Zero()), NumericError);
}

TEST_CASE("far and near field") {
    const auto far = dyadic_green_fs<double>(Vec3(100, 0, 0));
    CHECK(std::abs(std::abs(far(1, 1)) * 4 * kPi * 100 - 1.0) < 2e-3);
    const double r1 = std::abs(dyadic_green_fs<double>(Vec3(0.01, 0, 0))(0, 0));
    const double r2 = std::abs(dyadic_green_fs<double>(Vec3(0.02, 0, 0))(0, 0));
    CHECK(r1 / r2 == doctest::Approx(8.0).epsilon(0.05));
}

TEST_CASE("series and closed form agree across the switch") {
    for (double x : {1.9, 1.99, 2.0, 2.01, 2.2}) {
        const double r = x / q;
        const auto p = radial_parts<double>(r, q);
        const auto pl = radial_parts<long double>(r, q);
        CHECK(std::abs(p.A - cplx(pl.A)) <= 1e-12 * std::abs(p.A));
        CHECK(std::abs(p.C - cplx(pl.C)) <= 1e-11 * std::abs(p.C));
    }
    // small argument: Im parts stay finite and smooth
    const auto s = radial_parts<double>(1e-6, q);
    CHECK(s.A.imag() == doctest::Approx(q / (4 * kPi) * 2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("kernel origin and reciprocity") {
    CHECK(kernel_fs(Vec2::Zero()) == cplx(0.5, 0.0));
    const Vec2 r(0.7, 0.2);
    CHECK(kernel_fs(r) == kernel_fs(Vec2(-r)));
    // continuity of Re towards the origin
    CHECK(kernel_fs(Vec2(1e-5, 0)).real() == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("kernel contraction with circular dipole") {
    const auto G = dyadic_green_fs<double>(Vec3(0.4, 0, 0.3));
    const cplx ref = cplx(0, -1.5) * (G(0, 0) + G(1, 1)) / 2.0;
    CHECK(std::abs(kernel_fs(Vec2(0.4, 0), 0.3) - ref) < 1e-13 * std::abs(ref));
    // general in-plane polarization
    const CVec2 e(cplx(0.6, 0.1), cplx(-0.2, 0.7615773105863909));
    const CVec2 en = e / e.norm();
    const auto Gp = dyadic_green_fs<double>(Vec3(0.3, -0.5, 0));
    const Eigen::Vector3cd e3(en(0), en(1), 0);
    const cplx ref2 = cplx(0, -1.5) * e3.dot(Gp * e3);
    CHECK(std::abs(kernel_fs<double>(Vec2(0.3, -0.5), 0.0, en) - ref2) < 1e-13 * std::abs(ref2));
}

TEST_CASE("second z-derivative limits") {
    const cplx d0 = kernel_fs_d2z(Vec2::Zero());
    CHECK(d0.real() == doctest::Approx(-q * q / 5).epsilon(1e-12));
    CHECK(d0.imag() == 0.0);
    CHECK(green_fs_d2z_limit_im<double>() == doctest::Approx(-4.0 / 15.0).epsilon(1e-12));
    const cplx near = kernel_fs_d2z(Vec2(1e-5, 0));
    CHECK(std::abs(near.real() + q * q / 5) <= 1e-8 * q * q / 5);
    // Im of e^dagger F e at small rho against the tensor limit
    const double F_im = (4 * kPi / (q * q * q)) * green_fs_d2z<double>(Vec2(1e-6, 0)).imag();
    CHECK(std::abs(F_im + 4.0 / 15.0) < 1e-8);
}

TEST_CASE("second z-derivative against finite differences") {
    const Vec2 r0(0.4, 0);
    CHECK(std::abs(kernel_fs_d2z(r0) - d2z_fd(r0)) <= 1e-6 * std::abs(kernel_fs_d2z(r0)));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rad(0.2, 3.0), ang(0, kTwoPi);
    for (int i = 0; i < 20; ++i) {
        const double rr = rad(rng), t = ang(rng);
        const Vec2 r(rr * std::cos(t), rr * std::sin(t));
        const cplx exact = kernel_fs_d2z(r);
        CHECK(std::abs(exact - d2z_fd(r)) <= 1e-6 * std::abs(exact));
    }
}

TEST_CASE("first z-derivative vanishes") {
    const Vec2 r(0.6, -0.3);
    const double h = 1e-4;
    CHECK(std::abs(kernel_fs(r, h) - kernel_fs(r, -h)) == 0.0);
}

TEST_CASE("momentum kernel") {
    const cplx k0 = kernel_fs_momentum<double>(Vec2::Zero(), 0.0);
    CHECK(k0 == cplx(1.5 / (2 * q), 0));
    const Vec2 kev(1.5 * q, 0);
    const double kz = std::sqrt(1.25) * q;
    const double v1 = std::abs(kernel_fs_momentum<double>(kev, 0.1));
    const double v2 = std::abs(kernel_fs_momentum<double>(kev, 0.3));
    CHECK(v2 / v1 == doctest::Approx(std::exp(-kz * 0.2)).epsilon(1e-12));
    // circular weight 1 - |k|^2 / (2 q^2)
    const Vec2 kp(0.3 * q, 0.4 * q);
    const cplx v = kernel_fs_momentum<double>(kp, 0.0);
    CHECK(v.real() == doctest::Approx(1.5 / (2 * q * std::sqrt(0.75)) * (1 - 0.25 / 2)).epsilon(1e-13));
    try {
        kernel_fs_momentum<double>(Vec2(q, 0), 0.0);
        FAIL("expected an error");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("grazing wavevector") != std::string::npos);
    }
}

TEST_CASE("inverse Fourier transform of the momentum kernel") {
    // Circular dipole: the weight depends on |k| only, so D(r) = (1/2pi) int k dk J0(k r) kernel(k).
    // k = q sin(t) inside the light cone and k = q cosh(u) outside absorb the 1/kz endpoint singularity.
    const double dz = 0.25;
    auto midpoint = [](auto f, double lo, double hi, int n) {
        const double h = (hi - lo) / n;
        cplx acc = 0.0;
        for (int i = 0; i < n; ++i) acc += f(lo + (i + 0.5) * h);
        return acc * h;
    };
    for (double rr : {0.3, 1.0, 2.7}) {
        auto prop = [&](double t) {
            const double k = q * std::sin(t);
            return std::cyl_bessel_j(0.0, k * rr) * kernel_fs_momentum<double>(Vec2(k, 0), dz) * (q * std::cos(t)) * k;
        };
        auto evan = [&](double u) {
            const double k = q * std::cosh(u);
            return std::cyl_bessel_j(0.0, k * rr) * kernel_fs_momentum<double>(Vec2(k, 0), dz) * (q * std::sinh(u)) * k;
        };
        const cplx acc = (midpoint(prop, 0.0, kPi / 2, 40000) + midpoint(evan, 0.0, 4.0, 80000)) / kTwoPi;
        const cplx ref = kernel_fs(Vec2(rr, 0.0), dz);
        CHECK(std::abs(acc - ref) <= 1e-6 * std::abs(ref));
    }
}

TEST_CASE("decay matrix is positive semidefinite") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const int n = 60;
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng));
    MatX R(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) R(i, j) = kernel_fs(Vec2(pts[i] - pts[j])).real();
    Eigen::SelfAdjointEigenSolver<MatX> es(R);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}
