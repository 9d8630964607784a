#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "arraycav/om_dynamics.hpp"
#include "support.hpp"

using namespace arraycav;
using testing_support::Knobs;
using testing_support::make_config;

namespace {

struct Setup {
    Config cfg;
    OmDispersion disp;
    OmKernels kernels;
    MechanicalBasis basis;
};

const Setup& setup() {
    static const Setup s = [] {
        Knobs k;
        k.n_side = 16;
        k.w = 2.0;
        Setup s;
        s.cfg = make_config(k);
        s.disp = make_om_dispersion(s.cfg);
        s.kernels = make_om_kernels(s.cfg);
        s.basis = mechanical_basis(s.cfg.lattice, 2.0, 1);
        return s;
    }();
    return s;
}

OdeOptions tight() {
    OdeOptions o;
    o.rtol = 1e-10;
    o.atol = 1e-14;
    return o;
}

double max_dev(const std::vector<OmState>& x, const std::vector<OmState>& y) {
    double m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i].a - y[i].a));
    return m;
}

}  // namespace

TEST_CASE("decoupled cavity relaxes to the Lorentzian") {
    const auto& s = setup();
    auto p = closed_form_params(s.cfg, s.disp.Gamma, s.disp.Delta);
    p.g = 0;
    const int nb = 8;
    OmState init;
    init.b = CVecX::Zero(nb);
    const auto tr = evolve_multimode(s.cfg, p, CMatX::Zero(nb, nb), init, 120, 120, tight());
    const cplx expect = -kI * s.cfg.drive.Omega / cplx(0.5 * s.cfg.cavity.kappa_c, -(s.cfg.drive.delta_c - p.Delta_AC));
    CHECK(std::abs(tr.back().a - expect) <= 1e-8 * std::abs(expect));
    CHECK(tr.back().b.norm() == 0.0);
}

TEST_CASE("free mechanical precession") {
    const auto& s = setup();
    auto cfg = s.cfg;
    cfg.drive.Omega = 0;
    const auto p = closed_form_params(cfg, s.disp.Gamma, s.disp.Delta);
    const CMatX C = coupling_matrix_C(cfg, s.basis, s.disp, s.kernels);
    OmState init;
    init.b = CVecX::Zero(C.rows());
    for (int i = 0; i < C.rows(); ++i) init.b(i) = cplx(std::cos(0.3 * i), std::sin(0.7 * i));
    const double T = 50;
    const auto tr = evolve_multimode(cfg, p, C, init, T, T, tight());
    CHECK(tr.back().a == cplx(0, 0));
    const CVecX expect = init.b * std::exp(cplx(0, -p.omega_m * T));
    CHECK((tr.back().b - expect).norm() <= 1e-9 * expect.norm());
}

TEST_CASE("conservative part conserves the energy functional") {
    const auto& s = setup();
    auto cfg = s.cfg;
    cfg.cavity.kappa_c = 0;
    cfg.drive.Omega = 0;
    const auto p = closed_form_params(cfg, s.disp.Gamma, s.disp.Delta);
    const CMatX C = coupling_matrix_C(cfg, s.basis, s.disp, s.kernels);
    const MatX sym = 0.5 * (C.imag() + C.imag().transpose());
    const CMatX Ch = kI * sym.cast<cplx>();
    OmState init;
    init.a = cplx(3, 1);
    init.b = CVecX::Zero(C.rows());
    init.b(0) = cplx(0.5, 0.2);
    init.b(1) = 0.3;
    init.b(5) = cplx(0, -0.4);
    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-15;
    const auto tr = evolve_multimode(cfg, p, Ch, init, 1000, 1, o);
    REQUIRE(tr.size() == 1001);
    const double e0 = energy_functional(cfg, p, Ch, tr.front());
    double worst = 0;
    for (const auto& x : tr) worst = std::max(worst, std::abs(energy_functional(cfg, p, Ch, x) - e0));
    CHECK(worst <= 1e-8 * std::abs(e0));
}

TEST_CASE("reduced model limits") {
    const auto& s = setup();
    auto cfg = s.cfg;
    auto p = closed_form_params(cfg, s.disp.Gamma, s.disp.Delta);
    OmState init;
    init.b = CVecX::Zero(1);

    auto bare = p;
    bare.g = bare.g2 = 0;
    bare.kappa_sc = 0.05;  // exaggerated so the total rate is visible
    const auto tb = evolve_reduced(cfg, bare, init, 200, 200, tight());
    const cplx expect = -kI * cfg.drive.Omega / cplx(0.5 * (cfg.cavity.kappa_c + 0.05), -(cfg.drive.delta_c - p.Delta_AC));
    CHECK(std::abs(tb.back().a - expect) <= 1e-8 * std::abs(expect));

    // stiff spring: b follows -g |a|^2 / omega_m
    auto stiff = p;
    stiff.omega_m = 20;
    stiff.g2 = 0;
    const auto ts = evolve_reduced(cfg, stiff, init, 40, 40, tight());
    const auto& last = ts.back();
    CHECK(last.b(0).real() == doctest::Approx(-stiff.g * std::norm(last.a) / stiff.omega_m).epsilon(0.02));
}

TEST_CASE("weak-drive response follows the dressed Lorentzian") {
    const auto& s = setup();
    for (double dc : {-0.5, 0.0, 0.3, 0.8}) {
        auto cfg = s.cfg;
        cfg.drive.delta_c = dc;
        const auto p = closed_form_params(cfg, s.disp.Gamma, s.disp.Delta);
        OmState init;
        init.b = CVecX::Zero(1);
        const auto tr = evolve_reduced(cfg, p, init, 60, 60, tight());
        const double k = cfg.cavity.kappa_c + p.kappa_sc;
        const double det = dc - p.Delta_AC;
        const double lor = cfg.drive.Omega * cfg.drive.Omega / (0.25 * k * k + det * det);
        CHECK(std::norm(tr.back().a) == doctest::Approx(lor).epsilon(0.01));
    }
}

TEST_CASE("reduction error scales with eta squared") {
    const auto& s = setup();
    double dev[2];
    for (int i = 0; i < 2; ++i) {
        auto cfg = s.cfg;
        cfg.trap.eta = i == 0 ? 0.1 : 0.05;
        const auto p = closed_form_params(cfg, s.disp.Gamma, s.disp.Delta);
        const CMatX C = coupling_matrix_C(cfg, s.basis, s.disp, s.kernels);
        OmState init;
        init.b = CVecX::Zero(C.rows());
        const auto mm = evolve_multimode(cfg, p, C, init, 40, 1, tight());
        OmState r0;
        r0.b = CVecX::Zero(1);
        const auto rd = evolve_reduced(cfg, p, r0, 40, 1, tight());
        dev[i] = max_dev(mm, rd);
    }
    CHECK(dev[0] / dev[1] >= 3.5);
}

TEST_CASE("standard model mapping") {
    const auto& s = setup();
    const auto p = closed_form_params(s.cfg, s.disp.Gamma, s.disp.Delta);
    const auto m = standard_model_report(s.cfg, p);
    CHECK(m.kappa == s.cfg.cavity.kappa_c + p.kappa_sc);
    CHECK(m.noise.correlators.at("F_total").rate == m.kappa);
    CHECK(m.cavity_shift == p.Delta_AC);
    CHECK(std::abs(m.g_over_kappa_sc - m.g_over_kappa_sc_closed) <= 1e-12 * m.g_over_kappa_sc_closed);
    CHECK(m.frequency_pull == doctest::Approx(p.g / s.cfg.trap.x0));
}

TEST_CASE("determinism and guards") {
    const auto& s = setup();
    const auto p = closed_form_params(s.cfg, s.disp.Gamma, s.disp.Delta);
    OmState init;
    init.b = CVecX::Zero(1);
    const auto a = evolve_reduced(s.cfg, p, init, 10, 0.5);
    const auto b = evolve_reduced(s.cfg, p, init, 10, 0.5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].a == b[i].a);
        CHECK(a[i].b == b[i].b);
    }
    OmState many;
    many.b = CVecX::Zero(kMaxMechanicalModes + 1);
    CHECK_THROWS_AS(evolve_multimode(s.cfg, p, CMatX::Zero(513, 513), many, 1, 1), NumericError);
    OmState two;
    two.b = CVecX::Zero(2);
    CHECK_THROWS_AS(evolve_reduced(s.cfg, p, two, 1, 1), NumericError);
    CHECK_THROWS_AS(evolve_multimode(s.cfg, p, CMatX::Zero(3, 3), two, 1, 1), NumericError);
}
