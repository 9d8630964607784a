#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "arraycav/config.hpp"
#include "support.hpp"

using namespace arraycav;
using testing_support::Knobs;
using testing_support::make_config;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("lattice is a centered square grid") {
    const auto l = make_lattice(0.5, 20);
    CHECK(l.size() == 400);
    for (int iy = 0; iy < 20; ++iy)
        for (int ix = 0; ix < 20; ++ix) {
            const Vec2 r = l.positions.col(iy * 20 + ix);
            CHECK(r(0) == (ix - 9.5) * 0.5);
            CHECK(r(1) == (iy - 9.5) * 0.5);
            // inversion partner
            const Vec2 p = l.positions.col((19 - iy) * 20 + (19 - ix));
            CHECK((r + p).norm() == 0.0);
        }
}

TEST_CASE("derived quantities") {
    Knobs k;
    k.eta = 0.2;
    const auto cfg = make_config(k);
    CHECK(cfg.physical.q == kTwoPi);
    CHECK(cfg.cavity.z_R == doctest::Approx(kPi * 16.0));
    CHECK(cfg.trap.x0 == doctest::Approx(0.2 / kTwoPi));
    CHECK(cfg.k_cut_abs() == doctest::Approx(1.0));
    CHECK(std::abs(cfg.physical.dipole(0) - cplx(1.0 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(cfg.physical.dipole(1) - cplx(0, 1.0 / std::sqrt(2.0))) < 1e-15);
}

TEST_CASE("errors name the offending key") {
    Knobs k;
    k.w = 1.0;
    CHECK(error_of(testing_support::config_text(k)).find("w below paraxial bound") != std::string::npos);

    std::string text = testing_support::config_text({});
    const auto drive = text.find("[drive]");
    const std::string no_drive = text.substr(0, drive) + "[drive]\n";
    const std::string e = error_of(no_drive);
    CHECK(e.rfind("Omega", 0) == 0);

    CHECK(error_of(text + "").empty());
    CHECK(error_of(text + "bogus = 1\n").find("bogus") != std::string::npos);
    CHECK(error_of(text + "delta = 3\n").find("delta") != std::string::npos);
    std::string bad = text;
    bad.replace(bad.find("eta = 0.1"), 9, "eta = abc");
    CHECK(error_of(bad).find("eta") != std::string::npos);
    Knobs big;
    big.eta = 0.5;
    CHECK(error_of(testing_support::config_text(big)).rfind("eta", 0) == 0);
    Knobs far;
    far.z0 = 10.0;
    CHECK(error_of(testing_support::config_text(far)).rfind("z0", 0) == 0);
    CHECK_THROWS_AS(load_config("/nonexistent/arraycav.cfg"), ConfigError);
}

TEST_CASE("comments and dipole choices") {
    std::string text = testing_support::config_text({});
    text.insert(text.find("[lattice]"), "# a comment\ndipole = x   # linear\n");
    const auto cfg = parse_config(text);
    CHECK(cfg.physical.dipole(0) == cplx(1, 0));
    CHECK(cfg.physical.dipole(1) == cplx(0, 0));

    std::string quoted = testing_support::config_text({});
    quoted.insert(quoted.find("[lattice]"), "dipole = \"circular_minus\"\n");
    CHECK(parse_config(quoted).physical.dipole(1) == cplx(0, -1.0 / std::sqrt(2.0)));
}

TEST_CASE("emitted config round-trips bit for bit") {
    Knobs k;
    k.a = 0.1 + 0.2;  // not exactly representable as a short decimal
    k.w = 4.0 / 3.0 * 3.0000001;
    k.delta = 1.0 / 3.0 * 300;
    const auto cfg = make_config(k);
    const auto text = emit_config(cfg);
    const auto back = parse_config(text);
    CHECK(emit_config(back) == text);
    CHECK(back.lattice.a == cfg.lattice.a);
    CHECK(back.cavity.w == cfg.cavity.w);
    CHECK(back.cavity.k_cut == cfg.cavity.k_cut);
    CHECK(back.drive.delta == cfg.drive.delta);
    CHECK(back.lattice.positions == cfg.lattice.positions);
}

TEST_CASE("extent warning") {
    Knobs k;
    k.n_side = 16;
    CHECK(make_config(k).warnings.size() == 1);
    CHECK(make_config({}).warnings.empty());
}

TEST_CASE("regime report") {
    const auto cfg = make_config({});
    const double Gamma = 3.0 / (4 * kPi * 0.25) - 1.0, Delta = 0.4;
    const auto r = validate_regime(cfg, Gamma, Delta);
    const auto& ld = r.at("large_detuning");
    CHECK(ld.pass);
    CHECK(ld.ratio == doctest::Approx(std::abs(100.0 - Delta) / (1.0 + Gamma)));
    CHECK(r.at("paraxial_waist").pass);
    CHECK(r.at("paraxial_waist").ratio == 4.0);
    CHECK(r.at("small_motion").pass);
    CHECK(r.all_pass());

    auto wild = cfg;
    wild.trap.eta = 0.5;
    CHECK_FALSE(validate_regime(wild, Gamma, Delta).at("small_motion").pass);

    auto res = cfg;
    res.drive.delta = Delta;
    CHECK_FALSE(validate_regime(res, Gamma, Delta).at("large_detuning").pass);

    const auto again = validate_regime(cfg, Gamma, Delta);
    for (std::size_t i = 0; i < r.checks.size(); ++i) CHECK(r.checks[i].ratio == again.checks[i].ratio);
    CHECK_THROWS(r.at("nope"));
}

TEST_CASE("noise contract") {
    const auto n = make_noise_contract(0.5, 2e-5);
    CHECK(n.correlators.at("F_total").rate == 0.5 + 2e-5);
    CHECK(n.correlators.at("F_c").delta_correlated);
    CHECK_THROWS_AS(make_noise_contract(-1, 0), NumericError);
}
