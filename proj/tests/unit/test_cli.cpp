#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "arraycav/types.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using testing_support::Knobs;

namespace {

const fs::path& workdir() {
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / ("arraycav_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        ::setenv("ARRAYCAV_CACHE_DIR", (p / "cache").c_str(), 1);
        return p;
    }();
    return d;
}

std::string bin() {
    const char* b = std::getenv("ARRAYCAV_BIN");
    REQUIRE(b != nullptr);
    return b;
}

std::string write_config(const std::string& name, const Knobs& k) {
    const fs::path p = workdir() / name;
    std::ofstream(p) << testing_support::config_text(k);
    return p.string();
}

int run(const std::string& args, std::string* stdout_text = nullptr) {
    const fs::path cap = workdir() / "stdout.txt";
    const std::string cmd = bin() + " " + args + " > " + cap.string() + " 2> " + (workdir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (stdout_text) {
        std::ifstream f(cap);
        std::stringstream ss;
        ss << f.rdbuf();
        *stdout_text = ss.str();
    }
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

Knobs small() {
    Knobs k;
    k.n_side = 16;
    k.w = 2.0;
    return k;
}

}  // namespace

TEST_CASE("argument handling") {
    CHECK(run("--help") == 0);
    CHECK(run("--version") == 0);
    CHECK(run("validate --bogus") == 2);
    CHECK(run("") == 2);
    CHECK(run("validate --config " + (workdir() / "missing.toml").string()) == 2);
}

TEST_CASE("validate exit codes") {
    std::string out;
    CHECK(run("validate --config " + write_config("ok.toml", Knobs{}), &out) == 0);
    const auto j = nlohmann::json::parse(out);
    CHECK(j["all_pass"].get<bool>());
    CHECK(j["checks"].size() >= 8);

    Knobs near;
    near.delta = 0.0;
    CHECK(run("validate --config " + write_config("near.toml", near)) == 4);

    Knobs narrow;
    narrow.w = 1.0;
    CHECK(run("validate --config " + write_config("narrow.toml", narrow)) == 2);
}

TEST_CASE("dispersion output") {
    const auto cfg = write_config("disp.toml", Knobs{});
    const auto out = workdir() / "disp.csv";
    REQUIRE(run("dispersion --config " + cfg + " --path G,M --samples 9 --out " + out.string()) == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 9);
    const double a = 0.5;
    CHECK(std::stod(rows[0][1]) == 0.0);
    CHECK(std::stod(rows[8][1]) == doctest::Approx(arraycav::kPi / a));
    CHECK(std::stod(rows[8][2]) == doctest::Approx(arraycav::kPi / a));
    const double closed = 3.0 / (4 * arraycav::kPi * a * a) - 1.0;
    CHECK(std::stod(rows[0][3]) == doctest::Approx(closed).epsilon(1e-10));
    CHECK(std::stod(rows[0][4]) == doctest::Approx(closed + 1.0).epsilon(1e-10));
    CHECK(fs::exists(out.string() + ".manifest.json"));
    const auto m = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(m["command"] == "dispersion");
    CHECK(m["outputs"][0]["path"] == out.string());

    const std::string first = slurp(out);
    REQUIRE(run("dispersion --config " + cfg + " --path G,M --samples 9 --out " + out.string()) == 0);
    CHECK(slurp(out) == first);
    REQUIRE(run("--threads 3 dispersion --config " + cfg + " --path G,M --samples 9 --out " + out.string()) == 0);
    CHECK(slurp(out) == first);
}

TEST_CASE("two-mode spectrum is a Lorentzian of width kappa_c") {
    Knobs k;
    const auto out = workdir() / "spec.csv";
    REQUIRE(run("spectrum --config " + write_config("spec.toml", k) + " --dc-min -2 --dc-max 3 --samples 5001 --out " +
                out.string()) == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 5001);
    std::size_t ipk = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (std::stod(rows[i][1]) > std::stod(rows[ipk][1])) ipk = i;
    const double center = std::stod(rows[ipk][0]);
    const double peak = 4 * k.Omega * k.Omega / (k.kappa_c * k.kappa_c);
    CHECK(std::stod(rows[ipk][1]) == doctest::Approx(peak).epsilon(1e-4));
    for (std::size_t i = 0; i < rows.size(); i += 250) {
        const double d = std::stod(rows[i][0]) - center;
        const double lor = k.Omega * k.Omega / (0.25 * k.kappa_c * k.kappa_c + d * d);
        CHECK(std::stod(rows[i][1]) == doctest::Approx(lor).epsilon(2e-3));
    }

    Knobs k2 = k;
    k2.Omega = 2 * k.Omega;
    const auto out2 = workdir() / "spec2.csv";
    REQUIRE(run("spectrum --config " + write_config("spec2.toml", k2) + " --dc-min -2 --dc-max 3 --samples 5001 --out " +
                out2.string()) == 0);
    const auto rows2 = read_csv(out2);
    for (std::size_t i = 0; i < rows.size(); i += 500)
        CHECK(std::stod(rows2[i][1]) == doctest::Approx(4 * std::stod(rows[i][1])).epsilon(1e-12));
}

TEST_CASE("full-model spectrum runs on a small array") {
    const auto out = workdir() / "specfull.csv";
    REQUIRE(run("spectrum --config " + write_config("specfull.toml", small()) +
                " --model full --dc-min -1 --dc-max 1 --samples 21 --out " + out.string()) == 0);
    CHECK(read_csv(out).size() == 21);
}

TEST_CASE("omparams") {
    std::string out;
    REQUIRE(run("omparams --config " + write_config("om.toml", Knobs{}), &out) == 0);
    const auto j = nlohmann::json::parse(out);
    const double eps = j["closed_form"]["epsilon"];
    CHECK(eps >= 2.4);
    CHECK(eps <= 6.0);
    CHECK(j["tolerances_met"]["epsilon_bounds"].get<bool>());
    CHECK(j["standard_model"]["kappa"].get<double>() ==
          doctest::Approx(0.5 + j["closed_form"]["kappa_sc"].get<double>()));

    const auto path = workdir() / "omc.json";
    const int code = run("omparams --consistency --config " + write_config("omc.toml", small()) + " --out " + path.string());
    const auto c = nlohmann::json::parse(slurp(path));
    CHECK(c["ratios"]["eta_halving_ratio"].get<double>() == doctest::Approx(4.0).epsilon(1e-9));
    bool all = true;
    for (const auto& [key, v] : c["tolerances_met"].items()) all = all && v.get<bool>();
    CHECK(code == (all ? 0 : 4));
}

TEST_CASE("dynamics") {
    const auto cfg = write_config("dyn.toml", small());
    const auto out = workdir() / "dyn.csv";
    REQUIRE(run("dynamics --config " + cfg + " --t-final 10 --dt 1 --out " + out.string()) == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 11);
    CHECK(std::stod(rows[0][5]) == 0.0);
    CHECK(std::stod(rows[10][5]) > 0.0);

    const auto outm = workdir() / "dynm.csv";
    REQUIRE(run("dynamics --model multimode --config " + cfg + " --t-final 10 --dt 1 --out " + outm.string()) == 0);
    const auto rm = read_csv(outm);
    REQUIRE(rm.size() == 11);
    CHECK(std::stod(rm[10][5]) == doctest::Approx(std::stod(rows[10][5])).epsilon(1e-3));

    Knobs big;
    big.n_side = 24;
    CHECK(run("dynamics --model multimode --config " + write_config("dynbig.toml", big) + " --t-final 1 --out " +
              (workdir() / "x.csv").string()) == 3);
    CHECK(run("dynamics --config " + cfg + " --t-final -1 --out " + (workdir() / "x.csv").string()) == 2);
}
