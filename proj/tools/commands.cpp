#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "arraycav/cavity_dynamics.hpp"
#include "arraycav/kernel_cache.hpp"
#include "arraycav/om_dynamics.hpp"
#include "arraycav/optomech.hpp"
#include "arraycav/parallel.hpp"

namespace arraycav::cli {

namespace {

using json = nlohmann::ordered_json;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Run {
    std::string command;
    std::vector<std::string> args;
    int threads = 0;
    Config cfg;
    std::vector<CacheRecord> kernels;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out", "cannot open " + path);
    f << text;
    if (!f) throw ConfigError("out", "write failed for " + path);
}

void write_manifest(const Run& run, const std::string& out, const std::string& content) {
    json m;
    m["command"] = run.command;
    m["version"] = kVersion;
    m["args"] = run.args;
    m["threads"] = resolve_threads(run.threads);
    const std::string cfg_text = emit_config(run.cfg);
    m["config"] = cfg_text;
    m["config_hash"] = content_hash(cfg_text);
    json ks = json::array();
    for (const auto& k : run.kernels)
        ks.push_back({{"key", k.key}, {"path", k.path}, {"content_hash", k.content_hash}, {"cache_hit", k.hit}});
    m["kernels"] = ks;
    m["outputs"] = {{{"path", out}, {"content_hash", content_hash(content)}}};
    write_file(out + ".manifest.json", m.dump(2) + "\n");
}

void emit(const Run& run, const std::string& out, const std::string& content) {
    if (out.empty()) {
        std::cout << content;
        return;
    }
    write_file(out, content);
    write_manifest(run, out, content);
}

void warn(const Config& cfg) {
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_dispersion(Run& run, const std::string& path, int samples, const std::string& out) {
    RealSpaceOptions opt;
    opt.dipole = run.cfg.physical.dipole;
    const double a = run.cfg.lattice.a;
    const auto pts = dispersion_curve(standard_path(path, a), samples, a, opt, run.threads);
    std::ostringstream o;
    o << "index,kx,ky,gamma_k,total_decay,delta_k,method,residual\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        o << i << "," << num(p.k_perp(0)) << "," << num(p.k_perp(1)) << "," << num(p.gamma_k) << ","
          << num(p.gamma_k + run.cfg.physical.gamma) << "," << (p.delta_k ? num(*p.delta_k) : "nan") << ","
          << to_string(p.method) << "," << num(p.residual) << "\n";
    }
    emit(run, out, o.str());
    return kOk;
}

int cmd_spectrum(Run& run, double dc_min, double dc_max, int samples, const std::string& model, const std::string& out) {
    std::vector<SpectrumSample> spec;
    const auto k0 = cooperative_k0(run.cfg.lattice.a, run.cfg.physical.dipole);
    if (model == "two_mode") {
        spec = spectrum_scan(build_two_mode(run.cfg, k0), dc_min, dc_max, samples, run.threads);
    } else {
        if (samples < 2) throw ConfigError("samples", "need at least two samples");
        auto kernels = make_om_kernels(run.cfg);
        run.kernels = kernels.cache;
        const auto m = build_full_model(run.cfg, kernels.d.dense(), k0.Gamma);
        std::vector<double> dc(samples);
        for (int i = 0; i < samples; ++i) dc[i] = dc_min + (dc_max - dc_min) * i / (samples - 1);
        spec = spectrum_full(m, dc);
        if (max_excitation(steady_state_full(m)) > kSaturationWarning)
            std::cerr << "warning: atomic excitation exceeds " << kSaturationWarning << ", linear model unreliable\n";
    }
    std::ostringstream o;
    o << "delta_c,abs_a2,phase\n";
    for (const auto& s : spec) o << num(s.delta_c) << "," << num(s.abs_a2) << "," << num(s.phase) << "\n";
    emit(run, out, o.str());
    return kOk;
}

json params_json(const OmParams& p) {
    return {{"g", p.g},         {"g_bar", p.g_bar},     {"g2", p.g2},       {"g2_alt", p.g2_alt},
            {"kappa_sc", p.kappa_sc}, {"Delta_AC", p.Delta_AC}, {"Delta_sc", p.Delta_sc}, {"eta", p.eta},
            {"N_a", p.N_a},     {"epsilon", p.epsilon}, {"g_eff", p.g_eff}, {"omega_m", p.omega_m},
            {"delta_minus_Delta", p.delta_minus_Delta}};
}

json standard_json(const StandardModel& m) {
    json noise;
    for (const auto& [k, c] : m.noise.correlators) noise[k] = {{"rate", c.rate}, {"delta_correlated", c.delta_correlated}};
    return {{"cavity_shift", m.cavity_shift},
            {"kappa", m.kappa},
            {"kappa_c", m.kappa_c},
            {"kappa_sc", m.kappa_sc},
            {"g", m.g},
            {"g2", m.g2},
            {"omega_m", m.omega_m},
            {"noise", noise},
            {"g_over_kappa_sc", jnum(m.g_over_kappa_sc)},
            {"g_over_kappa_sc_closed", jnum(m.g_over_kappa_sc_closed)},
            {"frequency_pull", jnum(m.frequency_pull)},
            {"sideband_resolved", m.sideband_resolved}};
}

int cmd_omparams(Run& run, bool consistency, const std::string& out) {
    const auto k0 = cooperative_k0(run.cfg.lattice.a, run.cfg.physical.dipole);
    auto p = closed_form_params(run.cfg, k0.Gamma, k0.Delta);
    json j;
    j["dispersion"] = {{"Gamma", k0.Gamma}, {"Delta", k0.Delta}};
    json tol;
    tol["epsilon_bounds"] = p.epsilon >= 2.4 - 1e-12 && p.epsilon <= 6.0 + 1e-12;
    if (consistency) {
        const auto disp = make_om_dispersion(run.cfg);
        auto kernels = make_om_kernels(run.cfg);
        run.kernels = kernels.cache;
        const auto tr = coupling_traces(run.cfg, disp, kernels);
        const auto rep = kappa_sc_consistency(run.cfg, tr, disp);
        const auto ksc = k_sc_ground_state_average(run.cfg, kernels, disp);
        const auto grid = refine_brillouin(run.cfg, disp);
        Config half = run.cfg;
        half.trap.eta *= 0.5;
        half.trap.x0 *= 0.5;
        const auto rep_half = kappa_sc_consistency(half, coupling_traces(half, disp, kernels), disp);
        p.Delta_sc = rep.Delta_sc;
        const double eta_ratio = rep.kappa_sc_trace / rep_half.kappa_sc_trace;
        const double num_ratio = p.g / rep.kappa_sc_trace;
        const double closed_ratio = p.g / p.kappa_sc;
        j["numerical"] = {{"kappa_sc_trace", rep.kappa_sc_trace},
                          {"kappa_2", rep.kappa_2},
                          {"Delta_sc", rep.Delta_sc},
                          {"g2_numeric", rep.g2_numeric},
                          {"trace_C", {tr.trace.real(), tr.trace.imag()}},
                          {"C_00", {tr.c00.real(), tr.c00.imag()}},
                          {"k_sc_average", {ksc.value.real(), ksc.value.imag()}},
                          {"k_sc_terms", {{"first", ksc.first}, {"middle", ksc.middle}, {"last", ksc.last}}},
                          {"grid_refinement_rel_change", grid.rel_change}};
        j["ratios"] = {{"kappa_sc_trace_over_closed", rep.kappa_sc_trace / rep.kappa_sc_closed},
                       {"kappa_2_over_closed", rep.kappa_2 / rep.kappa_sc_closed},
                       {"eta_halving_ratio", eta_ratio},
                       {"g_over_kappa_sc_numeric", jnum(num_ratio)},
                       {"g_over_kappa_sc_closed", jnum(closed_ratio)}};
        tol["kappa_sc_trace_vs_closed"] = std::abs(rep.kappa_sc_trace - rep.kappa_sc_closed) <= 0.1 * rep.kappa_sc_closed;
        tol["kappa_2_small"] = std::abs(rep.kappa_2) <= 0.05 * rep.kappa_sc_closed;
        tol["eta_ratio"] = std::abs(eta_ratio - 4.0) <= 1e-6;
        tol["brillouin_grid"] = grid.converged;
        tol["Delta_sc_order"] = std::abs(rep.Delta_sc) <= 10.0 * p.eta * p.eta * std::abs(p.Delta_AC);
        if (std::abs(run.cfg.sin_qz0()) < 1e-12)
            tol["g2_vs_closed"] = std::abs(rep.g2_numeric - rep.g2_closed) <= 0.03 * std::abs(rep.g2_closed);
    }
    j["closed_form"] = params_json(p);
    j["standard_model"] = standard_json(standard_model_report(run.cfg, p));
    bool ok = true;
    for (const auto& [k, v] : tol.items()) ok = ok && v.get<bool>();
    j["tolerances_met"] = tol;
    emit(run, out, j.dump(2) + "\n");
    return ok ? kOk : kConsistencyFailure;
}

int cmd_dynamics(Run& run, const std::string& model, double t_final, double dt, std::uint64_t seed, double rtol,
                 const std::string& out) {
    if (!(t_final > 0.0)) throw ConfigError("t-final", "must be positive");
    if (dt <= 0.0) dt = t_final / 1000.0;
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = rtol * 1e-4;
    const auto k0 = cooperative_k0(run.cfg.lattice.a, run.cfg.physical.dipole);
    std::ostringstream o;
    if (model == "full") {
        auto kernels = make_om_kernels(run.cfg);
        run.kernels = kernels.cache;
        const auto m = build_full_model(run.cfg, kernels.d.dense(), k0.Gamma);
        SystemState init;
        init.sigma = CVecX::Zero(m.sites());
        const auto traj = evolve_full(m, init, t_final, dt, opt);
        o << "t,re_a,im_a,abs_a2,max_sigma\n";
        for (const auto& s : traj)
            o << num(s.t) << "," << num(s.a.real()) << "," << num(s.a.imag()) << "," << num(std::norm(s.a)) << ","
              << num(max_excitation(s)) << "\n";
    } else {
        const auto p = closed_form_params(run.cfg, k0.Gamma, k0.Delta);
        const auto report = validate_regime(run.cfg, k0.Gamma, k0.Delta);
        if (!report.all_pass()) std::cerr << "warning: regime checks not all satisfied (see validate)\n";
        std::vector<OmState> traj;
        OmState init;
        if (model == "multimode") {
            if (run.cfg.lattice.size() > kMaxMechanicalModes)
                throw NumericError("multimode dynamics limited to " + std::to_string(kMaxMechanicalModes) + " sites");
            const auto disp = make_om_dispersion(run.cfg);
            auto kernels = make_om_kernels(run.cfg);
            run.kernels = kernels.cache;
            const auto C = coupling_matrix_C(run.cfg, mechanical_basis(run.cfg.lattice, run.cfg.cavity.w, seed), disp, kernels);
            init.b = CVecX::Zero(C.rows());
            traj = evolve_multimode(run.cfg, p, C, init, t_final, dt, opt);
        } else {
            init.b = CVecX::Zero(1);
            traj = evolve_reduced(run.cfg, p, init, t_final, dt, opt);
        }
        o << "t,re_a,im_a,re_b0,im_b0,abs_a2\n";
        for (const auto& s : traj)
            o << num(s.t) << "," << num(s.a.real()) << "," << num(s.a.imag()) << "," << num(s.b(0).real()) << ","
              << num(s.b(0).imag()) << "," << num(std::norm(s.a)) << "\n";
    }
    emit(run, out, o.str());
    return kOk;
}

int cmd_validate(Run& run) {
    const auto report = validate_regime(run.cfg);
    json j;
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"relation", c.relation},
                          {"lhs", jnum(c.lhs)},
                          {"rhs", jnum(c.rhs)},
                          {"ratio", jnum(c.ratio)},
                          {"threshold", c.threshold},
                          {"pass", c.pass}});
    j["checks"] = checks;
    j["warnings"] = run.cfg.warnings;
    j["all_pass"] = report.all_pass();
    std::cout << j.dump(2) << "\n";
    return report.all_pass() ? kOk : kConsistencyFailure;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Cavity-embedded atom array: dispersion, spectra and optomechanical parameters", "arraycav"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Run r;
    for (int i = 0; i < argc; ++i) r.args.emplace_back(argv[i]);
    std::string config_path, out, path = "G,X,M,G", model;
    int samples = 0;
    double dc_min = -10.0, dc_max = 10.0, t_final = 0.0, dt = 0.0, rtol = 1e-9;
    bool consistency = false;
    std::uint64_t seed = 1;
    app.add_option("--threads", r.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

    auto with_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Configuration file")->required();
    };

    auto* disp = app.add_subcommand("dispersion", "Cooperative decay and shift along a Brillouin path");
    with_config(disp);
    disp->add_option("--path", path, "Comma-separated waypoints from G, X, Y, M")->capture_default_str();
    disp->add_option("--samples", samples, "Points along the path")->default_val(64);
    disp->add_option("--out", out, "CSV output")->required();

    auto* spec = app.add_subcommand("spectrum", "Steady-state cavity response versus cavity detuning");
    with_config(spec);
    spec->add_option("--dc-min", dc_min, "Lowest delta_c")->capture_default_str();
    spec->add_option("--dc-max", dc_max, "Highest delta_c")->capture_default_str();
    spec->add_option("--samples", samples, "Detuning samples")->default_val(201);
    spec->add_option("--model", model, "two_mode or full")
        ->default_val("two_mode")
        ->check(CLI::IsMember({"two_mode", "full"}));
    spec->add_option("--out", out, "CSV output")->required();

    auto* om = app.add_subcommand("omparams", "Optomechanical parameters and consistency checks");
    with_config(om);
    om->add_flag("--consistency", consistency, "Rebuild kappa_sc, g2 from the coupling matrix and compare");
    om->add_option("--out", out, "JSON output (stdout if omitted)");

    auto* dyn = app.add_subcommand("dynamics", "Mean-field time evolution");
    with_config(dyn);
    dyn->add_option("--model", model, "multimode, reduced or full")
        ->default_val("reduced")
        ->check(CLI::IsMember({"multimode", "reduced", "full"}));
    dyn->add_option("--t-final", t_final, "Evolution time (1/gamma)")->required();
    dyn->add_option("--dt", dt, "Output spacing (default t-final/1000)");
    dyn->add_option("--seed", seed, "Mechanical basis completion seed")->capture_default_str();
    dyn->add_option("--rtol", rtol, "Integrator relative tolerance")->capture_default_str();
    dyn->add_option("--out", out, "CSV output")->required();

    auto* val = app.add_subcommand("validate", "Regime checks; exit 4 if any fails");
    with_config(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigFailure;
    }

    try {
        r.cfg = load_config(config_path);
        warn(r.cfg);
        if (disp->parsed()) {
            r.command = "dispersion";
            return cmd_dispersion(r, path, samples, out);
        }
        if (spec->parsed()) {
            r.command = "spectrum";
            return cmd_spectrum(r, dc_min, dc_max, samples, model, out);
        }
        if (om->parsed()) {
            r.command = "omparams";
            return cmd_omparams(r, consistency, out);
        }
        if (dyn->parsed()) {
            r.command = "dynamics";
            return cmd_dynamics(r, model, t_final, dt, seed, rtol, out);
        }
        r.command = "validate";
        return cmd_validate(r);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumericFailure;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace arraycav::cli
