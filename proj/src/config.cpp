#include "arraycav/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "arraycav/lattice_sums.hpp"

namespace arraycav {

namespace {

using Section = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || !std::isfinite(x))
        throw ConfigError(key, "not a finite number: '" + v + "'");
    return x;
}

std::string fmt(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"physical", {"lambda", "gamma", "dipole", "omega_a"}},
        {"lattice", {"a", "n_side"}},
        {"cavity", {"w", "l_fsr", "kappa_c", "z0", "k_cut"}},
        {"trap", {"omega_m", "eta"}},
        {"drive", {"Omega", "delta_c", "delta"}},
    };
    return s;
}

std::map<std::string, Section> split_sections(const std::string& text) {
    std::map<std::string, Section> out;
    std::istringstream in(text);
    std::string line, current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (!schema().count(current)) throw ConfigError(current, "unknown section");
            if (out.count(current)) throw ConfigError(current, "duplicate section");
            out[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"') val = val.substr(1, val.size() - 2);
        if (current.empty()) throw ConfigError(key, "key outside any section");
        if (!schema().at(current).count(key)) throw ConfigError(key, "unknown key in [" + current + "]");
        if (out[current].count(key)) throw ConfigError(key, "duplicate key");
        out[current][key] = val;
    }
    for (const auto& [name, keys] : schema())
        if (!out.count(name)) throw ConfigError(name, "missing section");
    return out;
}

struct Reader {
    const Section& sec;
    double req(const std::string& key) const {
        auto it = sec.find(key);
        if (it == sec.end()) throw ConfigError(key, "missing key");
        return to_double(key, it->second);
    }
    std::optional<double> opt(const std::string& key) const {
        auto it = sec.find(key);
        if (it == sec.end()) return std::nullopt;
        return to_double(key, it->second);
    }
};

CVec2 parse_dipole(const std::string& v) {
    const double s = 1.0 / std::sqrt(2.0);
    if (v == "circular") return CVec2(cplx(s, 0), cplx(0, s));
    if (v == "circular_minus") return CVec2(cplx(s, 0), cplx(0, -s));
    if (v == "x") return CVec2(1.0, 0.0);
    if (v == "y") return CVec2(0.0, 1.0);
    std::istringstream in(v);
    std::string tok;
    std::vector<double> c;
    while (in >> tok) c.push_back(to_double("dipole", tok));
    if (c.size() != 4) throw ConfigError("dipole", "expected a preset or four numbers 'ex_re ex_im ey_re ey_im'");
    return CVec2(cplx(c[0], c[1]), cplx(c[2], c[3]));
}

}  // namespace

NoiseContract make_noise_contract(double kappa_c, double kappa_sc) {
    if (kappa_c < 0.0 || kappa_sc < 0.0) throw NumericError("noise rates must be non-negative");
    NoiseContract n;
    n.correlators["F_c"] = {kappa_c, true};
    n.correlators["F_sc"] = {kappa_sc, true};
    n.correlators["F_total"] = {kappa_c + kappa_sc, true};
    return n;
}

LatticeSpec make_lattice(double a, int n_side) {
    LatticeSpec l;
    l.a = a;
    l.n_side = n_side;
    l.positions.resize(2, n_side * n_side);
    const double c = 0.5 * (n_side - 1);
    for (int iy = 0; iy < n_side; ++iy)
        for (int ix = 0; ix < n_side; ++ix)
            l.positions.col(iy * n_side + ix) << (ix - c) * a, (iy - c) * a;
    return l;
}

void finalize(Config& cfg) {
    auto& p = cfg.physical;
    if (p.lambda != 1.0) throw ConfigError("lambda", "internal unit is fixed to 1");
    if (p.gamma != 1.0) throw ConfigError("gamma", "internal unit is fixed to 1");
    p.q = kTwoPi / p.lambda;
    if (std::abs(p.dipole.squaredNorm() - 1.0) > 1e-12) throw ConfigError("dipole", "|e_d| must be 1");
    if (!(p.omega_a > 0.0)) throw ConfigError("omega_a", "must be positive");

    auto& l = cfg.lattice;
    if (!(l.a > 0.0 && l.a <= 1.0)) throw ConfigError("a", "lattice constant must satisfy 0 < a <= lambda");
    if (l.n_side < 1) throw ConfigError("n_side", "must be >= 1");
    l = make_lattice(l.a, l.n_side);

    auto& c = cfg.cavity;
    if (c.w < 2.0) throw ConfigError("w", "w below paraxial bound (w >= 2 lambda)");
    c.z_R = kPi * c.w * c.w;
    if (std::abs(c.z0) > 0.1 * c.z_R) throw ConfigError("z0", "z0 must be within 0.1 z_R");
    if (c.l_fsr <= 0.0) throw ConfigError("l_fsr", "must be positive");
    if (c.kappa_c < 0.0) throw ConfigError("kappa_c", "must be non-negative");
    if (c.k_cut == 0.0) c.k_cut = 4.0 / (c.w * p.q);
    if (!(c.k_cut > 0.0 && c.k_cut < 1.0)) throw ConfigError("k_cut", "must satisfy 0 < k_cut < 1 (units of q)");

    auto& t = cfg.trap;
    if (!(t.omega_m > 0.0)) throw ConfigError("omega_m", "must be positive");
    if (!(t.eta >= 0.0 && t.eta <= 0.3)) throw ConfigError("eta", "Lamb-Dicke parameter must satisfy 0 <= eta <= 0.3");
    t.x0 = t.eta / p.q;

    cfg.warnings.clear();
    if (l.extent() < 4.0 * c.w)
        cfg.warnings.push_back("n_side*a = " + fmt(l.extent()) + " < 4w: cavity profile not negligible at the boundary");
}

Config parse_config(const std::string& text) {
    const auto secs = split_sections(text);
    Config cfg;

    Reader ph{secs.at("physical")};
    if (auto v = ph.opt("lambda")) cfg.physical.lambda = *v;
    if (auto v = ph.opt("gamma")) cfg.physical.gamma = *v;
    if (auto v = ph.opt("omega_a")) cfg.physical.omega_a = *v;
    if (auto it = secs.at("physical").find("dipole"); it != secs.at("physical").end())
        cfg.physical.dipole = parse_dipole(it->second);

    Reader la{secs.at("lattice")};
    cfg.lattice.a = la.req("a");
    const double n = la.req("n_side");
    if (n != std::floor(n) || n < 1 || n > 4096) throw ConfigError("n_side", "must be an integer in [1, 4096]");
    cfg.lattice.n_side = static_cast<int>(n);

    Reader ca{secs.at("cavity")};
    cfg.cavity.w = ca.req("w");
    cfg.cavity.l_fsr = ca.req("l_fsr");
    cfg.cavity.kappa_c = ca.req("kappa_c");
    cfg.cavity.z0 = ca.req("z0");
    if (auto v = ca.opt("k_cut")) {
        if (*v == 0.0) throw ConfigError("k_cut", "must satisfy 0 < k_cut < 1 (units of q)");
        cfg.cavity.k_cut = *v;
    }

    Reader tr{secs.at("trap")};
    cfg.trap.omega_m = tr.req("omega_m");
    cfg.trap.eta = tr.req("eta");

    Reader dr{secs.at("drive")};
    cfg.drive.Omega = dr.req("Omega");
    cfg.drive.delta_c = dr.req("delta_c");
    cfg.drive.delta = dr.req("delta");

    finalize(cfg);
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const Config& cfg) {
    std::ostringstream o;
    const auto& d = cfg.physical.dipole;
    o << "[physical]\n"
      << "lambda = " << fmt(cfg.physical.lambda) << "\n"
      << "gamma = " << fmt(cfg.physical.gamma) << "\n"
      << "dipole = " << fmt(d(0).real()) << " " << fmt(d(0).imag()) << " " << fmt(d(1).real()) << " "
      << fmt(d(1).imag()) << "\n"
      << "omega_a = " << fmt(cfg.physical.omega_a) << "\n\n"
      << "[lattice]\n"
      << "a = " << fmt(cfg.lattice.a) << "\n"
      << "n_side = " << cfg.lattice.n_side << "\n\n"
      << "[cavity]\n"
      << "w = " << fmt(cfg.cavity.w) << "\n"
      << "l_fsr = " << fmt(cfg.cavity.l_fsr) << "\n"
      << "kappa_c = " << fmt(cfg.cavity.kappa_c) << "\n"
      << "z0 = " << fmt(cfg.cavity.z0) << "\n"
      << "k_cut = " << fmt(cfg.cavity.k_cut) << "\n\n"
      << "[trap]\n"
      << "omega_m = " << fmt(cfg.trap.omega_m) << "\n"
      << "eta = " << fmt(cfg.trap.eta) << "\n\n"
      << "[drive]\n"
      << "Omega = " << fmt(cfg.drive.Omega) << "\n"
      << "delta_c = " << fmt(cfg.drive.delta_c) << "\n"
      << "delta = " << fmt(cfg.drive.delta) << "\n";
    return o.str();
}

bool RegimeReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const RegimeCheck& RegimeReport::at(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no regime check named " + name);
}

RegimeReport validate_regime(const Config& cfg, double Gamma, double Delta) {
    RegimeReport r;
    auto add = [&](std::string name, std::string rel, double lhs, double rhs, double thr) {
        RegimeCheck c;
        c.name = std::move(name);
        c.relation = std::move(rel);
        c.lhs = lhs;
        c.rhs = rhs;
        c.ratio = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
        c.threshold = thr;
        c.pass = c.ratio >= thr;
        r.checks.push_back(c);
    };
    const auto& ph = cfg.physical;
    const auto& ca = cfg.cavity;
    const auto& dr = cfg.drive;
    const double total = ph.gamma + Gamma;
    const double s = cfg.sin_qz0();
    const double g_eff = std::sqrt(s * s * ca.l_fsr * total);

    // Fastest envelope rate: anything the slowly-varying amplitudes can respond to.
    const double fastest = std::max({total, std::abs(Delta), std::abs(dr.delta), std::abs(dr.delta_c), ca.kappa_c,
                                     g_eff, cfg.trap.omega_m, std::abs(dr.Omega)});
    const double c_light = ph.omega_a * ph.lambda / kTwoPi;
    const double l_array = cfg.lattice.extent();
    add("markov_optical_period", "omega_L * tau_s >> 1", ph.omega_a, fastest, 10.0);
    add("markov_retardation", "tau_s >> L_a / c", 1.0 / fastest, l_array / c_light, 10.0);
    add("small_motion", "q x0 << 1", 1.0, cfg.trap.eta, 10.0);

    const double slow = std::max({total, cfg.trap.omega_m, ca.kappa_c});
    add("large_detuning", "|delta - Delta| >> gamma + Gamma, omega_m, kappa_c", std::abs(dr.delta - Delta), slow, 10.0);
    add("paraxial_waist", "w >> lambda", ca.w, ph.lambda, 2.0);
    add("subwavelength_lattice", "lambda > a", ph.lambda, cfg.lattice.a, 1.0);
    add("rayleigh_range", "z0 << z_R", ca.z_R, std::abs(ca.z0), 10.0);
    add("array_extent", "n_side a >= 4 w", l_array, ca.w, 4.0);
    return r;
}

RegimeReport validate_regime(const Config& cfg) {
    const auto c = cooperative_k0(cfg.lattice.a, cfg.physical.dipole);
    return validate_regime(cfg, c.Gamma, c.Delta);
}

}  // namespace arraycav
