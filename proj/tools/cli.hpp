#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ionphonon/ionphonon.hpp"

namespace ionphonon::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kPhysics = 3, kIo = 4 };

struct RunConfig {
    std::string command;
    ChainConfig chain;
    int k_points = 0;  // 0: command default
    std::optional<double> temperature;
    double t_min = 0.01;
    double t_max = 50.0;
    int t_steps = 60;
    double omega_min = 0.0;
    double omega_max = 2.0;
    int omega_steps = 401;
    double eta = 1e-2;
    std::optional<int> component;
    int sublattice = 0;
    int max_separation = 10;
    std::vector<int> n_list{50, 100, 200, 400};
    bool include_longitudinal = false;
    bool exclude_radial = false;
    std::string format = "csv";
    std::string output;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"dispersion", "equilibrium", "correlations", "heat-capacity",
                                            "susceptibility", "energy-reduction", "modes", "ginzburg"};
    return c;
}

struct ParseResult {
    RunConfig cfg;
    int exit_code = -1;  // >= 0: stop with this code
    std::string message;
};

inline void build_app(CLI::App& app, RunConfig& rc, std::string& boundary, std::string& component) {
    app.set_config("--config", "", "flat key = value file mirroring the flag names");
    app.add_option("command", rc.command, "what to compute")
        ->required()
        ->check(CLI::IsMember(commands()));
    app.add_option("--kappa", rc.chain.kappa, "Coulomb coupling")->required();
    app.add_option("--alpha", rc.chain.alpha, "radial anisotropy")->capture_default_str();
    app.add_option("--lambda", rc.chain.lambda, "spacing over oscillator length")->capture_default_str();
    app.add_option("--n-ions", rc.chain.n_ions, "ions on the ring")->capture_default_str();
    app.add_option("--boundary", boundary, "ring or bulk")
        ->check(CLI::IsMember({"ring", "bulk"}))
        ->capture_default_str();
    app.add_option("--k-points", rc.k_points, "k grid size (0: default)");
    app.add_option("--temperature", rc.temperature, "single temperature");
    app.add_option("--t-min", rc.t_min)->capture_default_str();
    app.add_option("--t-max", rc.t_max)->capture_default_str();
    app.add_option("--t-steps", rc.t_steps)->capture_default_str();
    app.add_option("--omega-min", rc.omega_min)->capture_default_str();
    app.add_option("--omega-max", rc.omega_max)->capture_default_str();
    app.add_option("--omega-steps", rc.omega_steps)->capture_default_str();
    app.add_option("--eta", rc.eta, "susceptibility broadening")->capture_default_str();
    app.add_option("--component", component, "x, y or z")->check(CLI::IsMember({"x", "y", "z"}));
    app.add_option("--sublattice", rc.sublattice)->check(CLI::IsMember({0, 1}))->capture_default_str();
    app.add_option("--max-separation", rc.max_separation, "largest cell separation")->capture_default_str();
    app.add_option("--n-list", rc.n_list, "ring sizes for ginzburg")->delimiter(',');
    app.add_flag("--include-longitudinal-zero-mode", rc.include_longitudinal);
    app.add_flag("--exclude-radial-zero-mode", rc.exclude_radial);
    app.add_option("--format", rc.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--output", rc.output, "output path (stdout if empty)");
    app.set_version_flag("--version", kVersion);
}

inline void validate(const RunConfig& rc) {
    rc.chain.validate();
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (rc.k_points < 0) fail("--k-points must be >= 0");
    if (rc.temperature && *rc.temperature < 0) fail("--temperature must be >= 0");
    if (!(rc.t_min > 0) || !(rc.t_max > rc.t_min) || rc.t_steps < 2)
        fail("temperature grid must satisfy 0 < t-min < t-max and t-steps >= 2");
    if (!(rc.omega_max > rc.omega_min) || rc.omega_steps < 2)
        fail("frequency grid must satisfy omega-min < omega-max and omega-steps >= 2");
    if (!(rc.eta > 0)) fail("--eta must be > 0");
    if (rc.max_separation < 0) fail("--max-separation must be >= 0");
    for (size_t i = 0; i < rc.n_list.size(); ++i) {
        if (rc.n_list[i] < 4 || rc.n_list[i] % 2) fail("--n-list entries must be even and >= 4");
        if (i && rc.n_list[i] <= rc.n_list[i - 1]) fail("--n-list must be strictly increasing");
    }
}

inline ParseResult parse_config(int argc, const char* const* argv) {
    ParseResult r;
    CLI::App app{"Phonon normal forms of trapped-ion chains", "ionphonon"};
    std::string boundary = "ring";
    std::string component;
    build_app(app, r.cfg, boundary, component);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        r.message = app.help();
        r.exit_code = kOk;
        return r;
    } catch (const CLI::CallForVersion&) {
        r.message = std::string(kVersion) + "\n";
        r.exit_code = kOk;
        return r;
    } catch (const CLI::ParseError& e) {
        r.message = std::string("usage error: ") + e.what() + "\n";
        r.exit_code = kUsage;
        return r;
    }
    r.cfg.chain.boundary = boundary == "bulk" ? Boundary::ThermodynamicLimit : Boundary::PeriodicRing;
    if (!component.empty()) r.cfg.component = component == "x" ? X : (component == "y" ? Y : Z);
    try {
        validate(r.cfg);
    } catch (const std::invalid_argument& e) {
        r.message = std::string("usage error: ") + e.what() + "\n";
        r.exit_code = kUsage;
    }
    return r;
}

// One output table: typed cells, column names carry their units.
using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> warnings;
};

namespace detail {

inline ZeroModeFlags flags(const RunConfig& rc) { return {rc.include_longitudinal, !rc.exclude_radial}; }

inline std::vector<double> linear_grid(double a, double b, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / (n - 1);
    return g;
}

inline std::vector<double> geometric_grid(double a, double b, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = a * std::pow(b / a, double(i) / (n - 1));
    return g;
}

inline Table dispersion(const RunConfig& rc) {
    Equilibrium eq = solve_delta0(rc.chain);
    std::vector<double> ks = rc.chain.boundary == Boundary::PeriodicRing && rc.k_points == 0
                                 ? ring_momenta(rc.chain.n_ions, 2)
                                 : brillouin_grid(rc.k_points ? rc.k_points : 401, 2);
    const DispersionTable tab = dispersion_zigzag(ks, rc.chain);
    Table t;
    t.columns = {"k[1/d]", "branch", "omega[omega_I]", "theta_xy[rad]", "collectivity", "zero_mode"};
    for (const auto& r : tab.records)
        t.rows.push_back({r.k, (long long)r.branch, r.omega, r.theta_xy, r.collectivity, (long long)r.zero_mode});
    t.warnings = tab.warnings;
    return t;
}

inline Table equilibrium(const RunConfig& rc) {
    const Equilibrium eq = solve_delta0(rc.chain);
    const auto om = bare_frequencies(rc.chain, eq);
    const auto masses = effective_masses(rc.chain, eq);
    Table t;
    t.columns = {"kappa",          "delta0[d]",          "potential[E_d]",        "residual[m_I omega_I^2 d]",
                 "Omega_x[omega_I]", "Omega_y[omega_I]", "Omega_z[omega_I]",     "kappa_c",
                 "zero_pairs",     "m_tilde_l[1/omega_I]", "m_tilde_r[1/omega_I]"};
    t.rows.push_back({rc.chain.kappa, eq.delta0, classical_potential(eq.delta0, rc.chain),
                      equilibrium_residual(rc.chain, eq), om[X], om[Y], om[Z], critical_kappa(),
                      (long long)(masses.radial ? 2 : 1), masses.longitudinal,
                      masses.radial ? *masses.radial : std::nan("")});
    return t;
}

inline Table modes(const RunConfig& rc) {
    const Equilibrium eq = solve_delta0(rc.chain);
    const Spectrum sp = build_spectrum(rc.chain, eq, rc.k_points);
    Table t;
    t.columns = {"k[1/d]", "index", "kind", "omega[omega_I]", "m_tilde[1/omega_I]", "collectivity", "theta_xy[rad]"};
    for (const auto& b : sp.blocks) {
        long long i = 0;
        for (const auto& zp : b.nf.zero_pairs) {
            const Eigen::VectorXcd u = zp.p.head(b.nf.dimension);
            t.rows.push_back({b.k, i++, std::string(zero_mode_name(zp.label)), 0.0, zp.m_tilde, std::nan(""),
                              mixing_angle(u, u.conjugate(), sp.cell)});
        }
        for (auto it = b.nf.modes.rbegin(); it != b.nf.modes.rend(); ++it)
            t.rows.push_back({b.k, i++, std::string("phonon"), it->omega, std::nan(""), collectivity(*it),
                              mixing_angle(*it, sp.cell)});
    }
    return t;
}

inline Table correlations(const RunConfig& rc) {
    const Equilibrium eq = solve_delta0(rc.chain);
    const Spectrum sp = build_spectrum(rc.chain, eq, rc.k_points);
    const int s = std::min(rc.sublattice, sp.cell - 1);
    std::vector<std::pair<int, int>> comps;
    if (rc.component) {
        comps.push_back({*rc.component, *rc.component});
    } else {
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) comps.push_back({a, b});
    }
    Table t;
    t.columns = {"delta_j", "s", "s_prime", "nu", "nu_prime", "T[omega_I]", "value[d^2]"};
    const double T = rc.temperature.value_or(0.0);
    for (auto [a, b] : comps)
        for (int j = 0; j <= rc.max_separation; ++j) {
            CorrelatorRequest req;
            req.delta_j = j;
            req.s = req.s_prime = s;
            req.nu = a;
            req.nu_prime = b;
            req.T = T;
            req.flags = flags(rc);
            t.rows.push_back({(long long)j, (long long)s, (long long)s, std::string(axis_name(a)),
                              std::string(axis_name(b)), T, spatial_correlator(req, sp)});
        }
    return t;
}

inline Table heat(const RunConfig& rc) {
    const Equilibrium eq = solve_delta0(rc.chain);
    const Spectrum sp = build_spectrum(rc.chain, eq, rc.k_points);
    const std::vector<double> ts =
        rc.temperature ? std::vector<double>{*rc.temperature} : geometric_grid(rc.t_min, rc.t_max, rc.t_steps);
    Table t;
    t.columns = {"T[omega_I]", "c[k_B]"};
    for (double T : ts) {
        const HeatCapacity hc = heat_capacity(T, sp, flags(rc));
        t.rows.push_back({T, hc.c});
        t.warnings.insert(t.warnings.end(), hc.warnings.begin(), hc.warnings.end());
    }
    return t;
}

inline Table chi(const RunConfig& rc) {
    const Equilibrium eq = solve_delta0(rc.chain);
    const Spectrum sp = build_spectrum(rc.chain, eq, rc.k_points);
    const int nu = rc.component.value_or(Y);
    const auto res = susceptibility(linear_grid(rc.omega_min, rc.omega_max, rc.omega_steps), nu,
                                    std::min(rc.sublattice, sp.cell - 1), rc.eta, sp);
    Table t;
    t.columns = {"omega[omega_I]", "chi_re[d^2/omega_I]", "chi_im[d^2/omega_I]", "phase[rad]"};
    for (const auto& r : res) t.rows.push_back({r.omega, r.chi.real(), r.chi.imag(), phase_shift(r)});
    return t;
}

inline Table energy(const RunConfig& rc) {
    const Equilibrium eq = solve_delta0(rc.chain);
    const Spectrum sp = build_spectrum(rc.chain, eq, rc.k_points);
    const double e = correlation_energy(sp);
    Table t;
    t.columns = {"kappa", "delta0[d]", "delta_e0_per_ion[omega_I]", "delta_e0_per_ion[E_d]"};
    t.rows.push_back({rc.chain.kappa, eq.delta0, e, e / rc.chain.e_d()});
    return t;
}

inline Table ginzburg(const RunConfig& rc) {
    const auto pts = ginzburg_parameter(rc.chain, rc.n_list);
    Table t;
    t.columns = {"N", "delta0[d]", "variance_z[d^2]", "ginzburg"};
    for (const auto& p : pts) t.rows.push_back({(long long)p.n_ions, p.delta0, p.variance, p.value});
    return t;
}

inline std::string format_cell(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

inline nlohmann::json cell_json(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return std::isnan(*d) ? nlohmann::json() : nlohmann::json(*d);
    if (const long long* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

inline nlohmann::json meta(const RunConfig& rc) {
    nlohmann::json m;
    m["version"] = kVersion;
    m["command"] = rc.command;
    m["kappa"] = rc.chain.kappa;
    m["alpha"] = rc.chain.alpha;
    m["lambda"] = rc.chain.lambda;
    m["n_ions"] = rc.chain.n_ions;
    m["boundary"] = rc.chain.boundary == Boundary::PeriodicRing ? "ring" : "bulk";
    m["k_points"] = rc.k_points;
    m["temperature"] = rc.temperature ? nlohmann::json(*rc.temperature) : nlohmann::json();
    m["t_min"] = rc.t_min;
    m["t_max"] = rc.t_max;
    m["t_steps"] = rc.t_steps;
    m["omega_min"] = rc.omega_min;
    m["omega_max"] = rc.omega_max;
    m["omega_steps"] = rc.omega_steps;
    m["eta"] = rc.eta;
    m["component"] = rc.component ? nlohmann::json(axis_name(*rc.component)) : nlohmann::json();
    m["sublattice"] = rc.sublattice;
    m["max_separation"] = rc.max_separation;
    m["n_list"] = rc.n_list;
    m["include_longitudinal_zero_mode"] = rc.include_longitudinal;
    m["exclude_radial_zero_mode"] = rc.exclude_radial;
    m["format"] = rc.format;
    return m;
}

}  // namespace detail

inline Table run_command(const RunConfig& rc) {
    static const std::map<std::string, Table (*)(const RunConfig&)> dispatch{
        {"dispersion", detail::dispersion},   {"equilibrium", detail::equilibrium},
        {"correlations", detail::correlations}, {"heat-capacity", detail::heat},
        {"susceptibility", detail::chi},      {"energy-reduction", detail::energy},
        {"modes", detail::modes},             {"ginzburg", detail::ginzburg}};
    const auto it = dispatch.find(rc.command);
    if (it == dispatch.end()) throw std::invalid_argument("unknown command " + rc.command);
    return it->second(rc);
}

inline std::string render(const Table& t, const RunConfig& rc) {
    std::ostringstream os;
    if (rc.format == "json") {
        nlohmann::json j;
        j["meta"] = detail::meta(rc);
        j["rows"] = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json r;
            for (size_t c = 0; c < t.columns.size(); ++c) r[t.columns[c]] = detail::cell_json(row[c]);
            j["rows"].push_back(r);
        }
        j["warnings"] = t.warnings;
        os << j.dump(2) << '\n';
    } else {
        for (size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
        os << '\n';
        for (const auto& row : t.rows) {
            for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << detail::format_cell(row[c]);
            os << '\n';
        }
    }
    return os.str();
}

inline nlohmann::json error_record(const PhysicsError& e, const RunConfig& rc) {
    nlohmann::json j;
    j["kind"] = e.kind();
    j["message"] = e.what();
    if (auto* d = dynamic_cast<const DivergenceError*>(&e)) j["branch"] = d->branch();
    if (auto* d = dynamic_cast<const BareInstability*>(&e)) j["omega_squared"] = d->omega_squared();
    if (auto* d = dynamic_cast<const ToleranceError*>(&e)) j["bound"] = d->bound();
    if (auto* d = dynamic_cast<const BracketError*>(&e)) j["interval"] = {d->lo(), d->hi()};
    if (auto* d = dynamic_cast<const DynamicalInstability*>(&e)) {
        j["eigenvalues"] = nlohmann::json::array();
        for (const auto& z : d->eigenvalues()) j["eigenvalues"].push_back({z.real(), z.imag()});
    }
    j["meta"] = detail::meta(rc);
    return j;
}

inline bool write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) return false;
    f << text;
    f.close();
    return static_cast<bool>(f);
}

inline int run(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    Table t;
    try {
        t = run_command(rc);
    } catch (const PhysicsError& e) {
        const std::string rec = error_record(e, rc).dump(2) + "\n";
        if (rc.output.empty()) {
            err << rec;
        } else if (!write_file(rc.output + ".error.json", rec)) {
            err << "cannot write " << rc.output << ".error.json\n";
            return kIo;
        }
        err << "physics error (" << e.kind() << "): " << e.what() << '\n';
        return kPhysics;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    for (const auto& w : t.warnings) err << "warning: " << w << '\n';
    const std::string text = render(t, rc);
    if (rc.output.empty()) {
        out << text;
        return out ? kOk : kIo;
    }
    if (!write_file(rc.output, text)) {
        err << "cannot write " << rc.output << '\n';
        return kIo;
    }
    return kOk;
}

}  // namespace ionphonon::cli
