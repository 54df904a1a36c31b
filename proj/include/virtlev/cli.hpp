#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "virtlev/acceptance.hpp"
#include "virtlev/criticality.hpp"
#include "virtlev/csv.hpp"
#include "virtlev/discrete_ops.hpp"
#include "virtlev/free_resolvent.hpp"
#include "virtlev/jost.hpp"
#include "virtlev/lap_sweep.hpp"
#include "virtlev/perturbation.hpp"

namespace virtlev::cli {

inline constexpr const char* version = "0.1.0";

/// Every parameter any subcommand accepts. Only the fields listed for a
/// command in fields() are read by it; defaults() fills in its defaults.
struct ExperimentConfig {
    std::string command;

    std::string out;      // CSV destination, stdout when empty
    std::string report;   // JSON report destination, none when empty
    int threads = 0;      // 0: VIRTLEV_THREADS, else 1

    std::string op = "free1d";
    std::string potential = "zero";
    std::string grid = "line";
    std::string geometry = "line";
    std::string approach = "interior";
    std::string norm = "weighted";
    double R = 30.0;
    double h = 0.1;
    int d = 1;
    double z_re = -1.0;
    double z_im = 0.0;
    double y = 0.0;
    double s = 2.0;
    double sp = 2.0;
    double tol = 1e-6;

    double z0 = 0.0;
    std::string ray = "pi";
    double r0 = 1e-2;
    double per_decade = 2.0;
    int count = 9;
    double tol_alpha = 0.1;
    bool refine = true;
    bool regularize = true;

    std::string g = "0.01";
    std::string z0_angle = "0";
    std::string phi = "1,0.5,0.25";
    int n = 512;
    int m = 64;
    double zeta0 = 0.0;
    int family = 8;
    double K = 1.0;
    int jmax = 64;

    std::string matrix;
    int jordan = 0;
    int planted_n = 0;
    int planted_k = 0;
    int trials = 20;
    std::uint64_t seed = 1;

    int only = 0;
};

using FieldRef = std::variant<double ExperimentConfig::*, int ExperimentConfig::*, bool ExperimentConfig::*,
                              std::string ExperimentConfig::*, std::uint64_t ExperimentConfig::*>;

struct Field {
    std::string name;
    FieldRef ref;
    std::string help;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> all{"kernel",   "jost",     "sweep",   "bifurcate", "shift",
                                              "embedded", "critical", "nullity", "suite"};
    return all;
}

inline std::string command_help(const std::string& c) {
    if (c == "kernel") return "Sample a free resolvent kernel and report its operator norms";
    if (c == "jost") return "Jost solutions, Wronskian and threshold classification of -d^2/dx^2 + V";
    if (c == "sweep") return "Resolvent norm sweep towards a threshold and its classification";
    if (c == "bifurcate") return "Ground-state energies of shallow square wells";
    if (c == "shift") return "Manufactured virtual level of a rank-one perturbed left shift";
    if (c == "embedded") return "Embedded eigenvalue family of a 3D radial potential";
    if (c == "critical") return "Null state or weighted spectral gap of a nonnegative form";
    if (c == "nullity") return "Matrix nullity from the least rank of an invertibility-restoring perturbation";
    if (c == "suite") return "Run the acceptance battery";
    return "";
}

inline const std::vector<Field>& fields(const std::string& command) {
    using C = ExperimentConfig;
    static const Field out{"out", &C::out, "CSV output path (stdout when empty)"};
    static const Field report{"report", &C::report, "JSON report path"};
    static const Field threads{"threads", &C::threads, "worker cap (0: VIRTLEV_THREADS or 1)"};
    static const Field pot{"potential", &C::potential, "zero | well:g=,a= | bump:amp=,amp_im=,a= | smooth:amp=,a= | table:path"};
    static const Field big_r{"R", &C::R, "half width (line) or radius (radial) of the grid"};
    static const Field h{"h", &C::h, "grid spacing"};
    static const Field s{"s", &C::s, "source weight exponent"};
    static const Field sp{"sp", &C::sp, "target weight exponent"};
    static const Field z_re{"z-re", &C::z_re, "real part of z"};
    static const Field z_im{"z-im", &C::z_im, "imaginary part of z"};

    static const std::vector<Field> kernel{
        {"d", &C::d, "dimension 1, 2 or 3"},
        {"grid", &C::grid, "line | radial (radial: s-wave reduced kernel)"},
        z_re, z_im,
        {"approach", &C::approach, "interior | upper | lower | negative-axis"},
        big_r, h,
        {"y", &C::y, "second argument of the sampled kernel column"},
        s, sp, out};
    static const std::vector<Field> jost{pot, big_r, h, z_re, z_im, {"tol", &C::tol, "Wronskian tolerance"}, out, report};
    static const std::vector<Field> sweep{
        {"op", &C::op, "free1d | free2d | free3d | schrodinger1d | schrodinger3d"},
        pot, big_r, h,
        {"z0", &C::z0, "threshold on the real axis"},
        {"ray", &C::ray, "direction angle of the ray z0 + r e^{i ray}, e.g. pi or pi/2"},
        {"r0", &C::r0, "largest distance to z0"},
        {"per-decade", &C::per_decade, "sweep points per decade of r"},
        {"count", &C::count, "number of sweep points"},
        s, sp,
        {"norm", &C::norm, "weighted | l1linf"},
        {"tol-alpha", &C::tol_alpha, "divergence exponent threshold"},
        {"refine", &C::refine, "repeat on the refined grid"},
        {"regularize", &C::regularize, "search finite-rank regularizations for rank and states"},
        threads, out, report};
    static const std::vector<Field> bifurcate{{"g", &C::g, "comma-separated couplings"}, {"s", &C::s, "source weight"},
                                              {"sp", &C::sp, "target weight"}, out};
    static const std::vector<Field> shift{{"z0-angle", &C::z0_angle, "z0 = e^{i angle}, e.g. 0, pi/2, pi/4"},
                                          {"phi", &C::phi, "comma-separated real entries of phi"},
                                          {"n", &C::n, "section length"},
                                          {"m", &C::m, "tail band excluded from the residual"},
                                          out};
    static const std::vector<Field> embedded{{"zeta0", &C::zeta0, "real zeta0 >= 0"},
                                             {"family", &C::family, "number of family members"}, threads, out, report};
    static const std::vector<Field> critical{{"geometry", &C::geometry, "line | radial3d"},
                                             pot, big_r, h,
                                             {"K", &C::K, "support radius of the perturbations"},
                                             {"jmax", &C::jmax, "number of perturbations"},
                                             out, report};
    static const std::vector<Field> nullity{{"matrix", &C::matrix, "whitespace-separated matrix file, entries x or (re,im)"},
                                            {"jordan", &C::jordan, "use the nilpotent Jordan block of this size"},
                                            {"planted-n", &C::planted_n, "random matrix size"},
                                            {"planted-k", &C::planted_k, "planted nullity of the random matrix"},
                                            {"trials", &C::trials, "random perturbations per rank"},
                                            {"seed", &C::seed, "random seed"},
                                            out};
    static const std::vector<Field> suite{{"only", &C::only, "run a single criterion (0: all)"}};
    static const std::vector<Field> none;

    if (command == "kernel") return kernel;
    if (command == "jost") return jost;
    if (command == "sweep") return sweep;
    if (command == "bifurcate") return bifurcate;
    if (command == "shift") return shift;
    if (command == "embedded") return embedded;
    if (command == "critical") return critical;
    if (command == "nullity") return nullity;
    if (command == "suite") return suite;
    return none;
}

/// Defaults that depend on the command; everything else keeps the member
/// initializers.
inline ExperimentConfig defaults(const std::string& command) {
    ExperimentConfig c;
    c.command = command;
    if (command == "kernel") {
        c.R = 10.0;
        c.s = 1.0;
        c.sp = 1.0;
    } else if (command == "jost") {
        c.R = 20.0;
        c.h = 0.01;
        c.z_re = 0.0;
    } else if (command == "bifurcate") {
        c.s = 1.0;
        c.sp = 1.0;
    } else if (command == "critical") {
        c.R = 400.0;
        c.h = 0.5;
    }
    return c;
}

inline std::string format_value(const ExperimentConfig& c, const FieldRef& ref) {
    return std::visit(
        [&](auto ptr) -> std::string {
            const auto& v = c.*ptr;
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return fmt(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else return std::to_string(v);
        },
        ref);
}

/// The resolved configuration as echoed at the top of every output file.
inline ConfigEcho describe(const ExperimentConfig& c) {
    ConfigEcho e{{"command", c.command}};
    for (const auto& f : fields(c.command)) e.emplace_back(f.name, format_value(c, f.ref));
    return e;
}

/// "key = value" lines accepted by --config; strings are quoted.
inline std::string serialize(const ExperimentConfig& c) {
    std::string s = "# virtlev " + c.command + "\n";
    for (const auto& f : fields(c.command)) {
        const std::string v = format_value(c, f.ref);
        s += f.name + " = " + (std::holds_alternative<std::string ExperimentConfig::*>(f.ref) ? "\"" + v + "\"" : v) + "\n";
    }
    return s;
}

struct HelpRequested {
    std::string text;
};

namespace detail {

inline void bind(CLI::App& sub, ExperimentConfig& cfg) {
    for (const auto& f : fields(cfg.command)) {
        std::visit(
            [&](auto ptr) {
                sub.add_option("--" + f.name, cfg.*ptr, f.help)
                    ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
                    ->capture_default_str();
            },
            f.ref);
    }
}

// Reads a key = value file with CLI11's INI reader and turns it into flags.
inline std::vector<std::string> config_arguments(const std::string& path, const std::string& command) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Usage, "cannot open config file " + path);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const CLI::Error& e) {
        fail(ErrorKind::Usage, "config file " + path + ": " + e.what());
    }
    std::vector<std::string> args;
    for (const auto& it : items) {
        if (it.name == "++" || it.name == "--") continue;  // section markers
        if (!it.parents.empty() && !(it.parents.size() == 1 && it.parents[0] == command))
            fail(ErrorKind::Usage, "config file " + path + ": key " + it.fullname() + " does not belong to " + command);
        std::string value;
        for (std::size_t k = 0; k < it.inputs.size(); ++k) value += (k ? "," : "") + it.inputs[k];
        args.push_back("--" + it.name);
        args.push_back(value);
    }
    return args;
}

} // namespace detail

/// Parses "command [flags]". A --config file is expanded in front of the
/// flags, so flags given on the command line take precedence.
inline ExperimentConfig parse_arguments(std::vector<std::string> args) {
    CLI::App app{"virtlev: virtual levels and limiting absorption at thresholds", "virtlev"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);
    std::vector<ExperimentConfig> configs;
    configs.reserve(commands().size());
    std::string ignored_config;
    for (const auto& name : commands()) {
        configs.push_back(defaults(name));
        CLI::App* sub = app.add_subcommand(name, command_help(name));
        sub->set_help_flag("--help", "Print this help message and exit");  // frees -h for the spacing
        detail::bind(*sub, configs.back());
        if (name != "suite") sub->add_option("--config", ignored_config, "key = value file; flags override it");
    }

    const auto cmd = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.empty() && a[0] != '-'; });
    if (cmd != args.end() && std::find(commands().begin(), commands().end(), *cmd) != commands().end()) {
        std::vector<std::string> injected;
        for (auto it = cmd + 1; it != args.end();) {
            std::string path;
            if (*it == "--config") {
                if (it + 1 == args.end()) fail(ErrorKind::Usage, "--config needs a path");
                path = *(it + 1);
                it = args.erase(it, it + 2);
            } else if (it->rfind("--config=", 0) == 0) {
                path = it->substr(9);
                it = args.erase(it);
            } else {
                ++it;
                continue;
            }
            const auto more = detail::config_arguments(path, *cmd);
            injected.insert(injected.end(), more.begin(), more.end());
        }
        args.insert(std::find(args.begin(), args.end(), *cmd) + 1, injected.begin(), injected.end());
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::CallForVersion&) {
        throw HelpRequested{std::string(version) + "\n"};
    } catch (const CLI::ParseError& e) {
        fail(ErrorKind::Usage, e.what());
    }
    const std::string used = app.get_subcommands().front()->get_name();
    for (auto& c : configs)
        if (c.command == used) return c;
    fail(ErrorKind::Usage, "unknown command");
}

// ------------------------------------------------------------------ helpers

/// Angles as decimals or multiples of pi: "1.2", "pi", "-pi/2", "3pi/4", "0.5*pi".
inline double parse_angle(const std::string& text) {
    const auto number = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != t.size() || !std::isfinite(v)) fail(ErrorKind::Usage, "bad angle '" + text + "'");
        return v;
    };
    const auto p = text.find("pi");
    if (p == std::string::npos) return number(text);
    std::string coef = text.substr(0, p);
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    double c = coef.empty() ? 1.0 : coef == "-" ? -1.0 : coef == "+" ? 1.0 : number(coef);
    const std::string rest = text.substr(p + 2);
    if (!rest.empty()) {
        if (rest[0] != '/') fail(ErrorKind::Usage, "bad angle '" + text + "'");
        const double den = number(rest.substr(1));
        if (den == 0.0) fail(ErrorKind::Usage, "bad angle '" + text + "'");
        c /= den;
    }
    return c * pi;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < item.size() && item[used] == ' ') ++used;
        if (used == 0 || used != item.size()) fail(ErrorKind::Usage, "bad number '" + item + "' in " + what);
        out.push_back(v);
    }
    if (out.empty()) fail(ErrorKind::Usage, what + " is empty");
    return out;
}

inline Approach parse_approach(const std::string& a) {
    if (a == "interior") return Approach::Interior;
    if (a == "upper") return Approach::FromUpperHalfPlane;
    if (a == "lower") return Approach::FromLowerHalfPlane;
    if (a == "negative-axis") return Approach::AlongNegativeAxis;
    fail(ErrorKind::Usage, "unknown approach '" + a + "'");
}

inline unsigned thread_cap(const ExperimentConfig& c) {
    if (c.threads < 0) fail(ErrorKind::Usage, "threads must be >= 0");
    return unsigned(c.threads);
}

/// Writes the table (with config echo) to --out or the stream, then the verdict.
inline void emit(const ExperimentConfig& c, const CsvTable& table, const std::string& verdict, std::ostream& out) {
    if (c.out.empty()) {
        table.write(out, describe(c));
        out << "# verdict: " << verdict << '\n';
        return;
    }
    std::ofstream file(c.out, std::ios::binary);
    if (!file) fail(ErrorKind::Usage, "cannot write " + c.out);
    table.write(file, describe(c));
    out << "verdict: " << verdict << '\n';
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : describe(c)) j[k] = v;
    return j;
}

inline void write_report(const ExperimentConfig& c, nlohmann::ordered_json j) {
    if (c.report.empty()) return;
    j["config"] = config_json(c);
    std::ofstream file(c.report, std::ios::binary);
    if (!file) fail(ErrorKind::Usage, "cannot write " + c.report);
    file << j.dump(2) << '\n';
}

inline nlohmann::ordered_json report_json(const ThresholdReport& r) {
    nlohmann::ordered_json j;
    j["classification"] = std::string(to_string(r.classification));
    j["rank"] = r.rank ? nlohmann::ordered_json(*r.rank) : nlohmann::ordered_json(nullptr);
    const auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(fmt(v)) : nlohmann::ordered_json(nullptr); };
    j["alpha"] = num(r.alpha);
    j["r_squared"] = num(r.r_squared);
    j["log_divergence"] = r.log_divergence;
    nlohmann::ordered_json d = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.diagnostics) d[k] = num(v);
    j["diagnostics"] = d;
    j["notes"] = r.notes;
    return j;
}

// ----------------------------------------------------------------- commands

inline int cmd_kernel(const ExperimentConfig& c, std::ostream& out) {
    const SpectralParameter p{cplx(c.z_re, c.z_im), parse_approach(c.approach)};
    const KernelOperator k = [&] {
        if (c.grid == "line") return build_free_kernel_operator(c.d, Grid1D::with_spacing(c.R, c.h), p);
        if (c.grid == "radial") return build_free_kernel_operator(c.d, RadialGrid::with_spacing(c.R, c.h), p);
        fail(ErrorKind::Usage, "unknown grid '" + c.grid + "'");
    }();
    const auto& ys = k.in().points;
    std::size_t col = 0;
    for (std::size_t j = 1; j < ys.size(); ++j)
        if (std::abs(ys[j] - c.y) < std::abs(ys[col] - c.y)) col = j;
    CsvTable t({"x", "k_re", "k_im"});
    for (std::size_t i = 0; i < k.rows(); ++i) {
        const cplx v = k.entries()(Eigen::Index(i), Eigen::Index(col));
        t.row({k.out().points[i], v.real(), v.imag()});
    }
    const double wn = operator_norm_weighted(k, WeightExponent(c.s), WeightExponent(c.sp));
    emit(c, t, "weighted_norm=" + fmt(wn) + " sup_kernel=" + fmt(l1_to_linf_norm(k)) + " column_y=" + fmt(ys[col]), out);
    return 0;
}

inline int cmd_jost(const ExperimentConfig& c, std::ostream& out) {
    const Potential1D v = parse_potential(c.potential);
    const Grid1D grid = Grid1D::with_spacing(c.R, c.h);
    const cplx z(c.z_re, c.z_im);
    const JostPair pair = jost_pair(v, grid, z);
    CsvTable t({"x", "theta_plus_re", "theta_plus_im", "theta_minus_re", "theta_minus_im"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto e = Eigen::Index(i);
        t.row({grid.point(i), pair.plus.value[e].real(), pair.plus.value[e].imag(), pair.minus.value[e].real(),
               pair.minus.value[e].imag()});
    }
    const cplx w = wronskian(pair);
    const std::string wtext = "W=" + fmt(w.real()) + (w.imag() < 0 ? "" : "+") + fmt(w.imag()) + "i";
    if (z == cplx(0.0)) {
        const ThresholdReport r = classify_threshold_1d(v, grid, c.tol);
        emit(c, t, std::string(to_string(r.classification)) + " (" + wtext + ")", out);
        write_report(c, report_json(r));
    } else {
        emit(c, t, wtext, out);
        nlohmann::ordered_json j;
        j["wronskian_re"] = fmt(w.real());
        j["wronskian_im"] = fmt(w.imag());
        write_report(c, j);
    }
    return 0;
}

inline OperatorSpec make_operator(const ExperimentConfig& c) {
    const bool free = c.op.rfind("free", 0) == 0;
    if (free && c.potential != "zero") fail(ErrorKind::Usage, "a potential needs op schrodinger1d or schrodinger3d");
    if (c.op == "free1d") return Free1D{Grid1D::with_spacing(c.R, c.h)};
    if (c.op == "free2d") return Free2DRadial{RadialGrid::with_spacing(c.R, c.h)};
    if (c.op == "free3d") return Free3DRadial{RadialGrid::with_spacing(c.R, c.h)};
    if (c.op == "schrodinger1d") return Schrodinger1D{parse_potential(c.potential), Grid1D::with_spacing(c.R, c.h), {}};
    if (c.op == "schrodinger3d") return Schrodinger3DRadial{parse_potential(c.potential), RadialGrid::with_spacing(c.R, c.h)};
    fail(ErrorKind::Usage, "unknown op '" + c.op + "'");
}

inline int cmd_sweep(const ExperimentConfig& c, std::ostream& out) {
    SweepConfig sc;
    sc.z0 = c.z0;
    sc.theta = parse_angle(c.ray);
    sc.r0 = c.r0;
    if (!(c.per_decade > 0.0)) fail(ErrorKind::Usage, "per-decade must be positive");
    sc.rho = std::pow(10.0, -1.0 / c.per_decade);
    if (c.count < 1) fail(ErrorKind::Usage, "count must be positive");
    sc.count = std::size_t(c.count);
    sc.s = c.s;
    sc.s_prime = c.sp;
    sc.threads = thread_cap(c);
    if (c.norm == "weighted") sc.flavor = NormFlavor::WeightedL2;
    else if (c.norm == "l1linf") sc.flavor = NormFlavor::L1ToLinf;
    else fail(ErrorKind::Usage, "unknown norm '" + c.norm + "'");
    ClassifyOptions co;
    co.tol_alpha = c.tol_alpha;
    co.refine = c.refine;
    co.search_regularization = c.regularize;

    const ThresholdReport r = classify(make_operator(c), sc, co);
    CsvTable t({"radius", "norm", "z_re", "z_im"});
    for (const auto& p : r.norms) t.row({p.radius, p.norm, p.z.real(), p.z.imag()});
    std::string verdict = std::string(to_string(r.classification)) + " (alpha≈" + fmt(r.alpha);
    if (r.classification == Classification::Virtual && r.rank) verdict += ", rank " + std::to_string(*r.rank);
    if (r.log_divergence) verdict += ", logarithmic";
    verdict += ")";
    emit(c, t, verdict, out);
    auto j = report_json(r);
    j["norms"] = nlohmann::ordered_json::array();
    for (const auto& p : r.norms) j["norms"].push_back({{"radius", fmt(p.radius)}, {"norm", fmt(p.norm)}});
    write_report(c, j);
    return 0;
}

inline int cmd_bifurcate(const ExperimentConfig& c, std::ostream& out) {
    const BifurcationCurve curve = bifurcation_curve(parse_list(c.g, "g"), c.s, c.sp);
    CsvTable t({"g", "E", "E_predicted"});
    for (const auto& p : curve.points) t.row({p.g, p.energy, p.predicted});
    std::string verdict;
    if (curve.points.size() == 1)
        verdict = "E=" + fmt(curve.points[0].energy) + " -g^2=" + fmt(curve.points[0].predicted);
    else
        verdict = "slope=" + fmt(curve.slope) + " max|E+g^2|/g^3=" + fmt(curve.fitted_c);
    emit(c, t, verdict, out);
    return 0;
}

inline int cmd_shift(const ExperimentConfig& c, std::ostream& out) {
    const cplx z0 = std::polar(1.0, parse_angle(c.z0_angle));
    const std::vector<double> entries = parse_list(c.phi, "phi");
    CVector phi(Eigen::Index(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) phi[Eigen::Index(i)] = entries[i];
    if (c.n < 2 || c.m < 0) fail(ErrorKind::Usage, "need n >= 2 and m >= 0");
    const ShiftVirtualLevel lvl = build_shift_virtual_level(z0, phi, std::size_t(c.n), std::size_t(c.m));
    CsvTable t({"i", "psi_re", "psi_im"});
    for (Eigen::Index i = 0; i < lvl.psi.size(); ++i) t.row({double(i + 1), lvl.psi[i].real(), lvl.psi[i].imag()});
    emit(c, t,
         "virtual level at z0=" + fmt(z0.real()) + (z0.imag() < 0 ? "" : "+") + fmt(z0.imag()) + "i residual=" +
             fmt(lvl.residual) + " j*=" + std::to_string(lvl.j_star) +
             " virtual_space_dim=" + std::to_string(lvl.virtual_space_dim),
         out);
    return 0;
}

inline int cmd_embedded(const ExperimentConfig& c, std::ostream& out) {
    EmbeddedOptions o;
    o.sweep.threads = thread_cap(c);
    const EmbeddedFamily f = embedded_family_check(c.zeta0, c.family, o);
    CsvTable t({"j", "zeta_re", "zeta_im", "residual"});
    for (const auto& s : f.samples) t.row({double(s.j), s.zeta.real(), s.zeta.imag(), s.residual});
    const std::string verdict = (f.diverges && f.monotone ? "diverges" : "no divergence detected") +
                                std::string(" (monotone=") + (f.monotone ? "yes" : "no") +
                                " decades=" + fmt(f.decades) + " alpha≈" + fmt(f.sweep.alpha) + ")";
    emit(c, t, verdict, out);
    auto j = report_json(f.sweep);
    j["monotone"] = f.monotone;
    j["norms"] = nlohmann::ordered_json::array();
    for (const auto& p : f.sweep.norms) j["norms"].push_back({{"radius", fmt(p.radius)}, {"norm", fmt(p.norm)}});
    write_report(c, j);
    return 0;
}

inline int cmd_critical(const ExperimentConfig& c, std::ostream& out) {
    FormGeometry geo = FormGeometry::Line;
    if (c.geometry == "radial3d") geo = FormGeometry::Radial3D;
    else if (c.geometry != "line") fail(ErrorKind::Usage, "unknown geometry '" + c.geometry + "'");
    const DichotomyCheck d = criticality_dichotomy(geo, parse_potential(c.potential), c.R, c.h, c.K, c.jmax);
    CsvTable t({"j", "lambda", "sup_dist_to_limit"});
    for (const auto& row : d.at_r.trace) t.row({double(row.j), row.lambda, row.sup_dist_to_limit});
    std::string verdict(to_string(d.at_r.verdict));
    if (d.at_r.verdict == Dichotomy::WeightedGap)
        verdict += " (w=c<x>^-4, c=" + fmt(d.at_r.weight_c) + " margin=" + fmt(d.at_r.margin) + ")";
    if (d.at_r.verdict == Dichotomy::NullState) verdict += " (cauchy_gap=" + fmt(d.at_r.cauchy_gap) + ")";
    verdict += d.stable ? ", stable under R-doubling" : ", not stable under R-doubling";
    emit(c, t, verdict, out);
    nlohmann::ordered_json j;
    j["verdict"] = std::string(to_string(d.at_r.verdict));
    j["verdict_doubled"] = std::string(to_string(d.at_2r.verdict));
    j["stable"] = d.stable;
    j["weight_c"] = fmt(d.at_r.weight_c);
    j["margin"] = fmt(d.at_r.margin);
    j["cauchy_gap"] = fmt(d.at_r.cauchy_gap);
    write_report(c, j);
    return 0;
}

inline CMatrix read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Usage, "cannot open matrix file " + path);
    std::vector<std::vector<cplx>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<cplx> row;
        cplx v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof()) fail(ErrorKind::Usage, "matrix file: bad entry in '" + line + "'");
        rows.push_back(std::move(row));
    }
    const auto n = Eigen::Index(rows.size());
    CMatrix m = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (Eigen::Index(rows[std::size_t(i)].size()) != n) fail(ErrorKind::Usage, "matrix file: matrix must be square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[std::size_t(i)][std::size_t(j)];
    }
    return m;
}

inline int cmd_nullity(const ExperimentConfig& c, std::ostream& out) {
    const int sources = int(!c.matrix.empty()) + int(c.jordan > 0) + int(c.planted_n > 0);
    if (sources != 1) fail(ErrorKind::Usage, "give exactly one of --matrix, --jordan, --planted-n");
    CMatrix m;
    if (!c.matrix.empty()) {
        m = read_matrix(c.matrix);
    } else if (c.jordan > 0) {
        m = CMatrix::Zero(c.jordan, c.jordan);
        for (int i = 0; i + 1 < c.jordan; ++i) m(i, i + 1) = 1.0;
    } else {
        if (c.planted_k < 0 || c.planted_k > c.planted_n) fail(ErrorKind::Usage, "need 0 <= planted-k <= planted-n");
        std::mt19937_64 rng(c.seed);
        m = acceptance::planted_nullity_matrix(c.planted_n, c.planted_k, rng);
    }
    const NullityResult r = matrix_nullity_by_perturbation(m, c.trials, c.seed);
    CsvTable t({"rank", "best_det_over_threshold"});
    for (std::size_t k = 0; k < r.best_det.size(); ++k) t.row({double(k), r.best_det[k]});
    const bool found = r.nullity <= std::size_t(m.rows());
    emit(c, t,
         (found ? "nullity=" + std::to_string(r.nullity) : std::string("nullity not found")) +
             " svd_nullity=" + std::to_string(r.svd_nullity),
         out);
    return 0;
}

inline int cmd_suite(const ExperimentConfig& c, std::ostream& out) {
    const int total = int(acceptance::criteria().size());
    if (c.only < 0 || c.only > total) fail(ErrorKind::Usage, "--only must lie in [0, " + std::to_string(total) + "]");
    bool all = true;
    for (int id = 1; id <= total; ++id) {
        if (c.only && id != c.only) continue;
        const acceptance::Outcome o = acceptance::run_criterion(id);
        all = all && o.pass;
        out << acceptance::format_line(o) << '\n' << std::flush;
    }
    return all ? 0 : 1;
}

// --------------------------------------------------------------------- run

inline bool is_config_error(ErrorKind k) {
    return k == ErrorKind::Usage || k == ErrorKind::InvalidInput || k == ErrorKind::Unsupported ||
           k == ErrorKind::BranchAmbiguity;
}

inline int report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    nlohmann::ordered_json j;
    j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    err << j.dump() << '\n';
    return code;
}

/// Exit codes: 0 success, 1 computational failure, 2 usage or config error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig c = parse_arguments(args);
        if (c.command == "kernel") return cmd_kernel(c, out);
        if (c.command == "jost") return cmd_jost(c, out);
        if (c.command == "sweep") return cmd_sweep(c, out);
        if (c.command == "bifurcate") return cmd_bifurcate(c, out);
        if (c.command == "shift") return cmd_shift(c, out);
        if (c.command == "embedded") return cmd_embedded(c, out);
        if (c.command == "critical") return cmd_critical(c, out);
        if (c.command == "nullity") return cmd_nullity(c, out);
        return cmd_suite(c, out);
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const Error& e) {
        return report_error(err, std::string(to_string(e.kind())), e.what(), is_config_error(e.kind()) ? 2 : 1);
    } catch (const std::exception& e) {
        return report_error(err, "internal", e.what(), 1);
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

} // namespace virtlev::cli
