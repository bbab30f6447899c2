#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "strata/atmosphere.hpp"
#include "strata/errors.hpp"
#include "strata/fv_solver.hpp"
#include "strata/hyperbolic_core.hpp"
#include "strata/parallel.hpp"
#include "strata/params.hpp"
#include "strata/thermo.hpp"
#include "strata/transport.hpp"

namespace strata::cli {

namespace {

// Invalid command line or configuration file.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

const std::vector<std::string> kCommands = {"coeffs", "rays", "jacobian", "break", "solve", "sweep", "verify"};
const std::vector<std::string> kTasks = {"coeffs", "rays", "jacobian", "break", "solve"};

struct RawOptions {
    std::string command;
    std::string alpha = "0.35", beta = "0.06", gamma = "1.01", theta = "0.1", omega = "0.1", epsilon = "0.01";
    std::string t_start = "0", t_eval = "1.4", t_max = "50";
    std::string n_eta = "4097", n_cells = "512";
    std::string xi_min = "-1", xi_max = "pi+3";
    std::string support = "0,pi";
    std::string mode = "paper-exact", damping = "corrected";
    bool compare = false, paper_jacobian = false, quadratic_only = false, no_forcing = false, no_damping = false;
    std::string order = "1", cfl = "0.45", boundary = "outflow";
    std::string samples = "15", tol = "1e-10", snapshots, task = "break", threads = "0";
    std::string out;
};

struct Config {
    std::string command;
    std::vector<double> alpha, beta, gamma, theta, omega, epsilon;
    double t_start = 0, t_eval = 1.4, t_max = 50;
    std::size_t n_eta = 4097, n_cells = 512;
    double xi_min = -1, xi_max = 0;
    double support_lo = 0, support_hi = 0;
    CoefficientModel model;
    bool compare = false, paper_jacobian = false;
    Reconstruction reconstruction = Reconstruction::first_order;
    double cfl = 0.45;
    Boundary boundary = Boundary::outflow;
    std::size_t samples = 15;
    double tol = 1e-10;
    std::vector<double> snapshots;
    std::string task = "break";
    unsigned threads = 0;
    std::string out;
    RawOptions raw;
};

struct Run {
    GasParams g;
    AtmosphereParams ap;
    AdmissibleRun admissible;
    std::vector<std::pair<std::string, double>> swept;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// ---------------------------------------------------------------- parsing

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) parts.push_back("");
    return parts;
}

double parse_plain(const std::string& text, const std::string& what) {
    std::istringstream is(text);
    is.imbue(std::locale::classic());
    double v = 0;
    is >> v;
    if (is.fail() || !is.eof()) throw ConfigError(what + ": cannot parse '" + text + "' as a number");
    return v;
}

// Accepts plain numbers and the forms pi, k*pi, pi/k, k*pi/m, x+pi, pi+x.
double parse_value(const std::string& raw, const std::string& what) {
    const std::string text = trim(raw);
    if (text.empty()) throw ConfigError(what + ": empty value");
    const auto plus = text.find('+', 1);
    if (plus != std::string::npos && text[plus - 1] != 'e' && text[plus - 1] != 'E')
        return parse_value(text.substr(0, plus), what) + parse_value(text.substr(plus + 1), what);
    const auto pi_pos = text.find("pi");
    if (pi_pos == std::string::npos) return parse_plain(text, what);
    double factor = 1.0, divisor = 1.0;
    const std::string before = text.substr(0, pi_pos);
    const std::string after = text.substr(pi_pos + 2);
    if (!before.empty()) {
        if (before.back() != '*') throw ConfigError(what + ": cannot parse '" + text + "'");
        factor = parse_plain(before.substr(0, before.size() - 1), what);
    }
    if (!after.empty()) {
        if (after.front() != '/') throw ConfigError(what + ": cannot parse '" + text + "'");
        divisor = parse_plain(after.substr(1), what);
    }
    return factor * std::numbers::pi / divisor;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_value(part, what));
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    const double v = parse_plain(trim(text), what);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) throw ConfigError(what + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
}

// Long option names that take a value, and those that are boolean flags.
const std::vector<std::string> kValueKeys = {
    "alpha", "beta",   "gamma",   "theta", "omega", "epsilon", "t-start", "t-eval",    "t-max", "n-eta",
    "n-cells", "xi-min", "xi-max", "support", "mode", "damping", "order", "cfl",    "boundary", "samples",
    "tol",   "snapshots", "task", "threads", "out"};
const std::vector<std::string> kFlagKeys = {"compare", "paper-jacobian", "quadratic-only", "no-forcing",
                                            "no-damping"};

bool parse_bool(const std::string& text, const std::string& key) {
    static const std::set<std::string> yes = {"1", "true", "on", "yes"};
    static const std::set<std::string> no = {"0", "false", "off", "no"};
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (yes.count(t)) return true;
    if (no.count(t)) return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

// Translates a key=value file into command-line arguments placed before the
// real ones, so explicit flags take precedence.
std::vector<std::string> config_file_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (std::find(kValueKeys.begin(), kValueKeys.end(), key) != kValueKeys.end()) {
            args.push_back("--" + key);
            args.push_back(value);
        } else if (std::find(kFlagKeys.begin(), kFlagKeys.end(), key) != kFlagKeys.end()) {
            args.push_back("--" + key + "=" + (parse_bool(value, key) ? "true" : "false"));
        } else {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
        }
    }
    return args;
}

Config resolve(const RawOptions& r) {
    Config c;
    c.raw = r;
    c.command = r.command;
    c.alpha = parse_list(r.alpha, "--alpha");
    c.beta = parse_list(r.beta, "--beta");
    c.gamma = parse_list(r.gamma, "--gamma");
    c.theta = parse_list(r.theta, "--theta");
    c.omega = parse_list(r.omega, "--omega");
    c.epsilon = parse_list(r.epsilon, "--epsilon");
    c.t_start = parse_value(r.t_start, "--t-start");
    c.t_eval = parse_value(r.t_eval, "--t-eval");
    c.t_max = parse_value(r.t_max, "--t-max");
    c.n_eta = parse_count(r.n_eta, "--n-eta");
    c.n_cells = parse_count(r.n_cells, "--n-cells");
    c.xi_min = parse_value(r.xi_min, "--xi-min");
    c.xi_max = parse_value(r.xi_max, "--xi-max");
    const auto support = parse_list(r.support, "--support");
    if (support.size() != 2) throw ConfigError("--support: expected two values lo,hi");
    c.support_lo = support[0];
    c.support_hi = support[1];
    try {
        c.model.mode = parse_coefficient_mode(r.mode);
        c.model.damping_form = parse_damping_form(r.damping);
        c.boundary = parse_boundary(r.boundary);
        c.reconstruction = parse_reconstruction(r.order);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    c.model.cubic = !r.quadratic_only;
    c.model.forcing = !r.no_forcing;
    c.model.damping = !r.no_damping;
    c.compare = r.compare;
    c.paper_jacobian = r.paper_jacobian;
    c.cfl = parse_value(r.cfl, "--cfl");
    c.samples = parse_count(r.samples, "--samples");
    c.tol = parse_value(r.tol, "--tol");
    if (!trim(r.snapshots).empty()) c.snapshots = parse_list(r.snapshots, "--snapshots");
    c.task = r.task;
    c.threads = static_cast<unsigned>(parse_count(r.threads, "--threads"));
    c.out = r.out;

    if (std::find(kTasks.begin(), kTasks.end(), c.task) == kTasks.end())
        throw ConfigError("--task: expected one of coeffs, rays, jacobian, break, solve");
    if (!(c.t_eval >= c.t_start)) throw ConfigError("t-eval must satisfy t-eval >= t-start");
    if (!(c.t_max > c.t_start)) throw ConfigError("t-max must satisfy t-max > t-start");
    if (c.n_eta < 5) throw ConfigError("n-eta must be at least 5");
    if (c.n_cells < 16) throw ConfigError("n-cells must be at least 16");
    if (!(c.xi_max > c.xi_min)) throw ConfigError("xi window must satisfy xi-min < xi-max");
    if (!(c.support_hi > c.support_lo)) throw ConfigError("support must satisfy lo < hi");
    if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("cfl must satisfy 0 < cfl <= 1");
    if (c.samples < 2) throw ConfigError("samples must be at least 2");
    if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
    for (double s : c.snapshots)
        if (s < c.t_start) throw ConfigError("snapshot times must not precede t-start");
    if (c.snapshots.empty()) c.snapshots.push_back(c.t_eval);
    return c;
}

std::vector<Run> build_runs(const Config& c) {
    std::vector<Run> runs;
    const std::vector<std::pair<std::string, const std::vector<double>*>> axes = {
        {"alpha", &c.alpha}, {"beta", &c.beta},   {"gamma", &c.gamma},
        {"theta", &c.theta}, {"omega", &c.omega}, {"epsilon", &c.epsilon}};
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        Run run;
        run.g.alpha = c.alpha[idx[0]];
        run.g.beta = c.beta[idx[1]];
        run.g.gamma = c.gamma[idx[2]];
        run.ap.theta = c.theta[idx[3]];
        run.ap.omega = c.omega[idx[4]];
        run.g.epsilon = c.epsilon[idx[5]];
        for (std::size_t a = 0; a < axes.size(); ++a)
            if (axes[a].second->size() > 1) run.swept.emplace_back(axes[a].first, (*axes[a].second)[idx[a]]);
        std::ostringstream label;
        for (const auto& [k, v] : run.swept) label << " " << k << "=" << format_number(v);
        try {
            run.admissible = validate_run(run.g, run.ap);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("run validation failed") + (label.str().empty() ? "" : " (") +
                              trim(label.str()) + (label.str().empty() ? "" : ")") + ": " + e.what());
        }
        runs.push_back(std::move(run));
        // Odometer over the axes, last axis fastest.
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].second->size()) break;
            idx[a] = 0;
            if (a == 0) return runs;
        }
        if (axes.empty()) return runs;
    }
}

// ---------------------------------------------------------------- output

std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
    return s;
}

std::string metadata_header(const Config& c) {
    std::ostringstream os;
    os << "# strata " << c.command << "\n";
    os << "# alpha=" << join_numbers(c.alpha) << "\n";
    os << "# beta=" << join_numbers(c.beta) << "\n";
    os << "# gamma=" << join_numbers(c.gamma) << "\n";
    os << "# theta=" << join_numbers(c.theta) << "\n";
    os << "# omega=" << join_numbers(c.omega) << "\n";
    os << "# epsilon=" << join_numbers(c.epsilon) << "\n";
    os << "# t-start=" << format_number(c.t_start) << "\n";
    os << "# t-eval=" << format_number(c.t_eval) << "\n";
    os << "# t-max=" << format_number(c.t_max) << "\n";
    os << "# n-eta=" << c.n_eta << "\n";
    os << "# n-cells=" << c.n_cells << "\n";
    os << "# xi-min=" << format_number(c.xi_min) << "\n";
    os << "# xi-max=" << format_number(c.xi_max) << "\n";
    os << "# support=" << format_number(c.support_lo) << "," << format_number(c.support_hi) << "\n";
    os << "# initial-data=sin(eta) on support, 0 elsewhere\n";
    os << "# mode=" << to_string(c.model.mode) << "\n";
    os << "# damping=" << to_string(c.model.damping_form) << "\n";
    os << "# cubic=" << (c.model.cubic ? "on" : "off") << "\n";
    os << "# forcing=" << (c.model.forcing ? "on" : "off") << "\n";
    os << "# damping-term=" << (c.model.damping ? "on" : "off") << "\n";
    os << "# compare=" << (c.compare ? "on" : "off") << "\n";
    os << "# paper-jacobian=" << (c.paper_jacobian ? "on" : "off") << "\n";
    os << "# order=" << (c.reconstruction == Reconstruction::first_order ? 1 : 2) << "\n";
    os << "# cfl=" << format_number(c.cfl) << "\n";
    os << "# boundary=" << to_string(c.boundary) << "\n";
    os << "# samples=" << c.samples << "\n";
    os << "# tol=" << format_number(c.tol) << "\n";
    os << "# snapshots=" << join_numbers(c.snapshots) << "\n";
    if (c.command == "sweep") os << "# task=" << c.task << "\n";
    os << "# note: paper-exact B carries a (gamma+1) factor on its alpha*beta term that lambda-derived B omits\n";
    os << "# note: corrected damping uses (1+omega t)^(theta/omega) - beta; paper-verbatim uses (1+omega t)^theta - "
          "beta\n";
    os << "# note: t0_paper is the theta=omega closed formula; t0_general solves Gamma(t) = (gamma+1) epsilon/2 "
          "with the full profile dependence\n";
    return os.str();
}

void write_csv_rows(std::ostream& os, const Table& t, const std::vector<std::pair<std::string, double>>& prefix,
                    bool with_header) {
    if (with_header) {
        bool first = true;
        for (const auto& [k, v] : prefix) {
            os << (first ? "" : ",") << k;
            first = false;
        }
        for (const auto& h : t.header) {
            os << (first ? "" : ",") << h;
            first = false;
        }
        os << "\n";
    }
    for (const auto& row : t.rows) {
        bool first = true;
        for (const auto& [k, v] : prefix) {
            os << (first ? "" : ",") << format_number(v);
            first = false;
        }
        for (const auto& cell : row) {
            os << (first ? "" : ",") << cell;
            first = false;
        }
        os << "\n";
    }
}

// ---------------------------------------------------------------- tasks

InitialProfile profile_for(const Config& c) { return sine_profile(c.support_lo, c.support_hi); }

Table coeffs_table(const Config& c, const Run& run) {
    Table t;
    t.header = {"t", "A", "B", "g", "Gamma", "Gamma_hat", "Omega", "Lambda", "chi"};
    if (c.compare) {
        const std::string alt = c.model.mode == CoefficientMode::paper_exact ? "lambda_derived" : "paper_exact";
        for (const std::string h : {"A_", "B_", "g_"}) t.header.push_back(h + alt);
        t.header.push_back("B_discrepancy");
    }
    CoefficientModel alt_model = c.model;
    alt_model.mode =
        c.model.mode == CoefficientMode::paper_exact ? CoefficientMode::lambda_derived : CoefficientMode::paper_exact;
    for (std::size_t i = 0; i < c.samples; ++i) {
        const double time = c.t_start + (c.t_eval - c.t_start) * static_cast<double>(i) / (c.samples - 1);
        const PhaseState ps = phase_closed_form(run.ap, time);
        const BackgroundProfile bp = profiles(run.ap, ps.x3);
        const double norm = ps.grad_phi.norm();
        const TransportCoeffs tc = coeffs(run.g, run.ap, time, c.model);
        std::vector<std::string> row = {format_number(time),
                                        format_number(tc.A),
                                        format_number(tc.B),
                                        format_number(tc.g),
                                        format_number(capital_gamma(run.g, bp.rho0, bp.a0, norm)),
                                        format_number(gamma_hat(run.g)),
                                        format_number(omega_param(run.g, bp.rho0, bp.a0)),
                                        format_number(lambda_param(run.g, bp.rho0, bp.a0, norm)),
                                        format_number(chi(run.g, run.ap, time))};
        if (c.compare) {
            const TransportCoeffs alt = coeffs(run.g, run.ap, time, alt_model);
            row.push_back(format_number(alt.A));
            row.push_back(format_number(alt.B));
            row.push_back(format_number(alt.g));
            row.push_back(format_number(tc.B - alt.B));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table rays_table(const Config& c, const Run& run) {
    Table t;
    t.header = {"t", "x3", "grad_phi3", "x3_closed", "grad_phi3_closed", "rel_error"};
    const double dt = c.t_eval > 0.0 ? c.t_eval / static_cast<double>(c.samples - 1) : 1.0;
    const auto path = trace_ray(run.ap, c.t_eval, dt, c.tol);
    auto rel = [](double v, double ref) {
        const double d = std::abs(v - ref);
        return ref == 0.0 ? d : d / std::abs(ref);
    };
    for (const auto& ps : path) {
        const PhaseState cf = phase_closed_form(run.ap, ps.t);
        const double err = std::max(rel(ps.x3, cf.x3), rel(ps.grad_phi(2), cf.grad_phi(2)));
        t.rows.push_back({format_number(ps.t), format_number(ps.x3), format_number(ps.grad_phi(2)),
                          format_number(cf.x3), format_number(cf.grad_phi(2)), format_number(err)});
    }
    return t;
}

Table jacobian_table(const Config& c, const Run& run, unsigned threads) {
    Table t;
    t.header = {"eta", "xi", "sigma", "jac_variational"};
    if (c.paper_jacobian) {
        t.header.push_back("jac_paper_general");
        t.header.push_back("jac_paper_theta0");
        t.header.push_back("jac_paper_omega0");
    }
    CharacteristicBundle b = make_bundle(profile_for(c), c.n_eta, c.t_start, true);
    advance_characteristics(b, make_provider(run.g, run.ap, c.model), c.t_eval, c.tol, threads);
    const double elapsed = c.t_eval - c.t_start;
    for (std::size_t i = 0; i < b.eta.size(); ++i) {
        std::vector<std::string> row = {format_number(b.eta[i]), format_number(b.xi[i]), format_number(b.sigma[i]),
                                        format_number(b.jac[i])};
        if (c.paper_jacobian) {
            row.push_back(format_number(jacobian_paper_general(b.eta[i], elapsed, run.g, run.ap)));
            row.push_back(format_number(jacobian_paper_theta0(b.eta[i], elapsed, run.g, run.ap)));
            row.push_back(format_number(jacobian_paper_omega0(b.eta[i], elapsed, run.g, run.ap)));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table break_table(const Config& c, const Run& run, unsigned threads, std::vector<std::string>& warnings) {
    Table t;
    t.header = {"t_b", "eta_b", "at_grid_boundary", "min_jac_at_t_max", "t0_paper", "t0_general"};
    BreakingOptions opt;
    opt.n_eta = c.n_eta;
    opt.tol = c.tol;
    opt.threads = threads;
    const BreakingResult br = breaking_time(make_provider(run.g, run.ap, c.model), profile_for(c), c.t_start,
                                            c.t_max, opt);
    std::string t0p;
    if (run.ap.theta == run.ap.omega && run.g.alpha > 0.0 && run.ap.omega > 0.0)
        t0p = format_number(t0_paper(run.g, run.ap));
    const auto root = gamma_root_general(run.g, run.ap, run.g.epsilon);
    const std::string t0g = root ? format_number(root->t) : "none";
    if (br.t_break) {
        if (br.at_grid_boundary)
            warnings.push_back("warning: minimizing label eta=" + format_number(br.eta) +
                               " lies at the edge of the label grid; breaking may be resolution limited");
        t.rows.push_back({format_number(*br.t_break), format_number(br.eta), br.at_grid_boundary ? "1" : "0", "",
                          t0p, t0g});
    } else {
        t.rows.push_back({"none", "", "0", format_number(br.min_jac_at_t_max), t0p, t0g});
    }
    return t;
}

Table solve_table(const Config& c, const Run& run, unsigned threads) {
    Table t;
    t.header = {"t", "xi", "sigma", "sigma_characteristics", "total_variation"};
    const InitialProfile profile = profile_for(c);
    const CoefficientProvider provider = make_provider(run.g, run.ap, c.model);
    SolverConfig cfg;
    cfg.cfl = c.cfl;
    cfg.boundary = c.boundary;
    cfg.reconstruction = c.reconstruction;
    const AmplitudeField field = make_field(profile, c.xi_min, c.xi_max, c.n_cells, c.t_start);
    const auto snaps = solve(field, provider, cfg, c.snapshots);

    CharacteristicBundle bundle = make_bundle(profile, c.n_eta, c.t_start, true);
    for (const auto& snap : snaps) {
        advance_characteristics(bundle, provider, snap.t, c.tol, threads);
        const auto exact = sample_characteristics(bundle, snap.xi);
        for (std::size_t i = 0; i < snap.xi.size(); ++i) {
            t.rows.push_back({format_number(snap.t), format_number(snap.xi[i]), format_number(snap.sigma[i]),
                              exact ? format_number((*exact)[i]) : "", format_number(snap.total_variation)});
        }
    }
    return t;
}

Table run_task(const std::string& task, const Config& c, const Run& run, unsigned threads,
               std::vector<std::string>& warnings) {
    if (task == "coeffs") return coeffs_table(c, run);
    if (task == "rays") return rays_table(c, run);
    if (task == "jacobian") return jacobian_table(c, run, threads);
    if (task == "break") return break_table(c, run, threads, warnings);
    return solve_table(c, run, threads);
}

// ---------------------------------------------------------------- verify

struct Check {
    std::string name;
    double value;
    double reference;
    double residual;
    double tolerance;
    bool informational = false;
};

double rel_residual(double v, double ref) { return std::abs(v - ref) / std::max(1.0, std::abs(ref)); }

std::vector<Check> verify_checks(const Config& c, const Run& run) {
    std::vector<Check> out;
    const GasParams& g = run.g;
    const PhaseState ps = phase_closed_form(run.ap, c.t_eval);
    const BackgroundProfile bp = profiles(run.ap, ps.x3);
    const ThermoState st = state_from_density_and_sound_speed(g, bp.rho0, bp.a0);
    const Vec3 gp = ps.grad_phi;
    const double norm = gp.norm();
    const SystemMatrices m = build_matrices(g, st);
    const EigenPair ep = acoustic_eigenpair(m, gp);
    const MatrixGradients an = analytic_gradients(m.jet);

    const double gnum = gamma_numeric(ep, an, gp);
    const double gcf = capital_gamma(g, bp.rho0, bp.a0, norm);
    out.push_back({"gamma_numeric_vs_closed_form", gnum, gcf, rel_residual(gnum, gcf), 1e-10});

    const Mat5 C = characteristic_matrix(m, gp);
    const double eig_res = std::max((C * ep.r - ep.speed * ep.r).norm(),
                                    (ep.l.transpose() * C - ep.speed * ep.l.transpose()).norm()) /
                           std::max(1.0, ep.speed);
    out.push_back({"eigenpair_residual", eig_res, 0.0, eig_res, 1e-12});
    out.push_back({"l_dot_r", ep.l.dot(ep.r), 2.0, std::abs(ep.l.dot(ep.r) - 2.0), 1e-12});

    const auto ev = generic_eigenvalues(m, ps.n);
    const std::array<double, 5> expect = {-bp.a0, 0.0, 0.0, 0.0, bp.a0};
    double ev_res = 0.0;
    for (int i = 0; i < 5; ++i) ev_res = std::max(ev_res, std::abs(ev[i] - expect[i]));
    out.push_back({"eigenvalues_vs_characteristic_polynomial", ev[4], bp.a0, ev_res, 1e-10});

    const MatrixGradients fd = finite_difference_gradients(g, m.U0);
    double fd_res = 0.0;
    for (int k = 0; k < 3; ++k)
        for (int q = 0; q < 5; ++q)
            fd_res = std::max(fd_res, (fd.first[k][q] - an.first[k][q]).cwiseAbs().maxCoeff());
    out.push_back({"analytic_vs_finite_difference_gradients", fd_res, 0.0, fd_res, 1e-6});

    const MNVectors mn = mn_numeric(ep, an, gp, gnum);
    const double orth = std::max(std::abs(mn.M.dot(ep.r)), std::abs(mn.N.dot(ep.r)));
    out.push_back({"M_N_orthogonal_to_r", orth, 0.0, orth, 1e-12});

    const BackgroundGradients bg = stratified_gradients(g, run.ap, ps.x3);
    const AcousticCoefficients tr = acoustic_coefficients(g, st, gp, bg, Truncation::neglect_gamma);
    const double lam_ref = tr.omega_sigma * norm / bp.a0;
    out.push_back({"lambda_numeric_vs_omega_truncated", tr.lambda, lam_ref, rel_residual(tr.lambda, lam_ref), 1e-10});
    out.push_back({"weighted_second_order_source", tr.weighted_source, 6.0 * norm / bp.a0,
                   rel_residual(tr.weighted_source, 6.0 * norm / bp.a0), 1e-10});
    const double e_ref = (6.0 + tr.omega_sigma) * norm / bp.a0;
    out.push_back({"E_numeric_truncated", tr.E, e_ref, rel_residual(tr.E, e_ref), 1e-10});
    Vec5 mref;
    mref << norm * ps.n(0), norm * ps.n(1), norm * ps.n(2), -norm * bp.a0 / bp.rho0, norm * m.jet.a_s;
    const double mres = std::max((tr.mn.M - mref).cwiseAbs().maxCoeff(), (tr.mn.N - mref).cwiseAbs().maxCoeff());
    out.push_back({"M_N_truncated_closed_form", tr.mn.M(4), mref(4), mres, 1e-10});
    const double chi_ref = chi(g, run.ap, c.t_eval);
    out.push_back({"chi_numeric_vs_closed_form", tr.chi, chi_ref, rel_residual(tr.chi, chi_ref), 1e-10});
    const double hyd = hydrostatic_entropy_term(g, run.ap, c.t_eval);
    const double ent = entropy_gradient_term(g, run.ap, c.t_eval);
    out.push_back({"hydrostatic_entropy_term", hyd, ent, rel_residual(hyd, ent), 1e-10});
    const double om_fd = omega_from_sigma(g, bp.rho0, bp.a0);
    const double om_ex = omega_sigma_exact(g, bp.rho0, bp.a0);
    out.push_back({"omega_sigma_finite_difference", om_fd, om_ex, rel_residual(om_fd, om_ex), 1e-6});
    const double om_cf = omega_param(g, bp.rho0, bp.a0);
    out.push_back({"omega_closed_form_vs_sigma_definition", om_cf, om_ex, rel_residual(om_cf, om_ex), 0.0, true});

    const auto path = trace_ray(run.ap, c.t_eval, c.t_eval > 0 ? c.t_eval : 1.0, 1e-10);
    const double x3r = path.back().x3, x3c = ps.x3;
    out.push_back({"trace_ray_vs_closed_form", x3r, x3c, rel_residual(x3r, x3c), 1e-8});

    for (const auto& e : entry_derivative_report(g, st)) {
        const double r = rel_residual(e.analytic, e.finite_difference);
        out.push_back({"entry_" + e.name + "_analytic_vs_fd", e.analytic, e.finite_difference, r,
                       e.name.rfind("d44", 0) == 0 ? 1e-5 : 1e-6});
        out.push_back({"entry_" + e.name + "_printed_vs_fd", e.printed, e.finite_difference,
                       rel_residual(e.printed, e.finite_difference), 0.0, true});
    }
    return out;
}

// ---------------------------------------------------------------- driver

std::string with_run_suffix(const std::string& path, std::size_t i) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    const std::string suffix = "_run" + std::to_string(i);
    return has_ext ? path.substr(0, dot) + suffix + path.substr(dot) : path + suffix;
}

void emit(const Config& c, const std::string& text, std::ostream& out, const std::string& path) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + path + "'");
    f << text;
    if (!f) throw NumericalError("failed writing output file '" + path + "'");
    (void)c;
}

int execute(const Config& c, const std::vector<Run>& runs, std::ostream& out, std::ostream& err) {
    std::vector<std::string> warnings;
    int status = kExitOk;
    if (c.command == "verify") {
        std::ostringstream os;
        os << metadata_header(c);
        os << "check,value,reference,residual,tolerance,status\n";
        bool ok = true;
        for (const auto& ch : verify_checks(c, runs.front())) {
            const bool pass = ch.residual <= ch.tolerance;
            const std::string s = ch.informational ? "info" : (pass ? "pass" : "fail");
            if (!ch.informational && !pass) ok = false;
            os << ch.name << "," << format_number(ch.value) << "," << format_number(ch.reference) << ","
               << format_number(ch.residual) << "," << format_number(ch.tolerance) << "," << s << "\n";
        }
        emit(c, os.str(), out, c.out);
        if (!ok) {
            err << "verify: one or more oracle checks failed\n";
            status = kExitNumerical;
        }
        return status;
    }

    if (c.command == "sweep") {
        std::vector<std::string> blocks(runs.size());
        std::vector<std::vector<std::string>> run_warnings(runs.size());
        parallel_for(runs.size(), c.threads, [&](std::size_t i) {
            std::ostringstream os;
            os << "# run " << i;
            for (const auto& [k, v] : runs[i].swept) os << " " << k << "=" << format_number(v);
            os << "\n";
            const Table t = run_task(c.task, c, runs[i], 1, run_warnings[i]);
            write_csv_rows(os, t, runs[i].swept, true);
            blocks[i] = os.str();
        });
        std::string text = metadata_header(c);
        for (const auto& b : blocks) text += b;
        for (const auto& w : run_warnings)
            for (const auto& line : w) err << line << "\n";
        emit(c, text, out, c.out);
        return status;
    }

    if (c.command == "solve" && runs.size() > 1 && !c.out.empty()) {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            std::ostringstream os;
            os << metadata_header(c);
            os << "# run " << i;
            for (const auto& [k, v] : runs[i].swept) os << " " << k << "=" << format_number(v);
            os << "\n";
            write_csv_rows(os, solve_table(c, runs[i], c.threads), runs[i].swept, true);
            emit(c, os.str(), out, with_run_suffix(c.out, i));
        }
        return status;
    }

    std::ostringstream os;
    os << metadata_header(c);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const Table t = run_task(c.command, c, runs[i], c.threads, warnings);
        write_csv_rows(os, t, runs[i].swept, i == 0);
    }
    for (const auto& w : warnings) err << w << "\n";
    emit(c, os.str(), out, c.out);
    return status;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("--config requires a file path");
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << v;
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RawOptions raw;
    CLI::App app{"Nonlinear geometric acoustics of a van der Waals gas in a stratified atmosphere"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;

    app.add_option("command", raw.command, "coeffs | rays | jacobian | break | solve | sweep | verify")
        ->required()
        ->check(CLI::IsMember(kCommands));
    app.add_option("--alpha", raw.alpha, "van der Waals attraction constant (comma list sweeps)");
    app.add_option("--beta", raw.beta, "van der Waals covolume constant (comma list sweeps)");
    app.add_option("--gamma", raw.gamma, "specific-heat ratio (comma list sweeps)");
    app.add_option("--theta", raw.theta, "density attenuation rate (comma list sweeps)");
    app.add_option("--omega", raw.omega, "sound-speed attenuation rate (comma list sweeps)");
    app.add_option("--epsilon", raw.epsilon, "amplitude small parameter (comma list sweeps)");
    app.add_option("--t-start", raw.t_start, "anchor time of the initial data");
    app.add_option("--t-eval", raw.t_eval, "evaluation time");
    app.add_option("--t-max", raw.t_max, "search horizon for breaking");
    app.add_option("--n-eta", raw.n_eta, "characteristic labels over the support");
    app.add_option("--n-cells", raw.n_cells, "finite-volume cells");
    app.add_option("--xi-min", raw.xi_min, "left end of the xi window");
    app.add_option("--xi-max", raw.xi_max, "right end of the xi window");
    app.add_option("--support", raw.support, "initial-data support lo,hi (accepts pi, pi/2, k*pi)");
    app.add_option("--mode", raw.mode, "paper-exact | lambda-derived");
    app.add_option("--damping", raw.damping, "corrected | paper-verbatim");
    app.add_flag("--compare", raw.compare, "emit both coefficient modes with a discrepancy column");
    app.add_flag("--paper-jacobian", raw.paper_jacobian, "add the printed closed-form Jacobians");
    app.add_flag("--quadratic-only", raw.quadratic_only, "force the cubic coefficient to zero");
    app.add_flag("--no-forcing", raw.no_forcing, "drop the constant forcing");
    app.add_flag("--no-damping", raw.no_damping, "drop the linear damping term");
    app.add_option("--order", raw.order, "finite-volume order: 1 (first-order) or 2 (minmod)");
    app.add_option("--cfl", raw.cfl, "Courant number");
    app.add_option("--boundary", raw.boundary, "outflow | periodic");
    app.add_option("--samples", raw.samples, "time samples for coeffs and rays");
    app.add_option("--tol", raw.tol, "ODE integrator tolerance");
    app.add_option("--snapshots", raw.snapshots, "comma list of snapshot times for solve");
    app.add_option("--task", raw.task, "task run by sweep: coeffs | rays | jacobian | break | solve");
    app.add_option("--threads", raw.threads, "worker threads (0 = hardware concurrency)");
    app.add_option("--config", config_path, "key=value configuration file (flags override it)");
    app.add_option("--out", raw.out, "output path (default stdout)");

    Config cfg;
    std::vector<Run> runs;
    try {
        std::vector<std::string> full;
        if (const auto path = find_config_path(args)) full = config_file_arguments(*path);
        full.insert(full.end(), args.begin(), args.end());
        std::reverse(full.begin(), full.end());
        app.parse(full);
        cfg = resolve(raw);
        runs = build_runs(cfg);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        return execute(cfg, runs, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "numerical failure (domain invariant violated): " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace strata::cli
