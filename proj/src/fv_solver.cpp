#include "strata/fv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "strata/errors.hpp"
#include "strata/ode.hpp"

namespace strata {

namespace {

constexpr std::size_t kMinCells = 16;
constexpr std::size_t kMaxSteps = 50'000'000;

double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

std::pair<double, double> field_range(const std::vector<double>& s) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return {*lo, *hi};
}

void require_finite(const std::vector<double>& s, const char* what) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i])) {
            std::ostringstream msg;
            msg << what << ": nonfinite amplitude in cell " << i;
            throw NumericalError(msg.str());
        }
    }
}

// Flux-difference operator -(F_{i+1/2} - F_{i-1/2})/dx.
std::vector<double> transport_rate(const std::vector<double>& s, const TransportCoeffs& c, double dx,
                                   const SolverConfig& cfg) {
    const std::size_t n = s.size();
    constexpr std::size_t g = 2;
    std::vector<double> e(n + 2 * g);
    for (std::size_t i = 0; i < n; ++i) e[i + g] = s[i];
    for (std::size_t k = 0; k < g; ++k) {
        if (cfg.boundary == Boundary::periodic) {
            e[k] = s[n - g + k];
            e[n + g + k] = s[k];
        } else {
            e[k] = s.front();
            e[n + g + k] = s.back();
        }
    }
    std::vector<double> slope(e.size(), 0.0);
    if (cfg.reconstruction == Reconstruction::minmod)
        for (std::size_t i = 1; i + 1 < e.size(); ++i) slope[i] = minmod(e[i] - e[i - 1], e[i + 1] - e[i]);

    std::vector<double> fhat(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const std::size_t left = j + g - 1, right = j + g;
        const double sl = e[left] + 0.5 * slope[left];
        const double sr = e[right] - 0.5 * slope[right];
        const double speed = wave_speed_bound(c, sl, sr);
        fhat[j] = 0.5 * (flux(c, sl) + flux(c, sr)) - 0.5 * speed * (sr - sl);
    }
    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) rate[i] = -(fhat[i + 1] - fhat[i]) / dx;
    return rate;
}

double field_speed(const std::vector<double>& s, const TransportCoeffs& c) {
    const auto [lo, hi] = field_range(s);
    return wave_speed_bound(c, lo, hi);
}

void apply_source(std::vector<double>& s, const SourceMap& m) {
    for (double& v : s) v = m.phi * v + m.psi;
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::outflow ? "outflow" : "periodic"; }

std::string to_string(Reconstruction r) { return r == Reconstruction::first_order ? "first-order" : "minmod"; }

Boundary parse_boundary(const std::string& text) {
    if (text == "outflow") return Boundary::outflow;
    if (text == "periodic") return Boundary::periodic;
    throw DomainError("unknown boundary '" + text + "' (expected outflow or periodic)");
}

Reconstruction parse_reconstruction(const std::string& text) {
    if (text == "first-order" || text == "1") return Reconstruction::first_order;
    if (text == "minmod" || text == "2") return Reconstruction::minmod;
    throw DomainError("unknown reconstruction '" + text + "' (expected first-order or minmod)");
}

void SolverConfig::validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError("cfl must satisfy 0 < cfl <= 1");
    if (!(source_tol > 0.0)) throw DomainError("source tolerance must be positive");
}

void AmplitudeField::validate() const {
    if (sigma.size() < kMinCells) throw DomainError("amplitude field needs at least 16 cells");
    if (!(xi_max > xi_min)) throw DomainError("amplitude field window must satisfy xi_min < xi_max");
    require_finite(sigma, "amplitude field");
}

AmplitudeField make_field(const InitialProfile& profile, double xi_min, double xi_max, std::size_t n_cells,
                          double t) {
    AmplitudeField f;
    f.xi_min = xi_min;
    f.xi_max = xi_max;
    f.t = t;
    f.sigma.assign(n_cells, 0.0);
    f.validate();
    const double dx = f.dx();
    static const double nodes[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    auto gauss = [&](double a, double b) {
        if (!(b > a)) return 0.0;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double sum = 0.0;
        for (int q = 0; q < 3; ++q) sum += weights[q] * profile.value(mid + half * nodes[q]);
        return sum * half;
    };
    for (std::size_t i = 0; i < n_cells; ++i) {
        const double a = xi_min + dx * static_cast<double>(i);
        const double b = a + dx;
        std::vector<double> cuts{a};
        for (double k : {profile.support_min, profile.support_max})
            if (k > a && k < b) cuts.push_back(k);
        cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        double integral = 0.0;
        for (std::size_t q = 0; q + 1 < cuts.size(); ++q) integral += gauss(cuts[q], cuts[q + 1]);
        f.sigma[i] = integral / dx;
    }
    return f;
}

double flux(const TransportCoeffs& c, double s) { return c.A * s * s / 2.0 - c.B * s * s * s / 3.0; }

double flux_speed(const TransportCoeffs& c, double s) { return c.A * s - c.B * s * s; }

double wave_speed_bound(const TransportCoeffs& c, double s_left, double s_right) {
    const double lo = std::min(s_left, s_right), hi = std::max(s_left, s_right);
    double bound = std::max(std::abs(flux_speed(c, lo)), std::abs(flux_speed(c, hi)));
    if (c.B != 0.0) {
        const double inflection = c.A / (2.0 * c.B);
        if (inflection > lo && inflection < hi) bound = std::max(bound, std::abs(flux_speed(c, inflection)));
    }
    return bound;
}

SourceMap source_map(const CoefficientProvider& provider, double t0, double t1, double tol) {
    ode::State<2> x{1.0, 0.0};
    auto rhs = [&provider](const ode::State<2>& s, ode::State<2>& ds, double t) {
        const TransportCoeffs c = provider(t);
        ds[0] = -c.g * s[0];
        ds[1] = -c.g * s[1] - c.c;
    };
    ode::integrate<2>(rhs, x, t0, t1, tol, "source sub-step");
    return SourceMap{x[0], x[1]};
}

double stable_time_step(const AmplitudeField& field, const CoefficientProvider& provider, const SolverConfig& cfg) {
    const double dx = field.dx();
    const double s0 = field_speed(field.sigma, provider(field.t));
    if (!(s0 > 0.0)) {
        // Flat transport at the current state; bound the step by the state
        // reached after a unit source update.
        if (!cfg.sources) return std::numeric_limits<double>::infinity();
    }
    double dt = s0 > 0.0 ? cfg.cfl * dx / s0 : 1.0;
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> probe = field.sigma;
        if (cfg.sources) apply_source(probe, source_map(provider, field.t, field.t + 0.5 * dt, cfg.source_tol));
        double speed = 0.0;
        for (double tt : {field.t, field.t + 0.5 * dt, field.t + dt})
            speed = std::max({speed, field_speed(probe, provider(tt)), field_speed(field.sigma, provider(tt))});
        if (!(speed > 0.0)) return dt;
        const double next = cfg.cfl * dx / speed;
        if (next >= dt) return dt;
        dt = next;
    }
    return dt;
}

AmplitudeField step(const AmplitudeField& field, const CoefficientProvider& provider, const SolverConfig& cfg,
                    double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericalError("time step must be positive and finite");
    const double dx = field.dx();
    const double t = field.t;
    std::vector<double> s = field.sigma;

    if (cfg.sources) apply_source(s, source_map(provider, t, t + 0.5 * dt, cfg.source_tol));

    const TransportCoeffs c0 = provider(t);
    const double courant = dt * field_speed(s, c0) / dx;
    if (courant > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "CFL violation: courant number " << courant << " exceeds 1";
        throw NumericalError(msg.str());
    }
    if (cfg.reconstruction == Reconstruction::first_order) {
        const auto rate = transport_rate(s, c0, dx, cfg);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += dt * rate[i];
    } else {
        const auto rate0 = transport_rate(s, c0, dx, cfg);
        std::vector<double> mid(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) mid[i] = s[i] + 0.5 * dt * rate0[i];
        const TransportCoeffs ch = provider(t + 0.5 * dt);
        const double courant_mid = dt * field_speed(mid, ch) / dx;
        if (courant_mid > 1.0 + 1e-12) {
            std::ostringstream msg;
            msg << "CFL violation: courant number " << courant_mid << " exceeds 1 at the midpoint stage";
            throw NumericalError(msg.str());
        }
        const auto rate1 = transport_rate(mid, ch, dx, cfg);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += dt * rate1[i];
    }

    if (cfg.sources) apply_source(s, source_map(provider, t + 0.5 * dt, t + dt, cfg.source_tol));
    require_finite(s, "finite-volume step");

    AmplitudeField out = field;
    out.sigma = std::move(s);
    out.t = t + dt;
    return out;
}

AmplitudeField step(const AmplitudeField& field, const CoefficientProvider& provider, const SolverConfig& cfg) {
    const double dt = stable_time_step(field, provider, cfg);
    if (!std::isfinite(dt)) {
        AmplitudeField out = field;
        return out;
    }
    return step(field, provider, cfg, dt);
}

double total_variation(const std::vector<double>& sigma) {
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < sigma.size(); ++i) tv += std::abs(sigma[i + 1] - sigma[i]);
    return tv;
}

std::vector<Snapshot> solve(const AmplitudeField& initial, const CoefficientProvider& provider,
                            const SolverConfig& cfg, const std::vector<double>& snapshot_times) {
    cfg.validate();
    initial.validate();
    std::vector<double> times = snapshot_times;
    std::sort(times.begin(), times.end());
    if (!times.empty() && times.front() < initial.t)
        throw DomainError("snapshot times must not precede the initial time");

    std::vector<double> centers(initial.n_cells());
    for (std::size_t i = 0; i < centers.size(); ++i) centers[i] = initial.center(i);

    std::vector<Snapshot> out;
    AmplitudeField f = initial;
    std::size_t steps = 0;
    for (double target : times) {
        while (f.t < target) {
            const double remaining = target - f.t;
            double dt = stable_time_step(f, provider, cfg);
            if (!(dt > 0.0)) throw NumericalError("stable time step collapsed to zero");
            if (dt >= remaining || remaining - dt < 1e-12 * std::max(1.0, std::abs(target))) dt = remaining;
            f = step(f, provider, cfg, dt);
            if (dt == remaining) f.t = target;
            if (++steps > kMaxSteps) throw NumericalError("finite-volume solve exceeded the step budget");
        }
        out.push_back(Snapshot{f.t, centers, f.sigma, total_variation(f.sigma)});
    }
    return out;
}

}  // namespace strata
