#include "strata/atmosphere.hpp"

#include <cmath>
#include <sstream>

#include "strata/errors.hpp"
#include "strata/ode.hpp"

namespace strata {

namespace {

constexpr double kSmallRate = 1e-10;

}  // namespace

void AtmosphereParams::validate() const {
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("theta must satisfy theta >= 0");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("omega must satisfy omega >= 0");
}

BackgroundProfile profiles(const AtmosphereParams& ap, double x3) {
    return BackgroundProfile{std::exp(-ap.theta * x3), std::exp(-ap.omega * x3)};
}

double front_height(const AtmosphereParams& ap, double t) {
    const double wt = ap.omega * t;
    if (!(1.0 + wt > 0.0)) throw DomainError("front height requires 1 + omega*t > 0");
    if (ap.omega < kSmallRate) return t * (1.0 - wt / 2.0 + wt * wt / 3.0);
    return std::log1p(wt) / ap.omega;
}

PhaseState phase_closed_form(const AtmosphereParams& ap, double t) {
    PhaseState ps;
    ps.t = t;
    ps.x3 = front_height(ap, t);
    ps.grad_phi = Vec3(0.0, 0.0, 1.0 + ap.omega * t);
    ps.n = Vec3(0.0, 0.0, 1.0);
    return ps;
}

std::vector<PhaseState> trace_ray(const AtmosphereParams& ap, double t_end, double dt, double tol) {
    if (!(dt > 0.0)) throw DomainError("trace_ray: dt must be positive");
    if (!(t_end >= 0.0)) throw DomainError("trace_ray: t_end must be nonnegative");
    if (!(tol > 0.0)) throw DomainError("trace_ray: tolerance must be positive");

    // (x1, x2, x3, p1, p2, p3) with p the phase gradient.
    auto rhs = [&ap](const ode::State<6>& s, ode::State<6>& ds, double) {
        const double norm = std::sqrt(s[3] * s[3] + s[4] * s[4] + s[5] * s[5]);
        const double a0 = std::exp(-ap.omega * s[2]);
        for (int i = 0; i < 3; ++i) ds[i] = a0 * s[3 + i] / norm;
        ds[3] = 0.0;
        ds[4] = 0.0;
        ds[5] = ap.omega * norm * a0;
    };

    auto to_phase = [](const ode::State<6>& s, double t) {
        PhaseState ps;
        ps.t = t;
        ps.x3 = s[2];
        ps.grad_phi = Vec3(s[3], s[4], s[5]);
        ps.n = ps.grad_phi.normalized();
        return ps;
    };

    ode::State<6> s{0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
    std::vector<PhaseState> path;
    path.push_back(to_phase(s, 0.0));
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-12));
    double t = 0.0;
    for (std::size_t i = 1; i <= n_steps; ++i) {
        const double t_next = i == n_steps ? t_end : static_cast<double>(i) * dt;
        ode::integrate<6>(rhs, s, t, t_next, tol, "trace_ray");
        t = t_next;
        path.push_back(to_phase(s, t));
    }
    return path;
}

double entropy_gradient_term(const GasParams& g, const AtmosphereParams& ap, double t) {
    const double x3 = front_height(ap, t);
    const BackgroundProfile bp = profiles(ap, x3);
    const double denom = 1.0 - g.beta * bp.rho0;
    if (!(denom > 0.0)) throw DomainError("entropy gradient term: 1 - beta*rho0 must be positive");
    return g.gamma * ap.theta * bp.a0 / (2.0 * denom);
}

double hydrostatic_entropy_term(const GasParams& g, const AtmosphereParams& ap, double t) {
    const double x3 = front_height(ap, t);
    const BackgroundProfile bp = profiles(ap, x3);
    const ThermoState st = state_from_density_and_sound_speed(g, bp.rho0, bp.a0);
    const EosJet j = eos_jet(g, bp.rho0, st.s);
    const double drho = -ap.theta * bp.rho0;
    return (j.a_s / j.ps) * (-bp.a0 * bp.a0 * drho);
}

double chi(const GasParams& g, const AtmosphereParams& ap, double t, double mean_curvature) {
    const double x3 = front_height(ap, t);
    const double a0 = profiles(ap, x3).a0;
    return 0.5 * (a0 * mean_curvature + entropy_gradient_term(g, ap, t));
}

BackgroundGradients stratified_gradients(const GasParams& g, const AtmosphereParams& ap, double x3) {
    const BackgroundProfile bp = profiles(ap, x3);
    const ThermoState st = state_from_density_and_sound_speed(g, bp.rho0, bp.a0);
    const EosJet j = eos_jet(g, bp.rho0, st.s);
    const double drho = -ap.theta * bp.rho0;
    BackgroundGradients bg;
    bg.grad_rho = Vec3(0.0, 0.0, drho);
    bg.grad_s = Vec3(0.0, 0.0, -bp.a0 * bp.a0 * drho / j.ps);
    return bg;
}

}  // namespace strata
