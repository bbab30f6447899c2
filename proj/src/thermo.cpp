#include "strata/thermo.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "strata/errors.hpp"

namespace strata {

namespace {

void require_covolume(const GasParams& g, double rho, const char* op) {
    if (!(rho > 0.0)) {
        std::ostringstream msg;
        msg << op << ": density must be positive (rho=" << rho << ")";
        throw DomainError(msg.str());
    }
    if (g.beta * rho >= 1.0) {
        std::ostringstream msg;
        msg << op << ": covolume exclusion violated (beta*rho=" << g.beta * rho << " >= 1)";
        throw DomainError(msg.str());
    }
}

void require_positive_sound_speed(double a2, const char* op) {
    if (!(a2 > 0.0) || !std::isfinite(a2)) {
        std::ostringstream msg;
        msg << op << ": loss of hyperbolicity (a^2=" << a2 << " <= 0)";
        throw DomainError(msg.str());
    }
}

}  // namespace

void GasParams::validate() const {
    if (!(gamma > 1.0 && gamma <= 5.0 / 3.0))
        throw DomainError("gamma must satisfy 1 < gamma <= 5/3");
    if (!(alpha >= 0.0)) throw DomainError("alpha must satisfy alpha >= 0");
    if (!(beta >= 0.0)) throw DomainError("beta must satisfy beta >= 0");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must satisfy epsilon > 0");
    if (!(gas_constant > 0.0)) throw DomainError("gas constant must be positive");
    if (!(cv > 0.0)) throw DomainError("cv must be positive");
}

double pressure(const GasParams& g, double rho, double temperature) {
    require_covolume(g, rho, "pressure");
    if (!(temperature > 0.0)) throw DomainError("pressure: temperature must be positive");
    return rho * g.gas_constant * temperature / (1.0 - g.beta * rho) - g.alpha * rho * rho;
}

double sound_speed(const GasParams& g, double rho, double p) {
    require_covolume(g, rho, "sound_speed");
    const double a2 =
        g.gamma * (p + g.alpha * rho * rho) / (rho * (1.0 - g.beta * rho)) - 2.0 * rho * g.alpha;
    require_positive_sound_speed(a2, "sound_speed");
    return std::sqrt(a2);
}

double entropy_relation(const GasParams& g, double rho, double p) {
    require_covolume(g, rho, "entropy_relation");
    const double thermal = p + g.alpha * rho * rho;
    if (!(thermal > 0.0)) throw DomainError("entropy_relation: p + alpha*rho^2 must be positive");
    const double log_arg = std::log(thermal) + g.gamma * std::log1p(-g.beta * rho) - g.gamma * std::log(rho);
    return g.s_ref + g.cv * log_arg;
}

double pressure_from_sound_speed(const GasParams& g, double rho, double a) {
    require_covolume(g, rho, "pressure_from_sound_speed");
    if (!(a > 0.0)) throw DomainError("pressure_from_sound_speed: sound speed must be positive");
    const double thermal = (a * a + 2.0 * g.alpha * rho) * rho * (1.0 - g.beta * rho) / g.gamma;
    return thermal - g.alpha * rho * rho;
}

ThermoState state_from_density_and_sound_speed(const GasParams& g, double rho, double a) {
    ThermoState st;
    st.rho = rho;
    st.a = a;
    st.p = pressure_from_sound_speed(g, rho, a);
    st.s = entropy_relation(g, rho, st.p);
    return st;
}

ThermoState state_from_density_and_pressure(const GasParams& g, double rho, double p) {
    ThermoState st;
    st.rho = rho;
    st.p = p;
    st.a = sound_speed(g, rho, p);
    st.s = entropy_relation(g, rho, p);
    return st;
}

double capital_gamma(const GasParams& g, double rho0, double a0, double grad_phi_norm) {
    require_covolume(g, rho0, "capital_gamma");
    if (!(a0 > 0.0)) throw DomainError("capital_gamma: sound speed must be positive");
    const double one_m = 1.0 - g.beta * rho0;
    const double bracket =
        1.0 / one_m -
        2.0 * g.alpha * rho0 * (2.0 - g.gamma - 3.0 * g.beta * rho0) / (a0 * a0 * (g.gamma + 1.0) * one_m);
    return 0.5 * (g.gamma + 1.0) * bracket * grad_phi_norm;
}

double gamma_hat(const GasParams& g) { return 0.5 * (g.gamma + 1.0); }

double omega_param(const GasParams& g, double rho0, double a0) {
    require_covolume(g, rho0, "omega_param");
    if (!(a0 > 0.0)) throw DomainError("omega_param: sound speed must be positive");
    const double one_m = 1.0 - g.beta * rho0;
    return -(3.0 * (1.0 + g.gamma) / (2.0 * one_m) -
             3.0 * g.alpha * g.beta * rho0 * rho0 / (one_m * a0 * a0));
}

double lambda_param(const GasParams& g, double rho0, double a0, double grad_phi_norm) {
    require_covolume(g, rho0, "lambda_param");
    if (!(a0 > 0.0)) throw DomainError("lambda_param: sound speed must be positive");
    return -(3.0 * (1.0 + g.gamma) / (2.0 * a0)) * (1.0 + g.beta * rho0) * grad_phi_norm +
           (3.0 * g.alpha * g.beta * rho0 * rho0 / (a0 * a0 * a0)) * grad_phi_norm;
}

EosJet EosJet::gamma_neglected() const {
    EosJet j = *this;
    j.a_r = -a / rho;
    return j;
}

EosJet eos_jet(const GasParams& g, double rho, double s) {
    require_covolume(g, rho, "eos_jet");
    const double one_m = 1.0 - g.beta * rho;
    const double q = rho * one_m;
    const double dq = 1.0 - 2.0 * g.beta * rho;
    const double log_k = (s - g.s_ref) / g.cv;
    const double thermal = std::exp(log_k + g.gamma * std::log(rho) - g.gamma * std::log1p(-g.beta * rho));

    const double h = g.gamma / q;
    const double h1 = -g.gamma * dq / (q * q);
    const double h2 = 2.0 * g.gamma * g.beta / (q * q) + 2.0 * g.gamma * dq * dq / (q * q * q);

    const double cv = g.cv;
    const double a2 = thermal * h - 2.0 * g.alpha * rho;
    require_positive_sound_speed(a2, "eos_jet");
    const double a2_r = thermal * (h * h + h1) - 2.0 * g.alpha;
    const double a2_rr = thermal * (h * h * h + 3.0 * h * h1 + h2);
    const double a2_s = thermal * h / cv;
    const double a2_rs = thermal * (h * h + h1) / cv;
    const double a2_ss = thermal * h / (cv * cv);

    EosJet j;
    j.rho = rho;
    j.s = s;
    j.a = std::sqrt(a2);
    j.a_r = a2_r / (2.0 * j.a);
    j.a_s = a2_s / (2.0 * j.a);
    j.a_rr = (a2_rr - 2.0 * j.a_r * j.a_r) / (2.0 * j.a);
    j.a_rs = (a2_rs - 2.0 * j.a_r * j.a_s) / (2.0 * j.a);
    j.a_ss = (a2_ss - 2.0 * j.a_s * j.a_s) / (2.0 * j.a);

    j.ps = thermal / cv;
    j.ps_r = thermal * h / cv;
    j.ps_s = thermal / (cv * cv);
    j.ps_rr = thermal * (h * h + h1) / cv;
    j.ps_rs = thermal * h / (cv * cv);
    j.ps_ss = thermal / (cv * cv * cv);
    return j;
}

double omega_sigma_exact(const GasParams& g, double rho0, double a0) {
    const ThermoState st = state_from_density_and_sound_speed(g, rho0, a0);
    const EosJet j = eos_jet(g, rho0, st.s);
    return rho0 * rho0 * j.a_rr / j.a + rho0 * j.a_r / j.a - 1.0;
}

double omega_from_sigma(const GasParams& g, double rho0, double a0, double rel_step) {
    const ThermoState st = state_from_density_and_sound_speed(g, rho0, a0);
    const double h = rel_step * rho0;
    auto momentum_speed = [&](double rho) { return eos_jet(g, rho, st.s).a * rho; };
    const double fp = momentum_speed(rho0 + h);
    const double f0 = momentum_speed(rho0);
    const double fm = momentum_speed(rho0 - h);
    const double d1 = (fp - fm) / (2.0 * h);
    const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
    const double dsigma = d2 / rho0 - d1 / (rho0 * rho0);
    return rho0 * rho0 * dsigma / a0;
}

}  // namespace strata
