#pragma once

namespace strata {

struct GasParams {
    double alpha = 0.35;
    double beta = 0.06;
    double gamma = 1.01;
    double epsilon = 0.01;
    double gas_constant = 1.0;
    double cv = 1.0;
    double s_ref = 0.0;

    // Throws DomainError unless 1 < gamma <= 5/3, alpha, beta >= 0, epsilon > 0,
    // and gas_constant, cv > 0.
    void validate() const;
};

struct ThermoState {
    double rho = 1.0;
    double p = 1.0;
    double s = 0.0;
    double a = 1.0;
};

double pressure(const GasParams& g, double rho, double temperature);
double sound_speed(const GasParams& g, double rho, double p);
double entropy_relation(const GasParams& g, double rho, double p);

// Pressure giving sound speed a at density rho; inverse of sound_speed.
double pressure_from_sound_speed(const GasParams& g, double rho, double a);

// Full state (rho, p, s, a) for a background specified by density and sound speed.
ThermoState state_from_density_and_sound_speed(const GasParams& g, double rho, double a);
ThermoState state_from_density_and_pressure(const GasParams& g, double rho, double p);

double capital_gamma(const GasParams& g, double rho0, double a0, double grad_phi_norm);
double gamma_hat(const GasParams& g);
double omega_param(const GasParams& g, double rho0, double a0);
double lambda_param(const GasParams& g, double rho0, double a0, double grad_phi_norm);

// Omega = (rho^2/a) dSigma/drho at fixed entropy, Sigma = (1/rho) d(a rho)/drho,
// evaluated by central differences of the EOS sound speed.
double omega_from_sigma(const GasParams& g, double rho0, double a0, double rel_step = 1e-4);

// Same quantity from the analytic EOS derivatives.
double omega_sigma_exact(const GasParams& g, double rho0, double a0);

// Derivatives of a(rho, s) and p_s(rho, s) up to second order at one state.
struct EosJet {
    double rho = 0, s = 0, a = 0;
    double a_r = 0, a_s = 0, a_rr = 0, a_rs = 0, a_ss = 0;
    double ps = 0, ps_r = 0, ps_s = 0, ps_rr = 0, ps_rs = 0, ps_ss = 0;

    // Substitutes a_rho -> -a/rho, the value for which Gamma vanishes.
    EosJet gamma_neglected() const;
};

EosJet eos_jet(const GasParams& g, double rho, double s);

}  // namespace strata
