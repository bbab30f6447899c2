#pragma once

#include <optional>
#include <string>

#include "strata/atmosphere.hpp"
#include "strata/thermo.hpp"

namespace strata {

struct AdmissibleRun {
    GasParams g;
    AtmosphereParams ap;
    double t0 = 0;
    double gamma_residual = 0;
};

// t0 = (1/omega) [((gamma+1)/(2 alpha) + 3 beta)/(2 - gamma) - 1], valid for theta = omega.
// Throws DomainError if theta != omega, gamma >= 2, alpha <= 0, omega <= 0 or t0 < 0.
double t0_paper(const GasParams& g, const AtmosphereParams& ap);

// Same expression without the sign check.
double t0_formula(const GasParams& g, const AtmosphereParams& ap);

// Largest alpha with t0 >= 0: (gamma+1)/(2(2 - gamma - 3 beta)); infinite when 2 - gamma - 3 beta <= 0.
double alpha_upper_bound(const GasParams& g);

// (gamma+1)/(2 alpha) + 3 beta >= 2 - gamma.
bool check_alpha_bound(const GasParams& g);

// Gamma of the stratified background along the ray at time t (|grad phi| = 1 + omega t).
double gamma_of_time(const GasParams& g, const AtmosphereParams& ap, double t);

struct GammaRoot {
    double t = 0;
    double residual = 0;
};

// Root of gamma_of_time(t) = (gamma+1) epsilon_target / 2 on [0, t_max] by
// bracketing and bisection; nothing if no sign change is found.
std::optional<GammaRoot> gamma_root_general(const GasParams& g, const AtmosphereParams& ap, double epsilon_target,
                                            double t_max = 200.0, double tol = 1e-12);

// Validates all parameters and computes the anchor time. Throws DomainError
// naming the violated inequality.
AdmissibleRun validate_run(const GasParams& g, const AtmosphereParams& ap);

}  // namespace strata
