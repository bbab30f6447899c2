#pragma once

#include <vector>

#include "strata/hyperbolic_core.hpp"
#include "strata/thermo.hpp"

namespace strata {

struct AtmosphereParams {
    double theta = 0.1;
    double omega = 0.1;

    void validate() const;
};

struct BackgroundProfile {
    double rho0 = 1;
    double a0 = 1;
};

struct PhaseState {
    double t = 0;
    double x3 = 0;
    Vec3 grad_phi = Vec3(0, 0, 1);
    Vec3 n = Vec3(0, 0, 1);
};

BackgroundProfile profiles(const AtmosphereParams& ap, double x3);

// Height of the ascending wavefront launched from x3 = 0 at t = 0.
double front_height(const AtmosphereParams& ap, double t);

PhaseState phase_closed_form(const AtmosphereParams& ap, double t);

// Integrates the ray equations from the horizontal plane x3 = 0, sampling
// every dt up to t_end (the last sample lands on t_end exactly).
std::vector<PhaseState> trace_ray(const AtmosphereParams& ap, double t_end, double dt, double tol = 1e-10);

// a_s * s0_k n_k along the ray at time t.
double entropy_gradient_term(const GasParams& g, const AtmosphereParams& ap, double t);

// Same quantity from EOS derivatives and the profile derivative:
// (a_s / p_s) * (-a0^2 rho0').
double hydrostatic_entropy_term(const GasParams& g, const AtmosphereParams& ap, double t);

double chi(const GasParams& g, const AtmosphereParams& ap, double t, double mean_curvature = 0.0);

// Background gradients of the stratified atmosphere at height x3 for the
// vertically ascending plane wave.
BackgroundGradients stratified_gradients(const GasParams& g, const AtmosphereParams& ap, double x3);

}  // namespace strata
