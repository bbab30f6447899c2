#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "strata/atmosphere.hpp"
#include "strata/thermo.hpp"

namespace strata {

enum class CoefficientMode { paper_exact, lambda_derived };
enum class DampingForm { corrected, paper_verbatim };

struct CoefficientModel {
    CoefficientMode mode = CoefficientMode::paper_exact;
    DampingForm damping_form = DampingForm::corrected;
    bool cubic = true;
    bool damping = true;
    bool forcing = true;
};

std::string to_string(CoefficientMode mode);
std::string to_string(DampingForm form);
CoefficientMode parse_coefficient_mode(const std::string& text);
DampingForm parse_damping_form(const std::string& text);

// sigma_t + A sigma sigma_xi - B sigma^2 sigma_xi + g sigma + c = 0
struct TransportCoeffs {
    double A = 0;
    double B = 0;
    double g = 0;
    double c = 0;
};

TransportCoeffs coeffs(const GasParams& g, const AtmosphereParams& ap, double t, const CoefficientModel& model = {});

using CoefficientProvider = std::function<TransportCoeffs(double)>;

CoefficientProvider make_provider(const GasParams& g, const AtmosphereParams& ap, const CoefficientModel& model = {});
CoefficientProvider constant_provider(const TransportCoeffs& c);

// Closed-form amplitude along a characteristic, first order in beta, with
// the corrected damping coefficient and unit-half forcing.
double sigma_closed(const GasParams& g, const AtmosphereParams& ap, double sigma0, double t, double t_start);

// Adaptive integration of d sigma/dt = -g(t) sigma - c(t).
double sigma_ode(const CoefficientProvider& provider, double sigma0, double t, double t_start, double tol = 1e-10);
double sigma_ode(const GasParams& g, const AtmosphereParams& ap, double sigma0, double t, double t_start,
                 double tol = 1e-10, const CoefficientModel& model = {});

struct InitialProfile {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    double support_min = 0;
    double support_max = 0;
};

// sin(eta) on [lo, hi], zero elsewhere. Slopes at the support ends are the
// one-sided values from inside the support.
InitialProfile sine_profile(double lo = 0.0, double hi = 3.14159265358979323846);

struct CharacteristicBundle {
    std::vector<double> eta;
    std::vector<double> xi;
    std::vector<double> sigma;
    std::vector<double> jac;
    std::vector<double> sigma_eta;
    double t = 0;
    double t_start = 0;
};

// Uniform labels over the profile support (n_eta points including both ends),
// optionally with one ghost label on each side where the data vanish.
CharacteristicBundle make_bundle(const InitialProfile& profile, std::size_t n_eta, double t_start,
                                 bool ghost_labels = true);
CharacteristicBundle make_bundle(const InitialProfile& profile, const std::vector<double>& eta, double t_start);

void advance_characteristics(CharacteristicBundle& bundle, const CoefficientProvider& provider, double t_end,
                             double tol = 1e-10, unsigned threads = 0);

// Samples the single-valued profile sigma(xi) carried by the bundle.
// Returns nothing if the characteristic map is not monotone (after breaking).
std::optional<std::vector<double>> sample_characteristics(const CharacteristicBundle& bundle,
                                                          const std::vector<double>& xi);

// Printed closed-form Jacobians for sine data anchored at elapsed time zero.
double jacobian_paper_general(double eta, double elapsed, const GasParams& g, const AtmosphereParams& ap);
double jacobian_paper_theta0(double eta, double elapsed, const GasParams& g, const AtmosphereParams& ap);
double jacobian_paper_omega0(double eta, double elapsed, const GasParams& g, const AtmosphereParams& ap);

struct BreakingOptions {
    std::size_t n_eta = 4097;
    double tol = 1e-10;
    double time_tol = 1e-10;
    double eta_tol = 1e-9;
    bool refine = true;
    unsigned threads = 0;
};

struct BreakingResult {
    std::optional<double> t_break;
    double eta = 0;
    bool at_grid_boundary = false;
    double min_jac_at_t_max = 0;
};

// Earliest time at which the Jacobian of a single label reaches zero,
// searched on (t_start, t_max].
std::optional<double> label_breaking_time(const CoefficientProvider& provider, double sigma0, double slope0,
                                          double t_start, double t_max, double tol = 1e-10,
                                          double time_tol = 1e-10);

BreakingResult breaking_time(const CoefficientProvider& provider, const InitialProfile& profile, double t_start,
                             double t_max, const BreakingOptions& options = {});

}  // namespace strata
