#pragma once

#include <string>
#include <vector>

#include "strata/transport.hpp"

namespace strata {

enum class Boundary { outflow, periodic };
enum class Reconstruction { first_order, minmod };

std::string to_string(Boundary b);
std::string to_string(Reconstruction r);
Boundary parse_boundary(const std::string& text);
Reconstruction parse_reconstruction(const std::string& text);

struct SolverConfig {
    double cfl = 0.45;
    Boundary boundary = Boundary::outflow;
    Reconstruction reconstruction = Reconstruction::first_order;
    bool sources = true;
    double source_tol = 1e-12;

    void validate() const;
};

struct AmplitudeField {
    double xi_min = 0;
    double xi_max = 1;
    std::vector<double> sigma;
    double t = 0;

    std::size_t n_cells() const { return sigma.size(); }
    double dx() const { return (xi_max - xi_min) / static_cast<double>(sigma.size()); }
    double center(std::size_t i) const { return xi_min + (static_cast<double>(i) + 0.5) * dx(); }
    void validate() const;
};

// Cell averages of the profile by 3-point Gauss quadrature per cell,
// split at the support ends so kinks do not spoil the average.
AmplitudeField make_field(const InitialProfile& profile, double xi_min, double xi_max, std::size_t n_cells,
                          double t);

// F(sigma) = A sigma^2/2 - B sigma^3/3 and F'(sigma) = A sigma - B sigma^2.
double flux(const TransportCoeffs& c, double sigma);
double flux_speed(const TransportCoeffs& c, double sigma);

// Bound on |F'| over the interval spanned by two states, including the
// extremum of F' at sigma = A/(2B) when it lies inside.
double wave_speed_bound(const TransportCoeffs& c, double s_left, double s_right);

double stable_time_step(const AmplitudeField& field, const CoefficientProvider& provider, const SolverConfig& cfg);

// Affine map sigma -> phi * sigma + psi solving the source ODE from t0 to t1.
struct SourceMap {
    double phi = 1;
    double psi = 0;
};

SourceMap source_map(const CoefficientProvider& provider, double t0, double t1, double tol);

// One Strang-split step of size dt. Throws NumericalError if dt exceeds the
// CFL limit or the state becomes nonfinite.
AmplitudeField step(const AmplitudeField& field, const CoefficientProvider& provider, const SolverConfig& cfg,
                    double dt);

// One step with the largest stable dt.
AmplitudeField step(const AmplitudeField& field, const CoefficientProvider& provider, const SolverConfig& cfg);

struct Snapshot {
    double t = 0;
    std::vector<double> xi;
    std::vector<double> sigma;
    double total_variation = 0;
};

double total_variation(const std::vector<double>& sigma);

std::vector<Snapshot> solve(const AmplitudeField& initial, const CoefficientProvider& provider,
                            const SolverConfig& cfg, const std::vector<double>& snapshot_times);

}  // namespace strata
