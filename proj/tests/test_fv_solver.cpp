#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "strata/errors.hpp"
#include "strata/fv_solver.hpp"

using namespace strata;

namespace {

constexpr double kPi = std::numbers::pi;

GasParams baseline() {
    GasParams g;
    g.alpha = 0.35;
    g.beta = 0.06;
    g.gamma = 1.01;
    return g;
}

InitialProfile step_profile(double left, double right, double at) {
    InitialProfile p;
    p.value = [=](double x) { return x < at ? left : right; };
    p.slope = [](double) { return 0.0; };
    p.support_min = at;
    p.support_max = at;
    return p;
}

InitialProfile constant_profile(double v) {
    InitialProfile p;
    p.value = [v](double) { return v; };
    p.slope = [](double) { return 0.0; };
    return p;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// L1 distance between a coarse field and a finer one averaged onto the coarse cells.
double l1_restricted(const std::vector<double>& coarse, const std::vector<double>& fine, double dx) {
    const std::size_t r = fine.size() / coarse.size();
    double err = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        double avg = 0.0;
        for (std::size_t k = 0; k < r; ++k) avg += fine[i * r + k];
        err += std::abs(coarse[i] - avg / r) * dx;
    }
    return err;
}

std::vector<double> run(const InitialProfile& p, const CoefficientProvider& prov, const SolverConfig& cfg,
                        std::size_t n, double lo, double hi, double t_end) {
    return solve(make_field(p, lo, hi, n, 0.0), prov, cfg, {t_end}).back().sigma;
}

}  // namespace

TEST_CASE("cell averages of the sine profile") {
    const AmplitudeField f = make_field(sine_profile(0.0, kPi), -1.0, kPi + 3.0, 64, 0.0);
    CHECK(f.n_cells() == 64);
    double mass = 0.0;
    for (double s : f.sigma) mass += s * f.dx();
    CHECK(mass == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(f.sigma.front() == 0.0);
    CHECK(f.sigma.back() == 0.0);
    CHECK_THROWS_AS(make_field(sine_profile(0.0, kPi), -1.0, 4.0, 8, 0.0), DomainError);
}

TEST_CASE("flux and wave speed bound") {
    const TransportCoeffs c{1.0, 2.0, 0.0, 0.0};
    CHECK(flux(c, 1.0) == doctest::Approx(0.5 - 2.0 / 3.0));
    CHECK(flux_speed(c, 1.0) == doctest::Approx(-1.0));
    // F' peaks at sigma = A/(2B) = 0.25 with value 0.125.
    CHECK(wave_speed_bound(c, 0.2, 0.3) == doctest::Approx(0.125));
    CHECK(wave_speed_bound(c, 0.0, 0.1) == doctest::Approx(0.08));
    CHECK(wave_speed_bound(c, -1.0, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("spatially constant field follows the amplitude ODE") {
    const GasParams g = baseline();
    const AtmosphereParams ap{0.0, 0.1};
    SolverConfig cfg;
    cfg.boundary = Boundary::periodic;
    for (Reconstruction r : {Reconstruction::first_order, Reconstruction::minmod}) {
        cfg.reconstruction = r;
        const auto snaps =
            solve(make_field(constant_profile(0.4), 0.0, 2.0, 32, 0.5), make_provider(g, ap), cfg, {1.0, 2.5});
        for (const Snapshot& s : snaps) {
            for (double v : s.sigma) CHECK(v == doctest::Approx(0.4 - (s.t - 0.5) / 2.0).epsilon(1e-12));
            CHECK(s.total_variation < 1e-12);
        }
    }
}

TEST_CASE("zero data with no sources stays zero") {
    CoefficientModel m;
    m.damping = false;
    m.forcing = false;
    const auto snaps = solve(make_field(constant_profile(0.0), -1.0, 1.0, 64, 0.0), make_provider(baseline(), {0.1, 0.1}, m),
                             SolverConfig{}, {0.5, 3.0});
    for (const Snapshot& s : snaps)
        for (double v : s.sigma) CHECK(v == 0.0);
}

TEST_CASE("mass changes only through the sources with periodic boundaries") {
    const GasParams g = baseline();
    const CoefficientProvider prov = make_provider(g, {0.1, 0.1});
    for (Reconstruction r : {Reconstruction::first_order, Reconstruction::minmod}) {
        SolverConfig cfg;
        cfg.boundary = Boundary::periodic;
        cfg.reconstruction = r;
        AmplitudeField f = make_field(sine_profile(0.0, kPi), 0.0, 2.0 * kPi, 128, 0.0);
        for (int n = 0; n < 60; ++n) {
            const double m0 = mean(f.sigma), t0 = f.t;
            f = step(f, prov, cfg);
            const double expect = sigma_ode(prov, m0, f.t, t0, 1e-13);
            CHECK(std::abs(mean(f.sigma) - expect) <= 1e-8);
        }
    }
}

TEST_CASE("first-order scheme does not create new extrema") {
    SolverConfig cfg;
    cfg.sources = false;
    const CoefficientProvider prov = make_provider(baseline(), {0.1, 0.1});
    AmplitudeField f = make_field(sine_profile(0.0, kPi), -1.0, kPi + 3.0, 200, 0.0);
    for (int n = 0; n < 400; ++n) {
        const auto [lo0, hi0] = std::minmax_element(f.sigma.begin(), f.sigma.end());
        const double lo = *lo0, hi = *hi0;
        f = step(f, prov, cfg);
        const auto [lo1, hi1] = std::minmax_element(f.sigma.begin(), f.sigma.end());
        CHECK(*hi1 <= hi + 1e-15);
        CHECK(*lo1 >= lo - 1e-15);
    }
    CHECK(f.t > 1.0);
}

TEST_CASE("Burgers shock moves at the Rankine-Hugoniot speed") {
    const TransportCoeffs c{1.3, 0.0, 0.0, 0.0};
    const double sl = 1.0, sr = 0.2, t_end = 0.8;
    for (Reconstruction r : {Reconstruction::first_order, Reconstruction::minmod}) {
        SolverConfig cfg;
        cfg.reconstruction = r;
        const auto snaps = solve(make_field(step_profile(sl, sr, 0.0), -1.0, 2.0, 3000, 0.0), constant_provider(c),
                                 cfg, {t_end});
        const Snapshot& s = snaps.back();
        const double mid = 0.5 * (sl + sr);
        double pos = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i + 1 < s.sigma.size(); ++i) {
            if (s.sigma[i] >= mid && s.sigma[i + 1] < mid) {
                const double w = (s.sigma[i] - mid) / (s.sigma[i] - s.sigma[i + 1]);
                pos = s.xi[i] + w * (s.xi[i + 1] - s.xi[i]);
                break;
            }
        }
        REQUIRE(std::isfinite(pos));
        CHECK(std::abs(pos / t_end - c.A * (sl + sr) / 2.0) < 1e-2);
    }
}

TEST_CASE("composite wave across the inflection point converges under refinement") {
    // F'(sigma) = sigma - sigma^2 has its extremum at sigma = 0.5; the datum 1 -> -0.5 spans it.
    const TransportCoeffs c{1.0, 1.0, 0.0, 0.0};
    SolverConfig cfg;
    const InitialProfile p = step_profile(1.0, -0.5, 0.0);
    const double lo = -1.5, hi = 1.5, t_end = 0.6;
    const std::vector<std::size_t> grids = {64, 256, 1024};
    const auto ref = run(p, constant_provider(c), cfg, 16384, lo, hi, t_end);
    std::vector<double> errs;
    for (std::size_t n : grids) {
        const auto s = run(p, constant_provider(c), cfg, n, lo, hi, t_end);
        errs.push_back(l1_restricted(s, ref, (hi - lo) / n));
    }
    MESSAGE("L1 errors: " << errs[0] << " " << errs[1] << " " << errs[2]);
    CHECK(errs[0] / errs[1] >= 3.0);
    CHECK(errs[1] / errs[2] >= 3.0);
}

TEST_CASE("self-difference shrinks when the grid is doubled") {
    const CoefficientProvider prov = make_provider(baseline(), {0.1, 0.1});
    const double lo = -1.0, hi = kPi + 3.0;
    const auto s128 = run(sine_profile(0.0, kPi), prov, SolverConfig{}, 128, lo, hi, 1.4);
    const auto s256 = run(sine_profile(0.0, kPi), prov, SolverConfig{}, 256, lo, hi, 1.4);
    const auto s512 = run(sine_profile(0.0, kPi), prov, SolverConfig{}, 512, lo, hi, 1.4);
    const double d1 = l1_restricted(s128, s256, (hi - lo) / 128);
    const double d2 = l1_restricted(s256, s512, (hi - lo) / 256);
    CHECK(d2 < d1);
}

TEST_CASE("step reports CFL violations and nonfinite states") {
    const CoefficientProvider prov = make_provider(baseline(), {0.1, 0.1});
    const AmplitudeField f = make_field(sine_profile(0.0, kPi), -1.0, kPi + 3.0, 64, 0.0);
    const double dt = stable_time_step(f, prov, SolverConfig{});
    CHECK_NOTHROW(step(f, prov, SolverConfig{}, dt));
    CHECK_THROWS_AS(step(f, prov, SolverConfig{}, 10.0 * dt), NumericalError);
    CHECK_THROWS_AS(step(f, prov, SolverConfig{}, 0.0), NumericalError);
    AmplitudeField bad = f;
    bad.sigma[10] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step(bad, prov, SolverConfig{}, dt), NumericalError);
    SolverConfig wide;
    wide.cfl = 1.5;
    CHECK_THROWS_AS(solve(f, prov, wide, {1.0}), DomainError);
    CHECK_THROWS_AS(solve(f, prov, SolverConfig{}, {-1.0}), DomainError);
}

TEST_CASE("snapshots land on the requested times") {
    const CoefficientProvider prov = make_provider(baseline(), {0.1, 0.1});
    const auto snaps =
        solve(make_field(sine_profile(0.0, kPi), -1.0, kPi + 3.0, 64, 0.0), prov, SolverConfig{}, {0.0, 0.37, 1.4});
    REQUIRE(snaps.size() == 3);
    CHECK(snaps[0].t == 0.0);
    CHECK(snaps[1].t == 0.37);
    CHECK(snaps[2].t == 1.4);
    for (const Snapshot& s : snaps) CHECK(s.total_variation == doctest::Approx(total_variation(s.sigma)));
    CHECK(parse_boundary("periodic") == Boundary::periodic);
    CHECK(parse_reconstruction("2") == Reconstruction::minmod);
    CHECK_THROWS_AS(parse_reconstruction("weno"), DomainError);
}
