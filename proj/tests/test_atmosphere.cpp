#include <doctest.h>

#include <cmath>

#include "strata/atmosphere.hpp"
#include "strata/errors.hpp"

using namespace strata;

namespace {

GasParams gas(double alpha, double beta, double gamma) {
    GasParams g;
    g.alpha = alpha;
    g.beta = beta;
    g.gamma = gamma;
    return g;
}

double rel(double v, double ref) { return std::abs(v - ref) / std::max(std::abs(ref), 1e-300); }

}  // namespace

TEST_CASE("exponential profiles") {
    const BackgroundProfile b0 = profiles({0.1, 0.1}, 0.0);
    CHECK(b0.rho0 == 1.0);
    CHECK(b0.a0 == 1.0);
    const BackgroundProfile bh = profiles({0.1, 0.1}, std::log(2.0) / 0.1);
    CHECK(bh.rho0 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bh.a0 == doctest::Approx(0.5).epsilon(1e-15));
    for (double x3 : {0.0, 1.0, 17.0}) CHECK(profiles({0.0, 0.2}, x3).rho0 == 1.0);
}

TEST_CASE("phase closed form") {
    const PhaseState ps = phase_closed_form({0.1, 0.1}, 1.4);
    CHECK(ps.grad_phi(2) == doctest::Approx(1.14).epsilon(1e-15));
    CHECK(ps.x3 == doctest::Approx(10.0 * std::log(1.14)).epsilon(1e-15));
    const PhaseState p0 = phase_closed_form({0.1, 0.0}, 2.5);
    CHECK(p0.grad_phi.norm() == 1.0);
    CHECK(p0.x3 == 2.5);
    const PhaseState pt = phase_closed_form({0.1, 0.1}, 0.0);
    CHECK(pt.grad_phi.norm() == 1.0);
    CHECK(pt.x3 == 0.0);
    // The small-rate branch joins the logarithm smoothly.
    for (double omega : {0.99e-10, 1.01e-10}) {
        const double series = 3.0 - omega * 9.0 / 2.0 + omega * omega * 27.0 / 3.0;
        CHECK(std::abs(front_height({0.1, omega}, 3.0) - series) < 1e-14);
    }
}

TEST_CASE("ray tracing matches the closed form") {
    const auto path = trace_ray({0.1, 0.1}, 1.4, 0.1);
    const PhaseState& last = path.back();
    CHECK(last.t == 1.4);
    CHECK(rel(last.x3, 10.0 * std::log(1.14)) < 1e-8);
    CHECK(rel(last.grad_phi(2), 1.14) < 1e-8);

    const auto flat = trace_ray({0.1, 1e-12}, 2.0, 0.5);
    CHECK(flat.back().x3 == doctest::Approx(2.0).epsilon(1e-9));

    const auto start = trace_ray({0.1, 0.1}, 0.0, 0.1);
    REQUIRE(start.size() == 1);
    CHECK(start[0].x3 == 0.0);
    CHECK(start[0].grad_phi == Vec3(0, 0, 1));

    CHECK_THROWS_AS(trace_ray({0.1, 0.1}, 1.0, 0.0), DomainError);
}

TEST_CASE("ray tracing over the attenuation grid") {
    for (double theta : {0.05, 0.1, 0.2}) {
        for (double omega : {0.05, 0.1, 0.2}) {
            const AtmosphereParams ap{theta, omega};
            double prev_x3 = -1.0, prev_p = 0.0;
            for (const PhaseState& ps : trace_ray(ap, 30.0, 0.25, 1e-10)) {
                const PhaseState cf = phase_closed_form(ap, ps.t);
                if (ps.t > 0) CHECK(rel(ps.x3, cf.x3) < 1e-8);
                CHECK(rel(ps.grad_phi(2), cf.grad_phi(2)) < 1e-8);
                CHECK(std::abs(ps.grad_phi(0)) == 0.0);
                CHECK(ps.x3 > prev_x3);
                CHECK(ps.grad_phi.norm() > prev_p);
                prev_x3 = ps.x3;
                prev_p = ps.grad_phi.norm();
            }
        }
    }
}

TEST_CASE("entropy gradient term") {
    CHECK(entropy_gradient_term(gas(0.35, 0.06, 1.01), {0.0, 0.1}, 1.4) == 0.0);
    CHECK(entropy_gradient_term(gas(0.35, 0.0, 1.01), {0.1, 0.1}, 0.0) == doctest::Approx(0.0505).epsilon(1e-14));
    const double expect = 1.01 * 0.1 / (1.14 * 2.0 * (1.0 - 0.06 / 1.14));
    CHECK(entropy_gradient_term(gas(0.35, 0.06, 1.01), {0.1, 0.1}, 1.4) == doctest::Approx(expect).epsilon(1e-14));
    // Equivalent time form with (1 + omega t)^(-theta/omega).
    const AtmosphereParams ap{0.2, 0.1};
    const double u = 1.0 + 0.1 * 2.0;
    const double time_form = 1.01 * 0.2 / u / (2.0 * (1.0 - 0.06 * std::pow(u, -2.0)));
    CHECK(entropy_gradient_term(gas(0.35, 0.06, 1.01), ap, 2.0) == doctest::Approx(time_form).epsilon(1e-14));
}

TEST_CASE("hydrostatic consistency of the entropy term") {
    for (const GasParams& g : {gas(0.35, 0.06, 1.01), gas(0.15, 0.02, 1.4), gas(0, 0, 1.2)}) {
        for (double theta : {0.05, 0.1, 0.2}) {
            for (double omega : {0.05, 0.1, 0.2}) {
                for (double t : {0.0, 1.4, 10.0}) {
                    const double a = entropy_gradient_term(g, {theta, omega}, t);
                    const double b = hydrostatic_entropy_term(g, {theta, omega}, t);
                    CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
                }
            }
        }
    }
}

TEST_CASE("chi") {
    CHECK(chi(gas(0.35, 0.06, 1.01), {0.0, 0.1}, 1.0) == 0.0);
    for (double t : {0.0, 0.7, 1.4, 5.0})
        CHECK(chi(gas(0.35, 0.0, 1.01), {0.1, 0.1}, t) ==
              doctest::Approx(1.01 * 0.1 / (4.0 * (1.0 + 0.1 * t))).epsilon(1e-14));
    const double r = 3.0, t = 1.4;
    const AtmosphereParams ap{0.0, 0.1};
    const double a0 = profiles(ap, front_height(ap, t)).a0;
    CHECK(chi(gas(0.35, 0.06, 1.01), ap, t, 2.0 / r) == doctest::Approx(a0 / r).epsilon(1e-14));
}

TEST_CASE("atmosphere validation") {
    CHECK_NOTHROW((AtmosphereParams{0.1, 0.1}.validate()));
    CHECK_THROWS_AS((AtmosphereParams{-0.1, 0.1}.validate()), DomainError);
    CHECK_THROWS_AS((AtmosphereParams{0.1, -0.1}.validate()), DomainError);
}
