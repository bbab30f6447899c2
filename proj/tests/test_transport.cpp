#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "strata/errors.hpp"
#include "strata/thermo.hpp"
#include "strata/transport.hpp"

using namespace strata;

namespace {

constexpr double kPi = std::numbers::pi;

GasParams gas(double alpha, double beta, double gamma) {
    GasParams g;
    g.alpha = alpha;
    g.beta = beta;
    g.gamma = gamma;
    return g;
}

const GasParams kBaseline = gas(0.35, 0.06, 1.01);
const AtmosphereParams kAtmos{0.1, 0.1};

// Exact beta = 0 amplitude written in u = 1 + omega t (anchored at t = 0) and its time derivative.
struct BetaZero {
    double k, C, omega;
    double value(double sigma0, double t) const {
        const double u = 1.0 + omega * t;
        return sigma0 * std::pow(u, -k) - C * (u - std::pow(u, -k));
    }
    double rate(double sigma0, double t) const {
        const double u = 1.0 + omega * t;
        return omega * (-k * sigma0 * std::pow(u, -k - 1.0) - C * (1.0 + k * std::pow(u, -k - 1.0)));
    }
};

BetaZero beta_zero(const GasParams& g, const AtmosphereParams& ap) {
    return BetaZero{g.gamma * ap.theta / (4.0 * ap.omega), 2.0 / (g.gamma * ap.theta + 4.0 * ap.omega), ap.omega};
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

InitialProfile zero_profile(double lo, double hi) {
    InitialProfile p;
    p.value = [](double) { return 0.0; };
    p.slope = [](double) { return 0.0; };
    p.support_min = lo;
    p.support_max = hi;
    return p;
}

}  // namespace

TEST_CASE("paper-exact coefficients") {
    const TransportCoeffs c0 = coeffs(kBaseline, kAtmos, 0.0);
    CHECK(c0.A == doctest::Approx(1.005).epsilon(1e-15));
    CHECK(c0.c == 0.5);

    const TransportCoeffs ideal = coeffs(gas(0, 0, 1.01), kAtmos, 0.0);
    CHECK(ideal.B == doctest::Approx(1.5075).epsilon(1e-15));
    CHECK(ideal.g == doctest::Approx(0.02525).epsilon(1e-14));

    for (double t : {0.0, 1.0, 7.5, 30.0}) CHECK(coeffs(kBaseline, {0.0, 0.1}, t).g == 0.0);

    for (double theta : {0.05, 0.1, 0.2}) {
        for (double omega : {0.05, 0.1, 0.2}) {
            for (double t : {0.0, 1.4, 5.0}) {
                const AtmosphereParams ap{theta, omega};
                const TransportCoeffs c = coeffs(kBaseline, ap, t);
                const double u = 1.0 + omega * t, al = 0.35, be = 0.06, ga = 1.01;
                CHECK(c.A == doctest::Approx(0.5 * (ga + 1.0) * u).epsilon(1e-14));
                const double B = 0.75 * (ga + 1.0) * u * u *
                                 (1.0 + be * std::pow(u, -theta / omega) -
                                  2.0 * al * be * std::pow(u, 2.0 - 2.0 * theta / omega));
                CHECK(c.B == doctest::Approx(B).epsilon(1e-13));
                const double g = ga * theta / (4.0 * u * (1.0 - be * std::pow(u, -theta / omega)));
                CHECK(c.g == doctest::Approx(g).epsilon(1e-13));
                CHECK(c.g >= 0.0);
            }
        }
    }
}

TEST_CASE("verbatim damping keeps the printed exponent") {
    CoefficientModel m;
    m.damping_form = DampingForm::paper_verbatim;
    const AtmosphereParams ap{0.2, 0.1};
    const double t = 3.0, u = 1.0 + 0.1 * t, rho0 = std::pow(u, -2.0);
    const double expect = 1.01 * 0.2 / (4.0 * u * rho0 * (std::pow(u, 0.2) - 0.06));
    CHECK(coeffs(kBaseline, ap, t, m).g == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("lambda-derived coefficients") {
    CoefficientModel m;
    m.mode = CoefficientMode::lambda_derived;
    for (double t : {0.0, 1.4, 4.0}) {
        const TransportCoeffs c = coeffs(kBaseline, kAtmos, t, m);
        const PhaseState ps = phase_closed_form(kAtmos, t);
        const BackgroundProfile bp = profiles(kAtmos, ps.x3);
        CHECK(c.A == doctest::Approx(gamma_hat(kBaseline) * ps.grad_phi.norm()).epsilon(1e-14));
        CHECK(c.B == doctest::Approx(-0.5 * lambda_param(kBaseline, bp.rho0, bp.a0, ps.grad_phi.norm())).epsilon(1e-14));
        CHECK(c.g == doctest::Approx(chi(kBaseline, kAtmos, t)).epsilon(1e-14));
        // With a0 = rho0 = 1/u the two modes share the damping and differ in B only through the alpha beta term.
        const TransportCoeffs p = coeffs(kBaseline, kAtmos, t);
        CHECK(p.g == doctest::Approx(c.g).epsilon(1e-13));
    }
}

TEST_CASE("model switches") {
    CoefficientModel m;
    m.cubic = false;
    m.damping = false;
    m.forcing = false;
    const TransportCoeffs c = coeffs(kBaseline, kAtmos, 1.0, m);
    CHECK(c.B == 0.0);
    CHECK(c.g == 0.0);
    CHECK(c.c == 0.0);
    CHECK(c.A > 0.0);
    CHECK(parse_coefficient_mode(to_string(CoefficientMode::lambda_derived)) == CoefficientMode::lambda_derived);
    CHECK(parse_damping_form(to_string(DampingForm::paper_verbatim)) == DampingForm::paper_verbatim);
    CHECK_THROWS_AS(parse_coefficient_mode("exact"), DomainError);
}

TEST_CASE("closed-form amplitude at beta = 0") {
    const GasParams g = gas(0.35, 0.0, 1.01);
    for (double theta : {0.05, 0.1, 0.2}) {
        for (double omega : {0.05, 0.1, 0.2}) {
            const AtmosphereParams ap{theta, omega};
            const BetaZero bz = beta_zero(g, ap);
            for (double sigma0 : {-0.5, 0.0, 1.0}) {
                CHECK(sigma_closed(g, ap, sigma0, 0.0, 0.0) == sigma0);
                for (double t : {0.3, 1.4, 5.0, 20.0}) {
                    const double sc = sigma_closed(g, ap, sigma0, t, 0.0);
                    CHECK(std::abs(sc - bz.value(sigma0, t)) <= 1e-13 * std::max(1.0, std::abs(sc)));
                    const TransportCoeffs c = coeffs(g, ap, t);
                    const double residual = bz.rate(sigma0, t) + c.g * bz.value(sigma0, t) + c.c;
                    CHECK(std::abs(residual) <= 1e-12);
                    const double so = sigma_ode(g, ap, sigma0, t, 0.0, 1e-12);
                    CHECK(std::abs(sc - so) <= 1e-10);
                }
            }
        }
    }
}

TEST_CASE("closed-form amplitude re-anchors at t_start") {
    const GasParams g = gas(0.35, 0.0, 1.01);
    for (double ts : {0.5, 2.0}) {
        CHECK(sigma_closed(g, kAtmos, 0.7, ts, ts) == doctest::Approx(0.7).epsilon(1e-15));
        for (double t : {ts + 0.5, ts + 3.0})
            CHECK(std::abs(sigma_closed(g, kAtmos, 0.7, t, ts) - sigma_ode(g, kAtmos, 0.7, t, ts, 1e-12)) <= 1e-10);
    }
    // Under beta > 0 the re-anchored form still tracks the ODE to second order in beta.
    const double ts = 1.0;
    const double err = std::abs(sigma_closed(kBaseline, kAtmos, 1.0, 2.4, ts) - sigma_ode(kBaseline, kAtmos, 1.0, 2.4, ts));
    CHECK(err < 0.05 * 0.06 * 0.06 * 1.4);
}

TEST_CASE("closed-form amplitude error scales as beta squared") {
    const double sigma0 = 1.0;
    std::vector<double> betas = {0.01, 0.02, 0.04}, errs;
    for (double beta : betas) {
        const GasParams g = gas(0.35, beta, 1.01);
        double worst = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double t = 0.05 * i;
            worst = std::max(worst, std::abs(sigma_closed(g, kAtmos, sigma0, t, 0.0) -
                                             sigma_ode(g, kAtmos, sigma0, t, 0.0, 1e-12)));
        }
        errs.push_back(worst);
    }
    const double slope = log_log_slope(betas, errs);
    MESSAGE("beta^2 slope = " << slope);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::abs(sigma_closed(kBaseline, kAtmos, 1.0, 1.4, 0.0) - sigma_ode(kBaseline, kAtmos, 1.0, 1.4, 0.0)) <
          0.05 * 0.06 * 0.06 * 1.4);
}

TEST_CASE("amplitude ODE special cases") {
    const AtmosphereParams flat{0.0, 0.1};
    for (double t : {0.5, 1.4, 10.0})
        CHECK(sigma_ode(kBaseline, flat, 0.8, t, 0.2) == doctest::Approx(0.8 - (t - 0.2) / 2.0).epsilon(1e-12));
    CHECK(sigma_ode(kBaseline, flat, 0.0, 2.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK_THROWS_AS(sigma_ode(kBaseline, flat, 0.0, 2.0, 0.0, 0.0), DomainError);
}

TEST_CASE("bundle initial state") {
    const CharacteristicBundle b = make_bundle(sine_profile(0.0, kPi), 33, 0.7, true);
    REQUIRE(b.eta.size() == 35);
    CHECK(b.eta.front() < 0.0);
    CHECK(b.eta.back() > kPi);
    CHECK(b.eta[33] == kPi);
    for (std::size_t i = 0; i < b.eta.size(); ++i) {
        CHECK(b.xi[i] == b.eta[i]);
        CHECK(b.jac[i] == 1.0);
        CHECK(b.sigma[i] == sine_profile(0.0, kPi).value(b.eta[i]));
    }
    CHECK(b.sigma.front() == 0.0);
    CHECK(b.sigma_eta.front() == 0.0);
    CHECK(b.t == 0.7);
}

TEST_CASE("zero data drift matches quadrature") {
    const AtmosphereParams ap{0.0, 0.1};
    const double ts = 0.3, te = 2.3;
    CharacteristicBundle b = make_bundle(zero_profile(0.0, 1.0), 3, ts, false);
    advance_characteristics(b, make_provider(kBaseline, ap), te, 1e-12);
    auto speed = [&](double t) {
        const TransportCoeffs c = coeffs(kBaseline, ap, t);
        const double s = -(t - ts) / 2.0;
        return c.A * s - c.B * s * s;
    };
    const double drift = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(speed, ts, te, 10, 1e-14);
    for (std::size_t i = 0; i < b.eta.size(); ++i) {
        CHECK(b.xi[i] == doctest::Approx(b.eta[i] + drift).epsilon(1e-10));
        CHECK(b.sigma[i] == doctest::Approx(-(te - ts) / 2.0).epsilon(1e-12));
        CHECK(b.jac[i] == 1.0);
    }
}

TEST_CASE("amplitude decouples from the characteristic position") {
    CharacteristicBundle b = make_bundle(sine_profile(0.0, kPi), 65, 0.0, true);
    const CoefficientProvider p = make_provider(kBaseline, kAtmos);
    advance_characteristics(b, p, 0.6, 1e-11);
    for (std::size_t i = 0; i < b.eta.size(); ++i) {
        const double s0 = sine_profile(0.0, kPi).value(b.eta[i]);
        CHECK(std::abs(b.sigma[i] - sigma_ode(p, s0, 0.6, 0.0, 1e-11)) <= 1e-9);
    }
}

TEST_CASE("variational Jacobian matches five-point differences of the characteristic map") {
    const CoefficientProvider p = make_provider(kBaseline, kAtmos);
    const auto br = breaking_time(p, sine_profile(0.0, kPi), 0.0, 50.0);
    REQUIRE(br.t_break);
    const double tol = 1e-12;
    const std::size_t n = 1025;
    CharacteristicBundle b = make_bundle(sine_profile(0.0, kPi), n, 0.0, false);
    const double h = b.eta[1] - b.eta[0];
    for (double frac : {0.25, 0.5, 0.75, 0.99}) {
        advance_characteristics(b, p, frac * *br.t_break, tol);
        double worst = 0.0;
        for (std::size_t j = 2; j + 2 < n; ++j) {
            const double fd = (-b.xi[j + 2] + 8.0 * b.xi[j + 1] - 8.0 * b.xi[j - 1] + b.xi[j - 2]) / (12.0 * h);
            worst = std::max(worst, std::abs(fd - b.jac[j]) / std::max(1.0, std::abs(b.jac[j])));
        }
        CHECK(worst <= std::max(1e-5, 10.0 * tol));
    }
}

TEST_CASE("sampling the characteristic solution") {
    CharacteristicBundle b = make_bundle(sine_profile(0.0, kPi), 257, 0.0, true);
    const CoefficientProvider p = make_provider(kBaseline, kAtmos);
    advance_characteristics(b, p, 0.3);
    std::vector<double> xi(b.xi.begin() + 1, b.xi.end() - 1);
    const auto s = sample_characteristics(b, xi);
    REQUIRE(s);
    for (std::size_t i = 0; i < xi.size(); ++i) CHECK((*s)[i] == doctest::Approx(b.sigma[i + 1]).epsilon(1e-12));
    advance_characteristics(b, p, 1.4);
    CHECK_FALSE(sample_characteristics(b, xi));
}

TEST_CASE("printed Jacobians at zero elapsed time") {
    for (double eta : {0.1, 1.0, 2.0, 3.0}) {
        CHECK(jacobian_paper_general(eta, 0.0, kBaseline, kAtmos) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(jacobian_paper_omega0(eta, 0.0, kBaseline, kAtmos) == doctest::Approx(1.0).epsilon(1e-14));
        // The constant-density display ends in +2.
        CHECK(jacobian_paper_theta0(eta, 0.0, kBaseline, {0.0, 0.1}) == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("printed Jacobian discrepancy report") {
    CharacteristicBundle b = make_bundle(sine_profile(0.0, kPi), 9, 0.0, false);
    advance_characteristics(b, make_provider(kBaseline, kAtmos), 1.4);
    double worst = 0.0;
    for (std::size_t i = 0; i < b.eta.size(); ++i) {
        const double pj = jacobian_paper_general(b.eta[i], 1.4, kBaseline, kAtmos);
        CHECK(std::isfinite(pj));
        worst = std::max(worst, std::abs(pj - b.jac[i]));
    }
    MESSAGE("max |printed general - variational| at t=1.4: " << worst);
    const AtmosphereParams near_flat{0.1, 1e-6};
    double limit_gap = 0.0;
    for (double eta : {0.5, 1.5, 2.5}) {
        const double a = jacobian_paper_general(eta, 0.5, kBaseline, near_flat);
        const double c = jacobian_paper_omega0(eta, 0.5, kBaseline, near_flat);
        CHECK(std::isfinite(a));
        CHECK(std::isfinite(c));
        limit_gap = std::max(limit_gap, std::abs(a - c));
    }
    MESSAGE("max |printed general - printed omega->0| at omega=1e-6: " << limit_gap);
}

TEST_CASE("breaking on the baseline") {
    const auto br = breaking_time(make_provider(kBaseline, kAtmos), sine_profile(0.0, kPi), 0.0, 50.0);
    REQUIRE(br.t_break);
    CHECK(*br.t_break > 0.0);
    CHECK(*br.t_break < 50.0);
    // The single-label search agrees with the bundle search at the reported label.
    const auto single = label_breaking_time(make_provider(kBaseline, kAtmos), std::sin(br.eta), std::cos(br.eta), 0.0,
                                            50.0);
    REQUIRE(single);
    CHECK(*single == doctest::Approx(*br.t_break).epsilon(1e-9));
    // The Jacobian at the label is just positive before and just negative after.
    CharacteristicBundle b = make_bundle(sine_profile(0.0, kPi), std::vector<double>{br.eta}, 0.0);
    advance_characteristics(b, make_provider(kBaseline, kAtmos), *br.t_break - 1e-6, 1e-12);
    CHECK(b.jac[0] > 0.0);
    advance_characteristics(b, make_provider(kBaseline, kAtmos), *br.t_break + 1e-6, 1e-12);
    CHECK(b.jac[0] < 0.0);
}

TEST_CASE("breaking orderings in the van der Waals constants") {
    BreakingOptions opt;
    opt.n_eta = 1025;
    std::vector<double> by_beta, by_alpha;
    for (double beta : {0.02, 0.04, 0.06})
        by_beta.push_back(*breaking_time(make_provider(gas(0.35, beta, 1.01), kAtmos), sine_profile(0.0, kPi), 0.0,
                                         50.0, opt)
                               .t_break);
    for (double alpha : {0.15, 0.25, 0.35})
        by_alpha.push_back(*breaking_time(make_provider(gas(alpha, 0.06, 1.01), kAtmos), sine_profile(0.0, kPi), 0.0,
                                          50.0, opt)
                                .t_break);
    CHECK(by_beta[0] > by_beta[1]);
    CHECK(by_beta[1] > by_beta[2]);
    CHECK(by_alpha[0] < by_alpha[1]);
    CHECK(by_alpha[1] < by_alpha[2]);
}

TEST_CASE("no breaking for monotone data under a quadratic flux") {
    CoefficientModel m;
    m.cubic = false;
    m.damping = false;
    m.forcing = false;
    const auto br = breaking_time(make_provider(kBaseline, kAtmos, m), sine_profile(0.0, kPi / 2.0), 0.0, 50.0);
    CHECK_FALSE(br.t_break);
    CHECK(br.min_jac_at_t_max >= 1.0);
}

TEST_CASE("ghost labels never break") {
    const CoefficientProvider p = make_provider(kBaseline, kAtmos);
    CHECK_FALSE(label_breaking_time(p, 0.0, 0.0, 0.0, 50.0));
}
