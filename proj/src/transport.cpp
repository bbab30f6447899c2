#include "strata/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "strata/errors.hpp"
#include "strata/ode.hpp"
#include "strata/parallel.hpp"

namespace strata {

namespace {

// (e^z - 1)/z with the removable point handled.
double exprel(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

// Integral of e^{q y} over [xs, x].
double exp_integral(double q, double xs, double x) {
    const double d = x - xs;
    return std::exp(q * xs) * d * exprel(q * d);
}

struct LabelOutcome {
    std::optional<double> t_break;
    double jac_end = 1.0;
};

// Variational state (sigma, jac, sigma_eta).
LabelOutcome integrate_label(const CoefficientProvider& provider, double sigma0, double slope0, double t_start,
                             double t_max, double tol, double time_tol) {
    LabelOutcome out;
    if (slope0 == 0.0) return out;  // jac stays exactly 1

    auto rhs = [&provider](const ode::State<3>& x, ode::State<3>& dx, double t) {
        const TransportCoeffs c = provider(t);
        dx[0] = -c.g * x[0] - c.c;
        dx[1] = (c.A - 2.0 * c.B * x[0]) * x[2];
        dx[2] = -c.g * x[2];
    };

    auto stepper = ode::make_dense<3>(tol);
    ode::State<3> x{sigma0, 1.0, slope0};
    stepper.initialize(x, t_start, std::min(1e-2, std::max(1e-6, (t_max - t_start) / 100.0)));
    ode::State<3> probe{};

    auto locate = [&](double lo, double hi) {
        while (hi - lo > time_tol) {
            const double mid = 0.5 * (lo + hi);
            stepper.calc_state(mid, probe);
            if (probe[1] <= 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    };

    try {
        while (stepper.current_time() < t_max) {
            stepper.do_step(rhs);
            ode::require_finite<3>(stepper.current_state(), "characteristic label");
            const double t0 = stepper.previous_time();
            const double t1 = stepper.current_time();
            // Look for the first nonpositive Jacobian inside the step,
            // including interior dips between the endpoints.
            constexpr int kProbes = 4;
            double prev = t0;
            for (int i = 1; i <= kProbes; ++i) {
                const double tp = t0 + (t1 - t0) * i / kProbes;
                stepper.calc_state(tp, probe);
                if (probe[1] <= 0.0) {
                    const double tb = locate(prev, tp);
                    if (tb <= t_max) out.t_break = tb;
                    if (out.t_break) return out;
                    stepper.calc_state(t_max, probe);
                    out.jac_end = probe[1];
                    return out;
                }
                prev = tp;
            }
        }
    } catch (const NumericalError&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericalError(std::string("characteristic label: integrator failure (") + e.what() + ")");
    }
    stepper.calc_state(t_max, probe);
    out.jac_end = probe[1];
    return out;
}

}  // namespace

std::string to_string(CoefficientMode mode) {
    return mode == CoefficientMode::paper_exact ? "paper-exact" : "lambda-derived";
}

std::string to_string(DampingForm form) {
    return form == DampingForm::corrected ? "corrected" : "paper-verbatim";
}

CoefficientMode parse_coefficient_mode(const std::string& text) {
    if (text == "paper-exact") return CoefficientMode::paper_exact;
    if (text == "lambda-derived") return CoefficientMode::lambda_derived;
    throw DomainError("unknown coefficient mode '" + text + "' (expected paper-exact or lambda-derived)");
}

DampingForm parse_damping_form(const std::string& text) {
    if (text == "corrected") return DampingForm::corrected;
    if (text == "paper-verbatim") return DampingForm::paper_verbatim;
    throw DomainError("unknown damping form '" + text + "' (expected corrected or paper-verbatim)");
}

TransportCoeffs coeffs(const GasParams& g, const AtmosphereParams& ap, double t, const CoefficientModel& model) {
    const double u = 1.0 + ap.omega * t;
    if (!(u > 0.0)) throw DomainError("transport coefficients require 1 + omega*t > 0");
    const double x3 = front_height(ap, t);
    const BackgroundProfile bp = profiles(ap, x3);
    const double rho0 = bp.rho0;  // u^{-theta/omega}
    if (!(1.0 - g.beta * rho0 > 0.0)) throw DomainError("transport coefficients: 1 - beta*rho0 must be positive");

    TransportCoeffs c;
    if (model.mode == CoefficientMode::paper_exact) {
        c.A = gamma_hat(g) * u;
        c.B = 0.75 * (g.gamma + 1.0) * u * u * (1.0 + g.beta * rho0 - 2.0 * g.alpha * g.beta * u * u * rho0 * rho0);
        if (model.damping_form == DampingForm::corrected) {
            c.g = g.gamma * ap.theta / (4.0 * u * (1.0 - g.beta * rho0));
        } else {
            const double denom = std::pow(u, ap.theta) - g.beta;
            if (!(denom > 0.0)) throw DomainError("verbatim damping: (1+omega t)^theta - beta must be positive");
            c.g = g.gamma * ap.theta / (4.0 * u * rho0 * denom);
        }
    } else {
        c.A = gamma_hat(g) * u;
        c.B = -0.5 * lambda_param(g, rho0, bp.a0, u);
        c.g = chi(g, ap, t);
    }
    c.c = 0.5;
    if (!model.cubic) c.B = 0.0;
    if (!model.damping) c.g = 0.0;
    if (!model.forcing) c.c = 0.0;
    return c;
}

CoefficientProvider make_provider(const GasParams& g, const AtmosphereParams& ap, const CoefficientModel& model) {
    return [g, ap, model](double t) { return coeffs(g, ap, t, model); };
}

CoefficientProvider constant_provider(const TransportCoeffs& c) {
    return [c](double) { return c; };
}

double sigma_closed(const GasParams& g, const AtmosphereParams& ap, double sigma0, double t, double t_start) {
    const double x = front_height(ap, t);
    const double xs = front_height(ap, t_start);
    const double m = g.gamma * ap.theta / 4.0;
    const double c = ap.omega + m;
    const double decay = std::exp(-m * x);

    const double base = sigma0 * std::exp(-m * (x - xs)) - 0.5 * decay * exp_integral(c, xs, x);
    if (ap.theta == 0.0) return base;

    const double i_theta = exp_integral(-ap.theta, xs, x);
    const double first = -m * decay * sigma0 * std::exp(m * xs) * i_theta;
    const double second =
        (m / (2.0 * c)) * decay * (exp_integral(c - ap.theta, xs, x) - std::exp(c * xs) * i_theta);
    return base + g.beta * (first + second);
}

double sigma_ode(const CoefficientProvider& provider, double sigma0, double t, double t_start, double tol) {
    if (!(tol > 0.0)) throw DomainError("sigma_ode: tolerance must be positive");
    ode::State<1> x{sigma0};
    auto rhs = [&provider](const ode::State<1>& s, ode::State<1>& ds, double tt) {
        const TransportCoeffs c = provider(tt);
        ds[0] = -c.g * s[0] - c.c;
    };
    ode::integrate<1>(rhs, x, t_start, t, tol, "sigma_ode");
    return x[0];
}

double sigma_ode(const GasParams& g, const AtmosphereParams& ap, double sigma0, double t, double t_start,
                 double tol, const CoefficientModel& model) {
    return sigma_ode(make_provider(g, ap, model), sigma0, t, t_start, tol);
}

InitialProfile sine_profile(double lo, double hi) {
    if (!(hi > lo)) throw DomainError("initial profile support must satisfy lo < hi");
    InitialProfile p;
    p.support_min = lo;
    p.support_max = hi;
    p.value = [lo, hi](double eta) { return (eta >= lo && eta <= hi) ? std::sin(eta) : 0.0; };
    p.slope = [lo, hi](double eta) { return (eta >= lo && eta <= hi) ? std::cos(eta) : 0.0; };
    return p;
}

CharacteristicBundle make_bundle(const InitialProfile& profile, const std::vector<double>& eta, double t_start) {
    CharacteristicBundle b;
    b.eta = eta;
    b.xi = eta;
    b.sigma.reserve(eta.size());
    b.sigma_eta.reserve(eta.size());
    for (double e : eta) {
        b.sigma.push_back(profile.value(e));
        b.sigma_eta.push_back(profile.slope(e));
    }
    b.jac.assign(eta.size(), 1.0);
    b.t = t_start;
    b.t_start = t_start;
    return b;
}

CharacteristicBundle make_bundle(const InitialProfile& profile, std::size_t n_eta, double t_start,
                                 bool ghost_labels) {
    if (n_eta < 2) throw DomainError("characteristic bundle needs at least two labels");
    const double lo = profile.support_min, hi = profile.support_max;
    const double h = (hi - lo) / static_cast<double>(n_eta - 1);
    std::vector<double> eta;
    eta.reserve(n_eta + 2);
    if (ghost_labels) eta.push_back(lo - h);
    for (std::size_t i = 0; i < n_eta; ++i)
        eta.push_back(i + 1 == n_eta ? hi : lo + h * static_cast<double>(i));
    if (ghost_labels) eta.push_back(hi + h);
    return make_bundle(profile, eta, t_start);
}

void advance_characteristics(CharacteristicBundle& bundle, const CoefficientProvider& provider, double t_end,
                             double tol, unsigned threads) {
    if (!(tol > 0.0)) throw DomainError("advance_characteristics: tolerance must be positive");
    const double t0 = bundle.t;
    auto rhs = [&provider](const ode::State<4>& x, ode::State<4>& dx, double t) {
        const TransportCoeffs c = provider(t);
        const double speed = c.A * x[1] - c.B * x[1] * x[1];
        dx[0] = speed;
        dx[1] = -c.g * x[1] - c.c;
        dx[2] = (c.A - 2.0 * c.B * x[1]) * x[3];
        dx[3] = -c.g * x[3];
    };
    parallel_for(bundle.eta.size(), threads, [&](std::size_t i) {
        ode::State<4> x{bundle.xi[i], bundle.sigma[i], bundle.jac[i], bundle.sigma_eta[i]};
        ode::integrate<4>(rhs, x, t0, t_end, tol, "advance_characteristics");
        bundle.xi[i] = x[0];
        bundle.sigma[i] = x[1];
        bundle.jac[i] = x[2];
        bundle.sigma_eta[i] = x[3];
    });
    bundle.t = t_end;
}

std::optional<std::vector<double>> sample_characteristics(const CharacteristicBundle& bundle,
                                                          const std::vector<double>& xi) {
    const std::size_t n = bundle.eta.size();
    if (n < 2) throw DomainError("sample_characteristics: bundle needs at least two labels");
    for (std::size_t i = 0; i < n; ++i)
        if (!(bundle.jac[i] > 0.0)) return std::nullopt;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(bundle.xi[i + 1] > bundle.xi[i])) return std::nullopt;

    auto hermite = [](double s, double y0, double d0, double y1, double d1, double h) {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
               (s3 - s2) * h * d1;
    };
    auto hermite_ds = [](double s, double y0, double d0, double y1, double d1, double h) {
        const double s2 = s * s;
        return (6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * y1 +
               (3 * s2 - 2 * s) * h * d1;
    };

    std::vector<double> out;
    out.reserve(xi.size());
    for (double q : xi) {
        if (q <= bundle.xi.front()) {
            out.push_back(bundle.sigma.front());
            continue;
        }
        if (q >= bundle.xi.back()) {
            out.push_back(bundle.sigma.back());
            continue;
        }
        const auto it = std::upper_bound(bundle.xi.begin(), bundle.xi.end(), q);
        const std::size_t j = static_cast<std::size_t>(it - bundle.xi.begin()) - 1;
        const double h = bundle.eta[j + 1] - bundle.eta[j];
        const double x0 = bundle.xi[j], x1 = bundle.xi[j + 1];
        const double j0 = bundle.jac[j], j1 = bundle.jac[j + 1];
        // Safeguarded Newton for the label coordinate s in [0, 1].
        double lo = 0.0, hi = 1.0;
        double s = (q - x0) / (x1 - x0);
        for (int iter = 0; iter < 100; ++iter) {
            const double f = hermite(s, x0, j0, x1, j1, h) - q;
            if (f > 0.0)
                hi = s;
            else
                lo = s;
            if (std::abs(f) <= 1e-15 * (1.0 + std::abs(q)) || hi - lo < 1e-15) break;
            const double df = hermite_ds(s, x0, j0, x1, j1, h);
            double next = df > 0.0 ? s - f / df : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            s = next;
        }
        out.push_back(hermite(s, bundle.sigma[j], bundle.sigma_eta[j], bundle.sigma[j + 1], bundle.sigma_eta[j + 1], h));
    }
    return out;
}

double jacobian_paper_general(double eta, double elapsed, const GasParams& g, const AtmosphereParams& ap) {
    const double al = g.alpha, be = g.beta, ga = g.gamma, th = ap.theta, om = ap.omega;
    const double u = 1.0 + om * elapsed;
    const double c = std::cos(eta), s = std::sin(eta);
    const double k = th / om;
    const double x = ga / (ga * (th - 4.0) + 4.0 * om) - 2.0 * (2.0 + ga) / (ga * th + 4.0 * om);
    double r = 0.0;
    r += (std::pow(u, 6.0 - k * (2.0 + ga / 4.0)) - 1.0) / (24.0 * om - th * (8.0 + ga)) *
         (-24.0 * al * be * c / (ga * th + 4.0 * om));
    r += (std::pow(u, 5.0 - k * (2.0 + ga / 4.0)) - 1.0) / (20.0 * om - th * (8.0 + ga)) *
         (24.0 * al * be * c / (ga * th + 4.0 * om) + 12.0 * al * be * c * s);
    r -= (std::pow(u, 4.0 - k * (2.0 + ga / 4.0)) - 1.0) / (16.0 * om - th * (8.0 + ga)) * x * (1.0 + ga) * be * c;
    r -= (std::pow(u, 3.0 - k * (1.0 + ga / 2.0)) - 1.0) / (6.0 * om - th * (2.0 + ga)) * x * (1.0 + ga) * be * c;
    r += (std::pow(u, 2.0 - k * (1.0 + ga / 2.0)) - 1.0) / (4.0 * om - th * (2.0 + ga)) *
         ((1.0 + ga) * ga * be / 8.0) * c;
    r += (std::pow(u, 4.0 - ga * th / (4.0 * om)) - 1.0) / (16.0 * om - ga * th) *
         ((4.0 - ga * be) / (ga * th + 4.0 * om)) * 3.0 * (ga + 1.0) * c;
    r += (std::pow(u, 3.0 - ga * th / (4.0 * om)) - 1.0) / (12.0 * om - ga * th) *
         (ga * be / ((ga - 4.0) * th + 4.0 * om)) * 3.0 * (ga + 1.0) * c;
    r += (std::pow(u, 2.0 - ga * th / (4.0 * om)) - 1.0) / (8.0 * om - ga * th) * (1.0 - ga * be / 4.0) * 2.0 *
         (ga + 1.0) * c;
    r -= (std::pow(u, 3.0 - ga * th / (2.0 * om)) - 1.0) / (6.0 * om - ga * th) *
         ((4.0 - ga * be) / (ga * th + 4.0 * om) + 2.0 * s * (1.0 - ga * be / 2.0)) * (3.0 * (1.0 + ga) * c / 2.0);
    return r + 1.0;
}

double jacobian_paper_theta0(double eta, double elapsed, const GasParams& g, const AtmosphereParams& ap) {
    const double al = g.alpha, be = g.beta, ga = g.gamma, om = ap.omega;
    const double t = elapsed;
    const double c = std::cos(eta), s = std::sin(eta);
    const double ab = al * be;
    const double gb = (1.0 + ga) * (1.0 + be);
    double r = 0.0;
    r += std::pow(t, 6) * ((-om / 2.0) * ab * c);
    r += std::pow(t, 5) * ((6.0 / 5.0) * (om * c - 2.0) * om * om * om * ab);
    r += std::pow(t, 4) * (gb / 8.0 - 1.5 * ab + 2.0 * s * ab * om) * 3.0 * om * om * c;
    r += std::pow(t, 3) * (gb * (1.0 - om * s) - 4.0 * ab * (1.0 - 3.0 * om * s)) * om * c;
    r += t * t * (3.0 * gb * (0.25 - om * s) - 3.0 * ab * (0.5 - 4.0 * om * s + om * (1.0 + ga) / 2.0)) * c;
    r += t * (6.0 * s * (ab - gb / 2.0) + (1.0 + ga)) * c;
    return r + 2.0;
}

double jacobian_paper_omega0(double eta, double elapsed, const GasParams& g, const AtmosphereParams& ap) {
    const double al = g.alpha, be = g.beta, ga = g.gamma, th = ap.theta;
    const double t = elapsed;
    const double c = std::cos(eta), s = std::sin(eta);
    double r = 0.0;
    r += (1.0 - std::exp(-th * (2.0 + ga / 4.0) * t)) * 3.0 * c / (th * (8.0 + ga)) *
         (4.0 * al * (2.0 / (ga * th) * (1.0 - be) + s) -
          (1.0 + ga) * be * (th / (ga - 4.0) - 2.0 * (2.0 - ga) / (ga * th)));
    r += (1.0 - std::exp(-th * (1.0 + ga / 2.0) * t)) * be * c / (2.0 * th * (2.0 + ga)) *
         (-3.0 * (2.0 + ga) * (2.0 / (ga * th) + s) + ga / 4.0);
    r += (1.0 - std::exp(-th * ga * t / 4.0)) * (1.0 + ga) * c / (ga * th) *
         (3.0 * (4.0 - ga * be) / (ga * th) + 3.0 * ga * be / (th * (ga - 4.0)) + 2.0 * (1.0 - ga * be / 4.0));
    r -= (1.0 - std::exp(-th * ga * t / 2.0)) * 3.0 * (1.0 + ga) * c / (2.0 * ga * th) *
         ((4.0 - ga * be) / (ga * th) + 2.0 * s * (1.0 - ga * be / 2.0));
    return r + 1.0;
}

std::optional<double> label_breaking_time(const CoefficientProvider& provider, double sigma0, double slope0,
                                          double t_start, double t_max, double tol, double time_tol) {
    return integrate_label(provider, sigma0, slope0, t_start, t_max, tol, time_tol).t_break;
}

BreakingResult breaking_time(const CoefficientProvider& provider, const InitialProfile& profile, double t_start,
                             double t_max, const BreakingOptions& options) {
    if (!(t_max > t_start)) throw DomainError("breaking_time: t_max must exceed t_start");
    const CharacteristicBundle labels = make_bundle(profile, options.n_eta, t_start, true);
    const std::size_t n = labels.eta.size();
    std::vector<LabelOutcome> outcomes(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        outcomes[i] = integrate_label(provider, labels.sigma[i], labels.sigma_eta[i], t_start, t_max, options.tol,
                                      options.time_tol);
    });

    BreakingResult result;
    result.min_jac_at_t_max = std::numeric_limits<double>::infinity();
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (outcomes[i].t_break) {
            if (best == n || *outcomes[i].t_break < *outcomes[best].t_break) best = i;
        } else {
            result.min_jac_at_t_max = std::min(result.min_jac_at_t_max, outcomes[i].jac_end);
        }
    }
    if (best == n) return result;

    const double lo = profile.support_min, hi = profile.support_max;
    double t_best = *outcomes[best].t_break;
    double eta_best = labels.eta[best];
    // Support labels occupy indices 1..n-2; ghosts sit at 0 and n-1.
    result.at_grid_boundary = best <= 1 || best + 2 >= n;

    if (options.refine) {
        auto objective = [&](double e) {
            const auto tb = integrate_label(provider, profile.value(e), profile.slope(e), t_start, t_max,
                                            options.tol, options.time_tol)
                                .t_break;
            return tb ? *tb : std::numeric_limits<double>::infinity();
        };
        double a = std::max(lo, labels.eta[best > 0 ? best - 1 : 0]);
        double b = std::min(hi, labels.eta[std::min(best + 1, n - 1)]);
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
        double f1 = objective(x1), f2 = objective(x2);
        while (b - a > options.eta_tol) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = objective(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = objective(x2);
            }
        }
        const double candidates[] = {x1, x2, a, b};
        for (double e : candidates) {
            const double te = e == x1 ? f1 : (e == x2 ? f2 : objective(e));
            if (te < t_best) {
                t_best = te;
                eta_best = e;
            }
        }
        if (eta_best - lo <= options.eta_tol || hi - eta_best <= options.eta_tol) result.at_grid_boundary = true;
    }
    result.t_break = t_best;
    result.eta = eta_best;
    return result;
}

}  // namespace strata
