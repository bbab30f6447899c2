#include "strata/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "strata/errors.hpp"

namespace strata {

namespace {

// (gamma+1)/(2 alpha) + 3 beta - (2 - gamma), snapped to zero when it is
// within rounding of the bound so that alpha = alpha_upper_bound is admissible.
double bound_margin(const GasParams& g) {
    const double lhs = (g.gamma + 1.0) / (2.0 * g.alpha) + 3.0 * g.beta;
    const double rhs = 2.0 - g.gamma;
    const double d = lhs - rhs;
    return std::abs(d) <= 8.0 * std::numeric_limits<double>::epsilon() * (lhs + std::abs(rhs)) ? 0.0 : d;
}

}  // namespace

double t0_formula(const GasParams& g, const AtmosphereParams& ap) {
    return bound_margin(g) / ((2.0 - g.gamma) * ap.omega);
}

double t0_paper(const GasParams& g, const AtmosphereParams& ap) {
    if (ap.theta != ap.omega) throw DomainError("t0 formula requires theta == omega");
    if (!(g.gamma < 2.0)) throw DomainError("t0 formula requires gamma < 2");
    if (!(g.alpha > 0.0)) throw DomainError("t0 formula requires alpha > 0");
    if (!(ap.omega > 0.0)) throw DomainError("t0 formula requires omega > 0");
    const double t0 = t0_formula(g, ap);
    if (t0 < 0.0) {
        std::ostringstream msg;
        msg << "inadmissible parameters: t0 = " << t0 << " < 0 violates t >= 0";
        throw DomainError(msg.str());
    }
    return t0;
}

double alpha_upper_bound(const GasParams& g) {
    const double denom = 2.0 - g.gamma - 3.0 * g.beta;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return (g.gamma + 1.0) / (2.0 * denom);
}

bool check_alpha_bound(const GasParams& g) {
    if (g.alpha <= 0.0) return true;
    return bound_margin(g) >= 0.0;
}

double gamma_of_time(const GasParams& g, const AtmosphereParams& ap, double t) {
    const PhaseState ps = phase_closed_form(ap, t);
    const BackgroundProfile bp = profiles(ap, ps.x3);
    return capital_gamma(g, bp.rho0, bp.a0, ps.grad_phi.norm());
}

std::optional<GammaRoot> gamma_root_general(const GasParams& g, const AtmosphereParams& ap, double epsilon_target,
                                            double t_max, double tol) {
    if (!(t_max > 0.0)) throw DomainError("gamma root search requires t_max > 0");
    const double target = 0.5 * (g.gamma + 1.0) * epsilon_target;
    auto f = [&](double t) { return gamma_of_time(g, ap, t) - target; };

    constexpr int kSamples = 2000;
    double a = 0.0, fa = f(a);
    if (fa == 0.0) return GammaRoot{0.0, 0.0};
    for (int i = 1; i <= kSamples; ++i) {
        const double b = t_max * static_cast<double>(i) / kSamples;
        const double fb = f(b);
        if (fb == 0.0) return GammaRoot{b, 0.0};
        if ((fa < 0.0) != (fb < 0.0)) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double root = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
            return GammaRoot{root, f(root)};
        }
        a = b;
        fa = fb;
    }
    return std::nullopt;
}

AdmissibleRun validate_run(const GasParams& g, const AtmosphereParams& ap) {
    g.validate();
    ap.validate();
    if (!(g.beta < 1.0))
        throw DomainError("covolume exclusion violated at the launch height: beta*rho0(0) = beta must be < 1");
    if (!check_alpha_bound(g)) {
        std::ostringstream msg;
        msg << "alpha bound violated: (gamma+1)/(2 alpha) + 3 beta >= 2 - gamma fails (alpha=" << g.alpha
            << ", bound alpha <= " << alpha_upper_bound(g) << ")";
        throw DomainError(msg.str());
    }
    AdmissibleRun run;
    run.g = g;
    run.ap = ap;
    if (ap.theta == ap.omega && g.alpha > 0.0 && ap.omega > 0.0) {
        run.t0 = t0_paper(g, ap);
    } else if (const auto root = gamma_root_general(g, ap, g.epsilon)) {
        run.t0 = root->t;
    } else {
        run.t0 = 0.0;
    }
    run.gamma_residual = gamma_of_time(g, ap, run.t0) - 0.5 * (g.gamma + 1.0) * g.epsilon;
    return run;
}

}  // namespace strata
