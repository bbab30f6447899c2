#pragma once

#include <array>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "strata/errors.hpp"

namespace strata::ode {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
using Stepper = boost::numeric::odeint::runge_kutta_dopri5<State<N>>;

template <std::size_t N>
void require_finite(const State<N>& x, const char* what) {
    for (double v : x)
        if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": integrator produced a nonfinite state");
}

// Integrates x' = f(x, t) from t0 to t1 with an adaptive Dormand-Prince pair.
template <std::size_t N, class System>
void integrate(System&& f, State<N>& x, double t0, double t1, double tol, const char* what = "ode") {
    if (t1 == t0) return;
    namespace odeint = boost::numeric::odeint;
    auto rhs = [&f](const State<N>& s, State<N>& ds, double t) { f(s, ds, t); };
    const double dt0 = (t1 - t0) / 64.0;
    try {
        odeint::integrate_adaptive(odeint::make_controlled(tol, tol, Stepper<N>()), rhs, x, t0, t1, dt0);
    } catch (const odeint::step_adjustment_error& e) {
        throw NumericalError(std::string(what) + ": step-size control failed (" + e.what() + ")");
    } catch (const odeint::no_progress_error& e) {
        throw NumericalError(std::string(what) + ": integrator made no progress (" + e.what() + ")");
    }
    require_finite<N>(x, what);
}

// Dense-output stepper; yields each accepted step so callers can locate events.
template <std::size_t N>
using DenseStepper = boost::numeric::odeint::dense_output_runge_kutta<
    boost::numeric::odeint::controlled_runge_kutta<Stepper<N>>>;

template <std::size_t N>
DenseStepper<N> make_dense(double tol) {
    return boost::numeric::odeint::make_dense_output(tol, tol, Stepper<N>());
}

}  // namespace strata::ode
