#include <numbers>

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "strata/atmosphere.hpp"
#include "strata/errors.hpp"
#include "strata/fv_solver.hpp"
#include "strata/hyperbolic_core.hpp"
#include "strata/params.hpp"
#include "strata/thermo.hpp"
#include "strata/transport.hpp"

namespace py = pybind11;
using namespace strata;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::array_t<double> to_array(const Vec5& v) {
    py::array_t<double> a(5);
    for (int i = 0; i < 5; ++i) a.mutable_data()[i] = v(i);
    return a;
}

CoefficientModel model_from(const std::string& mode, const std::string& damping, bool cubic, bool damping_on,
                            bool forcing) {
    CoefficientModel m;
    m.mode = parse_coefficient_mode(mode);
    m.damping_form = parse_damping_form(damping);
    m.cubic = cubic;
    m.damping = damping_on;
    m.forcing = forcing;
    return m;
}

}  // namespace

PYBIND11_MODULE(_strata, m) {
    m.doc() = "Nonlinear geometric acoustics of a van der Waals gas in a stratified atmosphere";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<GasParams>(m, "GasParams")
        .def(py::init([](double alpha, double beta, double gamma, double epsilon) {
                 GasParams g;
                 g.alpha = alpha;
                 g.beta = beta;
                 g.gamma = gamma;
                 g.epsilon = epsilon;
                 return g;
             }),
             py::arg("alpha") = 0.35, py::arg("beta") = 0.06, py::arg("gamma") = 1.01, py::arg("epsilon") = 0.01)
        .def_readwrite("alpha", &GasParams::alpha)
        .def_readwrite("beta", &GasParams::beta)
        .def_readwrite("gamma", &GasParams::gamma)
        .def_readwrite("epsilon", &GasParams::epsilon)
        .def_readwrite("cv", &GasParams::cv)
        .def("validate", &GasParams::validate)
        .def("__repr__", [](const GasParams& g) {
            return "GasParams(alpha=" + std::to_string(g.alpha) + ", beta=" + std::to_string(g.beta) +
                   ", gamma=" + std::to_string(g.gamma) + ", epsilon=" + std::to_string(g.epsilon) + ")";
        });

    py::class_<AtmosphereParams>(m, "AtmosphereParams")
        .def(py::init([](double theta, double omega) { return AtmosphereParams{theta, omega}; }),
             py::arg("theta") = 0.1, py::arg("omega") = 0.1)
        .def_readwrite("theta", &AtmosphereParams::theta)
        .def_readwrite("omega", &AtmosphereParams::omega)
        .def("validate", &AtmosphereParams::validate);

    py::class_<ThermoState>(m, "ThermoState")
        .def_readonly("rho", &ThermoState::rho)
        .def_readonly("p", &ThermoState::p)
        .def_readonly("s", &ThermoState::s)
        .def_readonly("a", &ThermoState::a);

    py::class_<TransportCoeffs>(m, "TransportCoeffs")
        .def_readonly("A", &TransportCoeffs::A)
        .def_readonly("B", &TransportCoeffs::B)
        .def_readonly("g", &TransportCoeffs::g)
        .def_readonly("c", &TransportCoeffs::c);

    m.def("sound_speed", &sound_speed, py::arg("gas"), py::arg("rho"), py::arg("p"));
    m.def("pressure_from_sound_speed", &pressure_from_sound_speed, py::arg("gas"), py::arg("rho"), py::arg("a"));
    m.def("state_from_density_and_sound_speed", &state_from_density_and_sound_speed, py::arg("gas"),
          py::arg("rho"), py::arg("a"));
    m.def("capital_gamma", &capital_gamma, py::arg("gas"), py::arg("rho0"), py::arg("a0"),
          py::arg("grad_phi_norm"));
    m.def("gamma_hat", &gamma_hat, py::arg("gas"));
    m.def("omega_param", &omega_param, py::arg("gas"), py::arg("rho0"), py::arg("a0"));
    m.def("lambda_param", &lambda_param, py::arg("gas"), py::arg("rho0"), py::arg("a0"), py::arg("grad_phi_norm"));
    m.def("omega_sigma_exact", &omega_sigma_exact, py::arg("gas"), py::arg("rho0"), py::arg("a0"));

    m.def(
        "acoustic_coefficients",
        [](const GasParams& g, const AtmosphereParams& ap, double t, bool neglect_gamma) {
            const PhaseState ps = phase_closed_form(ap, t);
            const BackgroundProfile bp = profiles(ap, ps.x3);
            const ThermoState st = state_from_density_and_sound_speed(g, bp.rho0, bp.a0);
            const AcousticCoefficients c =
                acoustic_coefficients(g, st, ps.grad_phi, stratified_gradients(g, ap, ps.x3),
                                      neglect_gamma ? Truncation::neglect_gamma : Truncation::none);
            py::dict d;
            d["Gamma"] = c.gamma;
            d["E"] = c.E;
            d["Lambda"] = c.lambda;
            d["chi"] = c.chi;
            d["forcing"] = c.forcing;
            d["Omega_sigma"] = c.omega_sigma;
            d["M"] = to_array(c.mn.M);
            d["N"] = to_array(c.mn.N);
            return d;
        },
        py::arg("gas"), py::arg("atmosphere"), py::arg("t"), py::arg("neglect_gamma") = true,
        "Coefficients from the numeric eigen-decomposition along the vertical ray at time t.");

    m.def(
        "profiles",
        [](const AtmosphereParams& ap, double x3) {
            const BackgroundProfile bp = profiles(ap, x3);
            return py::make_tuple(bp.rho0, bp.a0);
        },
        py::arg("atmosphere"), py::arg("x3"), "Background (rho0, a0) at height x3.");
    m.def("front_height", &front_height, py::arg("atmosphere"), py::arg("t"));
    m.def(
        "trace_ray",
        [](const AtmosphereParams& ap, double t_end, double dt, double tol) {
            const auto path = trace_ray(ap, t_end, dt, tol);
            std::vector<double> t, x3, p3;
            for (const auto& s : path) {
                t.push_back(s.t);
                x3.push_back(s.x3);
                p3.push_back(s.grad_phi(2));
            }
            py::dict d;
            d["t"] = to_array(t);
            d["x3"] = to_array(x3);
            d["grad_phi3"] = to_array(p3);
            return d;
        },
        py::arg("atmosphere"), py::arg("t_end"), py::arg("dt"), py::arg("tol") = 1e-10);
    m.def("chi", &chi, py::arg("gas"), py::arg("atmosphere"), py::arg("t"), py::arg("mean_curvature") = 0.0);

    m.def(
        "coeffs",
        [](const GasParams& g, const AtmosphereParams& ap, double t, const std::string& mode,
           const std::string& damping, bool cubic, bool damping_on, bool forcing) {
            return coeffs(g, ap, t, model_from(mode, damping, cubic, damping_on, forcing));
        },
        py::arg("gas"), py::arg("atmosphere"), py::arg("t"), py::arg("mode") = "paper-exact",
        py::arg("damping") = "corrected", py::arg("cubic") = true, py::arg("damping_term") = true,
        py::arg("forcing") = true);

    m.def("sigma_closed", &sigma_closed, py::arg("gas"), py::arg("atmosphere"), py::arg("sigma0"), py::arg("t"),
          py::arg("t_start"));
    m.def(
        "sigma_ode",
        [](const GasParams& g, const AtmosphereParams& ap, double sigma0, double t, double t_start, double tol) {
            return sigma_ode(g, ap, sigma0, t, t_start, tol);
        },
        py::arg("gas"), py::arg("atmosphere"), py::arg("sigma0"), py::arg("t"), py::arg("t_start"),
        py::arg("tol") = 1e-10);

    m.def(
        "characteristics",
        [](const GasParams& g, const AtmosphereParams& ap, double t, std::size_t n_eta, double t_start, double lo,
           double hi, const std::string& mode, double tol) {
            CharacteristicBundle b = make_bundle(sine_profile(lo, hi), n_eta, t_start, true);
            advance_characteristics(b, make_provider(g, ap, model_from(mode, "corrected", true, true, true)), t,
                                    tol);
            py::dict d;
            d["eta"] = to_array(b.eta);
            d["xi"] = to_array(b.xi);
            d["sigma"] = to_array(b.sigma);
            d["jac"] = to_array(b.jac);
            return d;
        },
        py::arg("gas"), py::arg("atmosphere"), py::arg("t"), py::arg("n_eta") = 257, py::arg("t_start") = 0.0,
        py::arg("support_min") = 0.0, py::arg("support_max") = std::numbers::pi, py::arg("mode") = "paper-exact",
        py::arg("tol") = 1e-10,
        "Labels, positions, amplitudes and Jacobians of sine data carried to time t.");

    m.def(
        "breaking_time",
        [](const GasParams& g, const AtmosphereParams& ap, double t_start, double t_max, std::size_t n_eta,
           double lo, double hi, const std::string& mode) {
            BreakingOptions opt;
            opt.n_eta = n_eta;
            const BreakingResult r = breaking_time(make_provider(g, ap, model_from(mode, "corrected", true, true, true)),
                                                   sine_profile(lo, hi), t_start, t_max, opt);
            py::dict d;
            d["t_break"] = r.t_break ? py::cast(*r.t_break) : py::none();
            d["eta"] = r.eta;
            d["at_grid_boundary"] = r.at_grid_boundary;
            d["min_jac_at_t_max"] = r.min_jac_at_t_max;
            return d;
        },
        py::arg("gas"), py::arg("atmosphere"), py::arg("t_start") = 0.0, py::arg("t_max") = 50.0,
        py::arg("n_eta") = 4097, py::arg("support_min") = 0.0, py::arg("support_max") = std::numbers::pi,
        py::arg("mode") = "paper-exact");

    m.def(
        "solve_fv",
        [](const GasParams& g, const AtmosphereParams& ap, const std::vector<double>& times, std::size_t n_cells,
           double xi_min, double xi_max, double t_start, int order, const std::string& boundary, double cfl,
           double lo, double hi, const std::string& mode) {
            SolverConfig cfg;
            cfg.cfl = cfl;
            cfg.boundary = parse_boundary(boundary);
            cfg.reconstruction = parse_reconstruction(std::to_string(order));
            const AmplitudeField f = make_field(sine_profile(lo, hi), xi_min, xi_max, n_cells, t_start);
            py::list out;
            for (const auto& s : solve(f, make_provider(g, ap, model_from(mode, "corrected", true, true, true)), cfg,
                                       times)) {
                py::dict d;
                d["t"] = s.t;
                d["xi"] = to_array(s.xi);
                d["sigma"] = to_array(s.sigma);
                d["total_variation"] = s.total_variation;
                out.append(d);
            }
            return out;
        },
        py::arg("gas"), py::arg("atmosphere"), py::arg("times"), py::arg("n_cells") = 512, py::arg("xi_min") = -1.0,
        py::arg("xi_max") = std::numbers::pi + 3.0, py::arg("t_start") = 0.0, py::arg("order") = 1,
        py::arg("boundary") = "outflow", py::arg("cfl") = 0.45, py::arg("support_min") = 0.0,
        py::arg("support_max") = std::numbers::pi, py::arg("mode") = "paper-exact",
        "Finite-volume snapshots of sine data at the requested times.");

    m.def("t0_paper", &t0_paper, py::arg("gas"), py::arg("atmosphere"));
    m.def("alpha_upper_bound", &alpha_upper_bound, py::arg("gas"));
    m.def("gamma_of_time", &gamma_of_time, py::arg("gas"), py::arg("atmosphere"), py::arg("t"));
    m.def(
        "gamma_root_general",
        [](const GasParams& g, const AtmosphereParams& ap, double eps, double t_max) -> py::object {
            const auto r = gamma_root_general(g, ap, eps, t_max);
            if (!r) return py::none();
            return py::cast(r->t);
        },
        py::arg("gas"), py::arg("atmosphere"), py::arg("epsilon"), py::arg("t_max") = 200.0);
    m.def(
        "validate_run",
        [](const GasParams& g, const AtmosphereParams& ap) { return validate_run(g, ap).t0; },
        py::arg("gas"), py::arg("atmosphere"), "Validates parameters and returns the anchor time t0.");
}
