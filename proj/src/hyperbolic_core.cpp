#include "strata/hyperbolic_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "strata/errors.hpp"

namespace strata {

namespace {

// Entry functions a^2/rho and p_s/rho and their derivatives in (rho, s).
struct EntryJet {
    double f1, f1_r, f1_s, f1_rr, f1_rs, f1_ss;
    double f2, f2_r, f2_s, f2_rr, f2_rs, f2_ss;
};

EntryJet entry_jet(const EosJet& j) {
    const double r = j.rho, r2 = r * r, r3 = r2 * r;
    const double a = j.a;
    EntryJet e{};
    e.f1 = a * a / r;
    e.f1_r = 2.0 * a * j.a_r / r - a * a / r2;
    e.f1_s = 2.0 * a * j.a_s / r;
    e.f1_rr = 2.0 * (j.a_r * j.a_r + a * j.a_rr) / r - 4.0 * a * j.a_r / r2 + 2.0 * a * a / r3;
    e.f1_rs = 2.0 * (j.a_s * j.a_r + a * j.a_rs) / r - 2.0 * a * j.a_s / r2;
    e.f1_ss = 2.0 * (j.a_s * j.a_s + a * j.a_ss) / r;
    e.f2 = j.ps / r;
    e.f2_r = j.ps_r / r - j.ps / r2;
    e.f2_s = j.ps_s / r;
    e.f2_rr = j.ps_rr / r - 2.0 * j.ps_r / r2 + 2.0 * j.ps / r3;
    e.f2_rs = j.ps_rs / r - j.ps_s / r2;
    e.f2_ss = j.ps_ss / r;
    return e;
}

double phase_norm(const Vec3& grad_phi) {
    const double norm = grad_phi.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("phase gradient must be nonzero and finite");
    return norm;
}

}  // namespace

SystemMatrices build_matrices(const GasParams& g, const Vec5& U) {
    SystemMatrices m;
    m.U0 = U;
    m.F0 << 0.0, 0.0, 1.0, 0.0, 0.0;
    m.jet = eos_jet(g, U(kRho), U(kEntropy));
    const double rho = U(kRho);
    for (int k = 0; k < 3; ++k) {
        Mat5 A = Mat5::Zero();
        for (int i = 0; i < 5; ++i) A(i, i) = U(k);
        A(kRho, k) = rho;
        A(k, kRho) = m.jet.a * m.jet.a / rho;
        A(k, kEntropy) = m.jet.ps / rho;
        m.A[k] = A;
    }
    return m;
}

SystemMatrices build_matrices(const GasParams& g, const ThermoState& background) {
    Vec5 U;
    U << 0.0, 0.0, 0.0, background.rho, background.s;
    return build_matrices(g, U);
}

Mat5 characteristic_matrix(const SystemMatrices& m, const Vec3& grad_phi) {
    Mat5 C = Mat5::Zero();
    for (int k = 0; k < 3; ++k) C += grad_phi(k) * m.A[k];
    return C;
}

std::array<double, 5> generic_eigenvalues(const SystemMatrices& m, const Vec3& n) {
    Eigen::EigenSolver<Mat5> solver(characteristic_matrix(m, n), false);
    if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
    std::array<double, 5> out{};
    for (int i = 0; i < 5; ++i) {
        const auto ev = solver.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-10 * (1.0 + std::abs(ev.real())))
            throw NumericalError("characteristic matrix has complex eigenvalues (hyperbolicity lost)");
        out[i] = ev.real();
    }
    std::sort(out.begin(), out.end());
    return out;
}

EigenPair acoustic_eigenpair(const SystemMatrices& m, const Vec3& grad_phi) {
    const double norm = phase_norm(grad_phi);
    const double rho = m.U0(kRho);
    const double a = m.jet.a;
    EigenPair ep;
    ep.n = grad_phi / norm;
    ep.l << ep.n(0), ep.n(1), ep.n(2), a / rho, m.jet.ps / (rho * a);
    ep.r << ep.n(0), ep.n(1), ep.n(2), rho / a, 0.0;
    ep.speed = a * norm;
    return ep;
}

MatrixGradients analytic_gradients(const EosJet& jet) {
    const EntryJet e = entry_jet(jet);
    MatrixGradients d;
    for (int k = 0; k < 3; ++k) {
        for (int m = 0; m < 5; ++m) {
            d.first[k][m].setZero();
            for (int n = 0; n < 5; ++n) d.second[k][m][n].setZero();
        }
        for (int i = 0; i < 5; ++i) d.first[k][k](i, i) = 1.0;
        d.first[k][kRho](kRho, k) = 1.0;
        d.first[k][kRho](k, kRho) = e.f1_r;
        d.first[k][kEntropy](k, kRho) = e.f1_s;
        d.first[k][kRho](k, kEntropy) = e.f2_r;
        d.first[k][kEntropy](k, kEntropy) = e.f2_s;

        d.second[k][kRho][kRho](k, kRho) = e.f1_rr;
        d.second[k][kRho][kEntropy](k, kRho) = e.f1_rs;
        d.second[k][kEntropy][kRho](k, kRho) = e.f1_rs;
        d.second[k][kEntropy][kEntropy](k, kRho) = e.f1_ss;
        d.second[k][kRho][kRho](k, kEntropy) = e.f2_rr;
        d.second[k][kRho][kEntropy](k, kEntropy) = e.f2_rs;
        d.second[k][kEntropy][kRho](k, kEntropy) = e.f2_rs;
        d.second[k][kEntropy][kEntropy](k, kEntropy) = e.f2_ss;
    }
    return d;
}

MatrixGradients finite_difference_gradients(const GasParams& g, const Vec5& U, double rel_step,
                                            double second_rel_step) {
    auto step_for = [&](int m, double rel) { return rel * std::max(1.0, std::abs(U(m))); };
    auto shifted = [&](int m, double hm, int n, double hn) {
        Vec5 V = U;
        V(m) += hm;
        V(n) += hn;
        return build_matrices(g, V);
    };

    MatrixGradients d;
    for (int m = 0; m < 5; ++m) {
        const double h = step_for(m, rel_step);
        Vec5 Up = U, Um = U;
        Up(m) += h;
        Um(m) -= h;
        const SystemMatrices sp = build_matrices(g, Up);
        const SystemMatrices sm = build_matrices(g, Um);
        for (int k = 0; k < 3; ++k) d.first[k][m] = (sp.A[k] - sm.A[k]) / (2.0 * h);
    }
    for (int m = 0; m < 5; ++m) {
        for (int n = 0; n < 5; ++n) {
            const double hm = step_for(m, second_rel_step);
            const double hn = step_for(n, second_rel_step);
            const SystemMatrices pp = shifted(m, hm, n, hn);
            const SystemMatrices pm = shifted(m, hm, n, -hn);
            const SystemMatrices mp = shifted(m, -hm, n, hn);
            const SystemMatrices mm = shifted(m, -hm, n, -hn);
            for (int k = 0; k < 3; ++k)
                d.second[k][m][n] = (pp.A[k] - pm.A[k] - mp.A[k] + mm.A[k]) / (4.0 * hm * hn);
        }
    }
    return d;
}

std::array<Mat5, 3> directional_gradient(const MatrixGradients& d, const Vec5& r) {
    std::array<Mat5, 3> out;
    for (int k = 0; k < 3; ++k) {
        out[k].setZero();
        for (int m = 0; m < 5; ++m) out[k] += r(m) * d.first[k][m];
    }
    return out;
}

double gamma_numeric(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi) {
    const auto R = directional_gradient(d, ep.r);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) sum += grad_phi(k) * ep.l.dot(R[k] * ep.r);
    return sum / ep.l.dot(ep.r);
}

double e_numeric(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi) {
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        Mat5 rr = Mat5::Zero();
        for (int m = 0; m < 5; ++m)
            for (int n = 0; n < 5; ++n) rr += ep.r(m) * ep.r(n) * d.second[k][m][n];
        sum += grad_phi(k) * ep.l.dot(rr * ep.r);
    }
    return 0.5 * sum;
}

MNVectors mn_numeric(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi, double gamma) {
    const auto R = directional_gradient(d, ep.r);
    MNVectors mn;
    mn.M.setZero();
    mn.N.setZero();
    for (int k = 0; k < 3; ++k) {
        for (int m = 0; m < 5; ++m) mn.M(m) += grad_phi(k) * ep.l.dot(d.first[k][m] * ep.r);
        mn.N += grad_phi(k) * (ep.l.transpose() * R[k]).transpose();
    }
    mn.M = 0.5 * (mn.M - gamma * ep.l);
    mn.N = 0.5 * (mn.N - gamma * ep.l);
    return mn;
}

OmegaDelta omega_delta_coeffs(const SystemMatrices& m, const EigenPair& ep, const Vec3& grad_phi,
                              const MNVectors& mn) {
    if (!(std::abs(m.jet.ps) > 0.0))
        throw DomainError("degenerate background: dp/ds vanishes, omega/delta undefined");
    const Mat5 B = characteristic_matrix(m, grad_phi) - ep.speed * Mat5::Identity();
    const Eigen::Matrix<double, 5, 4> Bt = B.topRows<4>().transpose();
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 5, 4>> qr(Bt);
    if (qr.rank() < 4) throw DomainError("degenerate background: first four rows of B are dependent");
    OmegaDelta od;
    od.omega = qr.solve(mn.M);
    od.delta = qr.solve(mn.N);
    const double scale = std::max({1.0, mn.M.norm(), mn.N.norm()});
    const double res = std::max((Bt * od.omega - mn.M).norm(), (Bt * od.delta - mn.N).norm());
    if (res > 1e-9 * scale)
        throw NumericalError("M or N is not in the row space of B (residual " + std::to_string(res) + ")");
    return od;
}

Vec4 second_order_source(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi, double gamma) {
    const auto R = directional_gradient(d, ep.r);
    Vec5 v = -gamma * ep.r;
    for (int k = 0; k < 3; ++k) v += grad_phi(k) * (R[k] * ep.r);
    return v.head<4>();
}

double lambda_numeric(const SystemMatrices& m, const EigenPair& ep, const MatrixGradients& d,
                      const Vec3& grad_phi, double gamma) {
    const double E = e_numeric(ep, d, grad_phi);
    const MNVectors mn = mn_numeric(ep, d, grad_phi, gamma);
    const OmegaDelta od = omega_delta_coeffs(m, ep, grad_phi, mn);
    const Vec4 v = second_order_source(ep, d, grad_phi, gamma);
    return E - (od.omega + 2.0 * od.delta).dot(v);
}

double chi_numeric(const SystemMatrices& m, const EigenPair& ep, const MatrixGradients& d,
                   const BackgroundGradients& bg) {
    const EosJet& j = m.jet;
    const double rho = j.rho, a = j.a;
    const auto R = directional_gradient(d, ep.r);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        Vec5 dr = Vec5::Zero();
        for (int i = 0; i < 3; ++i) dr(i) = bg.grad_n(i, k);
        dr(kRho) = bg.grad_rho(k) / a - rho * (j.a_r * bg.grad_rho(k) + j.a_s * bg.grad_s(k)) / (a * a);
        Vec5 dU = Vec5::Zero();
        dU(kRho) = bg.grad_rho(k);
        dU(kEntropy) = bg.grad_s(k);
        sum += ep.l.dot(m.A[k] * dr) + ep.l.dot(R[k] * dU);
    }
    return 0.5 * sum;
}

AcousticCoefficients acoustic_coefficients(const GasParams& g, const ThermoState& background,
                                           const Vec3& grad_phi, const BackgroundGradients& bg,
                                           Truncation truncation) {
    SystemMatrices m = build_matrices(g, background);
    if (truncation == Truncation::neglect_gamma) m.jet = m.jet.gamma_neglected();
    const EigenPair ep = acoustic_eigenpair(m, grad_phi);
    const MatrixGradients d = analytic_gradients(m.jet);

    AcousticCoefficients c;
    c.gamma = truncation == Truncation::neglect_gamma ? 0.0 : gamma_numeric(ep, d, grad_phi);
    c.E = e_numeric(ep, d, grad_phi);
    c.mn = mn_numeric(ep, d, grad_phi, c.gamma);
    c.od = omega_delta_coeffs(m, ep, grad_phi, c.mn);
    c.weighted_source = (c.od.omega + 2.0 * c.od.delta).dot(second_order_source(ep, d, grad_phi, c.gamma));
    c.lambda = c.E - c.weighted_source;
    c.chi = chi_numeric(m, ep, d, bg);
    c.forcing = 0.5 * ep.l.dot(m.F0);
    const EosJet& j = m.jet;
    c.omega_sigma = j.rho * j.rho * j.a_rr / j.a + j.rho * j.a_r / j.a - 1.0;
    return c;
}

std::vector<EntryCheck> entry_derivative_report(const GasParams& g, const ThermoState& background, int k) {
    if (k < 0 || k > 2) throw DomainError("entry report: direction index must be 0, 1 or 2");
    const SystemMatrices m = build_matrices(g, background);
    const MatrixGradients an = analytic_gradients(m.jet);
    const MatrixGradients fd = finite_difference_gradients(g, m.U0);
    const EosJet& j = m.jet;
    const double rho = j.rho, a = j.a;
    const double omega_sigma = rho * rho * j.a_rr / a + rho * j.a_r / a - 1.0;

    const std::string kk = std::to_string(k + 1);
    auto row = [&](std::string name, int mi, int i, int jj, double printed) {
        return EntryCheck{std::move(name), an.first[k][mi](i, jj), fd.first[k][mi](i, jj), printed};
    };
    std::vector<EntryCheck> out;
    out.push_back(row("d" + kk + " A" + kk + "_" + kk + kk, k, k, k, 1.0));
    out.push_back(row("d4 A" + kk + "_" + kk + "4", kRho, k, kRho, -a * a / (rho * rho) + 2.0 * a * j.a_r / rho));
    out.push_back(row("d5 A" + kk + "_" + kk + "4", kEntropy, k, kRho, 2.0 * a * j.a_s / rho));
    out.push_back(row("d5 A" + kk + "_" + kk + "5", kEntropy, k, kEntropy, j.ps_s / rho));
    out.push_back(row("d4 A" + kk + "_" + kk + "5", kRho, k, kEntropy, -j.ps / (rho * rho) + 2.0 * a * j.a_r / rho));
    out.push_back(row("d4 A" + kk + "_4" + kk, kRho, kRho, k, 1.0));
    out.push_back(EntryCheck{"d44 A" + kk + "_" + kk + "4", an.second[k][kRho][kRho](k, kRho),
                             fd.second[k][kRho][kRho](k, kRho),
                             2.0 * a * a / (rho * rho * rho) * (6.0 + omega_sigma)});
    return out;
}

}  // namespace strata
