#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strata/thermo.hpp"

namespace strata {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// State ordering: (u1, u2, u3, rho, s). Indices below are zero based.
inline constexpr int kRho = 3;
inline constexpr int kEntropy = 4;

struct SystemMatrices {
    std::array<Mat5, 3> A;
    Vec5 F0;
    Vec5 U0;
    EosJet jet;
};

SystemMatrices build_matrices(const GasParams& g, const Vec5& U);
SystemMatrices build_matrices(const GasParams& g, const ThermoState& background);

// Combined matrix sum_k grad_phi_k A^k.
Mat5 characteristic_matrix(const SystemMatrices& m, const Vec3& grad_phi);

// Eigenvalues of sum_k n_k A^k from a generic eigen-solver, sorted ascending.
std::array<double, 5> generic_eigenvalues(const SystemMatrices& m, const Vec3& n);

struct EigenPair {
    Vec5 l;
    Vec5 r;
    double speed = 0;
    Vec3 n;
};

EigenPair acoustic_eigenpair(const SystemMatrices& m, const Vec3& grad_phi);

enum class Truncation { none, neglect_gamma };

// first[k][m] = dA^k/dU_m, second[k][m][n] = d2A^k/dU_m dU_n at U0.
struct MatrixGradients {
    std::array<std::array<Mat5, 5>, 3> first;
    std::array<std::array<std::array<Mat5, 5>, 5>, 3> second;
};

MatrixGradients analytic_gradients(const EosJet& jet);

// Central differences of build_matrices in U. The step for component m is
// rel_step * max(1, |U_m|). Second derivatives use a nested stencil with
// second_rel_step.
MatrixGradients finite_difference_gradients(const GasParams& g, const Vec5& U, double rel_step = 1e-5,
                                            double second_rel_step = 1e-3);

// r . grad A^k for each k.
std::array<Mat5, 3> directional_gradient(const MatrixGradients& d, const Vec5& r);

double gamma_numeric(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi);
double e_numeric(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi);

struct MNVectors {
    Vec5 M;
    Vec5 N;
};

MNVectors mn_numeric(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi, double gamma);

struct OmegaDelta {
    Vec4 omega;
    Vec4 delta;
};

// Coefficients of M and N in the first four rows of B = sum_k phi_k A^k - speed I.
OmegaDelta omega_delta_coeffs(const SystemMatrices& m, const EigenPair& ep, const Vec3& grad_phi,
                              const MNVectors& mn);

// The 4-vector (phi_k [r . grad A_1^k] - Gamma I_1) r.
Vec4 second_order_source(const EigenPair& ep, const MatrixGradients& d, const Vec3& grad_phi, double gamma);

double lambda_numeric(const SystemMatrices& m, const EigenPair& ep, const MatrixGradients& d,
                      const Vec3& grad_phi, double gamma);

// Spatial gradients of the background at the evaluation point.
struct BackgroundGradients {
    Vec3 grad_rho = Vec3::Zero();
    Vec3 grad_s = Vec3::Zero();
    Mat3 grad_n = Mat3::Zero();  // grad_n(i, k) = d n_i / d x_k
};

double chi_numeric(const SystemMatrices& m, const EigenPair& ep, const MatrixGradients& d,
                   const BackgroundGradients& bg);

struct AcousticCoefficients {
    double gamma = 0;
    double E = 0;
    double lambda = 0;
    double chi = 0;
    double forcing = 0;
    double omega_sigma = 0;
    MNVectors mn;
    OmegaDelta od;
    double weighted_source = 0;  // (omega + 2 delta) . second_order_source
};

AcousticCoefficients acoustic_coefficients(const GasParams& g, const ThermoState& background,
                                           const Vec3& grad_phi, const BackgroundGradients& bg,
                                           Truncation truncation);

// Comparison of the nonzero first-derivative entries of A^k with a
// finite-difference evaluation and with the entry values printed in the
// reference derivation.
struct EntryCheck {
    std::string name;
    double analytic = 0;
    double finite_difference = 0;
    double printed = 0;
};

std::vector<EntryCheck> entry_derivative_report(const GasParams& g, const ThermoState& background, int k = 2);

}  // namespace strata
