#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirwalk/centrality.hpp"
#include "dirwalk/exec.hpp"

namespace dirwalk {

enum class SpectralClass { hermitian, pseudo_hermitian, complex_spectrum, defective };

std::string to_string(SpectralClass c);
SpectralClass spectral_class_from_string(const std::string& s);

// Eigendecomposition H = P diag(lambda) P_inv with classification.
//  - lambda holds the real parts, sorted ascending; raw_eigenvalues keeps the
//    values as computed (same order) so complex spectra can be reported.
//  - Eigenvector columns are unit norm with their largest-magnitude component
//    rotated to be real and positive.
struct SpectralDecomposition {
    int n = 0;
    Eigen::MatrixXcd P;
    Eigen::MatrixXcd P_inv;
    Eigen::VectorXd lambda;
    Eigen::VectorXcd raw_eigenvalues;
    SpectralClass classification = SpectralClass::hermitian;
    double residual = 0.0;  // ||H P - P diag(raw)||_F
    double tol = 1e-9;
};

// tol is relative to max(1, ||H||_F).  Classification:
//   complex_spectrum if any |Im lambda| exceeds tol*max(1,||H||_F),
//   defective if cond(P) > 1/tol,
//   hermitian if H = H^dagger within tol,
//   pseudo_hermitian otherwise (real spectrum, diagonalizable, H != H^dagger).
SpectralDecomposition eigendecompose(const Eigen::MatrixXcd& H, double tol = 1e-9);

// U(t) = P diag(exp(-i lambda_k t)) P_inv.  Requires a hermitian or
// pseudo_hermitian decomposition.
Eigen::MatrixXcd evolution_operator(const SpectralDecomposition& dec, double t);

Eigen::VectorXcd evolve_state(const SpectralDecomposition& dec, const Eigen::VectorXcd& psi0,
                              double t);

// Infinite-time average of |<j|psi(t)>|^2 from the eigen-expansion: cross
// terms between distinct eigenvalues average to zero, cross terms between
// degenerate eigenvalues are retained.  Scores normalized to sum 1.
CentralityReport ctqw_centrality(const SpectralDecomposition& dec, const Eigen::VectorXcd& psi0,
                                 double tie_tolerance = 1e-9);

// Composite-trapezoid average of |psi_j(t)|^2 over [0, period] with the given
// number of sample points (>= 2).  Quadrature oracle for ctqw_centrality.
std::vector<double> time_average_numeric(const SpectralDecomposition& dec,
                                         const Eigen::VectorXcd& psi0, double period, int samples,
                                         Exec policy = Exec::parallel);

// Triangle-inequality bounds on ||psi(t)||^2 from the eigen-expansion:
// upper = (sum_k ||P_k|| |c_k|)^2, lower = max(0, 2 max_k - sum)^2.
struct NormBounds {
    double lower = 0.0;
    double upper = 0.0;
};
NormBounds norm_oscillation_bounds(const SpectralDecomposition& dec, const Eigen::VectorXcd& psi0);

nlohmann::json to_json(const SpectralDecomposition& dec);
SpectralDecomposition spectral_from_json(const nlohmann::json& j);

}  // namespace dirwalk
