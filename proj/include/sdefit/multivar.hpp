#pragma once

#include <vector>

#include "sdefit/gauss_ml.hpp"
#include "sdefit/types.hpp"

namespace sdefit {

/// e^M by scaling and squaring with a diagonal Pade approximant.
Matrix matrix_exponential(const Matrix& M);

/// Transition covariance Var[delta] of the linear SDE over an interval dt,
/// obtained from the continuous-time Lyapunov equation
///   A X + X A' = e^(A dt) S S' e^(A' dt) - S S'.
/// Solved directly through the Kronecker form; throws SingularOperator when
/// the Lyapunov operator has an eigenvalue pair summing to zero.
Matrix transition_covariance(const Matrix& A, const Matrix& S, double dt);

/// Quadrature fallback for the same integral, usable when the Lyapunov
/// operator is singular.
Matrix transition_covariance_quadrature(const Matrix& A, const Matrix& S, double dt,
                                        int panels = 512);

/// Vector-valued linear SDE dY = (A Y + b) dt + S dW with measurement
/// covariance V, initial covariance V0 and initial mean y0 at t0.
struct LinearSdeSystem {
    Matrix A;
    Vector b;
    Matrix S;   // lower-triangular diffusion factor
    Matrix V;   // measurement covariance
    Matrix V0;  // initial-state covariance
    Vector y0;
    double t0 = 0;
};

struct MultivarResiduals {
    std::vector<Vector> z;         // conditional residual blocks
    std::vector<Matrix> var;       // Var[z_i]
    std::vector<Matrix> cov_prev;  // Cov[z_i, z_{i-1}], first entry unused
};

MultivarResiduals multivariate_conditional_residuals(const std::vector<Vector>& y,
                                                     const Vector& t,
                                                     const LinearSdeSystem& system);

struct BlockWhitened {
    Vector v;           // concatenated L^-1 z
    double logdet = 0;  // ln|L|
};

/// Block-bidiagonal Cholesky whitening of the conditional residuals.
BlockWhitened block_whiten(const MultivarResiduals& r);

/// Full u-vector for multivariate data already on the transformed scale
/// (log_jacobian_phi = 0 for the identity transform).
UVector multivar_uvector(const std::vector<Vector>& y, const Vector& t,
                         const LinearSdeSystem& system, double log_jacobian_phi = 0);

/// Drift matrix from a real-eigenvalue parametrization A = P^-1 diag(lambda) P,
/// convenient when estimating systems with monotone state variables.
Matrix drift_from_eigen(const Matrix& P, const Vector& eigenvalues);

// Power-product transform y = x^C, i.e. y = exp(C ln x), elementwise logs.
Vector power_product(const Vector& x, const Matrix& C);
Vector power_product_inverse(const Vector& y, const Matrix& C);
/// ln|det d y / d x| at one observation.
double power_product_log_jacobian(const Vector& x, const Matrix& C);

}  // namespace sdefit
