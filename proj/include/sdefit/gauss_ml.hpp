#pragma once

#include <functional>

#include "sdefit/types.hpp"

namespace sdefit {

/// Whitened, Jacobian-scaled residuals whose sum of squares the optimizer
/// minimizes in place of the likelihood.
struct UVector {
    Vector u;
    double log_jacobian = 0;  // ln J, including the -ln|L| correction
    Index n = 0;

    double sum_squares() const { return u.squaredNorm(); }
};

/// Tridiagonal covariance C, stored as its diagonal and subdiagonal.
/// sub[0] is unused.
struct TridiagonalCovariance {
    Vector diag;
    Vector sub;
};

struct LogdetSolveResult {
    double logdet = 0;  // ln|L| where C = L L'
    Vector v;           // L^-1 z
};

/// One-pass Cholesky of a tridiagonal SPD matrix combined with the forward
/// solve v = L^-1 z. ln|L| is accumulated as a sum of logs.
LogdetSolveResult logdet_and_solve(const Vector& cdiag, const Vector& csub, const Vector& z);

/// Whitens correlated residuals and applies the Jacobian scaling of the
/// transformed-Gaussian likelihood: v = L^-1 eps, ln J = log_jacobian_phi - ln|L|,
/// u = v / J^(1/n).
UVector u_from_residuals(const Vector& epsilon, double log_jacobian_phi,
                         const TridiagonalCovariance& covariance);

/// J^(1/n) for a diagonal Jacobian of a Box-Cox response transform:
/// gm^(lambda-1) with gm the geometric mean of y.
double diagonal_jacobian_geomean(const Vector& y, double lambda);

struct SigmaEstimate {
    double sigma2 = 0;
    double sigma = 0;
};

/// ML variance estimate sigma^2 = J^(2/n) * S / n.
SigmaEstimate sigma2_hat(const UVector& u);

/// Maximized log-likelihood -(n/2) (ln(S/n) + ln(2 pi) + 1); valid at the
/// minimizing parameter values.
double log_likelihood_at_optimum(const UVector& u);

/// A log prior density over named parameters, for MAP estimation.
struct PriorDensity {
    std::string name;
    std::function<double(const Params&)> log_density;
};

/// Scales residuals by p(theta)^(-1/n); the prior plays the role of the
/// Jacobian in the weighted likelihood.
Vector map_weighted_residuals(const Vector& epsilon, const PriorDensity& prior,
                              const Params& theta);

}  // namespace sdefit
