#pragma once

#include <cmath>

#include "sdefit/gauss_ml.hpp"
#include "sdefit/transforms.hpp"
#include "sdefit/types.hpp"

namespace sdefit {

/// (e^x - 1) / x, continuous through x = 0.
template <typename Scalar>
Scalar expm1_over_x(Scalar x) {
    if (std::abs(x) < Scalar(1e-8)) return Scalar(1) + x / Scalar(2) + x * x / Scalar(6);
    return std::expm1(x) / x;
}

/// Parameters of the linear SDE dY = (beta0 + beta1 Y) dt + sigma_p dW on the
/// transformed scale, with the sigma^2/eta re-parametrization of the noise.
struct SdeParams {
    double beta0 = 0;
    double beta1 = 0;
    double eta = 0;    // relative measurement variance, in [0, 1]
    double eta0 = 0;   // relative initial-condition variance, >= 0
    double x0 = 0;     // initial state, original scale
    double t0 = 0;
    Params transform_params;
};

/// Per-unit multipliers on sigma_m, sigma_0, sigma_p (default 1).
struct SigmaMultipliers {
    double mu_m = 1;
    double mu_0 = 1;
    double mu_p = 1;
};

struct ConditionalResiduals {
    Vector z;   // z_i = y_i - E[y_i | y_{i-1}]
    Vector dt;  // t_i - t_{i-1}, with t_0 from the parameters
};

inline bool beta1_is_zero(double beta1) { return std::abs(beta1) < 1e-12; }

/// Conditional residuals of consecutive transformed observations. y must be
/// ordered by strictly increasing t; y0 = phi(x0) is taken from params via
/// the caller (passed as y0 here to keep this free of the transform).
ConditionalResiduals conditional_residuals_y(const Vector& y, const Vector& t, double y0,
                                             const SdeParams& params);

/// Convenience overload evaluating y = phi(x) itself.
ConditionalResiduals conditional_residuals(const Vector& x, const Vector& t,
                                           const SdeParams& params,
                                           const TransformFamily& transform);

/// Tridiagonal covariance entries of z under the sigma^2/eta parametrization,
/// optionally with per-unit sigma multipliers. The (e^(2 b dt) - 1)/(2 b)
/// factor is evaluated through expm1_over_x so beta1 -> 0 limits to dt.
TridiagonalCovariance covariance_entries(const Vector& dt, const SdeParams& params,
                                         const SigmaMultipliers& mult = {});

/// Unnormalized variant: entries built directly from absolute variances
/// (wm = sigma_m^2, w0 = sigma_0^2, wp = sigma_p^2). Shared kernel for the
/// direct-likelihood oracle.
TridiagonalCovariance covariance_entries_raw(const Vector& dt, double beta1, double wm,
                                             double w0, double wp);

struct FinalStats {
    double sigma_p = 0, sigma_m = 0, sigma_0 = 0;
    double sigma2 = 0;
    double rss = 0;
    double log_likelihood = 0;
    Index n = 0;
};

/// Whitened but not yet J^(1/n)-scaled residuals of one unit, with the
/// unit's ln J contribution (transform Jacobian minus ln|L|).
struct WhitenedUnit {
    Vector v;
    double log_jacobian = 0;
};

WhitenedUnit whitened_unit(const Vector& x, const Vector& t, const SdeParams& params,
                           const TransformFamily& transform, const SigmaMultipliers& mult = {});

/// Whitened residual vector for a single unit: sorts by t, transforms,
/// whitens via the tridiagonal Cholesky and scales by J^(1/n).
/// Duplicate observation times are rejected.
UVector uvector(const Vector& x, const Vector& t, const SdeParams& params,
                const TransformFamily& transform, const SigmaMultipliers& mult = {});

/// Sigma estimates and maximized log-likelihood at the fitted parameters.
FinalStats uvector_final(const Vector& x, const Vector& t, const SdeParams& params,
                         const TransformFamily& transform, const SigmaMultipliers& mult = {});

/// FinalStats from an already computed u-vector (shared by the hierarchical path).
FinalStats final_stats_from(const UVector& u, double eta, double eta0);

}  // namespace sdefit
