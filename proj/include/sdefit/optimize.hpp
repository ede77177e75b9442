#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sdefit/types.hpp"

namespace sdefit {

struct FitOptions {
    double rel_tol = 1e-10;    // relative RSS decrease
    double step_tol = 1e-10;   // internal step norm
    int max_iter = 500;
    int nm_max_evals = 20000;  // simplex budget
    std::function<void(int iteration, double rss)> on_iteration;  // after accepted steps
};

struct Bounds {
    Vector lower;  // -inf where unbounded
    Vector upper;  // +inf where unbounded
    static Bounds none(Index n) {
        Bounds b;
        b.lower = Vector::Constant(n, -std::numeric_limits<double>::infinity());
        b.upper = Vector::Constant(n, std::numeric_limits<double>::infinity());
        return b;
    }
};

/// Nonlinear least-squares problem over a flat parameter vector. The residual
/// function may throw; such points are treated as infeasible steps.
struct FitProblem {
    std::function<Vector(const Vector&)> residuals;
    Bounds bounds;
    Vector start;
    FitOptions options;
};

struct FitResult {
    Vector theta;
    double rss = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    std::vector<bool> at_bound;

    // filled by the model layer after the solve
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();
    double sigma_p = 0, sigma_m = 0, sigma_0 = 0;
    double aic = std::numeric_limits<double>::quiet_NaN();
    double bic = std::numeric_limits<double>::quiet_NaN();
    int df = 0;
    std::vector<std::string> names;
};

/// Levenberg-Marquardt with box bounds handled by smooth reparametrization
/// (logit-type for two-sided bounds, log-type for one-sided).
FitResult fit_least_squares(const FitProblem& problem);

/// Scalar objective minimized by Nelder-Mead under the same bound handling;
/// used for direct negative-log-likelihood cross-checks.
struct ScalarProblem {
    std::function<double(const Vector&)> value;
    Bounds bounds;
    Vector start;
    FitOptions options;
};

FitResult fit_direct_nll(const ScalarProblem& problem);

/// (aic, bic) from the maximized log-likelihood; df counts every estimated
/// parameter including sigma.
std::pair<double, double> information_criteria(double log_likelihood, int df, Index n);

namespace detail {

/// Smooth per-coordinate map between bounded external parameters and the
/// unconstrained internal coordinates the optimizers work in.
class BoundTransform {
public:
    BoundTransform(const Bounds& b);
    Vector to_internal(const Vector& external) const;
    Vector to_external(const Vector& internal) const;
    Index size() const { return lower_.size(); }

private:
    Vector lower_, upper_;
};

}  // namespace detail

}  // namespace sdefit
