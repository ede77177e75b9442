#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sdefit/types.hpp"

namespace sdefit {

// Scalar kernels for the built-in variable transformations. The lambda = 0
// branch cutoff is 1e-9, so values below it evaluate as the logarithm.

template <typename Scalar>
Scalar box_cox(Scalar y, Scalar lambda) {
    if (!(y > Scalar(0))) throw DomainError("box_cox: y must be positive");
    if (std::abs(lambda) < Scalar(1e-9)) return std::log(y);
    return (std::pow(y, lambda) - Scalar(1)) / lambda;
}

template <typename Scalar>
Scalar box_cox_deriv(Scalar y, Scalar lambda) {
    if (!(y > Scalar(0))) throw DomainError("box_cox: y must be positive");
    return std::pow(y, lambda - Scalar(1));
}

template <typename Scalar>
Scalar box_cox_inverse(Scalar z, Scalar lambda) {
    if (std::abs(lambda) < Scalar(1e-9)) return std::exp(z);
    Scalar base = Scalar(1) + lambda * z;
    if (!(base > Scalar(0))) throw DomainError("box_cox inverse: out of range");
    return std::pow(base, Scalar(1) / lambda);
}

// y = H^c, the additive-noise Richards transform.
template <typename Scalar>
Scalar power_richards(Scalar H, Scalar c) {
    if (H < Scalar(0)) throw DomainError("power_richards: negative H");
    return std::pow(H, c);
}

template <typename Scalar>
Scalar power_richards_deriv(Scalar H, Scalar c) {
    if (H < Scalar(0)) throw DomainError("power_richards: negative H");
    return c * std::pow(H, c - Scalar(1));
}

// Scale-aware variant: the Box-Cox transform of H/a. Unlike box_cox it
// admits H = 0 when c > 0, where (H/a)^c is simply 0.
template <typename Scalar>
Scalar richards_scale(Scalar H, Scalar a, Scalar c) {
    if (!(a > Scalar(0))) throw DomainError("richards_scale: a must be positive");
    if (H < Scalar(0)) throw DomainError("richards_scale: negative H");
    if (std::abs(c) < Scalar(1e-9)) {
        if (!(H > Scalar(0))) throw DomainError("richards_scale: H must be positive at c = 0");
        return std::log(H / a);
    }
    return (std::pow(H / a, c) - Scalar(1)) / c;
}

template <typename Scalar>
Scalar richards_scale_deriv(Scalar H, Scalar a, Scalar c) {
    if (!(a > Scalar(0))) throw DomainError("richards_scale: a must be positive");
    return std::pow(H / a, c - Scalar(1)) / a;
}

// y = ln|a^c - H^c|, the Lamperti transform for multiplicative noise.
template <typename Scalar>
Scalar log_mult_richards(Scalar H, Scalar a, Scalar c) {
    if (H < Scalar(0)) throw DomainError("log_mult_richards: negative H");
    if (!(a > Scalar(0))) throw DomainError("log_mult_richards: a must be positive");
    Scalar gap = std::pow(a, c) - std::pow(H, c);
    if (std::abs(gap) < Scalar(1e-12))
        throw DomainError("log_mult_richards: singular at H^c = a^c");
    return std::log(std::abs(gap));
}

template <typename Scalar>
Scalar log_mult_richards_deriv(Scalar H, Scalar a, Scalar c) {
    Scalar gap = std::pow(a, c) - std::pow(H, c);
    if (std::abs(gap) < Scalar(1e-12))
        throw DomainError("log_mult_richards: singular at H^c = a^c");
    return -c * std::pow(H, c - Scalar(1)) / gap;
}

/// An invertible differentiable scalar map y = phi(x, theta) with its
/// analytic x-derivative. New families register through register_transform.
struct TransformFamily {
    std::string name;
    std::vector<std::string> parameter_names;
    std::function<double(double, const Params&)> eval;
    std::function<double(double, const Params&)> derivative;
    std::function<double(double, const Params&)> inverse;  // may be empty

    double operator()(double x, const Params& p) const { return eval(x, p); }

    Vector eval_all(const Vector& x, const Params& p) const {
        Vector y(x.size());
        for (Index i = 0; i < x.size(); ++i) y[i] = eval(x[i], p);
        return y;
    }

    /// sum_i ln|phi'(x_i)|
    double log_jacobian(const Vector& x, const Params& p) const {
        double s = 0;
        for (Index i = 0; i < x.size(); ++i) s += std::log(std::abs(derivative(x[i], p)));
        return s;
    }
};

/// Look up a built-in or registered family by name. Throws ConfigError.
const TransformFamily& transform_registry(const std::string& name);

/// Register a user-defined family (replaces an existing one of the same name).
void register_transform(TransformFamily family);

}  // namespace sdefit
