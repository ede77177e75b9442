#include "sdefit/sde_uni.hpp"

#include <algorithm>
#include <numeric>

namespace sdefit {

namespace {

// stable sort indices by time; rejects duplicates since dt = 0 degenerates C
std::vector<Index> sorted_order(const Vector& t) {
    std::vector<Index> idx(t.size());
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return t[a] < t[b]; });
    for (size_t k = 1; k < idx.size(); ++k)
        if (t[idx[k]] == t[idx[k - 1]])
            throw DataError("duplicate observation time t = " + std::to_string(t[idx[k]]));
    return idx;
}

}  // namespace

ConditionalResiduals conditional_residuals_y(const Vector& y, const Vector& t, double y0,
                                             const SdeParams& params) {
    const Index n = y.size();
    if (t.size() != n) throw DataError("conditional_residuals: size mismatch");
    ConditionalResiduals out;
    out.z.resize(n);
    out.dt.resize(n);
    double tprev = params.t0;
    for (Index i = 0; i < n; ++i) {
        out.dt[i] = t[i] - tprev;
        if (!(out.dt[i] > 0)) throw DataError("observation times must be strictly increasing");
        tprev = t[i];
    }
    if (beta1_is_zero(params.beta1)) {
        for (Index i = 0; i < n; ++i) {
            const double yprev = (i == 0) ? y0 : y[i - 1];
            out.z[i] = y[i] - yprev - params.beta0 * out.dt[i];
        }
    } else {
        // z = y_i + b0/b1 - e^(b1 dt) (y_{i-1} + b0/b1), written without the
        // b0/b1 cancellation so small beta1 stays accurate
        for (Index i = 0; i < n; ++i) {
            const double yprev = (i == 0) ? y0 : y[i - 1];
            const double bdt = params.beta1 * out.dt[i];
            out.z[i] = y[i] - std::exp(bdt) * yprev -
                       params.beta0 * out.dt[i] * expm1_over_x(bdt);
        }
    }
    return out;
}

ConditionalResiduals conditional_residuals(const Vector& x, const Vector& t,
                                           const SdeParams& params,
                                           const TransformFamily& transform) {
    auto order = sorted_order(t);
    Vector xs(x.size()), ts(t.size());
    for (size_t k = 0; k < order.size(); ++k) {
        xs[k] = x[order[k]];
        ts[k] = t[order[k]];
    }
    const Vector y = transform.eval_all(xs, params.transform_params);
    const double y0 = transform.eval(params.x0, params.transform_params);
    return conditional_residuals_y(y, ts, y0, params);
}

TridiagonalCovariance covariance_entries_raw(const Vector& dt, double beta1, double wm,
                                             double w0, double wp) {
    const Index n = dt.size();
    TridiagonalCovariance C;
    C.diag.resize(n);
    C.sub.resize(n);
    C.sub[0] = 0;
    if (beta1_is_zero(beta1)) {
        for (Index i = 0; i < n; ++i) {
            C.diag[i] = (i == 0 ? wm + w0 : 2 * wm) + wp * dt[i];
            if (i > 0) C.sub[i] = -wm;
        }
    } else {
        for (Index i = 0; i < n; ++i) {
            const double ex = std::exp(beta1 * dt[i]);
            const double ex2 = ex * ex;
            const double fac = dt[i] * expm1_over_x(2 * beta1 * dt[i]);
            if (i == 0)
                C.diag[i] = ex2 * w0 + wm + wp * fac;
            else
                C.diag[i] = (ex2 + 1) * wm + wp * fac;
            if (i > 0) C.sub[i] = -ex * wm;
        }
    }
    return C;
}

TridiagonalCovariance covariance_entries(const Vector& dt, const SdeParams& params,
                                         const SigmaMultipliers& mult) {
    const double wm = mult.mu_m * mult.mu_m * params.eta;
    const double w0 = mult.mu_0 * mult.mu_0 * params.eta0;
    const double wp = mult.mu_p * mult.mu_p * (1.0 - params.eta);
    return covariance_entries_raw(dt, params.beta1, wm, w0, wp);
}

WhitenedUnit whitened_unit(const Vector& x, const Vector& t, const SdeParams& params,
                           const TransformFamily& transform, const SigmaMultipliers& mult) {
    auto order = sorted_order(t);
    Vector xs(x.size()), ts(t.size());
    for (size_t k = 0; k < order.size(); ++k) {
        xs[k] = x[order[k]];
        ts[k] = t[order[k]];
    }
    const Vector y = transform.eval_all(xs, params.transform_params);
    const double y0 = transform.eval(params.x0, params.transform_params);
    const auto resid = conditional_residuals_y(y, ts, y0, params);
    const auto C = covariance_entries(resid.dt, params, mult);
    const auto ld = logdet_and_solve(C.diag, C.sub, resid.z);
    WhitenedUnit out;
    out.v = ld.v;
    out.log_jacobian = transform.log_jacobian(xs, params.transform_params) - ld.logdet;
    return out;
}

UVector uvector(const Vector& x, const Vector& t, const SdeParams& params,
                const TransformFamily& transform, const SigmaMultipliers& mult) {
    auto w = whitened_unit(x, t, params, transform, mult);
    UVector out;
    out.n = w.v.size();
    out.log_jacobian = w.log_jacobian;
    out.u = w.v / std::exp(w.log_jacobian / static_cast<double>(out.n));
    return out;
}

FinalStats final_stats_from(const UVector& u, double eta, double eta0) {
    FinalStats out;
    out.n = u.n;
    out.rss = u.sum_squares();
    const auto est = sigma2_hat(u);
    out.sigma2 = est.sigma2;
    out.sigma_p = std::sqrt((1.0 - eta) * est.sigma2);
    out.sigma_m = std::sqrt(eta * est.sigma2);
    out.sigma_0 = std::sqrt(eta0 * est.sigma2);
    out.log_likelihood = log_likelihood_at_optimum(u);
    return out;
}

FinalStats uvector_final(const Vector& x, const Vector& t, const SdeParams& params,
                         const TransformFamily& transform, const SigmaMultipliers& mult) {
    return final_stats_from(uvector(x, t, params, transform, mult), params.eta, params.eta0);
}

}  // namespace sdefit
