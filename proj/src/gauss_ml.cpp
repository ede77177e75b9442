#include "sdefit/gauss_ml.hpp"

#include <cmath>
#include <limits>

namespace sdefit {

LogdetSolveResult logdet_and_solve(const Vector& cdiag, const Vector& csub, const Vector& z) {
    const Index n = z.size();
    if (n < 1 || cdiag.size() != n || csub.size() != n)
        throw DomainError("logdet_and_solve: inconsistent lengths");
    LogdetSolveResult out;
    out.v.resize(n);
    if (!(cdiag[0] > 0)) throw NotPositiveDefinite("covariance not positive definite at row 1");
    double ldiag = std::sqrt(cdiag[0]);
    out.logdet = std::log(ldiag);
    out.v[0] = z[0] / ldiag;
    for (Index i = 1; i < n; ++i) {
        const double lsub = csub[i] / ldiag;
        const double d = cdiag[i] - lsub * lsub;
        if (!(d > 0))
            throw NotPositiveDefinite("covariance not positive definite at row " +
                                      std::to_string(i + 1));
        ldiag = std::sqrt(d);
        out.logdet += std::log(ldiag);
        out.v[i] = (z[i] - lsub * out.v[i - 1]) / ldiag;
    }
    return out;
}

UVector u_from_residuals(const Vector& epsilon, double log_jacobian_phi,
                         const TridiagonalCovariance& covariance) {
    auto ld = logdet_and_solve(covariance.diag, covariance.sub, epsilon);
    UVector out;
    out.n = epsilon.size();
    out.log_jacobian = log_jacobian_phi - ld.logdet;
    out.u = ld.v / std::exp(out.log_jacobian / static_cast<double>(out.n));
    return out;
}

double diagonal_jacobian_geomean(const Vector& y, double lambda) {
    if (y.size() < 1) throw DomainError("diagonal_jacobian_geomean: empty vector");
    double mean_log = 0;
    for (Index i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0)) throw DomainError("diagonal_jacobian_geomean: non-positive value");
        mean_log += std::log(y[i]);
    }
    mean_log /= static_cast<double>(y.size());
    return std::exp((lambda - 1.0) * mean_log);
}

SigmaEstimate sigma2_hat(const UVector& u) {
    const double n = static_cast<double>(u.n);
    const double jn = std::exp(u.log_jacobian / n);
    SigmaEstimate out;
    out.sigma2 = jn * jn * u.sum_squares() / n;
    out.sigma = std::sqrt(out.sigma2);
    return out;
}

double log_likelihood_at_optimum(const UVector& u) {
    const double n = static_cast<double>(u.n);
    const double ms = u.sum_squares() / n;
    return -(n / 2.0) * (std::log(ms) + std::log(2.0 * M_PI) + 1.0);
}

Vector map_weighted_residuals(const Vector& epsilon, const PriorDensity& prior,
                              const Params& theta) {
    const double logp = prior.log_density(theta);
    if (!std::isfinite(logp))
        throw DomainError("prior '" + prior.name + "' has zero density at theta");
    const double n = static_cast<double>(epsilon.size());
    return epsilon * std::exp(-logp / n);
}

}  // namespace sdefit
