#include "sdefit/optimize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdefit {

namespace detail {

namespace {
double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
}  // namespace

BoundTransform::BoundTransform(const Bounds& b) : lower_(b.lower), upper_(b.upper) {
    for (Index k = 0; k < size(); ++k)
        if (!(lower_[k] <= upper_[k])) throw ConfigError("lower bound exceeds upper bound");
}

Vector BoundTransform::to_internal(const Vector& external) const {
    Vector psi(size());
    for (Index k = 0; k < size(); ++k) {
        const double lo = lower_[k], hi = upper_[k], th = external[k];
        const bool blo = std::isfinite(lo), bhi = std::isfinite(hi);
        if (!blo && !bhi) {
            psi[k] = th;
        } else if (blo && bhi) {
            const double range = hi - lo;
            double f = (th - lo) / range;
            f = std::min(std::max(f, 1e-8), 1.0 - 1e-8);
            psi[k] = std::log(f / (1.0 - f));
        } else if (blo) {
            psi[k] = std::log(std::max(th - lo, 1e-10 * std::max(1.0, std::abs(lo))));
        } else {
            psi[k] = std::log(std::max(hi - th, 1e-10 * std::max(1.0, std::abs(hi))));
        }
    }
    return psi;
}

Vector BoundTransform::to_external(const Vector& internal) const {
    Vector th(size());
    for (Index k = 0; k < size(); ++k) {
        const double lo = lower_[k], hi = upper_[k], psi = internal[k];
        const bool blo = std::isfinite(lo), bhi = std::isfinite(hi);
        if (!blo && !bhi)
            th[k] = psi;
        else if (blo && bhi)
            th[k] = lo + (hi - lo) * logistic(psi);
        else if (blo)
            th[k] = lo + std::exp(psi);
        else
            th[k] = hi - std::exp(psi);
    }
    return th;
}

}  // namespace detail

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Evaluate residuals; exceptions and non-finite entries become an infeasible
// step, which the solvers reject.
bool try_residuals(const FitProblem& p, const Vector& theta, Vector& r, double& rss) {
    try {
        r = p.residuals(theta);
    } catch (const std::exception&) {
        rss = kInf;
        return false;
    }
    if (!r.allFinite()) {
        rss = kInf;
        return false;
    }
    rss = r.squaredNorm();
    return std::isfinite(rss);
}

std::vector<bool> bound_flags(const Vector& theta, const Bounds& b) {
    std::vector<bool> flags(theta.size(), false);
    for (Index k = 0; k < theta.size(); ++k) {
        if (std::isfinite(b.lower[k]) && std::abs(theta[k] - b.lower[k]) < 1e-6) flags[k] = true;
        if (std::isfinite(b.upper[k]) && std::abs(b.upper[k] - theta[k]) < 1e-6) flags[k] = true;
    }
    return flags;
}

}  // namespace

FitResult fit_least_squares(const FitProblem& problem) {
    const detail::BoundTransform bt(problem.bounds);
    const Index p = problem.start.size();
    Vector psi = bt.to_internal(problem.start);

    Vector r;
    double rss;
    if (!try_residuals(problem, bt.to_external(psi), r, rss))
        throw ConfigError("infeasible start: residuals not finite");
    const Index m = r.size();
    if (m < p) throw ConfigError("fewer residuals than free parameters");

    FitResult out;
    out.theta = bt.to_external(psi);
    out.rss = rss;

    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;

    Eigen::MatrixXd J(m, p);
    while (iter < problem.options.max_iter && !converged) {
        ++iter;
        // forward-difference Jacobian in the internal coordinates
        for (Index k = 0; k < p; ++k) {
            const double h = std::max(1e-7, 1e-7 * std::abs(psi[k]));
            Vector psik = psi;
            psik[k] += h;
            Vector rk;
            double rssk;
            if (!try_residuals(problem, bt.to_external(psik), rk, rssk)) {
                psik[k] = psi[k] - h;  // fall back to a backward step
                if (!try_residuals(problem, bt.to_external(psik), rk, rssk)) {
                    J.col(k).setZero();
                    continue;
                }
                J.col(k) = (r - rk) / h;
                continue;
            }
            J.col(k) = (rk - r) / h;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Vector g = J.transpose() * r;
        const double diag_floor = 1e-12 * std::max(1.0, JtJ.diagonal().maxCoeff());

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd A = JtJ;
            for (Index k = 0; k < p; ++k)
                A(k, k) += lambda * std::max(JtJ(k, k), diag_floor);
            const Vector step = A.ldlt().solve(-g);
            Vector rnew;
            double rssnew;
            const bool ok = try_residuals(problem, bt.to_external(psi + step), rnew, rssnew);
            if (ok && rssnew < rss) {
                const double decrease = rss - rssnew;
                psi += step;
                r = rnew;
                rss = rssnew;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (problem.options.on_iteration) problem.options.on_iteration(iter, rss);
                if (decrease <= problem.options.rel_tol * std::max(rss, 1e-300) ||
                    step.norm() <= problem.options.step_tol * (1.0 + psi.norm()))
                    converged = true;
            } else {
                lambda *= 4.0;
                if (lambda > 1e14) {
                    // no descent direction left at numerical precision
                    converged = g.lpNorm<Eigen::Infinity>() <=
                                1e-6 * std::max(1.0, rss);
                    accepted = true;  // leave the loop; nothing was changed
                }
            }
        }
        if (lambda > 1e14) break;
    }

    out.theta = bt.to_external(psi);
    out.rss = rss;
    out.iterations = iter;
    out.converged = converged;
    out.at_bound = bound_flags(out.theta, problem.bounds);
    return out;
}

FitResult fit_direct_nll(const ScalarProblem& problem) {
    const detail::BoundTransform bt(problem.bounds);
    const Index p = problem.start.size();

    auto feval = [&](const Vector& psi) -> double {
        try {
            const double f = problem.value(bt.to_external(psi));
            return std::isfinite(f) ? f : kInf;
        } catch (const std::exception&) {
            return kInf;
        }
    };

    Vector best = bt.to_internal(problem.start);
    double fbest = feval(best);
    if (!std::isfinite(fbest)) throw ConfigError("infeasible start: objective not finite");

    int evals = 0;
    bool converged = false;

    // Nelder-Mead with a couple of restarts around the incumbent
    for (int round = 0; round < 3; ++round) {
        std::vector<Vector> simplex(p + 1, best);
        std::vector<double> fval(p + 1);
        for (Index k = 0; k < p; ++k)
            simplex[k + 1][k] += (std::abs(best[k]) > 1e-8) ? 0.1 * std::abs(best[k]) : 0.1;
        for (Index i = 0; i <= p; ++i) fval[i] = feval(simplex[i]);
        evals += p + 1;

        while (evals < problem.options.nm_max_evals) {
            std::vector<Index> order(p + 1);
            std::iota(order.begin(), order.end(), Index{0});
            std::sort(order.begin(), order.end(),
                      [&](Index a, Index b) { return fval[a] < fval[b]; });
            const Index lo = order[0], hi = order[p], nh = order[p - 1];
            if (std::isfinite(fval[hi]) &&
                fval[hi] - fval[lo] <= 1e-12 * (std::abs(fval[lo]) + 1e-12)) {
                converged = true;
                break;
            }
            Vector centroid = Vector::Zero(p);
            for (Index i = 0; i <= p; ++i)
                if (i != hi) centroid += simplex[i];
            centroid /= static_cast<double>(p);

            const Vector xr = centroid + (centroid - simplex[hi]);
            const double fr = feval(xr);
            ++evals;
            if (fr < fval[lo]) {
                const Vector xe = centroid + 2.0 * (centroid - simplex[hi]);
                const double fe = feval(xe);
                ++evals;
                if (fe < fr) {
                    simplex[hi] = xe;
                    fval[hi] = fe;
                } else {
                    simplex[hi] = xr;
                    fval[hi] = fr;
                }
            } else if (fr < fval[nh]) {
                simplex[hi] = xr;
                fval[hi] = fr;
            } else {
                const Vector xc = centroid + 0.5 * (simplex[hi] - centroid);
                const double fc = feval(xc);
                ++evals;
                if (fc < fval[hi]) {
                    simplex[hi] = xc;
                    fval[hi] = fc;
                } else {
                    for (Index i = 0; i <= p; ++i) {
                        if (i == lo) continue;
                        simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
                        fval[i] = feval(simplex[i]);
                    }
                    evals += p;
                }
            }
        }
        Index lo = 0;
        for (Index i = 1; i <= p; ++i)
            if (fval[i] < fval[lo]) lo = i;
        if (fval[lo] < fbest) {
            fbest = fval[lo];
            best = simplex[lo];
        }
    }

    FitResult out;
    out.theta = bt.to_external(best);
    out.rss = fbest;  // the objective value; callers interpret as NLL
    out.iterations = evals;
    out.converged = converged;
    out.at_bound = bound_flags(out.theta, problem.bounds);
    return out;
}

std::pair<double, double> information_criteria(double log_likelihood, int df, Index n) {
    if (n < 1 || df < 1) throw ConfigError("information_criteria: need n >= 1 and df >= 1");
    const double aic = 2.0 * df - 2.0 * log_likelihood;
    const double bic = df * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
    return {aic, bic};
}

}  // namespace sdefit
