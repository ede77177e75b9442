#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdefit/optimize.hpp"

using namespace sdefit;

TEST_CASE("linear least squares solves exactly") {
    FitProblem p;
    p.residuals = [](const Vector& th) {
        Vector r(2);
        r << th[0] - 1.0, th[1] + 2.0;
        return r;
    };
    p.bounds = Bounds::none(2);
    p.start = Vector::Zero(2);
    auto fit = fit_least_squares(p);
    CHECK(fit.converged);
    CHECK(fit.theta[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fit.theta[1] == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(fit.rss == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("rosenbrock-style curved residuals converge") {
    FitProblem p;
    p.residuals = [](const Vector& th) {
        Vector r(2);
        r << 10.0 * (th[1] - th[0] * th[0]), 1.0 - th[0];
        return r;
    };
    p.bounds = Bounds::none(2);
    p.start = Vector::Constant(2, -1.2);
    p.start[1] = 1.0;
    auto fit = fit_least_squares(p);
    CHECK(fit.theta[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.theta[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bounded minimum lands on the boundary and is flagged") {
    FitProblem p;
    p.residuals = [](const Vector& th) {
        Vector r(1);
        r << th[0] - 2.0;
        return r;
    };
    p.bounds.lower = Vector::Zero(1);
    p.bounds.upper = Vector::Ones(1);
    p.start = Vector::Constant(1, 0.5);
    auto fit = fit_least_squares(p);
    CHECK(fit.theta[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(fit.at_bound[0]);
}

TEST_CASE("rss is monotone over accepted iterations") {
    std::vector<double> trace;
    FitProblem p;
    p.residuals = [](const Vector& th) {
        Vector r(3);
        r << th[0] * th[0] - 2.0, th[1] - th[0], std::sin(th[1]);
        return r;
    };
    p.bounds = Bounds::none(2);
    p.start = Vector::Constant(2, 2.0);
    p.options.on_iteration = [&](int, double rss) { trace.push_back(rss); };
    fit_least_squares(p);
    REQUIRE(trace.size() > 1);
    for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
}

TEST_CASE("infeasible start is an error") {
    FitProblem p;
    p.residuals = [](const Vector&) -> Vector { throw DomainError("bad"); };
    p.bounds = Bounds::none(1);
    p.start = Vector::Zero(1);
    CHECK_THROWS_AS(fit_least_squares(p), ConfigError);
}

TEST_CASE("infeasible regions are stepped around") {
    // residual throws for negative arguments; minimum at sqrt(x) = 3
    FitProblem p;
    p.residuals = [](const Vector& th) {
        if (th[0] < 0) throw DomainError("negative");
        Vector r(1);
        r << std::sqrt(th[0]) - 3.0;
        return r;
    };
    p.bounds = Bounds::none(1);
    p.start = Vector::Constant(1, 0.5);
    auto fit = fit_least_squares(p);
    CHECK(fit.theta[0] == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("non-convergence reports best-so-far") {
    FitProblem p;
    p.residuals = [](const Vector& th) {
        Vector r(2);
        r << 10.0 * (th[1] - th[0] * th[0]), 1.0 - th[0];
        return r;
    };
    p.bounds = Bounds::none(2);
    p.start = Vector::Constant(2, -1.2);
    p.options.max_iter = 2;
    auto fit = fit_least_squares(p);
    CHECK_FALSE(fit.converged);
    CHECK(std::isfinite(fit.rss));
}

TEST_CASE("simplex recovers a quadratic optimum") {
    ScalarProblem p;
    Vector c(3);
    c << 0.3, -1.7, 2.2;
    p.value = [c](const Vector& th) { return (th - c).squaredNorm() + 5.0; };
    p.bounds = Bounds::none(3);
    p.start = Vector::Zero(3);
    auto fit = fit_direct_nll(p);
    for (Index i = 0; i < 3; ++i) CHECK(fit.theta[i] == doctest::Approx(c[i]).epsilon(1e-6));
    CHECK(fit.rss == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("information criteria") {
    auto [aic, bic] = information_criteria(-88.39581, 17, 84);
    CHECK(aic == doctest::Approx(210.7916).epsilon(1e-6));
    CHECK(bic == doctest::Approx(252.1155).epsilon(1e-6));
    auto [aic2, bic2] = information_criteria(-85.15201, 17, 84);
    CHECK(aic2 == doctest::Approx(204.3040).epsilon(1e-6));
    CHECK(bic2 == doctest::Approx(245.6279).epsilon(1e-6));
    auto [aic3, bic3] = information_criteria(0.0, 1, 1);
    CHECK(aic3 == doctest::Approx(2.0));
    CHECK(bic3 == doctest::Approx(0.0));
}
