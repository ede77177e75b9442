#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "sdefit/sde_uni.hpp"

using namespace sdefit;

namespace {

// Loblolly pine tree 301 of the bundled fixture (heights at ages 3..25)
Vector tree301_x() {
    Vector x(6);
    x << 4.51, 10.89, 28.72, 41.74, 52.70, 60.92;
    return x;
}
Vector tree301_t() {
    Vector t(6);
    t << 3, 5, 10, 15, 20, 25;
    return t;
}

}  // namespace

TEST_CASE("expm1_over_x is stable through zero") {
    CHECK(expm1_over_x(0.0) == doctest::Approx(1.0));
    CHECK(expm1_over_x(1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(expm1_over_x(0.5) == doctest::Approx((std::exp(0.5) - 1.0) / 0.5).epsilon(1e-14));
    CHECK(expm1_over_x(-2.0) == doctest::Approx((std::exp(-2.0) - 1.0) / -2.0).epsilon(1e-14));
}

TEST_CASE("conditional residuals vanish for exact trajectories") {
    SdeParams p;
    p.beta0 = 0;
    p.beta1 = 0;
    Vector y = Vector::Constant(4, 3.3);
    Vector t(4);
    t << 1, 2, 3, 4;
    auto r = conditional_residuals_y(y, t, 3.3, p);
    CHECK(r.z.lpNorm<Eigen::Infinity>() < 1e-14);

    // deterministic linear growth with beta1 = 0, beta0 = 1
    p.beta0 = 1;
    Vector y2 = t;
    auto r2 = conditional_residuals_y(y2, t, 0.0, p);
    CHECK(r2.z.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("non-increasing times are rejected") {
    SdeParams p;
    Vector y(3), t(3);
    y << 1, 2, 3;
    t << 1, 1, 2;
    CHECK_THROWS_AS(conditional_residuals_y(y, t, 0.0, p), DataError);
    Vector x(3), tdup(3);
    x << 1, 2, 3;
    tdup << 2, 1, 2;
    CHECK_THROWS_AS(uvector(x, tdup, p, transform_registry("identity")), DataError);
}

TEST_CASE("covariance entries, beta1 = 0 hand case") {
    SdeParams p;
    p.beta1 = 0;
    p.eta = 0.5;
    p.eta0 = 0;
    Vector dt = Vector::Ones(3);
    auto C = covariance_entries(dt, p);
    CHECK(C.diag[0] == doctest::Approx(1.0));
    CHECK(C.diag[1] == doctest::Approx(1.5));
    CHECK(C.diag[2] == doctest::Approx(1.5));
    CHECK(C.sub[1] == doctest::Approx(-0.5));
    CHECK(C.sub[2] == doctest::Approx(-0.5));
}

TEST_CASE("eta = 0 gives a diagonal covariance") {
    SdeParams p;
    p.beta1 = -0.3;
    p.eta = 0;
    Vector dt(4);
    dt << 1, 2, 0.5, 3;
    auto C = covariance_entries(dt, p);
    for (Index i = 1; i < 4; ++i) CHECK(C.sub[i] == doctest::Approx(0.0));
    // and the u-vector equals the whitened independent increments
    SdeParams q = p;
    q.beta0 = 0.4;
    Vector t(4), x(4);
    t << 1, 3, 3.5, 6.5;
    x << 0.2, 0.5, 0.4, 1.0;
    q.t0 = 0;
    q.x0 = 0.1;
    auto u = uvector(x, t, q, transform_registry("identity"));
    auto resid = conditional_residuals_y(x, t, 0.1, q);
    auto C2 = covariance_entries(resid.dt, q);
    double logdet = 0;
    for (Index i = 0; i < 4; ++i) logdet += 0.5 * std::log(C2.diag[i]);
    const double jn = std::exp(-logdet / 4.0);
    for (Index i = 0; i < 4; ++i)
        CHECK(u.u[i] == doctest::Approx(resid.z[i] / std::sqrt(C2.diag[i]) / jn));
}

TEST_CASE("unit Jacobian of the y -> z map") {
    SdeParams p;
    p.beta0 = 0.7;
    p.beta1 = -0.4;
    p.t0 = 0;
    Vector t(5);
    t << 0.5, 1.5, 2.0, 3.5, 4.0;
    Vector y(5);
    y << 1.0, 1.4, 1.1, 0.9, 1.2;
    const double y0 = 0.8;
    const double h = 1e-6;
    Matrix J(5, 5);
    for (Index j = 0; j < 5; ++j) {
        Vector yp = y, ym = y;
        yp[j] += h;
        ym[j] -= h;
        J.col(j) = (conditional_residuals_y(yp, t, y0, p).z -
                    conditional_residuals_y(ym, t, y0, p).z) /
                   (2 * h);
    }
    CHECK(std::abs(std::abs(J.determinant()) - 1.0) < 1e-8);
}

TEST_CASE("beta1 -> 0 continuity of the u-vector") {
    Vector x(6), t(6);
    x << 0.31, 0.58, 0.94, 1.12, 1.27, 1.41;
    t << 1, 2, 3, 4, 5, 6;
    SdeParams p;
    p.beta0 = 0.25;
    p.eta = 0.4;
    p.eta0 = 0.1;
    p.x0 = 0.1;
    p.t0 = 0;
    const auto& tf = transform_registry("identity");
    SdeParams pz = p;
    pz.beta1 = 0;
    auto u0 = uvector(x, t, pz, tf);
    for (double b1 : {1e-7, -1e-7}) {
        SdeParams pb = p;
        pb.beta1 = b1;
        auto ub = uvector(x, t, pb, tf);
        CHECK((ub.u - u0.u).lpNorm<Eigen::Infinity>() < 1e-5);
        CHECK(std::abs(ub.log_jacobian - u0.log_jacobian) < 1e-5);
    }
}

TEST_CASE("sigma split identity") {
    Vector x = tree301_x(), t = tree301_t();
    SdeParams p;
    p.beta0 = 0.0967 * std::pow(72.5459, 0.5024);
    p.beta1 = -0.0967;
    p.eta = 0.37;
    p.eta0 = 0.0;
    p.transform_params = {{"c", 0.5024}};
    auto fin = uvector_final(x, t, p, transform_registry("power_richards"));
    CHECK(fin.sigma_p * fin.sigma_p + fin.sigma_m * fin.sigma_m ==
          doctest::Approx(fin.sigma2).epsilon(1e-12));
}

TEST_CASE("tree 301, additive-noise model at the published estimates") {
    Vector x = tree301_x(), t = tree301_t();
    SdeParams p;
    p.beta0 = 0.0967 * std::pow(72.5459, 0.5024);
    p.beta1 = -0.0967;
    p.eta = 1.0;
    p.eta0 = 0.0;
    p.x0 = 0;
    p.t0 = 0;
    p.transform_params = {{"c", 0.5024}};
    const auto& tf = transform_registry("power_richards");
    auto u = uvector(x, t, p, tf);
    CHECK(u.sum_squares() == doctest::Approx(1.327).epsilon(5e-4));
    auto fin = uvector_final(x, t, p, tf);
    CHECK(fin.sigma_m == doctest::Approx(0.04865072).epsilon(2e-7));
    CHECK(fin.sigma_p == doctest::Approx(0.0));
    CHECK(fin.log_likelihood == doctest::Approx(-3.9882).epsilon(1e-5));
}

TEST_CASE("tree 301, multiplicative-noise model at the published estimates") {
    Vector x = tree301_x(), t = tree301_t();
    SdeParams p;
    p.beta0 = -0.08405;
    p.beta1 = 0.0;
    p.eta = 1.0;
    p.eta0 = 0.0;
    p.x0 = 0;
    p.t0 = 0;
    p.transform_params = {{"a", 77.10687}, {"c", 0.54946}};
    const auto& tf = transform_registry("log_mult_richards");
    auto fin = uvector_final(x, t, p, tf);
    CHECK(fin.rss == doctest::Approx(1.154).epsilon(5e-4));
    CHECK(fin.sigma_m == doctest::Approx(0.01576683).epsilon(2e-6));
    CHECK(fin.log_likelihood == doctest::Approx(-3.568224).epsilon(1e-6));
}
