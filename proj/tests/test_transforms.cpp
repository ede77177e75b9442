#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdefit/transforms.hpp"

using namespace sdefit;

TEST_CASE("box_cox basic values") {
    CHECK(box_cox(4.0, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
    for (double y : {0.3, 1.0, 2.5, 17.0}) CHECK(box_cox(y, 1.0) == doctest::Approx(y - 1.0));
    CHECK(box_cox(std::exp(1.0), 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(box_cox(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(box_cox(-1.0, 0.5), DomainError);
}

TEST_CASE("box_cox continuous at lambda = 0") {
    for (double y : {0.1, 1.0, 10.0})
        CHECK(std::abs(box_cox(y, 1e-10) - std::log(y)) < 1e-8);
}

TEST_CASE("power richards values") {
    CHECK(power_richards(4.0, 0.5) == doctest::Approx(2.0));
    // scale-aware variant is zero at H = a
    for (double c : {0.2, 0.5, 1.0, 1.7}) CHECK(richards_scale(3.7, 3.7, c) == doctest::Approx(0.0));
    // frozen from an independent scalar evaluation
    CHECK(power_richards(28.72, 0.49217) == doctest::Approx(5.220049648588059).epsilon(1e-12));
}

TEST_CASE("log_mult_richards values and singularity") {
    CHECK(log_mult_richards(0.0, 2.0, 1.0) == doctest::Approx(std::log(2.0)));
    CHECK(log_mult_richards(3.0, 4.0, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(log_mult_richards(2.0, 2.0, 1.0), DomainError);
}

namespace {

// central finite difference in x
double fd(const TransformFamily& f, double x, const Params& p) {
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    return (f.eval(x + h, p) - f.eval(x - h, p)) / (2 * h);
}

struct GridCase {
    const char* family;
    std::vector<Params> thetas;
    std::vector<double> xs;
};

std::vector<GridCase> grid_cases() {
    return {
        {"box_cox",
         {{{"lambda", 0.0}}, {{"lambda", 0.5}}, {{"lambda", 1.0}}, {{"lambda", -0.7}},
          {{"lambda", 2.0}}},
         {0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0, 90.0}},
        {"power_richards",
         {{{"c", 0.3}}, {{"c", 0.5}}, {{"c", 1.0}}, {{"c", 1.5}}, {{"c", 0.49217}}},
         {0.5, 1.0, 4.0, 10.0, 28.72, 41.74, 52.7, 60.92, 70.0, 80.0}},
        {"richards_scale",
         {{{"a", 70.0}, {"c", 0.5}}, {{"a", 70.0}, {"c", 0.05}}, {{"a", 100.0}, {"c", 1.0}},
          {{"a", 50.0}, {"c", 1.3}}, {{"a", 73.0}, {"c", 0.49}}},
         {0.5, 1.0, 4.0, 10.0, 28.0, 41.0, 52.0, 60.0, 65.0, 69.0}},
        {"log_mult_richards",
         {{{"a", 77.1}, {"c", 0.54946}}, {{"a", 80.0}, {"c", 1.0}}, {{"a", 70.0}, {"c", 0.3}},
          {{"a", 90.0}, {"c", 0.8}}, {{"a", 75.0}, {"c", 0.6}}},
         {0.5, 1.0, 4.51, 10.0, 28.0, 41.0, 52.0, 60.0, 64.0, 66.0}},
    };
}

}  // namespace

TEST_CASE("analytic derivative matches finite differences on the grid") {
    int points = 0;
    for (const auto& gc : grid_cases()) {
        const auto& fam = transform_registry(gc.family);
        for (const auto& th : gc.thetas)
            for (double x : gc.xs) {
                const double a = fam.derivative(x, th);
                const double n = fd(fam, x, th);
                CHECK(std::abs(a - n) <= 1e-6 * std::max(1.0, std::abs(n)));
                ++points;
            }
    }
    CHECK(points >= 100);
}

TEST_CASE("monotonicity on the grid, sign-adjusted") {
    for (const auto& gc : grid_cases()) {
        const auto& fam = transform_registry(gc.family);
        for (const auto& th : gc.thetas) {
            const double sign = fam.derivative(gc.xs.front(), th) >= 0 ? 1.0 : -1.0;
            for (size_t i = 1; i < gc.xs.size(); ++i) {
                CHECK(sign * fam.eval(gc.xs[i], th) > sign * fam.eval(gc.xs[i - 1], th));
            }
        }
    }
}

TEST_CASE("inverses round-trip") {
    for (const auto& gc : grid_cases()) {
        const auto& fam = transform_registry(gc.family);
        if (!fam.inverse) continue;
        for (const auto& th : gc.thetas)
            for (double x : gc.xs) {
                if (std::string(gc.family) == "log_mult_richards" && x <= 0) continue;
                const double y = fam.eval(x, th);
                CHECK(fam.inverse(y, th) == doctest::Approx(x).epsilon(1e-9));
            }
    }
}

TEST_CASE("registry lookup and registration") {
    CHECK_THROWS_AS(transform_registry("no_such_family"), ConfigError);
    TransformFamily f;
    f.name = "test_affine";
    f.parameter_names = {"k"};
    f.eval = [](double x, const Params& p) { return p.at("k") * x; };
    f.derivative = [](double, const Params& p) { return p.at("k"); };
    register_transform(f);
    CHECK(transform_registry("test_affine").eval(2.0, {{"k", 3.0}}) == doctest::Approx(6.0));
}
