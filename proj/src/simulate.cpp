#include "sdefit/simulate.hpp"

#include <cmath>

namespace sdefit {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double NormalSampler::uniform_pm1() {
    // 53-bit mantissa uniform in [0,1), shifted to (-1,1)
    const double u = (engine_() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

double NormalSampler::operator()() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double x, y, s;
    do {
        x = uniform_pm1();
        y = uniform_pm1();
        s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = y * f;
    have_spare_ = true;
    return x * f;
}

SimulatedUnit simulate_trajectory(const TrajectorySpec& spec) {
    const Index n = spec.times.size();
    for (Index i = 1; i < n; ++i)
        if (!(spec.times[i] > spec.times[i - 1]))
            throw DataError("simulate: times must be strictly increasing");
    if (n > 0 && !(spec.times[0] > spec.params.t0))
        throw DataError("simulate: first time must exceed t0");

    const TransformFamily& tf = transform_registry(spec.transform);
    NormalSampler normal(spec.seed);

    const double y0_mean = tf.eval(spec.params.x0, spec.params.transform_params);
    double ylat = y0_mean + spec.sigma_0 * normal();

    SimulatedUnit out;
    out.data.t = spec.times;
    out.data.x.resize(n);
    out.y_transformed.resize(n);
    out.data.x0 = spec.params.x0;
    out.data.t0 = spec.params.t0;
    out.data.unit_id = "sim";

    const double b0 = spec.params.beta0, b1 = spec.params.beta1;
    double tprev = spec.params.t0;
    for (Index i = 0; i < n; ++i) {
        const double dt = spec.times[i] - tprev;
        tprev = spec.times[i];
        double mean, var;
        if (beta1_is_zero(b1)) {
            mean = ylat + b0 * dt;
            var = spec.sigma_p * spec.sigma_p * dt;
        } else {
            const double ratio = b0 / b1;
            mean = -ratio + std::exp(b1 * dt) * (ylat + ratio);
            var = spec.sigma_p * spec.sigma_p * dt * expm1_over_x(2.0 * b1 * dt);
        }
        ylat = mean + std::sqrt(var) * normal();
        out.y_transformed[i] = ylat + spec.sigma_m * normal();
    }

    if (tf.inverse) {
        for (Index i = 0; i < n; ++i)
            out.data.x[i] = tf.inverse(out.y_transformed[i], spec.params.transform_params);
    } else {
        out.data.x = out.y_transformed;
        out.transformed_scale = true;
    }
    return out;
}

std::vector<SimulatedUnit> simulate_units(const TrajectorySpec& spec, int n_units) {
    std::vector<SimulatedUnit> out;
    out.reserve(n_units);
    for (int k = 0; k < n_units; ++k) {
        TrajectorySpec s = spec;
        s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(k));
        out.push_back(simulate_trajectory(s));
        out.back().data.unit_id = "sim" + std::to_string(k + 1);
    }
    return out;
}

}  // namespace sdefit
