#pragma once

#include <cstdint>
#include <random>

#include "sdefit/hierarchy.hpp"
#include "sdefit/sde_uni.hpp"
#include "sdefit/transforms.hpp"

namespace sdefit {

/// SplitMix64 step; used to derive independent per-trajectory seeds from a
/// master seed so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Normal variates via the Marsaglia polar method on top of std::mt19937_64.
/// Both pieces are fully specified, so streams are portable across platforms.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
    double operator()();  // standard normal

private:
    double uniform_pm1();  // uniform in (-1, 1)
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0;
};

struct TrajectorySpec {
    SdeParams params;  // beta0, beta1, x0, t0, transform_params (eta fields unused)
    double sigma_p = 0;
    double sigma_m = 0;
    double sigma_0 = 0;
    Vector times;
    std::string transform = "identity";
    std::uint64_t seed = 0;
};

struct SimulatedUnit {
    UnitData data;               // x on the original scale when invertible
    Vector y_transformed;        // observed y including measurement noise
    bool transformed_scale = false;  // true when no inverse transform exists
};

/// Exact sampling from the linear-SDE transition law with initial and
/// measurement noise. Deterministic for a given spec and seed.
SimulatedUnit simulate_trajectory(const TrajectorySpec& spec);

/// Multi-unit wrapper with per-unit seeds derived from the master seed.
std::vector<SimulatedUnit> simulate_units(const TrajectorySpec& spec, int n_units);

}  // namespace sdefit
