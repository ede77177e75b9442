#pragma once

#include "sdefit/optimize.hpp"
#include "sdefit/simulate.hpp"

namespace sdefit {

/// Simulate-then-estimate consistency harness for the linear-SDE estimator.
struct RecoveryTruth {
    double beta0 = 0;
    double beta1 = 0;
    double sigma_p = 0;
    double sigma_m = 0;
    double x0 = 0;
    double t0 = 0;
    std::string transform = "identity";
    Params transform_params;
};

struct RecoveryReport {
    double beta0_hat = 0;
    double beta1_hat = 0;
    double eta_hat = 0;  // meaningful when fit_eta
    bool converged = false;
    double rss = 0;
};

/// Simulates n_units trajectories at n_times equally spaced times in (t0, t_end]
/// and refits the generating model. fit_eta frees the relative measurement
/// variance; otherwise eta is fixed at 0.
RecoveryReport recover_parameters_test(const RecoveryTruth& truth, int n_units, int n_times,
                                       double t_end, std::uint64_t seed, bool fit_eta);

}  // namespace sdefit
