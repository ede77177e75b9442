#include "sdefit/recovery.hpp"

#include "sdefit/hierarchy.hpp"

namespace sdefit {

RecoveryReport recover_parameters_test(const RecoveryTruth& truth, int n_units, int n_times,
                                       double t_end, std::uint64_t seed, bool fit_eta) {
    TrajectorySpec spec;
    spec.params.beta0 = truth.beta0;
    spec.params.beta1 = truth.beta1;
    spec.params.x0 = truth.x0;
    spec.params.t0 = truth.t0;
    spec.params.transform_params = truth.transform_params;
    spec.transform = truth.transform;
    spec.sigma_p = truth.sigma_p;
    spec.sigma_m = truth.sigma_m;
    spec.seed = seed;
    spec.times.resize(n_times);
    for (int i = 0; i < n_times; ++i)
        spec.times[i] = truth.t0 + (t_end - truth.t0) * (i + 1) / static_cast<double>(n_times);

    std::vector<UnitData> units;
    for (const auto& sim : simulate_units(spec, n_units)) units.push_back(sim.data);

    std::vector<ParameterSpec> specs;
    specs.push_back({"beta0", truth.beta0 + 0.2, -1e6, 1e6, false, Scope::Global});
    specs.push_back({"beta1", truth.beta1 - 0.05, -1e6, 1e6, false, Scope::Global});
    const double eta_true =
        truth.sigma_m * truth.sigma_m /
        std::max(truth.sigma_m * truth.sigma_m + truth.sigma_p * truth.sigma_p, 1e-300);
    specs.push_back({"eta", fit_eta ? 0.5 : 0.0, 0.0, 1.0, !fit_eta, Scope::Global});
    (void)eta_true;

    std::vector<std::string> ids;
    for (const auto& u : units) ids.push_back(u.unit_id);
    ParameterBinding binding(specs, ids);

    const TransformFamily& tf = transform_registry(truth.transform);
    const Params tparams = truth.transform_params;
    const double x0 = truth.x0, t0 = truth.t0;
    UnitModelFn build = [tparams, x0, t0](const Params& p, const UnitData&) {
        UnitModel m;
        m.params.beta0 = require_param(p, "beta0");
        m.params.beta1 = require_param(p, "beta1");
        m.params.eta = require_param(p, "eta");
        m.params.eta0 = 0;
        m.params.x0 = x0;
        m.params.t0 = t0;
        m.params.transform_params = tparams;
        return m;
    };

    FitProblem prob;
    prob.residuals = [&](const Vector& th) {
        return uvector_hier(units, binding, th, tf, build).u;
    };
    prob.bounds.lower = binding.lower_bounds();
    prob.bounds.upper = binding.upper_bounds();
    prob.start = binding.starts();
    const FitResult fit = fit_least_squares(prob);

    RecoveryReport rep;
    rep.converged = fit.converged;
    rep.rss = fit.rss;
    const Params at = binding.resolve(fit.theta, ids.front());
    rep.beta0_hat = at.at("beta0");
    rep.beta1_hat = at.at("beta1");
    rep.eta_hat = at.at("eta");
    return rep;
}

}  // namespace sdefit
