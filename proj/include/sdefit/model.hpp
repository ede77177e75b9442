#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "sdefit/dataset.hpp"
#include "sdefit/hierarchy.hpp"
#include "sdefit/optimize.hpp"

namespace sdefit {

inline constexpr const char* kToolVersion = "sdefit 0.1.0";

/// Declarative description of one estimation problem.
struct ModelConfig {
    std::string kind = "sde";  // "sde" or "bc_regression"
    std::string transform = "identity";
    std::string drift = "linear";  // linear | richards_additive | richards_mult | richards_scaled
    double x0 = 0;
    double t0 = 0;
    std::vector<ParameterSpec> parameters;
    std::string data_path;
    CsvColumns columns;
    std::string strategy = "single";  // or "two-stage"
    FitOptions options;
    nlohmann::json echo;  // canonical form that reproduces this config
};

ModelConfig parse_config(const nlohmann::json& j, const std::string& base_dir = "");
ModelConfig load_config(const std::string& path);

/// The per-unit model builder for a named drift parametrization.
UnitModelFn drift_builder(const ModelConfig& config);

struct FitReport {
    FitResult fit;
    FinalStats stats;
    double sigma_unbiased = 0;  // n - p denominator variant, report only
    int df = 0;
    double aic = 0, bic = 0;
    Index n_rows = 0;
    Index n_units = 0;
    std::uint64_t dataset_fingerprint = 0;
    std::string fast_path;  // "process-noise-only" when eta is fixed at 0
    std::string strategy_used;
    nlohmann::json config_echo;

    nlohmann::json to_json() const;
    std::string table() const;  // human-readable summary
};

FitReport run_fit(const ModelConfig& config, const LongitudinalDataset& data);

/// Evaluates sigma estimates and the log-likelihood at user-supplied
/// parameter values without optimizing. Keys follow the flat labels
/// ("a", "b[301]", ...); fixed parameters keep their configured values.
FitReport run_loglik(const ModelConfig& config, const LongitudinalDataset& data,
                     const std::map<std::string, double>& theta);

/// Residual vector of the configured problem at a flat parameter vector;
/// exposed for oracles and tests.
Vector model_residuals(const ModelConfig& config, const LongitudinalDataset& data,
                       const ParameterBinding& binding, const Vector& flat);

/// Exact negative log-likelihood with explicit sigma (last coordinate),
/// for the direct-optimization cross-check.
double model_direct_nll(const ModelConfig& config, const LongitudinalDataset& data,
                        const ParameterBinding& binding, const Vector& flat_with_sigma);

ParameterBinding make_binding(const ModelConfig& config, const LongitudinalDataset& data);

}  // namespace sdefit
