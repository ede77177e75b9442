#include "sdefit/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sdefit/transforms.hpp"

namespace sdefit {

using nlohmann::json;

namespace {

double bound_from_json(const json& j, double fallback) {
    if (j.is_null()) return fallback;
    return j.get<double>();
}

json bound_to_json(double b) {
    if (!std::isfinite(b)) return nullptr;
    return b;
}

ParameterSpec spec_from_json(const json& j) {
    ParameterSpec s;
    s.name = j.at("name").get<std::string>();
    s.start = j.at("start").get<double>();
    if (j.contains("lower")) s.lower = bound_from_json(j["lower"], s.lower);
    if (j.contains("upper")) s.upper = bound_from_json(j["upper"], s.upper);
    if (j.contains("fixed")) s.fixed = j["fixed"].get<bool>();
    if (j.contains("scope")) {
        const auto sc = j["scope"].get<std::string>();
        if (sc == "local")
            s.scope = Scope::Local;
        else if (sc == "global")
            s.scope = Scope::Global;
        else
            throw ConfigError("parameter '" + s.name + "': scope must be global or local");
    }
    return s;
}

json spec_to_json(const ParameterSpec& s) {
    return json{{"name", s.name},
                {"start", s.start},
                {"lower", bound_to_json(s.lower)},
                {"upper", bound_to_json(s.upper)},
                {"fixed", s.fixed},
                {"scope", s.scope == Scope::Local ? "local" : "global"}};
}

double resolved_or(const Params& p, const std::string& name, double fallback) {
    auto it = p.find(name);
    return it == p.end() ? fallback : it->second;
}

}  // namespace

ModelConfig parse_config(const json& j, const std::string& base_dir) try {
    ModelConfig c;
    if (j.contains("model")) c.kind = j["model"].get<std::string>();
    if (c.kind != "sde" && c.kind != "bc_regression")
        throw ConfigError("model must be 'sde' or 'bc_regression'");
    if (j.contains("transform")) c.transform = j["transform"].get<std::string>();
    if (j.contains("drift")) c.drift = j["drift"].get<std::string>();
    if (c.kind == "sde") transform_registry(c.transform);  // validate family name
    if (c.drift != "linear" && c.drift != "richards_additive" && c.drift != "richards_mult" &&
        c.drift != "richards_scaled")
        throw ConfigError("unknown drift parametrization '" + c.drift + "'");
    if (j.contains("x0")) c.x0 = j["x0"].get<double>();
    if (j.contains("t0")) c.t0 = j["t0"].get<double>();
    if (!j.contains("parameters") || !j["parameters"].is_array() || j["parameters"].empty())
        throw ConfigError("config needs a non-empty 'parameters' array");
    for (const auto& pj : j["parameters"]) c.parameters.push_back(spec_from_json(pj));
    {
        const auto& dj = j.at("data");
        c.data_path = dj.at("path").get<std::string>();
        if (!base_dir.empty() && !std::filesystem::path(c.data_path).is_absolute())
            c.data_path = (std::filesystem::path(base_dir) / c.data_path).string();
        c.columns.t = dj.at("t").get<std::string>();
        c.columns.x = dj.at("x").get<std::string>();
        if (dj.contains("unit")) c.columns.unit = dj["unit"].get<std::string>();
    }
    if (j.contains("strategy")) {
        c.strategy = j["strategy"].get<std::string>();
        if (c.strategy != "single" && c.strategy != "two-stage")
            throw ConfigError("strategy must be 'single' or 'two-stage'");
    }
    if (j.contains("tol")) {
        c.options.rel_tol = j["tol"].get<double>();
        c.options.step_tol = c.options.rel_tol;
    }
    if (j.contains("max_iter")) c.options.max_iter = j["max_iter"].get<int>();

    // canonical echo with all defaults materialized
    json echo;
    echo["model"] = c.kind;
    echo["transform"] = c.transform;
    echo["drift"] = c.drift;
    echo["x0"] = c.x0;
    echo["t0"] = c.t0;
    echo["parameters"] = json::array();
    for (const auto& s : c.parameters) echo["parameters"].push_back(spec_to_json(s));
    echo["data"] = json{{"path", c.data_path}, {"t", c.columns.t}, {"x", c.columns.x}};
    if (!c.columns.unit.empty()) echo["data"]["unit"] = c.columns.unit;
    echo["strategy"] = c.strategy;
    echo["tol"] = c.options.rel_tol;
    echo["max_iter"] = c.options.max_iter;
    c.echo = echo;
    return c;
} catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
}

ModelConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_config(j, std::filesystem::path(path).parent_path().string());
}

UnitModelFn drift_builder(const ModelConfig& config) {
    const std::string drift = config.drift;
    const double x0 = config.x0;
    const double t0 = config.t0;
    return [drift, x0, t0](const Params& p, const UnitData& unit) -> UnitModel {
        UnitModel m;
        m.params.eta = resolved_or(p, "eta", 0.0);
        m.params.eta0 = resolved_or(p, "eta0", 0.0);
        m.params.x0 = resolved_or(p, "x0", x0);
        m.params.t0 = t0;
        m.params.transform_params = p;
        (void)unit;
        if (drift == "linear") {
            m.params.beta0 = require_param(p, "beta0");
            m.params.beta1 = require_param(p, "beta1");
        } else if (drift == "richards_additive") {
            const double a = require_param(p, "a");
            const double b = require_param(p, "b");
            const double c = require_param(p, "c");
            m.params.beta0 = b * std::pow(a, c);
            m.params.beta1 = -b;
        } else if (drift == "richards_mult") {
            const double b = require_param(p, "b");
            m.params.beta0 = -b;
            m.params.beta1 = 0;
        } else if (drift == "richards_scaled") {
            const double b = require_param(p, "b");
            m.params.beta0 = 0;
            m.params.beta1 = -b;
            m.mult.mu_p = std::sqrt(std::abs(b));
        } else {
            throw ConfigError("unknown drift '" + drift + "'");
        }
        return m;
    };
}

ParameterBinding make_binding(const ModelConfig& config, const LongitudinalDataset& data) {
    return ParameterBinding(config.parameters, data.unit_ids());
}

namespace {

struct BcRegData {
    Vector predictor;  // the config's t column
    Vector response;   // the config's x column
    double mean_log_response = 0;
};

BcRegData pool_bcreg(const LongitudinalDataset& data) {
    BcRegData out;
    const Index n = data.n_rows();
    out.predictor.resize(n);
    out.response.resize(n);
    Index k = 0;
    for (const auto& u : data.units)
        for (Index i = 0; i < u.x.size(); ++i) {
            out.predictor[k] = u.t[i];
            out.response[k] = u.x[i];
            ++k;
        }
    double s = 0;
    for (Index i = 0; i < n; ++i) {
        if (!(out.response[i] > 0))
            throw DataError("bc_regression needs a positive response variable");
        s += std::log(out.response[i]);
    }
    out.mean_log_response = s / static_cast<double>(n);
    return out;
}

Vector bcreg_residuals(const BcRegData& d, const Params& p) {
    const double beta0 = require_param(p, "beta0");
    const double beta1 = require_param(p, "beta1");
    const double lx = require_param(p, "lambda_x");
    const double ly = require_param(p, "lambda_y");
    const Index n = d.response.size();
    const double jn = std::exp((ly - 1.0) * d.mean_log_response);  // gm^(ly-1)
    Vector u(n);
    for (Index i = 0; i < n; ++i)
        u[i] = (box_cox(d.response[i], ly) - beta0 - beta1 * box_cox(d.predictor[i], lx)) / jn;
    return u;
}

FinalStats bcreg_final(const BcRegData& d, const Params& p) {
    const Vector u = bcreg_residuals(d, p);
    UVector uv;
    uv.u = u;
    uv.n = u.size();
    uv.log_jacobian =
        (require_param(p, "lambda_y") - 1.0) * d.mean_log_response * static_cast<double>(u.size());
    FinalStats out;
    out.n = uv.n;
    out.rss = uv.sum_squares();
    const auto est = sigma2_hat(uv);
    out.sigma2 = est.sigma2;
    out.sigma_m = est.sigma;  // all error is observational in this model
    out.log_likelihood = log_likelihood_at_optimum(uv);
    return out;
}

int count_free(const ParameterBinding& binding) { return static_cast<int>(binding.flat_size()); }

FitReport finish_report(const ModelConfig& config, const LongitudinalDataset& data,
                        const ParameterBinding& binding, FitResult fit, FinalStats stats,
                        const std::string& strategy_used) {
    FitReport rep;
    rep.fit = std::move(fit);
    rep.stats = stats;
    rep.df = count_free(binding) + 1;  // every free structural parameter + sigma
    const auto ic = information_criteria(stats.log_likelihood, rep.df, stats.n);
    rep.aic = ic.first;
    rep.bic = ic.second;
    rep.n_rows = data.n_rows();
    rep.n_units = static_cast<Index>(data.units.size());
    rep.dataset_fingerprint = data.fingerprint();
    rep.strategy_used = strategy_used;
    rep.config_echo = config.echo;
    const double np = static_cast<double>(stats.n - count_free(binding));
    rep.sigma_unbiased =
        np > 0 ? std::sqrt(stats.sigma2 * static_cast<double>(stats.n) / np) : 0.0;
    rep.fit.names.clear();
    for (Index k = 0; k < binding.flat_size(); ++k)
        rep.fit.names.push_back(binding.flat_label(k));
    for (const auto& s : config.parameters) {
        if (s.name == "eta" && s.fixed && s.start == 0.0) rep.fast_path = "process-noise-only";
    }
    bool has_eta = false;
    for (const auto& s : config.parameters) has_eta |= (s.name == "eta");
    if (!has_eta && config.kind == "sde") rep.fast_path = "process-noise-only";
    return rep;
}

}  // namespace

Vector model_residuals(const ModelConfig& config, const LongitudinalDataset& data,
                       const ParameterBinding& binding, const Vector& flat) {
    if (config.kind == "bc_regression") {
        static thread_local std::map<const LongitudinalDataset*, BcRegData> cache;
        auto it = cache.find(&data);
        if (it == cache.end()) it = cache.emplace(&data, pool_bcreg(data)).first;
        return bcreg_residuals(it->second, binding.resolve(flat, data.units.front().unit_id));
    }
    const TransformFamily& tf = transform_registry(config.transform);
    return uvector_hier(data.units, binding, flat, tf, drift_builder(config)).u;
}

double model_direct_nll(const ModelConfig& config, const LongitudinalDataset& data,
                        const ParameterBinding& binding, const Vector& flat_with_sigma) {
    const Index nflat = binding.flat_size();
    if (config.kind == "bc_regression") {
        if (flat_with_sigma.size() != nflat + 1)
            throw ConfigError("direct NLL expects flat parameters plus sigma");
        const Vector flat = flat_with_sigma.head(nflat);
        const double sigma = flat_with_sigma[nflat];
        if (!(sigma > 0)) throw DomainError("sigma must be positive");
        const BcRegData d = pool_bcreg(data);
        const Params p = binding.resolve(flat, data.units.front().unit_id);
        const double ly = require_param(p, "lambda_y");
        const double beta0 = require_param(p, "beta0");
        const double beta1 = require_param(p, "beta1");
        const double lx = require_param(p, "lambda_x");
        const Index n = d.response.size();
        double ss = 0;
        for (Index i = 0; i < n; ++i) {
            const double e =
                box_cox(d.response[i], ly) - beta0 - beta1 * box_cox(d.predictor[i], lx);
            ss += e * e;
        }
        const double nn = static_cast<double>(n);
        return (nn / 2.0) * std::log(2.0 * M_PI * sigma * sigma) + ss / (2.0 * sigma * sigma) -
               nn * (ly - 1.0) * d.mean_log_response;
    }
    // sde: trailing (sigma_p, sigma_m); eta/eta0 must not be free parameters here
    if (flat_with_sigma.size() != nflat + 2)
        throw ConfigError("direct NLL expects flat parameters plus (sigma_p, sigma_m)");
    const Vector flat = flat_with_sigma.head(nflat);
    const double sigma_p = flat_with_sigma[nflat];
    const double sigma_m = flat_with_sigma[nflat + 1];
    const TransformFamily& tf = transform_registry(config.transform);
    const auto build = drift_builder(config);
    double nll = 0;
    Index n = 0;
    for (const auto& unit : data.units) {
        const Params p = binding.resolve(flat, unit.unit_id);
        UnitModel m = build(p, unit);
        const Vector y = tf.eval_all(unit.x, m.params.transform_params);
        const double y0 = tf.eval(m.params.x0, m.params.transform_params);
        const auto resid = conditional_residuals_y(y, unit.t, y0, m.params);
        const double wm = std::pow(m.mult.mu_m * sigma_m, 2);
        const double wp = std::pow(m.mult.mu_p * sigma_p, 2);
        const auto C = covariance_entries_raw(resid.dt, m.params.beta1, wm, 0.0, wp);
        const auto ld = logdet_and_solve(C.diag, C.sub, resid.z);
        nll += ld.logdet + 0.5 * ld.v.squaredNorm();
        nll -= tf.log_jacobian(unit.x, m.params.transform_params);
        n += unit.x.size();
    }
    return nll + (static_cast<double>(n) / 2.0) * std::log(2.0 * M_PI);
}

FitReport run_fit(const ModelConfig& config, const LongitudinalDataset& data) {
    ParameterBinding binding = make_binding(config, data);

    auto solve = [&](const ParameterBinding& b, const Vector& start) {
        FitProblem prob;
        prob.residuals = [&](const Vector& th) { return model_residuals(config, data, b, th); };
        prob.bounds.lower = b.lower_bounds();
        prob.bounds.upper = b.upper_bounds();
        prob.start = start;
        prob.options = config.options;
        return fit_least_squares(prob);
    };

    FitResult fit;
    std::string strategy_used = config.strategy;
    if (config.strategy == "two-stage") {
        // stage 1: hold eta at its starting value
        auto specs1 = config.parameters;
        bool saw_eta = false;
        for (auto& s : specs1)
            if (s.name == "eta") {
                s.fixed = true;
                saw_eta = true;
            }
        if (!saw_eta) throw ConfigError("two-stage strategy needs an 'eta' parameter");
        ParameterBinding b1(specs1, data.unit_ids());
        const FitResult stage1 = solve(b1, b1.starts());
        // stage 2: free eta, warm-start everything else from stage 1
        std::map<std::string, double> warm;
        for (Index k = 0; k < b1.flat_size(); ++k) warm[b1.flat_label(k)] = stage1.theta[k];
        Vector start2 = binding.flatten([&](const std::string& name, const std::string& uid) {
            const std::string label = uid.empty() ? name : name + "[" + uid + "]";
            auto it = warm.find(label);
            if (it != warm.end()) return it->second;
            for (const auto& s : config.parameters)
                if (s.name == name) return s.start;
            return 0.0;
        });
        fit = solve(binding, start2);
    } else {
        fit = solve(binding, binding.starts());
    }

    FinalStats stats;
    if (config.kind == "bc_regression") {
        const BcRegData d = pool_bcreg(data);
        stats = bcreg_final(d, binding.resolve(fit.theta, data.units.front().unit_id));
    } else {
        const TransformFamily& tf = transform_registry(config.transform);
        stats = uvector_hier_final(data.units, binding, fit.theta, tf, drift_builder(config));
    }
    return finish_report(config, data, binding, std::move(fit), stats, strategy_used);
}

FitReport run_loglik(const ModelConfig& config, const LongitudinalDataset& data,
                     const std::map<std::string, double>& theta) {
    ParameterBinding binding = make_binding(config, data);
    Vector flat = binding.flatten([&](const std::string& name, const std::string& uid) {
        const std::string label = uid.empty() ? name : name + "[" + uid + "]";
        auto it = theta.find(label);
        if (it == theta.end()) it = theta.find(name);
        if (it == theta.end()) throw ConfigError("theta is missing a value for '" + label + "'");
        return it->second;
    });
    FitResult fit;
    fit.theta = flat;
    fit.converged = true;
    fit.rss = model_residuals(config, data, binding, flat).squaredNorm();
    fit.at_bound.assign(flat.size(), false);
    FinalStats stats;
    if (config.kind == "bc_regression") {
        const BcRegData d = pool_bcreg(data);
        stats = bcreg_final(d, binding.resolve(flat, data.units.front().unit_id));
    } else {
        const TransformFamily& tf = transform_registry(config.transform);
        stats = uvector_hier_final(data.units, binding, flat, tf, drift_builder(config));
    }
    return finish_report(config, data, binding, std::move(fit), stats, "evaluate");
}

json FitReport::to_json() const {
    json j;
    j["version"] = kToolVersion;
    j["config"] = config_echo;
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx",
                  static_cast<unsigned long long>(dataset_fingerprint));
    j["data"] = json{{"rows", n_rows}, {"units", n_units}, {"fingerprint", fp}};
    json params = json::array();
    for (size_t k = 0; k < fit.names.size(); ++k) {
        params.push_back(json{{"name", fit.names[k]},
                              {"value", fit.theta[static_cast<Index>(k)]},
                              {"at_bound", static_cast<bool>(fit.at_bound[k])}});
    }
    j["parameters"] = params;
    j["rss"] = fit.rss;
    j["log_likelihood"] = stats.log_likelihood;
    j["sigma"] = std::sqrt(stats.sigma2);
    j["sigma_p"] = stats.sigma_p;
    j["sigma_m"] = stats.sigma_m;
    j["sigma_0"] = stats.sigma_0;
    j["sigma_unbiased"] = sigma_unbiased;
    j["df"] = df;
    j["aic"] = aic;
    j["bic"] = bic;
    j["n"] = stats.n;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["strategy"] = strategy_used;
    if (!fast_path.empty()) j["fast_path"] = fast_path;
    return j;
}

std::string FitReport::table() const {
    std::ostringstream os;
    os << "fit: rss=" << fit.rss << " logL=" << stats.log_likelihood << " aic=" << aic
       << " bic=" << bic << " df=" << df << " n=" << stats.n
       << (fit.converged ? "" : "  [NOT CONVERGED]") << "\n";
    os << "sigma: sigma_p=" << stats.sigma_p << " sigma_m=" << stats.sigma_m
       << " sigma_0=" << stats.sigma_0 << "\n";
    for (size_t k = 0; k < fit.names.size(); ++k) {
        os << "  " << fit.names[k] << " = " << fit.theta[static_cast<Index>(k)]
           << (fit.at_bound[k] ? "  (at bound)" : "") << "\n";
    }
    return os.str();
}

}  // namespace sdefit
