#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "sdefit/dataset.hpp"
#include "sdefit/model.hpp"
#include "sdefit/simulate.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw sdefit::DataError("cannot write '" + out_path + "'");
        out << j.dump(2) << "\n";
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sdefit::ConfigError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw sdefit::ConfigError(std::string("'") + path + "': " + e.what());
    }
    return j;
}

void apply_overrides(sdefit::ModelConfig& config, double tol, int max_iter,
                     const std::string& strategy) {
    if (tol > 0) {
        config.options.rel_tol = tol;
        config.options.step_tol = tol;
        config.echo["tol"] = tol;
    }
    if (max_iter > 0) {
        config.options.max_iter = max_iter;
        config.echo["max_iter"] = max_iter;
    }
    if (!strategy.empty()) {
        if (strategy != "single" && strategy != "two-stage")
            throw sdefit::ConfigError("strategy must be 'single' or 'two-stage'");
        config.strategy = strategy;
        config.echo["strategy"] = strategy;
    }
}

int run_fit_cmd(const std::string& config_path, const std::string& out, double tol, int max_iter,
                const std::string& strategy) {
    auto config = sdefit::load_config(config_path);
    apply_overrides(config, tol, max_iter, strategy);
    const auto data = sdefit::load_csv(config.data_path, config.columns);
    const auto report = sdefit::run_fit(config, data);
    std::cerr << report.table();
    emit(report.to_json(), out);
    return report.fit.converged ? kExitOk : kExitNoConvergence;
}

int run_loglik_cmd(const std::string& config_path, const std::string& theta_path,
                   const std::string& out) {
    auto config = sdefit::load_config(config_path);
    const auto data = sdefit::load_csv(config.data_path, config.columns);
    const json tj = read_json_file(theta_path);
    std::map<std::string, double> theta;
    for (auto it = tj.begin(); it != tj.end(); ++it) theta[it.key()] = it.value().get<double>();
    const auto report = sdefit::run_loglik(config, data, theta);
    std::cerr << report.table();
    emit(report.to_json(), out);
    return kExitOk;
}

int run_simulate_cmd(const std::string& spec_path, const std::string& out,
                     std::uint64_t seed_override, bool has_seed) {
    const json j = read_json_file(spec_path);
    sdefit::TrajectorySpec spec;
    if (j.contains("transform")) spec.transform = j["transform"].get<std::string>();
    const auto& pj = j.at("params");
    spec.params.beta0 = pj.value("beta0", 0.0);
    spec.params.beta1 = pj.value("beta1", 0.0);
    spec.params.x0 = pj.value("x0", 0.0);
    spec.params.t0 = pj.value("t0", 0.0);
    for (auto it = pj.begin(); it != pj.end(); ++it)
        if (it->is_number()) spec.params.transform_params[it.key()] = it->get<double>();
    spec.sigma_p = j.value("sigma_p", 0.0);
    spec.sigma_m = j.value("sigma_m", 0.0);
    spec.sigma_0 = j.value("sigma_0", 0.0);
    spec.seed = j.value("seed", 0ULL);
    if (has_seed) spec.seed = seed_override;
    if (j.contains("times")) {
        const auto& tj = j["times"];
        if (tj.is_array()) {
            spec.times.resize(tj.size());
            for (size_t i = 0; i < tj.size(); ++i) spec.times[static_cast<sdefit::Index>(i)] = tj[i].get<double>();
        } else {
            const double from = tj.at("from").get<double>();
            const double to = tj.at("to").get<double>();
            const double step = tj.at("step").get<double>();
            std::vector<double> ts;
            for (double t = from; t <= to + 1e-12; t += step) ts.push_back(t);
            spec.times = Eigen::Map<sdefit::Vector>(ts.data(), ts.size());
        }
    } else {
        throw sdefit::ConfigError("simulate spec needs 'times'");
    }
    const int n_units = j.value("units", 1);
    const auto sims = sdefit::simulate_units(spec, n_units);
    sdefit::LongitudinalDataset data;
    for (const auto& s : sims) data.units.push_back(s.data);
    sdefit::CsvColumns cols{"t", "x", n_units > 1 ? "unit" : ""};
    if (out.empty()) {
        sdefit::write_csv("/dev/stdout", data, cols);
    } else {
        sdefit::write_csv(out, data, cols);
    }
    return kExitOk;
}

int run_compare_cmd(const std::vector<std::string>& report_paths) {
    struct Row {
        std::string name;
        double logl, aic, bic;
        int df;
    };
    std::vector<Row> rows;
    for (const auto& p : report_paths) {
        const json j = read_json_file(p);
        rows.push_back({p, j.at("log_likelihood").get<double>(), j.at("aic").get<double>(),
                        j.at("bic").get<double>(), j.at("df").get<int>()});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.aic < b.aic; });
    const double best = rows.front().aic;
    std::printf("%-40s %12s %4s %12s %12s %10s\n", "report", "logLik", "df", "AIC", "BIC",
                "dAIC");
    for (const auto& r : rows)
        std::printf("%-40s %12.4f %4d %12.4f %12.4f %10.4f\n", r.name.c_str(), r.logl, r.df,
                    r.aic, r.bic, r.aic - best);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter estimation for reducible SDEs by least squares"};
    app.require_subcommand(1);

    std::string config_path, out, strategy, theta_path, spec_path;
    double tol = -1;
    int max_iter = -1;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::vector<std::string> reports;

    auto* fit = app.add_subcommand("fit", "fit a model configuration");
    fit->add_option("config", config_path, "model config JSON")->required();
    fit->add_option("--out", out, "write the JSON report here");
    fit->add_option("--tol", tol, "convergence tolerance");
    fit->add_option("--max-iter", max_iter, "iteration cap");
    fit->add_option("--strategy", strategy, "single | two-stage");

    auto* loglik = app.add_subcommand("loglik", "evaluate at given parameter values");
    loglik->add_option("config", config_path, "model config JSON")->required();
    loglik->add_option("--theta", theta_path, "JSON file of parameter values")->required();
    loglik->add_option("--out", out, "write the JSON report here");

    auto* simulate = app.add_subcommand("simulate", "sample synthetic trajectories");
    simulate->add_option("spec", spec_path, "trajectory spec JSON")->required();
    simulate->add_option("--out", out, "write CSV here (default stdout)");
    auto* seed_opt = simulate->add_option("--seed", seed, "override the spec seed");

    auto* compare = app.add_subcommand("compare", "rank fit reports by AIC");
    compare->add_option("reports", reports, "fit report JSON files")->required();

    CLI11_PARSE(app, argc, argv);
    has_seed = seed_opt->count() > 0;

    try {
        if (fit->parsed()) return run_fit_cmd(config_path, out, tol, max_iter, strategy);
        if (loglik->parsed()) return run_loglik_cmd(config_path, theta_path, out);
        if (simulate->parsed()) return run_simulate_cmd(spec_path, out, seed, has_seed);
        if (compare->parsed()) return run_compare_cmd(reports);
    } catch (const sdefit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sdefit::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
