#include "sdefit/transforms.hpp"

#include <mutex>
#include <unordered_map>

namespace sdefit {

namespace {

std::unordered_map<std::string, TransformFamily> make_builtins() {
    std::unordered_map<std::string, TransformFamily> reg;

    reg["box_cox"] = TransformFamily{
        "box_cox",
        {"lambda"},
        [](double x, const Params& p) { return box_cox(x, require_param(p, "lambda")); },
        [](double x, const Params& p) { return box_cox_deriv(x, require_param(p, "lambda")); },
        [](double z, const Params& p) { return box_cox_inverse(z, require_param(p, "lambda")); }};

    reg["power_richards"] = TransformFamily{
        "power_richards",
        {"c"},
        [](double x, const Params& p) { return power_richards(x, require_param(p, "c")); },
        [](double x, const Params& p) { return power_richards_deriv(x, require_param(p, "c")); },
        [](double z, const Params& p) {
            double c = require_param(p, "c");
            if (z < 0) throw DomainError("power_richards inverse: out of range");
            return std::pow(z, 1.0 / c);
        }};

    reg["richards_scale"] = TransformFamily{
        "richards_scale",
        {"a", "c"},
        [](double x, const Params& p) {
            return richards_scale(x, require_param(p, "a"), require_param(p, "c"));
        },
        [](double x, const Params& p) {
            return richards_scale_deriv(x, require_param(p, "a"), require_param(p, "c"));
        },
        [](double z, const Params& p) {
            return require_param(p, "a") * box_cox_inverse(z, require_param(p, "c"));
        }};

    // Inverse restricted to the H < a branch, where the transform is monotone.
    reg["log_mult_richards"] = TransformFamily{
        "log_mult_richards",
        {"a", "c"},
        [](double x, const Params& p) {
            return log_mult_richards(x, require_param(p, "a"), require_param(p, "c"));
        },
        [](double x, const Params& p) {
            return log_mult_richards_deriv(x, require_param(p, "a"), require_param(p, "c"));
        },
        [](double z, const Params& p) {
            double a = require_param(p, "a");
            double c = require_param(p, "c");
            double hc = std::pow(a, c) - std::exp(z);
            if (hc < 0) throw DomainError("log_mult_richards inverse: out of range");
            return std::pow(hc, 1.0 / c);
        }};

    reg["identity"] = TransformFamily{
        "identity",
        {},
        [](double x, const Params&) { return x; },
        [](double, const Params&) { return 1.0; },
        [](double z, const Params&) { return z; }};

    return reg;
}

std::unordered_map<std::string, TransformFamily>& registry() {
    static std::unordered_map<std::string, TransformFamily> reg = make_builtins();
    return reg;
}

std::mutex reg_mutex;

}  // namespace

const TransformFamily& transform_registry(const std::string& name) {
    std::lock_guard<std::mutex> lock(reg_mutex);
    auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError("unknown transform family '" + name + "'");
    return it->second;
}

void register_transform(TransformFamily family) {
    std::lock_guard<std::mutex> lock(reg_mutex);
    registry()[family.name] = std::move(family);
}

}  // namespace sdefit
