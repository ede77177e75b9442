#include "sdefit/hierarchy.hpp"

#include <algorithm>
#include <cmath>

namespace sdefit {

ParameterBinding::ParameterBinding(std::vector<ParameterSpec> specs,
                                   std::vector<std::string> unit_ids)
    : specs_(std::move(specs)), unit_ids_(std::move(unit_ids)) {
    for (const auto& s : specs_) {
        if (s.scope == Scope::Local && (s.name == "eta" || s.name == "eta0"))
            throw ConfigError("eta and eta0 must be global");
        if (!(s.start >= s.lower && s.start <= s.upper))
            throw ConfigError("start of '" + s.name + "' outside bounds");
    }
    slots_.resize(specs_.size());
    // free globals, declaration order
    for (size_t i = 0; i < specs_.size(); ++i) {
        const auto& s = specs_[i];
        if (s.fixed || s.scope != Scope::Global) continue;
        slots_[i].in_flat = true;
        slots_[i].flat_index = flat_names_.size();
        flat_names_.push_back(s.name);
        flat_spec_idx_.push_back(i);
        flat_units_.push_back("");
    }
    // free locals, grouped by parameter, units in first-appearance order
    for (size_t i = 0; i < specs_.size(); ++i) {
        const auto& s = specs_[i];
        if (s.fixed || s.scope != Scope::Local) continue;
        slots_[i].in_flat = true;
        for (const auto& uid : unit_ids_) {
            slots_[i].unit_index[uid] = flat_names_.size();
            flat_names_.push_back(s.name + "[" + uid + "]");
            flat_spec_idx_.push_back(i);
            flat_units_.push_back(uid);
        }
    }
}

Params ParameterBinding::resolve(const Vector& flat, const std::string& unit_id) const {
    if (flat.size() != flat_size())
        throw ConfigError("flat parameter vector has length " + std::to_string(flat.size()) +
                          ", expected " + std::to_string(flat_size()));
    Params out;
    for (size_t i = 0; i < specs_.size(); ++i) {
        const auto& s = specs_[i];
        if (!slots_[i].in_flat) {
            out[s.name] = s.start;
        } else if (s.scope == Scope::Global) {
            out[s.name] = flat[slots_[i].flat_index];
        } else {
            auto it = slots_[i].unit_index.find(unit_id);
            if (it == slots_[i].unit_index.end())
                throw ConfigError("unit '" + unit_id + "' unknown to parameter '" + s.name + "'");
            out[s.name] = flat[it->second];
        }
    }
    return out;
}

Vector ParameterBinding::flatten(
    const std::function<double(const std::string&, const std::string&)>& value) const {
    Vector out(flat_size());
    for (Index k = 0; k < flat_size(); ++k) out[k] = value(flat_spec(k).name, flat_units_[k]);
    return out;
}

Vector ParameterBinding::starts() const {
    Vector out(flat_size());
    for (Index k = 0; k < flat_size(); ++k) out[k] = flat_spec(k).start;
    return out;
}

Vector ParameterBinding::lower_bounds() const {
    Vector out(flat_size());
    for (Index k = 0; k < flat_size(); ++k) out[k] = flat_spec(k).lower;
    return out;
}

Vector ParameterBinding::upper_bounds() const {
    Vector out(flat_size());
    for (Index k = 0; k < flat_size(); ++k) out[k] = flat_spec(k).upper;
    return out;
}

UVector uvector_hier(const std::vector<UnitData>& units, const ParameterBinding& binding,
                     const Vector& flat_theta, const TransformFamily& transform,
                     const UnitModelFn& build) {
    if (units.empty()) throw DataError("no units");
    // canonical processing order: results must not depend on input order
    std::vector<const UnitData*> ordered;
    ordered.reserve(units.size());
    for (const auto& u : units) ordered.push_back(&u);
    std::sort(ordered.begin(), ordered.end(),
              [](const UnitData* a, const UnitData* b) { return a->unit_id < b->unit_id; });
    Index n = 0;
    double log_jacobian = 0;
    std::vector<Vector> blocks;
    blocks.reserve(units.size());
    bool have_eta = false;
    double eta = 0, eta0 = 0;
    for (const UnitData* uptr : ordered) {
        const auto& unit = *uptr;
        try {
            const Params resolved = binding.resolve(flat_theta, unit.unit_id);
            UnitModel m = build(resolved, unit);
            if (have_eta && (m.params.eta != eta || m.params.eta0 != eta0))
                throw ConfigError("eta and eta0 must be global");
            eta = m.params.eta;
            eta0 = m.params.eta0;
            have_eta = true;
            auto w = whitened_unit(unit.x, unit.t, m.params, transform, m.mult);
            n += w.v.size();
            log_jacobian += w.log_jacobian;
            blocks.push_back(std::move(w.v));
        } catch (const std::exception& e) {
            throw DataError("unit '" + unit.unit_id + "': " + e.what());
        }
    }
    UVector out;
    out.n = n;
    out.log_jacobian = log_jacobian;
    out.u.resize(n);
    const double jn = std::exp(log_jacobian / static_cast<double>(n));
    Index pos = 0;
    for (const auto& v : blocks) {
        out.u.segment(pos, v.size()) = v / jn;
        pos += v.size();
    }
    return out;
}

FinalStats uvector_hier_final(const std::vector<UnitData>& units, const ParameterBinding& binding,
                              const Vector& flat_theta, const TransformFamily& transform,
                              const UnitModelFn& build) {
    const UVector u = uvector_hier(units, binding, flat_theta, transform, build);
    const Params p0 = binding.resolve(flat_theta, units.front().unit_id);
    UnitModel m0 = build(p0, units.front());
    return final_stats_from(u, m0.params.eta, m0.params.eta0);
}

}  // namespace sdefit
