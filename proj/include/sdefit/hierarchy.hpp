#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdefit/sde_uni.hpp"

namespace sdefit {

/// Observations of one unit (individual, tree, subject).
struct UnitData {
    std::string unit_id;
    Vector x;
    Vector t;
    double x0 = 0;
    double t0 = 0;
};

enum class Scope { Global, Local };

/// Declaration of one model parameter for the optimizer.
struct ParameterSpec {
    std::string name;
    double start = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool fixed = false;
    Scope scope = Scope::Global;
};

/// Maps between the optimizer's flat vector and named per-unit values.
/// Layout: free globals first in declaration order, then free locals grouped
/// by parameter, units in first-appearance order. Fixed parameters are held
/// out of the flat vector and injected at resolution time.
class ParameterBinding {
public:
    ParameterBinding() = default;
    ParameterBinding(std::vector<ParameterSpec> specs, std::vector<std::string> unit_ids);

    Index flat_size() const { return flat_names_.size(); }
    const std::vector<std::string>& unit_ids() const { return unit_ids_; }
    const std::vector<ParameterSpec>& specs() const { return specs_; }

    /// Named values of every parameter for one unit, given the flat vector.
    Params resolve(const Vector& flat, const std::string& unit_id) const;

    /// Inverse of resolve over all units; exact round-trip.
    Vector flatten(const std::function<double(const std::string& name,
                                              const std::string& unit_id)>& value) const;

    Vector starts() const;
    Vector lower_bounds() const;
    Vector upper_bounds() const;

    /// Label of flat entry k, e.g. "a" or "b[301]".
    const std::string& flat_label(Index k) const { return flat_names_[k]; }
    const ParameterSpec& flat_spec(Index k) const { return specs_[flat_spec_idx_[k]]; }
    const std::string& flat_unit(Index k) const { return flat_units_[k]; }

private:
    std::vector<ParameterSpec> specs_;
    std::vector<std::string> unit_ids_;
    std::vector<std::string> flat_names_;   // display labels
    std::vector<size_t> flat_spec_idx_;     // into specs_
    std::vector<std::string> flat_units_;   // empty for globals
    // per spec: either a fixed/global slot or per-unit slots into the flat vector
    struct Slot {
        bool in_flat = false;
        Index flat_index = -1;                      // globals
        std::map<std::string, Index> unit_index;    // locals
    };
    std::vector<Slot> slots_;
};

/// Everything sde_uni needs for one unit, produced from resolved parameters.
struct UnitModel {
    SdeParams params;
    SigmaMultipliers mult;
};

using UnitModelFn = std::function<UnitModel(const Params& resolved, const UnitData& unit)>;

/// Hierarchical u-vector: per-unit whitening with shared J^(1/n) scaling.
/// eta and eta0 must resolve to the same value in every unit.
UVector uvector_hier(const std::vector<UnitData>& units, const ParameterBinding& binding,
                     const Vector& flat_theta, const TransformFamily& transform,
                     const UnitModelFn& build);

FinalStats uvector_hier_final(const std::vector<UnitData>& units, const ParameterBinding& binding,
                              const Vector& flat_theta, const TransformFamily& transform,
                              const UnitModelFn& build);

}  // namespace sdefit
