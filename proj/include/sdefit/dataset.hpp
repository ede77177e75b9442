#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdefit/hierarchy.hpp"

namespace sdefit {

struct CsvColumns {
    std::string t;
    std::string x;
    std::string unit;  // empty: treat the file as a single unit
};

struct LongitudinalDataset {
    std::vector<UnitData> units;

    Index n_rows() const {
        Index n = 0;
        for (const auto& u : units) n += u.x.size();
        return n;
    }
    std::vector<std::string> unit_ids() const {
        std::vector<std::string> ids;
        ids.reserve(units.size());
        for (const auto& u : units) ids.push_back(u.unit_id);
        return ids;
    }
    /// FNV-1a over the canonical (unit, t, x) rows.
    std::uint64_t fingerprint() const;
};

/// Parses a comma-separated file with a header row. Units are grouped in
/// first-appearance order and sorted by t within units; duplicate (unit, t)
/// pairs, missing columns and non-numeric cells are reported as DataError
/// with the offending row number.
LongitudinalDataset load_csv(const std::string& path, const CsvColumns& columns);

/// Writes the same schema the loader ingests.
void write_csv(const std::string& path, const LongitudinalDataset& data,
               const CsvColumns& columns);

}  // namespace sdefit
