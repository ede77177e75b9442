#include "sdefit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace sdefit {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    }
    return out;
}

double parse_number(const std::string& field, size_t row, const std::string& column) {
    double value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw DataError("row " + std::to_string(row) + ": non-numeric value '" + field +
                        "' in column '" + column +
                        "' (decimal points only; comma decimals are not supported)");
    return value;
}

}  // namespace

LongitudinalDataset load_csv(const std::string& path, const CsvColumns& columns) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    const auto header = split_fields(line);

    auto find_col = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DataError("missing column '" + name + "' in '" + path + "'");
    };
    const size_t ti = find_col(columns.t);
    const size_t xi = find_col(columns.x);
    const bool has_unit = !columns.unit.empty();
    const size_t ui = has_unit ? find_col(columns.unit) : 0;

    std::vector<std::string> order;                        // first-appearance order
    std::map<std::string, std::vector<std::pair<double, double>>> rows;
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()) +
                            " (comma decimals are not supported)");
        const double t = parse_number(fields[ti], row, columns.t);
        const double x = parse_number(fields[xi], row, columns.x);
        const std::string unit = has_unit ? fields[ui] : "1";
        if (rows.find(unit) == rows.end()) order.push_back(unit);
        rows[unit].emplace_back(t, x);
    }
    if (order.empty()) throw DataError("'" + path + "' contains no data rows");

    LongitudinalDataset out;
    for (const auto& uid : order) {
        auto& obs = rows[uid];
        std::stable_sort(obs.begin(), obs.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t i = 1; i < obs.size(); ++i)
            if (obs[i].first == obs[i - 1].first)
                throw DataError("duplicate time " + std::to_string(obs[i].first) + " in unit '" +
                                uid + "'");
        UnitData u;
        u.unit_id = uid;
        u.t.resize(obs.size());
        u.x.resize(obs.size());
        for (size_t i = 0; i < obs.size(); ++i) {
            u.t[i] = obs[i].first;
            u.x[i] = obs[i].second;
        }
        out.units.push_back(std::move(u));
    }
    return out;
}

std::uint64_t LongitudinalDataset::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    char buf[64];
    for (const auto& u : units) {
        mix(u.unit_id);
        for (Index i = 0; i < u.x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "|%.17g,%.17g", u.t[i], u.x[i]);
            mix(buf);
        }
        mix("\n");
    }
    return h;
}

void write_csv(const std::string& path, const LongitudinalDataset& data,
               const CsvColumns& columns) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    const bool has_unit = !columns.unit.empty();
    out << columns.t << ',' << columns.x;
    if (has_unit) out << ',' << columns.unit;
    out << '\n';
    char buf[64];
    for (const auto& u : data.units) {
        for (Index i = 0; i < u.x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", u.t[i], u.x[i]);
            out << buf;
            if (has_unit) out << ',' << u.unit_id;
            out << '\n';
        }
    }
}

}  // namespace sdefit
