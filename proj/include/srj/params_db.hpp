#pragma once

// Store of optimal parameters keyed by (P, N), with a line-oriented text
// format:
//
//     P N rho digits provenance
//     omega_1 ... omega_P
//     beta_1 ... beta_P
//
// Blank lines and lines starting with '#' are ignored.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "srj/core.hpp"

namespace srj {

enum class Provenance { paper_table, computed };

std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& text);

struct ParameterRow {
    int levels = 0;
    int n = 0;
    std::vector<double> omegas;
    std::vector<double> betas;
    /// rho as recorded, which for published rows is rounded.
    double rho = 0.0;
    int digits = 17;
    Provenance provenance = Provenance::computed;

    /// The row as a schedule, betas rescaled to sum to one.
    WeightSchedule schedule() const;

    friend bool operator==(const ParameterRow&, const ParameterRow&) = default;
};

/// Row holding an optimizer result at full double precision.
ParameterRow computed_row(const WeightSchedule& schedule, int digits = 17);

/// Accepted |sum beta - 1| for a stored row (published values are rounded).
inline constexpr double kBetaSumTolerance = 1e-4;

class ParameterTable {
public:
    using Key = std::pair<int, int>;  // (P, N)

    /// Validates the row (WeightSchedule invariants, beta sum within
    /// kBetaSumTolerance). A duplicate key throws InvariantError unless
    /// overwrite is set.
    void insert(ParameterRow row, bool overwrite = false);
    /// Inserts every row of other; same duplicate policy as insert.
    void merge(const ParameterTable& other, bool overwrite = false);

    /// The row with the largest N <= n_target for P levels. Throws
    /// NotFoundError when there is none.
    const ParameterRow& lookup_row(int levels, int n_target) const;
    WeightSchedule lookup(int levels, int n_target) const { return lookup_row(levels, n_target).schedule(); }

    const ParameterRow* find(int levels, int n) const;
    const std::map<Key, ParameterRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }

    /// ParseError carries the 1-based line number.
    static ParameterTable read(std::istream& in);
    static ParameterTable load(const std::filesystem::path& path);
    /// Values are written with `digits` significant digits per row.
    void write(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

    /// The table compiled into the library.
    static const ParameterTable& shipped();

    friend bool operator==(const ParameterTable&, const ParameterTable&) = default;

private:
    std::map<Key, ParameterRow> rows_;
};

}  // namespace srj
