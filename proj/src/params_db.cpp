#include "srj/params_db.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "srj/errors.hpp"

namespace srj {

// Defined in the generated shipped_table.cpp.
extern const char* const kShippedTableText;

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::vector<double> parse_values(const std::string& line, int line_no) {
    std::vector<double> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        double v = 0.0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
            throw ParseError("not a number: '" + tok + "'", line_no);
        out.push_back(v);
    }
    return out;
}

template <class Int>
Int parse_int(const std::string& tok, int line_no) {
    Int v{};
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
        throw ParseError("not an integer: '" + tok + "'", line_no);
    return v;
}

}  // namespace

std::string to_string(Provenance p) { return p == Provenance::paper_table ? "paper-table" : "computed"; }

Provenance parse_provenance(const std::string& text) {
    if (text == "paper-table") return Provenance::paper_table;
    if (text == "computed") return Provenance::computed;
    throw InvariantError("unknown provenance '" + text + "'");
}

WeightSchedule ParameterRow::schedule() const { return WeightSchedule::normalized(omegas, betas, n); }

ParameterRow computed_row(const WeightSchedule& schedule, int digits) {
    return {schedule.levels(), schedule.grid_size(), schedule.omegas(), schedule.betas(),
            schedule.rho(),    digits,              Provenance::computed};
}

void ParameterTable::insert(ParameterRow row, bool overwrite) {
    if (row.levels < 1 || static_cast<int>(row.omegas.size()) != row.levels ||
        static_cast<int>(row.betas.size()) != row.levels)
        throw InvariantError("parameter row: value count does not match P");
    const double sum = std::accumulate(row.betas.begin(), row.betas.end(), 0.0);
    if (std::abs(sum - 1.0) > kBetaSumTolerance)
        throw InvariantError("parameter row (" + std::to_string(row.levels) + ", " + std::to_string(row.n) +
                             "): beta sum " + shortest(sum) + " differs from 1");
    (void)row.schedule();  // throws on any other schedule invariant
    const Key key{row.levels, row.n};
    if (!overwrite && rows_.contains(key))
        throw InvariantError("parameter row (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                             ") already present");
    rows_.insert_or_assign(key, std::move(row));
}

void ParameterTable::merge(const ParameterTable& other, bool overwrite) {
    for (const auto& [key, row] : other.rows_) insert(row, overwrite);
}

const ParameterRow& ParameterTable::lookup_row(int levels, int n_target) const {
    auto it = rows_.upper_bound({levels, n_target});
    if (it == rows_.begin() || std::prev(it)->first.first != levels)
        throw NotFoundError("no parameters for P = " + std::to_string(levels) + " with N <= " +
                            std::to_string(n_target));
    return std::prev(it)->second;
}

const ParameterRow* ParameterTable::find(int levels, int n) const {
    const auto it = rows_.find({levels, n});
    return it == rows_.end() ? nullptr : &it->second;
}

ParameterTable ParameterTable::read(std::istream& in) {
    ParameterTable table;
    std::string line;
    int line_no = 0;
    // Next non-comment line, or false at end of input.
    auto next = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            const auto first = out.find_first_not_of(" \t\r");
            if (first == std::string::npos || out[first] == '#') continue;
            return true;
        }
        return false;
    };
    while (next(line)) {
        const int header_line = line_no;
        std::istringstream hs(line);
        std::vector<std::string> tok;
        for (std::string t; hs >> t;) tok.push_back(t);
        if (tok.size() != 5) throw ParseError("expected 'P N rho digits provenance'", header_line);
        ParameterRow row;
        row.levels = parse_int<int>(tok[0], header_line);
        row.n = parse_int<int>(tok[1], header_line);
        const auto rho = parse_values(tok[2], header_line);
        row.rho = rho.front();
        row.digits = parse_int<int>(tok[3], header_line);
        try {
            row.provenance = parse_provenance(tok[4]);
        } catch (const InvariantError& e) {
            throw ParseError(e.what(), header_line);
        }
        if (!next(line)) throw ParseError("missing omega line", line_no + 1);
        row.omegas = parse_values(line, line_no);
        if (static_cast<int>(row.omegas.size()) != row.levels)
            throw ParseError("expected " + std::to_string(row.levels) + " omega values", line_no);
        if (!next(line)) throw ParseError("missing beta line", line_no + 1);
        row.betas = parse_values(line, line_no);
        if (static_cast<int>(row.betas.size()) != row.levels)
            throw ParseError("expected " + std::to_string(row.levels) + " beta values", line_no);
        table.insert(std::move(row));
    }
    return table;
}

ParameterTable ParameterTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open parameter table " + path.string());
    return read(in);
}

void ParameterTable::write(std::ostream& out) const {
    out << "# P N rho digits provenance, then omegas, then betas\n";
    for (const auto& [key, row] : rows_) {
        out << row.levels << ' ' << row.n << ' ' << shortest(row.rho) << ' ' << row.digits << ' '
            << to_string(row.provenance) << '\n';
        for (std::size_t i = 0; i < row.omegas.size(); ++i) out << (i ? " " : "") << shortest(row.omegas[i]);
        out << '\n';
        for (std::size_t i = 0; i < row.betas.size(); ++i) out << (i ? " " : "") << shortest(row.betas[i]);
        out << '\n';
    }
}

void ParameterTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw NotFoundError("cannot write parameter table " + path.string());
    write(out);
}

const ParameterTable& ParameterTable::shipped() {
    static const ParameterTable table = [] {
        std::istringstream in(kShippedTableText);
        return read(in);
    }();
    return table;
}

}  // namespace srj
