#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "srj/errors.hpp"
#include "srj/optimizer.hpp"
#include "srj/params_db.hpp"

using namespace srj;

TEST_SUITE("params_db") {
    TEST_CASE("shipped table contents") {
        const auto& t = ParameterTable::shipped();
        CHECK(t.size() == 315);
        for (const auto& [key, row] : t.rows()) {
            CHECK(row.provenance == Provenance::paper_table);
            CHECK(row.levels == key.first);
            CHECK(row.n == key.second);
        }
    }

    TEST_CASE("lookup picks the largest N not above the target") {
        const auto& t = ParameterTable::shipped();
        CHECK(t.lookup_row(10, 585).n == 550);
        const auto& r = t.lookup_row(6, 100);
        CHECK(r.n == 100);
        CHECK(r.schedule().rho() == doctest::Approx(23.75).epsilon(0.01 / 23.75));
        CHECK_THROWS_AS(t.lookup(15, 32), NotFoundError);
        CHECK_THROWS_AS(t.lookup(1, 100), NotFoundError);
        for (int p = 3; p <= 15; ++p) {
            int prev = 0;
            for (int target = 16; target <= 40000; target += 37) {
                try {
                    const int n = t.lookup_row(p, target).n;
                    CHECK(n <= target);
                    CHECK(n >= prev);
                    prev = n;
                } catch (const NotFoundError&) {
                    CHECK(prev == 0);
                }
            }
        }
    }

    TEST_CASE("export and import are the identity") {
        const auto& t = ParameterTable::shipped();
        std::stringstream s;
        t.write(s);
        CHECK(ParameterTable::read(s) == t);
        const auto path = std::filesystem::temp_directory_path() / "srj_table_roundtrip.txt";
        t.save(path);
        CHECK(ParameterTable::load(path) == t);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(ParameterTable::load("/nonexistent/table.txt"), NotFoundError);
    }

    TEST_CASE("rows violating the beta sum are rejected") {
        std::istringstream in("2 100 4.15 6 paper-table\n321.074 0.968096\n0.0099 0.98\n");
        CHECK_THROWS_AS(ParameterTable::read(in), InvariantError);
        ParameterTable t;
        ParameterRow row{2, 100, {2.0, 0.5}, {0.5, 0.4}, 1.2, 17, Provenance::computed};
        CHECK_THROWS_AS(t.insert(row), InvariantError);
        row.betas = {0.5, 0.5};
        CHECK_NOTHROW(t.insert(row));
        CHECK_THROWS_AS(t.insert(row), InvariantError);
        CHECK_NOTHROW(t.insert(row, true));
        row.omegas = {0.5, 2.0};
        CHECK_THROWS_AS(t.insert(row, true), InvariantError);
    }

    TEST_CASE("parse errors carry the line number") {
        auto line_of = [](const std::string& text) {
            std::istringstream in(text);
            try {
                ParameterTable::read(in);
            } catch (const ParseError& e) {
                return e.line();
            }
            return 0;
        };
        CHECK(line_of("# comment\n\n2 100 4.15 6\n1 0.5\n0.5 0.5\n") == 3);
        CHECK(line_of("2 100 4.15 6 computed\n2.0 x\n0.5 0.5\n") == 2);
        CHECK(line_of("2 100 4.15 6 computed\n2.0 0.5\n0.5\n") == 3);
        CHECK(line_of("2 100 4.15 6 computed\n2.0 0.5\n") == 3);
        CHECK(line_of("2 100 4.15 6 computed\n2.0 0.5\n0.5 0.5\n") == 0);
    }

    TEST_CASE("optimizer rows merge into a table") {
        const auto report = solve(2, 100);
        ParameterTable computed;
        computed.insert(computed_row(report.schedule));
        ParameterTable t;
        t.merge(computed);
        const auto s = t.lookup(2, 120);
        CHECK(s.omegas()[0] == doctest::Approx(321.074).epsilon(1e-3));
        CHECK(s.omegas()[1] == doctest::Approx(0.968096).epsilon(1e-3));
        CHECK(s.betas()[0] == doctest::Approx(0.00993673).epsilon(1e-3));
        CHECK(s.betas()[1] == doctest::Approx(0.990063).epsilon(1e-3));
        CHECK(t.lookup_row(2, 100).provenance == Provenance::computed);
        ParameterTable shipped = ParameterTable::shipped();
        CHECK_THROWS_AS(shipped.merge(computed), InvariantError);
        shipped.merge(computed, true);
        CHECK(shipped.lookup_row(2, 100).provenance == Provenance::computed);
        std::stringstream io;
        computed.write(io);
        CHECK(ParameterTable::read(io) == computed);
    }

    TEST_CASE("provenance names") {
        CHECK(to_string(Provenance::paper_table) == "paper-table");
        CHECK(parse_provenance("computed") == Provenance::computed);
        CHECK_THROWS_AS(parse_provenance("guess"), InvariantError);
    }
}
