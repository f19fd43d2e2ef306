#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "srj/params_db.hpp"
#include "srj/scheduler.hpp"

using namespace srj;

TEST_SUITE("scheduler") {
    TEST_CASE("ten-level cycle for N = 550") {
        const auto s = ParameterTable::shipped().lookup(10, 550);
        const auto c = quantize(s);
        CHECK(c.q() == std::vector<int>{1, 1, 3, 9, 21, 49, 116, 268, 587, 1014});
        CHECK(c.cycle_length() == 2069);
        CHECK(validate_cycle(c, KappaRange(kappa_min(550, 2, BoundaryKind::neumann))).stable);
        // The two largest weights are spread apart, cyclically.
        const auto& seq = c.weight_sequence();
        const int m = c.cycle_length();
        for (int i = 0; i < m; ++i) {
            const bool big = seq[i] >= s.omegas()[1];
            const bool next_big = seq[(i + 1) % m] >= s.omegas()[1];
            CHECK_FALSE((big && next_big));
        }
    }

    TEST_CASE("trivial cycle") {
        const auto c = quantize(WeightSchedule::jacobi());
        CHECK(c.q() == std::vector<int>{1});
        CHECK(c.cycle_length() == 1);
        CHECK(c.weight_sequence() == std::vector<double>{1.0});
        const auto v = validate_cycle(c, KappaRange(1e-3));
        CHECK(v.max_amplification == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(v.stable);
    }

    TEST_CASE("layout rule") {
        CHECK(layout({1, 3}, {10.0, 0.5}) == std::vector<double>{10.0, 0.5, 0.5, 0.5});
        CHECK(layout({1}, {3.0}) == std::vector<double>{3.0});
    }

    TEST_CASE("layout is a permutation of the weight multiset") {
        for (const auto& [key, row] : ParameterTable::shipped().rows()) {
            if (key.second != 256 && key.second != 1024) continue;
            const auto c = quantize(row.schedule());
            std::map<double, int> count;
            for (double w : c.weight_sequence()) ++count[w];
            REQUIRE(static_cast<int>(count.size()) == c.levels());
            for (int i = 0; i < c.levels(); ++i) CHECK(count[row.schedule().omegas()[i]] == c.q()[i]);
            CHECK(static_cast<int>(c.weight_sequence().size()) == c.cycle_length());
        }
    }

    TEST_CASE("quantization strategies") {
        const auto s = ParameterTable::shipped().lookup(6, 256);
        const auto f = quantize(s, Quantization::floor);
        const auto r = quantize(s, Quantization::round);
        const auto c = quantize(s, Quantization::ceil);
        for (int i = 0; i < 6; ++i) {
            const double x = s.betas()[i] / s.betas()[0];
            CHECK(f.q()[i] == static_cast<int>(std::floor(x + 1e-12)));
            CHECK(c.q()[i] == static_cast<int>(std::ceil(x - 1e-12)));
            CHECK(r.q()[i] == static_cast<int>(std::lround(x)));
        }
        const KappaRange range(kappa_min(256, 2, BoundaryKind::neumann));
        const auto vf = validate_cycle(f, range), vc = validate_cycle(c, range);
        CHECK(vf.stable);
        CHECK(vc.stable);
        CHECK(std::abs(vf.max_amplification - vc.max_amplification) / std::min(vf.max_amplification, vc.max_amplification) > 0.05);
    }

    TEST_CASE("every shipped row gives a stable floor cycle") {
        int unstable = 0;
        for (const auto& [key, row] : ParameterTable::shipped().rows()) {
            const auto c = quantize(row.schedule());
            const auto v = validate_cycle(c, KappaRange(kappa_min(key.second, 2, BoundaryKind::neumann)));
            if (!v.stable) {
                ++unstable;
                MESSAGE("unstable P=" << key.first << " N=" << key.second << " max=" << v.max_amplification);
            }
        }
        CHECK(unstable == 0);
    }
}
