#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "srj/errors.hpp"
#include "srj/params_db.hpp"
#include "srj/problems.hpp"
#include "srj/solvers.hpp"

using namespace srj;

namespace {

const double pi = std::numbers::pi;

// First sign change of j_l on a fine scan, refined by bisection.
double reference_root(int l) {
    auto f = [l](double x) { return boost::math::sph_bessel(static_cast<unsigned>(l), x); };
    double a = 0.5 + l, step = 1e-3;
    while (f(a) * f(a + step) > 0) a += step;
    double b = a + step;
    for (int i = 0; i < 100; ++i) {
        const double m = 0.5 * (a + b);
        if (f(a) * f(m) <= 0) b = m;
        else a = m;
    }
    return 0.5 * (a + b);
}

double solve_error(AnalyticCase c, int levels, int schedule_n, double tol) {
    SolveLimits lim;
    lim.tolerance = tol;
    lim.record_history = false;
    const auto h = srj_solve(c.problem, quantize(ParameterTable::shipped().lookup(levels, schedule_n)), lim);
    REQUIRE(h.converged);
    return c.max_error();
}

}  // namespace

TEST_SUITE("problems") {
    TEST_CASE("spherical Bessel functions match the reference implementation") {
        for (int l = 0; l <= 60; l += 3)
            for (double x : {1e-3, 0.3, 1.0, 4.0, 10.0, 25.0, 60.0, 75.0}) {
                const double ref = boost::math::sph_bessel(static_cast<unsigned>(l), x);
                CHECK_MESSAGE(std::abs(spherical_bessel_j(l, x) - ref) <= 1e-11 * std::abs(ref) + 1e-15, "l=" << l << " x=" << x);
            }
    }

    TEST_CASE("first roots") {
        CHECK(spherical_bessel_first_root(0) == doctest::Approx(pi).epsilon(1e-12));
        CHECK(spherical_bessel_first_root(1) == doctest::Approx(4.493409).epsilon(1e-6));
        CHECK(spherical_bessel_first_root(2) == doctest::Approx(5.763459).epsilon(1e-6));
        for (int l : {1, 2, 5, 10, 30, 60})
            CHECK(spherical_bessel_first_root(l) == doctest::Approx(reference_root(l)).epsilon(1e-11));
        // The source radial factor vanishes at r = 1.
        for (int l = 0; l <= 60; l += 2) CHECK(std::abs(spherical_bessel_j(l, spherical_bessel_first_root(l))) < 1e-12);
    }

    TEST_CASE("real spherical harmonics") {
        CHECK(real_spherical_harmonic(0, 0, 0.7, 1.1) == doctest::Approx(1 / std::sqrt(4 * pi)).epsilon(1e-14));
        CHECK(real_spherical_harmonic(1, 0, 0.0, 0.0) == doctest::Approx(std::sqrt(3 / (4 * pi))).epsilon(1e-14));
        // Gauss-Legendre in cos(theta); phi integrates to 2 pi for m = 0.
        auto inner = [](int l1, int l2) {
            return 2 * pi * boost::math::quadrature::gauss<double, 20>::integrate(
                [&](double x) {
                    const double t = std::acos(x);
                    return real_spherical_harmonic(l1, 0, t, 0) * real_spherical_harmonic(l2, 0, t, 0);
                }, -1.0, 1.0);
        };
        CHECK(std::abs(inner(2, 0)) < 1e-6);
        CHECK(inner(2, 2) == doctest::Approx(1.0).epsilon(1e-10));
    }

    TEST_CASE("angular factors") {
        const SphericalSeries s3{3};
        for (int l : {0, 2, 4, 8, 13})
            for (double t : {0.3, 1.2, 2.9})
                for (double ph : {0.0, 0.8, 4.0}) {
                    double full = 0;
                    for (int m = -l; m <= l; ++m) full += real_spherical_harmonic(l, m, t, ph);
                    CHECK(s3.angular(l, t, ph) == doctest::Approx(full).epsilon(1e-12).scale(1.0));
                }
        const SphericalSeries s2{2};
        CHECK(s2.angular(4, 0.9, 2.0) == doctest::Approx(real_spherical_harmonic(4, 0, 0.9, 0.0)));
    }

    TEST_CASE("series coefficients") {
        // With a_0 = 1 and k_0 = pi: b_0 = a_0 k_0 j_1(k_0) = pi / pi.
        CHECK(SphericalSeries::b(0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(SphericalSeries::a(3) == 0.125);
        for (int l : {2, 4, 10}) {
            const double k = SphericalSeries::k(l);
            const double ref = -SphericalSeries::a(l) *
                               (l * boost::math::sph_bessel(l, k) - k * boost::math::sph_bessel(l + 1, k)) / (2 * l + 1);
            CHECK(SphericalSeries::b(l) == doctest::Approx(ref).epsilon(1e-10));
        }
    }

    TEST_CASE("source series terminate well below the cap") {
        CHECK(spherical_source_terms(1, 64) < 200);
        CHECK(spherical_source_terms(1, 128) < 200);
        CHECK(spherical_source_terms(2, 64) < 200);
        CHECK(spherical_source_terms(2, 128) < 200);
        CHECK(spherical_source_terms(3, 16) < 200);
    }

    TEST_CASE("radial operator is diagonally dominant by rows and columns") {
        const int n = 64;
        auto c = spherical_poisson(1, n);
        const auto& p = c.problem;
        // Unknowns are cells 2..n; cell 1 is tied to cell 2, the outer ghost is data.
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n - 1, n - 1);
        for (int i = 2; i <= n; ++i) {
            const std::size_t cell = p.index(i);
            const int r = i - 2;
            a(r, r) += p.center(cell);
            if (i == 2) a(r, r) += p.lower(0, cell);
            else a(r, r - 1) += p.lower(0, cell);
            if (i < n) a(r, r + 1) += p.upper(0, cell);
        }
        int strict = 0;
        for (int r = 0; r < n - 1; ++r) {
            double row = 0, col = 0;
            for (int k = 0; k < n - 1; ++k) {
                if (k == r) continue;
                row += std::abs(a(r, k));
                col += std::abs(a(k, r));
            }
            const double d = std::abs(a(r, r));
            CHECK(d >= row * (1 - 1e-12));
            CHECK(d >= col * (1 - 1e-12));
            if (d > row * (1 + 1e-12)) ++strict;
        }
        CHECK(strict > 0);
    }

    TEST_CASE("Laplace problem: constants are fixed points and the slowest mode matches kappa_min") {
        const int n = 40;
        auto p = laplace2d_neumann(n);
        std::fill(p.field().begin(), p.field().end(), 3.25);
        CHECK(weighted_jacobi_sweep(p, 1.0) == 0.0);
        p.for_each_interior([&](std::size_t c, int i, int, int) { p.field()[c] = std::cos(pi * (i - 0.5) / n); });
        p.refresh_ghosts();
        const auto before = p.field();
        weighted_jacobi_sweep(p, 1.0);
        const std::size_t c = p.index(3, 7);
        const double kappa = 1 - p.field()[c] / before[c];
        CHECK(kappa == doctest::Approx(kappa_min(n, 2, BoundaryKind::neumann)).epsilon(1e-9));
    }

    TEST_CASE("Laplace problem: more levels need fewer iterations") {
        const int n = 256;
        long prev = 0;
        for (int levels = 3; levels <= 5; ++levels) {
            auto p = laplace2d_neumann(n);
            std::mt19937_64 g(1);
            std::uniform_real_distribution<double> d(-0.5, 0.5);
            p.for_each_interior([&](std::size_t cell, int, int, int) { p.field()[cell] = d(g); });
            SolveLimits lim;
            lim.record_history = false;
            const long its = srj_solve(p, quantize(ParameterTable::shipped().lookup(levels, n)), lim).iterations;
            if (prev) CHECK(its < prev);
            prev = its;
        }
    }

    TEST_CASE("Poisson problem data and second-order accuracy") {
        auto c = poisson2d_dirichlet(16, 8);
        CHECK(c.exact(0.0, 0.0, 0.0) == -1.0);
        CHECK(c.exact(0.0, 0.37, 0.0) == -1.0);
        const auto& p = c.problem;
        CHECK(p.field()[p.index(0, 3)] == doctest::Approx(-1.0).epsilon(1e-15));
        const double e64 = solve_error(poisson2d_dirichlet(64, 64), 6, 64, 1e-13);
        const double e128 = solve_error(poisson2d_dirichlet(128, 128), 6, 128, 1e-13);
        MESSAGE("Poisson errors " << e64 << " " << e128);
        CHECK(e64 / e128 >= 3.2);
        CHECK(e64 / e128 <= 4.8);
    }

    TEST_CASE("Grad-Shafranov test B region") {
        CHECK(gs_test_b_region(1.5, pi / 2));
        CHECK_FALSE(gs_test_b_region(9.5, 0.05));
        // Inside the excluded disk centred near (r sin t, r cos t) = (4, 1.6).
        const double r = std::hypot(4.0, 1.6), t = std::atan2(4.0, 1.6);
        CHECK_FALSE(gs_test_b_region(r, t));
    }

    TEST_CASE("Grad-Shafranov: a small C barely changes the flux") {
        const int n = 100;
        auto solve_c = [&](double cc) {
            auto c = grad_shafranov(GsTest::A, cc, n);
            SolveLimits lim;
            lim.tolerance = 1e-12;
            lim.record_history = false;
            REQUIRE(srj_solve(c.problem, quantize(ParameterTable::shipped().lookup(10, n)), lim).converged);
            return c.problem;
        };
        const auto a = solve_c(0.0), b = solve_c(0.1);
        double diff = 0, scale = 0;
        a.for_each_interior([&](std::size_t cell, int, int, int) {
            diff = std::max(diff, std::abs(a.field()[cell] - b.field()[cell]));
            scale = std::max(scale, std::abs(a.field()[cell]));
        });
        MESSAGE("relative change " << diff / scale);
        CHECK(diff / scale < 0.02);
    }

    TEST_CASE("argument checks") {
        CHECK_THROWS_AS(spherical_poisson(4, 16), InvariantError);
        CHECK_THROWS_AS(spherical_poisson(1, 4), InvariantError);
    }
}
