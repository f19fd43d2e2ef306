#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "srj/errors.hpp"
#include "srj/optimizer.hpp"
#include "srj/params_db.hpp"
#include "srj/problems.hpp"
#include "srj/solvers.hpp"

using namespace srj;

namespace {

void add_noise(GridProblem& p, unsigned seed, double amplitude = 1.0) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    p.for_each_interior([&](std::size_t c, int, int, int) { p.field()[c] = amplitude * d(g); });
    p.refresh_ghosts();
}

// Dense solve of the discrete equations on the active cells, with every
// neighbour outside them taken from the current (refreshed) field.
std::vector<double> direct_solution(GridProblem p) {
    p.refresh_ghosts();
    std::vector<std::size_t> cells;
    std::vector<long> id(p.padded_count(), -1);
    p.for_each_interior([&](std::size_t c, int, int, int) {
        if (p.active(c)) {
            id[c] = static_cast<long>(cells.size());
            cells.push_back(c);
        }
    });
    const auto n = static_cast<Eigen::Index>(cells.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t c = cells[static_cast<std::size_t>(r)];
        a(r, r) = p.center(c);
        b(r) = p.source()[c];
        for (int ax = 0; ax < p.dims(); ++ax) {
            const std::size_t s = p.stride(ax);
            for (auto [nb, coef] : {std::pair{c - s, p.lower(ax, c)}, std::pair{c + s, p.upper(ax, c)}}) {
                if (id[nb] >= 0) a(r, id[nb]) += coef;
                else b(r) -= coef * p.field()[nb];
            }
        }
    }
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    std::vector<double> u = p.field();
    for (Eigen::Index r = 0; r < n; ++r) u[cells[static_cast<std::size_t>(r)]] = x(r);
    return u;
}

double max_diff(const GridProblem& p, const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    p.for_each_interior([&](std::size_t c, int, int, int) { m = std::max(m, std::abs(a[c] - b[c])); });
    return m;
}

GridProblem homogeneous_dirichlet_square(int inner) {
    const double h = 1.0 / (inner + 1);
    GridProblem p({inner, inner}, {h, h}, {0.5 * h, 0.5 * h});
    p.set_constant_stencil(4.0, {-1.0, -1.0, 0.0}, {-1.0, -1.0, 0.0});
    for (int ax = 0; ax < 2; ++ax)
        for (int side = 0; side < 2; ++side) p.face(ax, side) = {FaceKind::dirichlet, false};
    return p;
}

}  // namespace

TEST_SUITE("solvers") {
    TEST_CASE("single Jacobi update arithmetic") {
        auto p = laplace2d_neumann(4);
        std::fill(p.field().begin(), p.field().end(), 0.0);
        p.field()[p.index(1, 2)] = 1;
        p.field()[p.index(3, 2)] = 2;
        p.field()[p.index(2, 1)] = 3;
        p.field()[p.index(2, 3)] = 4;
        weighted_jacobi_sweep(p, 1.0);
        CHECK(p.field()[p.index(2, 2)] == doctest::Approx(2.5).epsilon(1e-15));
    }

    TEST_CASE("sweep leaves the discrete solution in place") {
        auto c = poisson2d_dirichlet(12, 9);
        const auto u = direct_solution(c.problem);
        c.problem.field() = u;
        c.problem.refresh_ghosts();
        const double change = weighted_jacobi_sweep(c.problem, 1.0);
        CHECK(change < 1e-14);
        SolveLimits lim;
        lim.tolerance = 1e-12;
        const auto h = srj_solve(c.problem, quantize(WeightSchedule::jacobi()), lim);
        CHECK(h.iterations <= 1);
    }

    TEST_CASE("a Fourier mode is damped by 1 - omega kappa") {
        const int inner = 64;
        const double pi = std::numbers::pi;
        auto p = homogeneous_dirichlet_square(inner);
        const double h = p.spacing(0);
        const int kx = 3, ky = 5;
        auto mode = [&](int i, int j) { return std::sin(kx * pi * i * h) * std::sin(ky * pi * j * h); };
        p.for_each_interior([&](std::size_t c, int i, int j, int) { p.field()[c] = mode(i, j); });
        p.refresh_ghosts();
        const double kappa = std::pow(std::sin(kx * pi * h / 2), 2) + std::pow(std::sin(ky * pi * h / 2), 2);
        const double omega = 1.7;
        weighted_jacobi_sweep(p, omega);
        double worst = 0;
        p.for_each_interior([&](std::size_t c, int i, int j, int) {
            worst = std::max(worst, std::abs(p.field()[c] - (1 - omega * kappa) * mode(i, j)));
        });
        CHECK(worst < 1e-6);
    }

    TEST_CASE("zero problem converges in one step") {
        auto p = homogeneous_dirichlet_square(16);
        std::fill(p.field().begin(), p.field().end(), 0.0);
        const auto h = srj_solve(p, quantize(ParameterTable::shipped().lookup(6, 32)), SolveLimits{});
        CHECK(h.converged);
        CHECK(h.iterations == 1);
    }

    TEST_CASE("forward and reverse traversal agree bitwise") {
        auto check = [](GridProblem a) {
            add_noise(a, 5);
            GridProblem b = a;
            for (double w : {1.0, 37.5, 0.6}) {
                weighted_jacobi_sweep(a, w, Traversal::forward);
                weighted_jacobi_sweep(b, w, Traversal::reverse);
            }
            CHECK(a.field() == b.field());
        };
        check(laplace2d_neumann(17));
        check(grad_shafranov(GsTest::A, 0.2, 40).problem);
        check(grad_shafranov(GsTest::B, 0.0, 40).problem);
        check(spherical_poisson(2, 12).problem);
    }

    TEST_CASE("masked-out cells keep their initial values") {
        auto c = grad_shafranov(GsTest::B, 0.0, 60);
        auto& p = c.problem;
        add_noise(p, 9);
        const auto before = p.field();
        SolveLimits lim;
        lim.max_iterations = 500;
        srj_solve(p, quantize(ParameterTable::shipped().lookup(6, 64)), lim);
        int outside = 0, changed = 0;
        p.for_each_interior([&](std::size_t cell, int, int, int) {
            if (p.active(cell)) return;
            ++outside;
            if (p.field()[cell] != before[cell]) ++changed;
        });
        CHECK(outside > 0);
        CHECK(changed == 0);
    }

    TEST_CASE("Gauss-Seidel and SOR reach the direct solution") {
        auto c = poisson2d_dirichlet(16, 12);
        const auto ref = direct_solution(c.problem);
        SolveLimits lim;
        lim.tolerance = 1e-14;
        GridProblem g = c.problem, s = c.problem, j = c.problem;
        CHECK(gauss_seidel_solve(g, lim).converged);
        CHECK(sor_solve(s, 1.5, lim).converged);
        CHECK(jacobi_solve(j, lim).converged);
        CHECK(max_diff(g, g.field(), ref) < 1e-11);
        CHECK(max_diff(s, s.field(), ref) < 1e-11);
        CHECK(max_diff(j, j.field(), ref) < 1e-11);
        CHECK(algebraic_residual(g) < 1e-10);
    }

    TEST_CASE("full cycles are independent of the step order") {
        const auto cyc = quantize(ParameterTable::shipped().lookup(6, 32));
        auto seq = cyc.weight_sequence();
        auto a = laplace2d_neumann(32);
        add_noise(a, 2);
        GridProblem b = a, c = a;
        std::vector<double> rev(seq.rbegin(), seq.rend());
        std::vector<double> shuffled = seq;
        std::mt19937_64 g(4);
        std::shuffle(shuffled.begin(), shuffled.end(), g);
        SolveLimits lim;
        lim.tolerance = 0.0;
        lim.max_iterations = 3L * cyc.cycle_length();
        relaxation_solve(a, seq, lim);
        relaxation_solve(b, rev, lim);
        relaxation_solve(c, shuffled, lim);
        const double ra = algebraic_residual(a);
        CHECK(std::abs(algebraic_residual(b) - ra) <= 1e-8 * ra);
        CHECK(std::abs(algebraic_residual(c) - ra) <= 1e-8 * ra);
        double scale = 0;
        a.for_each_interior([&](std::size_t cell, int, int, int) { scale = std::max(scale, std::abs(a.field()[cell])); });
        CHECK(max_diff(a, a.field(), b.field()) <= 1e-8 * scale);
        CHECK(max_diff(a, a.field(), c.field()) <= 1e-8 * scale);
    }

    TEST_CASE("the residual shrinks over every full cycle") {
        const int n = 64;
        for (int p = 2; p <= 15; ++p) {
            WeightSchedule s = p <= 5 ? solve(p, n).schedule : ParameterTable::shipped().lookup(p, n);
            const auto cyc = quantize(s);
            auto g = laplace2d_neumann(n);
            add_noise(g, 1);
            SolveLimits lim;
            lim.tolerance = 0.0;
            lim.max_iterations = cyc.cycle_length();
            lim.record_history = false;
            double prev = algebraic_residual(g);
            for (int k = 0; k < 4; ++k) {
                srj_solve(g, cyc, lim);
                const double r = algebraic_residual(g);
                CHECK_MESSAGE(r < prev, "P=" << p << " cycle " << k);
                prev = r;
            }
        }
    }

    TEST_CASE("overflow is reported instead of propagating") {
        auto p = laplace2d_neumann(16);
        add_noise(p, 3);
        CHECK_THROWS_AS(weighted_jacobi_sweep(p, 1e306), OverflowError);
    }

    TEST_CASE("residual history CSV") {
        auto p = laplace2d_neumann(8);
        add_noise(p, 1);
        SolveLimits lim;
        lim.max_iterations = 3;
        const auto h = jacobi_solve(p, lim);
        CHECK(h.iterations == 3);
        CHECK(h.residual_inf.size() == 3);
        CHECK_FALSE(h.converged);
        std::ostringstream out;
        h.write_csv(out);
        std::istringstream in(out.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "iteration,residual_inf,wall_seconds");
        int rows = 0;
        while (std::getline(in, line)) ++rows;
        CHECK(rows == 3);
    }

    TEST_CASE("Jacobi iteration count grows as N squared") {
        long its[2];
        int k = 0;
        for (int n : {64, 128}) {
            auto p = laplace2d_neumann(n);
            add_noise(p, 1);
            SolveLimits lim;
            lim.record_history = false;
            its[k++] = jacobi_solve(p, lim).iterations;
        }
        const double ratio = double(its[1]) / its[0];
        MESSAGE("Jacobi " << its[0] << " -> " << its[1] << ", ratio " << ratio);
        CHECK(ratio >= 3.4);
        CHECK(ratio <= 4.6);
    }

    TEST_CASE("solver ordering on the radial problem") {
        const int n = 64;
        auto c = spherical_poisson(1, n);
        SolveLimits lim;
        lim.tolerance = 1e-5 / (n * n);
        lim.record_history = false;
        GridProblem j = c.problem, g = c.problem, s = c.problem, r = c.problem;
        const long nj = jacobi_solve(j, lim).iterations;
        const long ng = gauss_seidel_solve(g, lim).iterations;
        const long ns = sor_solve(s, 1.9, lim).iterations;
        const double neff = effective_n(std::vector<int>{n}, BoundaryKind::dirichlet);
        const long nr = srj_solve(r, quantize(ParameterTable::shipped().lookup(6, static_cast<int>(neff))), lim).iterations;
        MESSAGE("jacobi " << nj << " gs " << ng << " sor " << ns << " srj " << nr);
        CHECK(nj > ng);
        CHECK(ng > ns);
        CHECK(ns > nr);
    }
}
