#include "srj/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "srj/errors.hpp"

namespace srj {

namespace {

constexpr double kOverflowLimit = 1e300;

struct SweepResult {
    double max_change = 0.0;
    double max_abs = 0.0;
};

// Coefficients of the stencil as raw pointers (per-cell) or scalars (constant).
struct Coefficients {
    const double* c = nullptr;
    const double* lo[3] = {nullptr, nullptr, nullptr};
    const double* hi[3] = {nullptr, nullptr, nullptr};
    double c0 = 1.0;
    double l0[3] = {0.0, 0.0, 0.0};
    double h0[3] = {0.0, 0.0, 0.0};
};

Coefficients coefficients_of(const GridProblem& p) {
    Coefficients k;
    if (p.constant_stencil()) {
        k.c0 = p.center(0);
        for (int a = 0; a < 3; ++a) {
            k.l0[a] = p.constant_lower()[static_cast<std::size_t>(a)];
            k.h0[a] = p.constant_upper()[static_cast<std::size_t>(a)];
        }
    } else {
        k.c = p.center_array().data();
        for (int a = 0; a < 3; ++a) {
            k.lo[a] = p.lower_array(a).data();
            k.hi[a] = p.upper_array(a).data();
        }
    }
    return k;
}

// A u at cell c, accumulated in a fixed order shared by every kernel.
template <int D, bool Const>
inline double apply(const double* u, std::size_t c, const std::size_t* st, const Coefficients& k) {
    double au;
    if constexpr (Const) {
        au = k.c0 * u[c] + k.l0[0] * u[c - 1] + k.h0[0] * u[c + 1];
        if constexpr (D > 1) au += k.l0[1] * u[c - st[1]] + k.h0[1] * u[c + st[1]];
        if constexpr (D > 2) au += k.l0[2] * u[c - st[2]] + k.h0[2] * u[c + st[2]];
    } else {
        au = k.c[c] * u[c] + k.lo[0][c] * u[c - 1] + k.hi[0][c] * u[c + 1];
        if constexpr (D > 1) au += k.lo[1][c] * u[c - st[1]] + k.hi[1][c] * u[c + st[1]];
        if constexpr (D > 2) au += k.lo[2][c] * u[c - st[2]] + k.hi[2][c] * u[c + st[2]];
    }
    return au;
}

template <int D, bool Const, bool Masked, bool Reverse>
SweepResult jacobi_kernel(GridProblem& p, double omega) {
    const double* __restrict u = p.field().data();
    double* __restrict out = p.scratch().data();
    const double* __restrict s = p.source().data();
    const char* __restrict mask = Masked ? p.mask().data() : nullptr;
    const Coefficients k = coefficients_of(p);
    const std::size_t st[3] = {1, p.stride(1), p.stride(2)};
    const double w_c0 = omega / k.c0;
    const int n0 = p.size(0);
    const int n1 = D > 1 ? p.size(1) : 1;
    const int n2 = D > 2 ? p.size(2) : 1;

    double max_change = 0.0;
    double max_abs = 0.0;
    for (int kk2 = 1; kk2 <= n2; ++kk2) {
        const int kk = Reverse ? n2 + 1 - kk2 : kk2;
        for (int j2 = 1; j2 <= n1; ++j2) {
            const int j = Reverse ? n1 + 1 - j2 : j2;
            const std::size_t base = p.index(0, D > 1 ? j : 0, D > 2 ? kk : 0);
            for (int ii = 1; ii <= n0; ++ii) {
                const std::size_t c = base + static_cast<std::size_t>(Reverse ? n0 + 1 - ii : ii);
                const double r = s[c] - apply<D, Const>(u, c, st, k);
                double d = Const ? w_c0 * r : omega * r / k.c[c];
                if constexpr (Masked) d = mask[c] ? d : 0.0;
                const double v = u[c] + d;
                out[c] = v;
                const double ad = std::abs(d);
                max_change = ad > max_change ? ad : max_change;
                const double av = std::abs(v);
                max_abs = av > max_abs ? av : max_abs;
            }
        }
    }
    return {max_change, max_abs};
}

template <int D>
SweepResult dispatch_jacobi(GridProblem& p, double omega, Traversal order) {
    const bool c = p.constant_stencil(), m = p.has_mask(), r = order == Traversal::reverse;
    if (c && !m && !r) return jacobi_kernel<D, true, false, false>(p, omega);
    if (c && !m && r) return jacobi_kernel<D, true, false, true>(p, omega);
    if (c && m && !r) return jacobi_kernel<D, true, true, false>(p, omega);
    if (c && m && r) return jacobi_kernel<D, true, true, true>(p, omega);
    if (!c && !m && !r) return jacobi_kernel<D, false, false, false>(p, omega);
    if (!c && !m && r) return jacobi_kernel<D, false, false, true>(p, omega);
    if (!c && m && !r) return jacobi_kernel<D, false, true, false>(p, omega);
    return jacobi_kernel<D, false, true, true>(p, omega);
}

template <int D, bool Const>
SweepResult sor_kernel(GridProblem& p, double omega) {
    double* u = p.field().data();
    const double* s = p.source().data();
    const bool masked = p.has_mask();
    const char* mask = masked ? p.mask().data() : nullptr;
    const Coefficients k = coefficients_of(p);
    const std::size_t st[3] = {1, p.stride(1), p.stride(2)};
    SweepResult res;
    p.for_each_interior([&](std::size_t c, int, int, int) {
        if (masked && !mask[c]) return;
        const double center = Const ? k.c0 : k.c[c];
        const double v = u[c] + omega * (s[c] - apply<D, Const>(u, c, st, k)) / center;
        res.max_change = std::max(res.max_change, std::abs(v - u[c]));
        res.max_abs = std::max(res.max_abs, std::abs(v));
        u[c] = v;
    });
    return res;
}

SweepResult sor_sweep(GridProblem& p, double omega) {
    const bool c = p.constant_stencil();
    switch (p.dims()) {
        case 1: return c ? sor_kernel<1, true>(p, omega) : sor_kernel<1, false>(p, omega);
        case 2: return c ? sor_kernel<2, true>(p, omega) : sor_kernel<2, false>(p, omega);
        default: return c ? sor_kernel<3, true>(p, omega) : sor_kernel<3, false>(p, omega);
    }
}

void guard(const SweepResult& r) {
    if (!(r.max_abs <= kOverflowLimit) || !std::isfinite(r.max_change))
        throw OverflowError("relaxation step overflowed the field (|u| > 1e300)");
}

template <class Step>
ResidualHistory iterate(GridProblem& problem, const SolveLimits& limits, Step&& step) {
    using clock = std::chrono::steady_clock;
    ResidualHistory h;
    h.tolerance = limits.tolerance;
    problem.refresh_ghosts();
    const auto t0 = clock::now();
    while (h.iterations < limits.max_iterations) {
        const double change = step(h.iterations);
        ++h.iterations;
        if (limits.record_history) {
            h.residual_inf.push_back(change);
            h.wall_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
        }
        if (change < limits.tolerance) {
            h.converged = true;
            break;
        }
    }
    h.final_algebraic_residual = algebraic_residual(problem);
    return h;
}

}  // namespace

void ResidualHistory::write_csv(std::ostream& out) const {
    const auto old = out.precision(17);
    out << "iteration,residual_inf,wall_seconds\n";
    for (std::size_t i = 0; i < residual_inf.size(); ++i)
        out << (i + 1) << ',' << residual_inf[i] << ',' << wall_seconds[i] << '\n';
    out.precision(old);
}

double weighted_jacobi_sweep(GridProblem& problem, double omega, Traversal order) {
    SweepResult r;
    switch (problem.dims()) {
        case 1: r = dispatch_jacobi<1>(problem, omega, order); break;
        case 2: r = dispatch_jacobi<2>(problem, omega, order); break;
        default: r = dispatch_jacobi<3>(problem, omega, order); break;
    }
    guard(r);
    problem.field().swap(problem.scratch());
    problem.refresh_ghosts();
    return r.max_change;
}

ResidualHistory relaxation_solve(GridProblem& problem, const std::vector<double>& weights,
                                 const SolveLimits& limits) {
    if (weights.empty()) throw InvariantError("relaxation_solve: empty weight sequence");
    const std::size_t m = weights.size();
    return iterate(problem, limits, [&](long it) {
        return weighted_jacobi_sweep(problem, weights[static_cast<std::size_t>(it) % m]);
    });
}

ResidualHistory srj_solve(GridProblem& problem, const CycleSchedule& cycle, const SolveLimits& limits) {
    return relaxation_solve(problem, cycle.weight_sequence(), limits);
}

ResidualHistory jacobi_solve(GridProblem& problem, const SolveLimits& limits) {
    return relaxation_solve(problem, {1.0}, limits);
}

ResidualHistory sor_solve(GridProblem& problem, double omega, const SolveLimits& limits) {
    return iterate(problem, limits, [&](long) {
        const SweepResult r = sor_sweep(problem, omega);
        guard(r);
        problem.refresh_ghosts();
        return r.max_change;
    });
}

ResidualHistory gauss_seidel_solve(GridProblem& problem, const SolveLimits& limits) {
    return sor_solve(problem, 1.0, limits);
}

double algebraic_residual(const GridProblem& problem) {
    const double* u = problem.field().data();
    const double* s = problem.source().data();
    const std::size_t st[3] = {1, problem.stride(1), problem.stride(2)};
    const Coefficients k = coefficients_of(problem);
    const bool cst = problem.constant_stencil();
    const int d = problem.dims();
    double m = 0.0;
    problem.for_each_interior([&](std::size_t c, int, int, int) {
        if (!problem.active(c)) return;
        double au;
        if (cst)
            au = d == 1 ? apply<1, true>(u, c, st, k) : d == 2 ? apply<2, true>(u, c, st, k) : apply<3, true>(u, c, st, k);
        else
            au = d == 1 ? apply<1, false>(u, c, st, k)
                 : d == 2 ? apply<2, false>(u, c, st, k)
                          : apply<3, false>(u, c, st, k);
        m = std::max(m, std::abs(s[c] - au));
    });
    return m;
}

}  // namespace srj
