#pragma once

// Relaxation solvers on GridProblem: weighted Jacobi and its scheduled
// variant, Gauss-Seidel and SOR.
//
// Convergence is measured by the successive-difference norm
// max |u^n - u^{n-1}| over the active cells, checked after every elementary
// step.

#include <iosfwd>
#include <vector>

#include "srj/grid.hpp"
#include "srj/scheduler.hpp"

namespace srj {

struct ResidualHistory {
    std::vector<double> residual_inf;  // one entry per iteration performed
    std::vector<double> wall_seconds;  // elapsed since the solve started
    long iterations = 0;
    bool converged = false;
    double tolerance = 0.0;
    /// max |source - A u| over the active cells at exit.
    double final_algebraic_residual = 0.0;

    /// Columns iteration, residual_inf, wall_seconds (iterations from 1).
    void write_csv(std::ostream& out) const;
};

enum class Traversal { forward, reverse };

/// One two-buffer step u <- u + omega (source - A u) / center on the active
/// cells, then a ghost refresh. Returns max |change|. Throws OverflowError if
/// the field leaves [-1e300, 1e300] or turns non-finite.
double weighted_jacobi_sweep(GridProblem& problem, double omega, Traversal order = Traversal::forward);

struct SolveLimits {
    double tolerance = 1e-10;
    long max_iterations = 10'000'000;
    /// Keep the per-iteration history (the count is always kept).
    bool record_history = true;
};

/// Cycle through the weights in order until the step change drops below the
/// tolerance. max_iterations exhaustion returns converged = false.
ResidualHistory relaxation_solve(GridProblem& problem, const std::vector<double>& weights,
                                 const SolveLimits& limits);

ResidualHistory srj_solve(GridProblem& problem, const CycleSchedule& cycle, const SolveLimits& limits);
ResidualHistory jacobi_solve(GridProblem& problem, const SolveLimits& limits);
/// In-place lexicographic sweeps; omega = 1 is Gauss-Seidel.
ResidualHistory sor_solve(GridProblem& problem, double omega, const SolveLimits& limits);
ResidualHistory gauss_seidel_solve(GridProblem& problem, const SolveLimits& limits);

/// max |source - A u| over the active cells (ghosts taken as they are).
double algebraic_residual(const GridProblem& problem);

}  // namespace srj
