#pragma once

// Optimal SRJ parameters from the reduced (omega, kappa) system.
//
// The unknowns are the P weights and the P-1 interior extrema of Gamma; the
// cycle fractions follow from beta_from. A damped Newton iteration with a
// finite-difference Jacobian drives the residual of closed_forms.hpp to zero,
// continuing from coarse grids and fewer levels toward the requested (P, N).

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "srj/closed_forms.hpp"
#include "srj/core.hpp"

namespace srj {

/// 50 significant decimal digits, used when double precision cannot resolve
/// the system (many levels or fine grids).
using Extended = boost::multiprecision::cpp_bin_float_50;

template <class T>
struct OptimizerState {
    std::vector<T> omegas;  // P weights, strictly decreasing
    std::vector<T> kappas;  // P-1 interior extrema, 1/omega_i < kappa_i < 1/omega_{i+1}
    KappaRange kappa_bounds;
    int precision_digits = 16;

    int levels() const noexcept { return static_cast<int>(omegas.size()); }

    /// Positivity, strict ordering of omegas and interleaving of kappas.
    bool feasible() const;

    std::vector<T> residual() const {
        return srj::residual<T>(omegas, kappas, T(kappa_bounds.kappa_min()), T(kappa_bounds.kappa_max()));
    }
    std::vector<T> betas() const { return beta_from<T>(omegas, kappas); }
};

struct SolveReport {
    WeightSchedule schedule;
    int newton_iterations = 0;
    double final_residual_norm = 0.0;
    int precision_digits_used = 16;
};

struct SolveOptions {
    /// Force the working precision: <= 16 selects double, anything larger the
    /// 50-digit type. Empty picks automatically from (P, N).
    std::optional<int> precision_digits;
    int max_newton_iterations = 100;
    /// Called after each completed continuation stage (levels, kappa_min, iterations).
    std::function<void(int, double, int)> on_stage;
};

struct NewtonOptions {
    int max_iterations = 100;
    /// Residual infinity-norm target; zero selects 1e-12 (double) or 1e-20 (extended).
    double tolerance = 0.0;
    int max_backtracks = 40;
};

template <class T>
struct NewtonResult {
    OptimizerState<T> state;
    int iterations = 0;
    double residual_norm = 0.0;
};

/// Damped Newton on the residual in the variables (log omega, log kappa).
/// Throws ConvergenceError when the iteration cap is hit or backtracking is
/// exhausted without meeting the tolerance.
template <class T>
NewtonResult<T> newton_solve(OptimizerState<T> guess, const NewtonOptions& options = {});

/// Central-difference Jacobian of the residual with respect to
/// (log omega_1..P, log kappa_1..P-1), step sqrt(epsilon of T).
template <class T>
Matrix<T> residual_jacobian(const OptimizerState<T>& state);

/// Starting point for a P-level solve from solved schedules with fewer levels
/// at the same grid size (ordered by increasing P, at most the last four are
/// used). The extreme weights are extrapolated by conic fits in P and the
/// inner weights laid out on a geometric ladder between them; each kappa_i
/// starts a third of the way from 1/omega_i to 1/omega_{i+1}.
///
/// P == 2 needs no priors. Otherwise at least two are required
/// (InvariantError); the trivial one-level schedule counts as a prior.
OptimizerState<double> initial_guess(int levels, std::span<const WeightSchedule> priors,
                                     KappaRange range);

/// Exponents e_i (in units of 1/(2(P-1))) of the inverse-weight ladder
/// 1/omega_i = (1/omega_1) (omega_1/omega_P)^(e_i / (2(P-1))).
std::vector<int> ladder_exponents(int levels);

/// Extrapolate values at integer abscissae to `target` by a line (2 points),
/// parabola (3 points) or, for 4 points, a hyperbola a/(x - c) + d unless the
/// points are flat (second differences change sign or fall below 1e-3 of the
/// mean), in which case a least-squares parabola.
double conic_extrapolate(std::span<const double> xs, std::span<const double> ys, double target);

/// Optimal P-level weights for an N-point grid in `dims` dimensions.
/// Requires 1 <= P <= 15 and N >= 16. Throws ConvergenceError if any stage of
/// the continuation fails.
SolveReport solve(int levels, int n, BoundaryKind bc = BoundaryKind::neumann, int dims = 2,
                  const SolveOptions& options = {});

/// Same as solve, for an explicit lower mode bound kappa_min.
SolveReport solve_for_kappa(int levels, double kappa_min, int grid_size, const SolveOptions& options = {});

/// Single-level optimum: the weight equalizing |1 - omega kappa| at both ends.
WeightSchedule one_level_schedule(double kappa_min, int grid_size);

/// Precision chosen when SolveOptions leaves it open.
int default_precision_digits(int levels, int n);

}  // namespace srj
