#pragma once

// Value types and amplification-factor analysis for Scheduled Relaxation
// Jacobi (SRJ) schemes.
//
// A P-level scheme applies the weighted Jacobi step with weights
// omega_1 > ... > omega_P, each for a fraction beta_i of the iterations in a
// cycle. A Fourier mode with wavenumber parameter kappa is damped on average
// per iteration by
//
//     Gamma(kappa) = prod_i |1 - omega_i kappa|^beta_i ,
//
// and kappa ranges over [kappa_min, 2] for the discretization at hand.

#include <span>
#include <vector>

namespace srj {

enum class BoundaryKind { neumann, dirichlet };

/// Upper end of the mode range, identical for every boundary type and dimension.
inline constexpr double kKappaMax = 2.0;

/// Interval of admissible mode parameters [kappa_min, kappa_max].
class KappaRange {
public:
    explicit KappaRange(double kappa_min);

    double kappa_min() const noexcept { return kappa_min_; }
    double kappa_max() const noexcept { return kKappaMax; }

private:
    double kappa_min_;
};

/// Relaxation weights with their cycle fractions for a given grid size.
///
/// Immutable once built. The constructor enforces strictly decreasing
/// weights, omega_P in (0,1) and omega_1 > 1 when P >= 2, betas in (0,1]
/// summing to one (1e-12 relative), and caches rho = sum omega_i beta_i.
class WeightSchedule {
public:
    WeightSchedule(std::vector<double> omegas, std::vector<double> betas, int grid_size);

    /// Same as the constructor, but rescales betas to sum exactly to one first.
    /// Used for published values that are rounded to a few digits.
    static WeightSchedule normalized(std::vector<double> omegas, std::vector<double> betas,
                                     int grid_size);

    /// Plain Jacobi: one level, omega = 1.
    static WeightSchedule jacobi(int grid_size = 2);

    int levels() const noexcept { return static_cast<int>(omegas_.size()); }
    int grid_size() const noexcept { return grid_size_; }
    const std::vector<double>& omegas() const noexcept { return omegas_; }
    const std::vector<double>& betas() const noexcept { return betas_; }
    double rho() const noexcept { return rho_; }

    friend bool operator==(const WeightSchedule&, const WeightSchedule&) = default;

private:
    std::vector<double> omegas_;
    std::vector<double> betas_;
    int grid_size_;
    double rho_;
};

/// log Gamma(kappa); -infinity when a factor vanishes.
double log_gamma(const WeightSchedule& schedule, double kappa);

/// Gamma(kappa), exponentiated from log space. Exactly 0 when any factor
/// |1 - omega_i kappa| is below 1e-300.
double gamma(const WeightSchedule& schedule, double kappa);

/// sum_i beta_i omega_i / (1 - kappa omega_i). Its zeros between consecutive
/// 1/omega_i are the interior extrema of Gamma. Throws PoleError at
/// kappa = 1/omega_i.
double log_gamma_slope(const WeightSchedule& schedule, double kappa);

/// Convergence performance index rho = sum_i omega_i beta_i, the asymptotic
/// speed-up over plain Jacobi.
double performance_index(const WeightSchedule& schedule);

/// The P-1 interior extrema of Gamma, one in each (1/omega_i, 1/omega_{i+1}),
/// located by bisection on the sign of log_gamma_slope.
std::vector<double> interior_extrema(const WeightSchedule& schedule);

/// Smallest mode parameter of a d-dimensional Cartesian grid with N points per
/// axis. Neumann: (2/d) sin^2(pi/(2N)). Dirichlet goes through effective_n.
double kappa_min(int n, int dims, BoundaryKind bc);

/// Smallest mode parameter for per-axis sizes (d = sizes.size()).
double kappa_min(std::span<const int> sizes, BoundaryKind bc);

/// The 2D-Neumann-equivalent grid size whose kappa_min matches the given
/// problem. Neumann uses max(sizes); Dirichlet sums the per-axis sin^2 terms.
double effective_n(std::span<const int> sizes, BoundaryKind bc);

/// effective_n for a grid with n points on each of dims axes.
double effective_n(int n, int dims, BoundaryKind bc);

/// kappa_min of the 2D Neumann model problem for a (possibly fractional) size.
double kappa_min_model(double n);

}  // namespace srj
