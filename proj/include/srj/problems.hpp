#pragma once

// Benchmark problems with known solutions, and the special functions the
// spherical test needs.

#include <functional>
#include <string>
#include <vector>

#include "srj/grid.hpp"

namespace srj {

/// A grid problem bundled with its exact solution u(x0, x1, x2) in the grid's
/// own coordinates (unused coordinates are passed as 0).
struct AnalyticCase {
    GridProblem problem;
    std::function<double(double, double, double)> exact;
    std::string description;
    /// Exact solution sampled on the padded grid, when the builder has it
    /// cheaper than pointwise; used by max_error and fill_exact if present.
    std::vector<double> exact_field;

    /// max |u - exact| over the interior cells (masked-out cells included).
    double max_error() const;
    /// Overwrite the field with the exact solution at the cell centres.
    void fill_exact();
};

/// Laplace equation on the unit square, n x n cells, homogeneous Neumann on
/// every face. The five-point stencil is scaled to centre 4, neighbours -1.
GridProblem laplace2d_neumann(int n);

/// -Laplace(u) = e^{xy} (x^2 + y^2) with Dirichlet data from u = -e^{xy}.
/// nx x ny square zones of side 1/nx, so the domain is [0,1] x [0, ny/nx].
/// Unknowns sit on the (nx-1) x (ny-1) inner nodes; the boundary nodes are
/// the ghosts. With cell-centred unknowns and face data the checkerboard mode
/// has kappa = 2 exactly and plain Jacobi would never settle.
AnalyticCase poisson2d_dirichlet(int nx, int ny);

/// Spherical Bessel function of the first kind j_l(x), x >= 0.
double spherical_bessel_j(int l, double x);

/// First positive zero of j_l, to 1e-12 relative. Valid for 0 <= l <= 400.
double spherical_bessel_first_root(int l);

/// Real part of the orthonormal complex spherical harmonic Y_l^m.
double real_spherical_harmonic(int l, int m, double theta, double phi);

/// Even-l series of the spherical test: a_l = 2^-l, k_l = first root of j_l.
struct SphericalSeries {
    int dims;  // 1: l = 0 only; 2: m = 0; 3: |m| <= l

    static double a(int l);
    /// b_l = c_l = -a_l (l j_l(k_l) - k_l j_{l+1}(k_l)) / (2l + 1).
    static double b(int l);
    static double k(int l);
    /// Angular factor summed over the admitted m for degree l.
    double angular(int l, double theta, double phi) const;
    int max_terms() const noexcept { return dims == 1 ? 1 : 200; }
};

/// Result of summing a convergent series term by term.
struct SeriesSum {
    double value;
    int terms;
};

/// Poisson equation in spherical coordinates on r in [0,1] (d = 1), plus
/// theta in [0, pi] (d = 2) and phi in [0, 2 pi) (d = 3), n cells per axis,
/// multiplied by r^2. Neumann at r = 0 via u_0 = u_1 = u_2, Neumann at the
/// theta ends, periodic in phi, Dirichlet from the exterior solution at r = 1.
/// Throws ConvergenceError if the source series needs more than 200 terms.
AnalyticCase spherical_poisson(int dims, int n);

/// Number of series terms spherical_poisson needed for its source.
int spherical_source_terms(int dims, int n);

enum class GsTest { A, B };

/// Cell-centre membership in the test-B region.
bool gs_test_b_region(double r, double theta);

/// Linear Grad-Shafranov equation Delta* Psi + C^2 Psi = 0 on r in [1,10],
/// theta in [0, pi], n x n equispaced points with the outermost ones on the
/// boundary (the unknowns are the inner (n-2)^2, ghosts hold the data). Test A: Psi = sin^2(theta)/r on both radial
/// faces, zero at the theta ends (exact for C = 0). Test B: solve only inside
/// the test-B region, Psi = sin^2(pi (theta - theta1)/(theta2 - theta1)) on
/// r = 1, zero elsewhere. The exact solution is the C = 0 dipole for test A
/// and unavailable (returns NaN) for test B.
AnalyticCase grad_shafranov(GsTest test, double c, int n);

inline constexpr double kGsTheta1 = 0.3037;
inline constexpr double kGsTheta2 = 2.8903;

}  // namespace srj
