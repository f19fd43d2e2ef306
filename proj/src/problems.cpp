#include "srj/problems.hpp"

#include <algorithm>
#include <boost/math/special_functions/spherical_harmonic.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "srj/errors.hpp"

namespace srj {

namespace {

using std::numbers::pi;

// Visit the ghosts of one face: f(ghost cell, coordinates), where the
// coordinate along the face normal is the face itself (on_face) or the ghost
// centre, and the others are cell centres.
template <class F>
void for_each_ghost(const GridProblem& p, int axis, int side, bool on_face, F&& f) {
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int b = 0; b < p.dims(); ++b) {
        lo[b] = 1;
        hi[b] = p.size(b);
    }
    const int ghost = side == 0 ? 0 : p.size(axis) + 1;
    lo[axis] = hi[axis] = ghost;
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const int idx[3] = {i, j, k};
                double x[3] = {0.0, 0.0, 0.0};
                for (int b = 0; b < p.dims(); ++b) x[b] = p.coordinate(b, idx[b]);
                if (on_face) x[axis] = p.coordinate(axis, side == 0 ? 1 : p.size(axis)) +
                                       (side == 0 ? -0.5 : 0.5) * p.spacing(axis);
                f(p.index(i, j, k), x);
            }
}

void set_dirichlet(GridProblem& p, int axis, int side, bool on_face,
                   const std::function<double(double, double, double)>& g) {
    FaceCondition& fc = p.face(axis, side);
    fc.kind = FaceKind::dirichlet;
    fc.value_on_face = on_face;
    auto& bv = p.boundary_values();
    for_each_ghost(p, axis, side, on_face, [&](std::size_t c, const double* x) { bv[c] = g(x[0], x[1], x[2]); });
}

// Miller's downward recurrence for x <= l, normalised against j_0 or j_1.
double bessel_downward(int l, double x) {
    const int top = std::max(l, static_cast<int>(x));
    const int start = top + 30 + static_cast<int>(std::sqrt(40.0 * (top + 1)));
    double jp1 = 0.0;
    double j = 1e-300;
    double result = 0.0;
    double j1_raw = 0.0;
    for (int n = start; n >= 1; --n) {
        const double jm1 = (2.0 * n + 1.0) / x * j - jp1;
        jp1 = j;
        j = jm1;
        if (n - 1 == l) result = j;
        if (n - 1 == 1) j1_raw = j;
        if (std::abs(j) > 1e250) {
            j *= 1e-250;
            jp1 *= 1e-250;
            result *= 1e-250;
            j1_raw *= 1e-250;
        }
    }
    if (l == 0) result = j;
    // j now holds the unnormalised j_0.
    const double j0 = std::sin(x) / x;
    const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    if (std::abs(j0) >= std::abs(j1)) return result * (j0 / j);
    return result * (j1 / j1_raw);
}

}  // namespace

double AnalyticCase::max_error() const {
    double m = 0.0;
    const auto& u = problem.field();
    problem.for_each_interior([&](std::size_t c, int i, int j, int k) {
        const double x0 = problem.coordinate(0, i);
        const double x1 = problem.dims() > 1 ? problem.coordinate(1, j) : 0.0;
        const double x2 = problem.dims() > 2 ? problem.coordinate(2, k) : 0.0;
        const double e = exact_field.empty() ? exact(x0, x1, x2) : exact_field[c];
        m = std::max(m, std::abs(u[c] - e));
    });
    return m;
}

void AnalyticCase::fill_exact() {
    auto& u = problem.field();
    problem.for_each_interior([&](std::size_t c, int i, int j, int k) {
        const double x0 = problem.coordinate(0, i);
        const double x1 = problem.dims() > 1 ? problem.coordinate(1, j) : 0.0;
        const double x2 = problem.dims() > 2 ? problem.coordinate(2, k) : 0.0;
        u[c] = exact_field.empty() ? exact(x0, x1, x2) : exact_field[c];
    });
    problem.refresh_ghosts();
}

GridProblem laplace2d_neumann(int n) {
    if (n < 4) throw InvariantError("laplace2d_neumann: N must be >= 4");
    GridProblem p({n, n}, {1.0 / n, 1.0 / n});
    p.set_constant_stencil(4.0, {-1.0, -1.0, 0.0}, {-1.0, -1.0, 0.0});
    return p;
}

AnalyticCase poisson2d_dirichlet(int nx, int ny) {
    if (nx < 4 || ny < 4) throw InvariantError("poisson2d_dirichlet: sizes must be >= 4");
    const double h = 1.0 / nx;
    // Nodes at multiples of h; the boundary nodes are the ghosts and hold the
    // Dirichlet data, the (nx-1) x (ny-1) inner nodes are unknown.
    GridProblem p({nx - 1, ny - 1}, {h, h}, {0.5 * h, 0.5 * h});
    // Scaled by h^2: centre 4, neighbours -1, source h^2 f.
    p.set_constant_stencil(4.0, {-1.0, -1.0, 0.0}, {-1.0, -1.0, 0.0});
    auto exact = [](double x, double y, double) { return -std::exp(x * y); };
    auto& s = p.source();
    p.for_each_interior([&](std::size_t c, int i, int j, int) {
        const double x = p.coordinate(0, i), y = p.coordinate(1, j);
        s[c] = h * h * std::exp(x * y) * (x * x + y * y);
    });
    for (int a = 0; a < 2; ++a)
        for (int side = 0; side < 2; ++side) set_dirichlet(p, a, side, false, exact);
    p.refresh_ghosts();
    return AnalyticCase{std::move(p), exact, "poisson2d_dirichlet", {}};
}

double spherical_bessel_j(int l, double x) {
    if (l < 0) throw InvariantError("spherical_bessel_j: negative order");
    if (x < 0.0) throw InvariantError("spherical_bessel_j: negative argument");
    if (x == 0.0) return l == 0 ? 1.0 : 0.0;
    if (x < 1e-3 * (l + 1)) {
        // Leading term of the power series, x^l / (2l+1)!!, with one correction.
        double t = 1.0;
        for (int k = 1; k <= l; ++k) t *= x / (2.0 * k + 1.0);
        return t * (1.0 - x * x / (2.0 * (2.0 * l + 3.0)));
    }
    const double j0 = std::sin(x) / x;
    if (l == 0) return j0;
    if (x <= l) return bessel_downward(l, x);
    double jm1 = j0;
    double j = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int n = 1; n < l; ++n) {
        const double jp1 = (2.0 * n + 1.0) / x * j - jm1;
        jm1 = j;
        j = jp1;
    }
    return j;
}

double spherical_bessel_first_root(int l) {
    if (l < 0 || l > 400) throw InvariantError("spherical_bessel_first_root: l must be in [0, 400]");
    if (l == 0) return pi;
    // The first zero lies above l + 1/2; step until the sign changes.
    double a = l + 0.5;
    double fa = spherical_bessel_j(l, a);
    double b = a;
    double fb = fa;
    while (fa * fb > 0.0) {
        a = b;
        fa = fb;
        b += 0.25;
        fb = spherical_bessel_j(l, b);
    }
    while (b - a > 1e-13 * b) {
        const double m = 0.5 * (a + b);
        const double fm = spherical_bessel_j(l, m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

double real_spherical_harmonic(int l, int m, double theta, double phi) {
    if (l < 0 || std::abs(m) > l) throw InvariantError("real_spherical_harmonic: need |m| <= l");
    return boost::math::spherical_harmonic_r(static_cast<unsigned>(l), m, theta, phi);
}

double SphericalSeries::a(int l) { return std::ldexp(1.0, -l); }

double SphericalSeries::k(int l) { return spherical_bessel_first_root(l); }

double SphericalSeries::b(int l) {
    const double kl = k(l);
    return -a(l) * (l * spherical_bessel_j(l, kl) - kl * spherical_bessel_j(l + 1, kl)) / (2.0 * l + 1.0);
}

double SphericalSeries::angular(int l, double theta, double phi) const {
    if (dims == 1) return l == 0 ? real_spherical_harmonic(0, 0, 0.0, 0.0) : 0.0;
    if (dims == 2) return real_spherical_harmonic(l, 0, theta, 0.0);
    // Re Y_l^-m = (-1)^m Re Y_l^m, so odd m cancel and even m count twice.
    double s = real_spherical_harmonic(l, 0, theta, phi);
    for (int m = 2; m <= l; m += 2) s += 2.0 * real_spherical_harmonic(l, m, theta, phi);
    return s;
}

namespace {

// Per-degree constants of the series, cached once per problem build.
struct Degree {
    int l;
    double a, b, k;
};

// Degrees are built on demand since most series settle long before the cap.
class DegreeCache {
public:
    const Degree& at(int n) {
        while (static_cast<int>(d_.size()) <= n) {
            const int l = 2 * static_cast<int>(d_.size());
            d_.push_back({l, SphericalSeries::a(l), SphericalSeries::b(l), SphericalSeries::k(l)});
        }
        return d_[static_cast<std::size_t>(n)];
    }

private:
    std::vector<Degree> d_;
};

// Points of a separable series f_l(r) Y_l(theta, phi): distinct radii and
// angular pairs, plus the index of each into them.
struct SeparablePoints {
    std::vector<double> r, theta, phi;
    std::vector<std::size_t> ri, ai;

    void add(std::size_t radius, std::size_t angle) {
        ri.push_back(radius);
        ai.push_back(angle);
    }
};

// Sums the series over every point degree by degree until the largest new
// term is below 1e-16 of the largest partial sum. Returns the terms used, or
// max_terms + 1 if that cap was reached first.
template <class Radial>
int sum_series(const SeparablePoints& pts, const SphericalSeries& series, DegreeCache& deg, Radial&& radial,
               std::vector<double>& sums) {
    const int max_terms = series.max_terms();
    // A single admitted degree is a finite sum.
    const bool finite = max_terms == 1;
    sums.assign(pts.ri.size(), 0.0);
    std::vector<double> rad(pts.r.size()), ang(pts.theta.size());
    for (int n = 0; n < max_terms; ++n) {
        const Degree& d = deg.at(n);
        for (std::size_t i = 0; i < rad.size(); ++i) rad[i] = radial(d, pts.r[i]);
        for (std::size_t i = 0; i < ang.size(); ++i) ang[i] = series.angular(d.l, pts.theta[i], pts.phi[i]);
        double tmax = 0.0;
        double smax = 0.0;
        for (std::size_t q = 0; q < sums.size(); ++q) {
            const double t = rad[pts.ri[q]] * ang[pts.ai[q]];
            sums[q] += t;
            tmax = std::max(tmax, std::abs(t));
            smax = std::max(smax, std::abs(sums[q]));
        }
        if (n > 0 && tmax <= 1e-16 * smax) return n + 1;
    }
    return finite ? max_terms : max_terms + 1;
}

// Interior solution a_l j_l(k_l r) + b_l r^l, exterior b_l r^-(l+1).
double solution_radial(const Degree& d, double r) {
    return r <= 1.0 ? d.a * spherical_bessel_j(d.l, d.k * r) + d.b * std::pow(r, d.l) : d.b / std::pow(r, d.l + 1);
}

struct SphericalBuild {
    GridProblem problem;
    int terms;
    std::vector<double> exact_field;
};

SphericalBuild build_spherical(int dims, int n) {
    if (dims < 1 || dims > 3) throw InvariantError("spherical_poisson: dims must be 1, 2 or 3");
    if (n < 8) throw InvariantError("spherical_poisson: N must be >= 8");
    std::vector<int> sizes(static_cast<std::size_t>(dims), n);
    std::vector<double> spacing{1.0 / n};
    if (dims > 1) spacing.push_back(pi / n);
    if (dims > 2) spacing.push_back(2.0 * pi / n);
    GridProblem p(sizes, spacing);
    const double dr = p.spacing(0);

    // Multiplied by r^2: r^2 u_rr + 2 r u_r + u_tt + cot(t) u_t + u_pp / sin^2(t) = r^2 s.
    p.for_each_interior([&](std::size_t c, int i, int j, int) {
        const double r = p.coordinate(0, i);
        std::array<double, 3> lo{r * (r - dr) / (dr * dr), 0.0, 0.0};
        std::array<double, 3> hi{r * (r + dr) / (dr * dr), 0.0, 0.0};
        double center = -2.0 * r * r / (dr * dr);
        if (dims > 1) {
            const double th = p.coordinate(1, j);
            const double dt = p.spacing(1);
            const double cot = std::cos(th) / std::sin(th);
            lo[1] = 1.0 / (dt * dt) - cot / (2.0 * dt);
            hi[1] = 1.0 / (dt * dt) + cot / (2.0 * dt);
            center -= 2.0 / (dt * dt);
            if (dims > 2) {
                const double dp = p.spacing(2);
                const double w = 1.0 / (std::sin(th) * std::sin(th) * dp * dp);
                lo[2] = hi[2] = w;
                center -= 2.0 * w;
            }
        }
        p.set_cell_stencil(c, center, lo, hi);
    });

    // Source r^2 s and the exact solution, summed over even degrees. Points
    // are the interior cells followed by the outer radial ghosts.
    const SphericalSeries series{dims};
    const int nj = dims > 1 ? n : 0, nk = dims > 2 ? n : 0;
    SeparablePoints pts;
    for (int i = 1; i <= n + 1; ++i) pts.r.push_back(p.coordinate(0, i));
    for (int k = (nk ? 1 : 0); k <= nk; ++k)
        for (int j = (nj ? 1 : 0); j <= nj; ++j) {
            pts.theta.push_back(dims > 1 ? p.coordinate(1, j) : 0.0);
            pts.phi.push_back(dims > 2 ? p.coordinate(2, k) : 0.0);
        }
    std::vector<std::size_t> cells, ghosts;
    p.for_each_interior([&](std::size_t c, int i, int j, int k) {
        cells.push_back(c);
        pts.add(static_cast<std::size_t>(i - 1), static_cast<std::size_t>((k ? k - 1 : 0) * (nj ? nj : 1) + (j ? j - 1 : 0)));
    });
    SeparablePoints source_pts = pts;
    for (std::size_t q = 0; q < cells.size(); ++q)
        if (pts.ri[q] + 1 == static_cast<std::size_t>(n)) {
            ghosts.push_back(cells[q] + 1);
            pts.add(static_cast<std::size_t>(n), pts.ai[q]);
        }
    DegreeCache deg;
    std::vector<double> sums;
    const int terms = sum_series(source_pts, series, deg, [](const Degree& d, double r) {
        return -d.a * d.k * d.k * spherical_bessel_j(d.l, d.k * r);
    }, sums);
    if (terms > series.max_terms())
        throw ConvergenceError("spherical_poisson: source series did not settle within 200 terms", 0.0);
    auto& s = p.source();
    for (std::size_t q = 0; q < cells.size(); ++q) {
        const double r = pts.r[pts.ri[q]];
        s[cells[q]] = r * r * sums[q];
    }

    // Exact values on the cells, and outer Dirichlet data at the ghost
    // centres r = 1 + dr/2.
    std::vector<double> exact;
    sum_series(pts, series, deg, solution_radial, exact);
    std::vector<double> exact_field(p.padded_count(), 0.0);
    for (std::size_t q = 0; q < cells.size(); ++q) exact_field[cells[q]] = exact[q];
    for (std::size_t g = 0; g < ghosts.size(); ++g) p.boundary_values()[ghosts[g]] = exact[cells.size() + g];
    p.face(0, 1).kind = FaceKind::dirichlet;
    p.face(0, 1).value_on_face = false;
    if (dims > 2) {
        p.face(2, 0).kind = FaceKind::periodic;
        p.face(2, 1).kind = FaceKind::periodic;
    }

    // Inner boundary u_0 = u_1 = u_2: the first radial layer is pinned to the
    // second, so it is excluded from the relaxation.
    std::vector<char> mask(p.padded_count(), 0);
    p.for_each_interior([&](std::size_t c, int i, int, int) { mask[c] = i >= 2 ? 1 : 0; });
    p.set_mask(std::move(mask));
    p.set_inner_rule([](GridProblem& g) {
        auto& u = g.field();
        const int nj = g.dims() > 1 ? g.size(1) : 0;
        const int nk = g.dims() > 2 ? g.size(2) : 0;
        for (int k = (nk ? 1 : 0); k <= nk; ++k)
            for (int j = (nj ? 1 : 0); j <= nj; ++j) {
                const double v = u[g.index(2, j, k)];
                u[g.index(0, j, k)] = v;
                u[g.index(1, j, k)] = v;
            }
    });
    p.refresh_ghosts();
    return {std::move(p), terms, std::move(exact_field)};
}

}  // namespace

AnalyticCase spherical_poisson(int dims, int n) {
    SphericalBuild b = build_spherical(dims, n);
    const SphericalSeries series{dims};
    auto deg = std::make_shared<DegreeCache>();
    auto exact = [series, deg](double r, double theta, double phi) {
        SeparablePoints pt;
        pt.r = {r};
        pt.theta = {theta};
        pt.phi = {phi};
        pt.add(0, 0);
        std::vector<double> sum;
        sum_series(pt, series, *deg, solution_radial, sum);
        return sum.front();
    };
    AnalyticCase out{std::move(b.problem), exact, "spherical_poisson"};
    out.exact_field = std::move(b.exact_field);
    return out;
}

int spherical_source_terms(int dims, int n) { return build_spherical(dims, n).terms; }

bool gs_test_b_region(double r, double theta) {
    const double s1 = std::sin(theta);
    const double s2 = std::sin(2.0 * theta);
    const double outer = (4.5 * s1 * s1 + 2.5 * s2 * s2) *
                         (1.0 - 0.4 * std::cos(3.0 * theta) + 0.3 * std::cos(5.0 * theta) +
                          0.05 * std::sin(25.0 * theta));
    const double x = r * s1 - 4.0;
    const double y = r * std::cos(theta) - 1.6;
    return r < outer && x * x + y * y > 1.0;
}

AnalyticCase grad_shafranov(GsTest test, double c, int n) {
    if (n < 16) throw InvariantError("grad_shafranov: N must be >= 16");
    // n points per axis including both boundaries: the ghosts sit exactly on
    // r = 1, r = 10, theta = 0 and theta = pi and carry the Dirichlet data.
    const double hr = 9.0 / (n - 1);
    const double ht = pi / (n - 1);
    GridProblem p({n - 2, n - 2}, {hr, ht}, {1.0 + 0.5 * hr, 0.5 * ht});
    const double dr = p.spacing(0);
    const double dt = p.spacing(1);
    // Multiplied by r^2: r^2 Psi_rr + Psi_tt - cot(t) Psi_t + C^2 r^2 Psi = 0.
    p.for_each_interior([&](std::size_t cell, int i, int j, int) {
        const double r = p.coordinate(0, i);
        const double th = p.coordinate(1, j);
        const double cot = std::cos(th) / std::sin(th);
        const std::array<double, 3> lo{r * r / (dr * dr), 1.0 / (dt * dt) + cot / (2.0 * dt), 0.0};
        const std::array<double, 3> hi{r * r / (dr * dr), 1.0 / (dt * dt) - cot / (2.0 * dt), 0.0};
        const double center = -2.0 * r * r / (dr * dr) - 2.0 / (dt * dt) + c * c * r * r;
        p.set_cell_stencil(cell, center, lo, hi);
    });
    auto zero = [](double, double, double) { return 0.0; };
    set_dirichlet(p, 1, 0, false, zero);
    set_dirichlet(p, 1, 1, false, zero);

    if (test == GsTest::A) {
        auto dipole = [](double r, double th, double) { return std::sin(th) * std::sin(th) / r; };
        set_dirichlet(p, 0, 0, false, dipole);
        set_dirichlet(p, 0, 1, false, dipole);
        p.refresh_ghosts();
        return AnalyticCase{std::move(p), dipole, "grad_shafranov_A"};
    }

    set_dirichlet(p, 0, 0, false, [](double, double th, double) {
        if (th < kGsTheta1 || th > kGsTheta2) return 0.0;
        const double s = std::sin((th - kGsTheta1) / (kGsTheta2 - kGsTheta1) * pi);
        return s * s;
    });
    set_dirichlet(p, 0, 1, false, zero);
    std::vector<char> mask(p.padded_count(), 0);
    p.for_each_interior([&](std::size_t cell, int i, int j, int) {
        mask[cell] = gs_test_b_region(p.coordinate(0, i), p.coordinate(1, j)) ? 1 : 0;
    });
    p.set_mask(std::move(mask));
    p.refresh_ghosts();
    auto none = [](double, double, double) { return std::numeric_limits<double>::quiet_NaN(); };
    return AnalyticCase{std::move(p), none, "grad_shafranov_B"};
}

}  // namespace srj
