#include "srj/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "srj/errors.hpp"

namespace srj {

namespace {

template <class T>
double to_double(const T& x) {
    return static_cast<double>(x);
}

template <class T>
double inf_norm(const std::vector<T>& v) {
    double m = 0.0;
    for (const T& x : v) {
        const double a = std::abs(to_double(x));
        if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
        m = std::max(m, a);
    }
    return m;
}

template <class T>
double sq_norm(const std::vector<T>& v) {
    double s = 0.0;
    for (const T& x : v) {
        const double a = to_double(x);
        s += a * a;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

template <class T>
std::vector<T> pack(const OptimizerState<T>& s) {
    using std::log;
    std::vector<T> x;
    x.reserve(s.omegas.size() + s.kappas.size());
    for (const T& w : s.omegas) x.push_back(log(w));
    for (const T& k : s.kappas) x.push_back(log(k));
    return x;
}

template <class T>
OptimizerState<T> unpack(const std::vector<T>& x, const OptimizerState<T>& like) {
    using std::exp;
    OptimizerState<T> s = like;
    const std::size_t p = like.omegas.size();
    for (std::size_t i = 0; i < p; ++i) s.omegas[i] = exp(x[i]);
    for (std::size_t i = 0; i + 1 < p; ++i) s.kappas[i] = exp(x[p + i]);
    return s;
}

// Residual, or nullopt where the state is outside the feasible region or hits a pole.
template <class T>
std::optional<std::vector<T>> try_residual(const OptimizerState<T>& s) {
    if (!s.feasible()) return std::nullopt;
    try {
        auto r = s.residual();
        if (!std::isfinite(inf_norm(r))) return std::nullopt;
        return r;
    } catch (const PoleError&) {
        return std::nullopt;
    }
}

template <class T>
T fd_step() {
    using std::sqrt;
    return sqrt(std::numeric_limits<T>::epsilon());
}

template <class T>
double default_tolerance() {
    return std::numeric_limits<T>::digits10 > 20 ? 1e-20 : 1e-12;
}

template <class T>
OptimizerState<T> convert_state(const OptimizerState<double>& s, int digits) {
    OptimizerState<T> out{{}, {}, s.kappa_bounds, digits};
    for (double w : s.omegas) out.omegas.emplace_back(w);
    for (double k : s.kappas) out.kappas.emplace_back(k);
    return out;
}

template <class T>
WeightSchedule to_schedule(const OptimizerState<T>& s, int grid_size) {
    const auto beta = s.betas();
    std::vector<double> w, b;
    for (const T& x : s.omegas) w.push_back(to_double(x));
    for (const T& x : beta) b.push_back(to_double(x));
    return WeightSchedule::normalized(std::move(w), std::move(b), grid_size);
}

// Mode bound of the model problem at which the continuation starts.
constexpr int kContinuationStartN = 16;

std::vector<double> continuation_kappas(double kappa_target) {
    std::vector<double> ks;
    for (double n = kContinuationStartN;; n *= std::numbers::sqrt2) {
        const double k = kappa_min_model(n);
        if (k <= kappa_target * 1.4) break;
        ks.push_back(k);
    }
    ks.push_back(kappa_target);
    return ks;
}

// Transfer a solved state to a neighbouring kappa_min by extrapolating every
// unknown linearly in log-log against kappa_min. With a single solved point
// the weights follow a typical power law and each kappa_i keeps its
// logarithmic position between 1/omega_i and 1/omega_{i+1}.
OptimizerState<double> shift_state(const std::vector<OptimizerState<double>>& history,
                                   double new_kappa) {
    const auto& last = history.back();
    OptimizerState<double> s{last.omegas, last.kappas, KappaRange(new_kappa), last.precision_digits};
    const std::size_t p = s.omegas.size();
    const double ratio = std::log(new_kappa / last.kappa_bounds.kappa_min());
    if (history.size() >= 2) {
        const auto& prev = history[history.size() - 2];
        const double t = ratio / std::log(last.kappa_bounds.kappa_min() / prev.kappa_bounds.kappa_min());
        auto step = [t](double now, double before) { return now * std::pow(now / before, t); };
        for (std::size_t i = 0; i < p; ++i) s.omegas[i] = step(last.omegas[i], prev.omegas[i]);
        for (std::size_t i = 0; i + 1 < p; ++i) s.kappas[i] = step(last.kappas[i], prev.kappas[i]);
        if (s.feasible()) return s;
        s.omegas = last.omegas;
    }
    // Single point: omega_1 ~ kappa_min^-e with e growing with P, the
    // exponent decreasing linearly to zero at omega_P.
    const double e1 = std::min(1.0, 0.45 + 0.1 * static_cast<double>(p));
    for (std::size_t i = 0; i + 1 < p; ++i)
        s.omegas[i] *= std::exp(-e1 * ratio * static_cast<double>(p - 1 - i) / static_cast<double>(p - 1));
    for (std::size_t i = 0; i + 1 < p; ++i) {
        const double lo0 = std::log(1.0 / last.omegas[i]);
        const double hi0 = std::log(1.0 / last.omegas[i + 1]);
        const double f = (std::log(last.kappas[i]) - lo0) / (hi0 - lo0);
        const double lo = std::log(1.0 / s.omegas[i]);
        const double hi = std::log(1.0 / s.omegas[i + 1]);
        s.kappas[i] = std::exp(lo + f * (hi - lo));
    }
    return s;
}

template <class T>
OptimizerState<double> to_double_state(const OptimizerState<T>& s) {
    OptimizerState<double> out{{}, {}, s.kappa_bounds, s.precision_digits};
    for (const T& w : s.omegas) out.omegas.push_back(to_double(w));
    for (const T& k : s.kappas) out.kappas.push_back(to_double(k));
    return out;
}

// Grid size from which levels beyond two are introduced.
constexpr int kMultiLevelStartN = 32;

template <class T>
SolveReport solve_impl(int levels, double kappa_target, int grid_size, int digits,
                       const SolveOptions& options) {
    if (levels == 1) return SolveReport{one_level_schedule(kappa_target, grid_size), 0, 0.0, digits};

    NewtonOptions newton;
    newton.max_iterations = options.max_newton_iterations;
    int total_iterations = 0;

    // Intermediate grids only seed the next one and need far fewer digits.
    NewtonOptions coarse = newton;
    coarse.tolerance = 1e-8;
    bool at_target = false;

    auto stage = [&](const OptimizerState<double>& guess) {
        auto result = newton_solve<T>(convert_state<T>(guess, digits), at_target ? newton : coarse);
        total_iterations += result.iterations;
        if (options.on_stage)
            options.on_stage(guess.levels(), guess.kappa_bounds.kappa_min(), result.iterations);
        return result;
    };

    // The linear one-third placement of the kappas often lands well right of
    // the true extremum when the weights span decades. On failure, retry with
    // the kappas placed at fixed fractions of the logarithmic gap.
    auto stage_with_retries = [&](const OptimizerState<double>& guess) {
        try {
            return stage(guess);
        } catch (const ConvergenceError&) {
        }
        const double fractions[] = {0.3, 0.2, 0.4};
        for (double f : fractions) {
            OptimizerState<double> g = guess;
            for (std::size_t i = 0; i < g.kappas.size(); ++i)
                g.kappas[i] = std::pow(g.omegas[i], f - 1.0) * std::pow(g.omegas[i + 1], -f);
            try {
                return stage(g);
            } catch (const ConvergenceError&) {
                if (f == fractions[2]) throw;
            }
        }
        throw ConvergenceError("solve: unreachable", 0.0);
    };

    // Continuation in two directions. kappa_min shrinks step by step from a
    // coarse grid to the target; every level already solved follows along from
    // its own history, and a new level enters by extrapolation from the
    // solutions with fewer levels at the current kappa_min.
    const auto ks = continuation_kappas(kappa_target);
    const double kappa_start_multi = kappa_min_model(kMultiLevelStartN);
    std::vector<std::vector<OptimizerState<double>>> history(static_cast<std::size_t>(levels + 1));
    std::optional<NewtonResult<T>> last;
    for (std::size_t step = 0; step < ks.size(); ++step) {
        const double k = ks[step];
        const bool final_step = step + 1 == ks.size();
        at_target = final_step;
        std::vector<WeightSchedule> priors{one_level_schedule(k, grid_size)};
        for (int p = 2; p <= levels; ++p) {
            auto& h = history[static_cast<std::size_t>(p)];
            if (h.empty() && p > 2 && k > kappa_start_multi && !final_step) break;
            try {
                if (!h.empty()) {
                    try {
                        last.emplace(stage(shift_state(h, k)));
                    } catch (const ConvergenceError&) {
                        if (p == 2) throw;
                        const std::size_t first = priors.size() > 4 ? priors.size() - 4 : 0;
                        last.emplace(stage_with_retries(initial_guess(
                            p, std::span<const WeightSchedule>(priors.data() + first, priors.size() - first),
                            KappaRange(k))));
                    }
                } else if (p == 2) {
                    last.emplace(stage(initial_guess(2, {}, KappaRange(k))));
                } else {
                    const std::size_t first = priors.size() > 4 ? priors.size() - 4 : 0;
                    last.emplace(stage_with_retries(initial_guess(
                        p, std::span<const WeightSchedule>(priors.data() + first, priors.size() - first),
                        KappaRange(k))));
                }
            } catch (const ConvergenceError&) {
                // A level that fails to enter waits for the next grid; a
                // tracked level or the final grid cannot be skipped.
                if (!h.empty() || final_step) throw;
                break;
            }
            h.push_back(to_double_state(last->state));
            priors.push_back(to_schedule(last->state, grid_size));
        }
    }
    // A root 1/omega_i outside [kappa_min, kappa_max] leaves a level acting
    // outside the mode range: the system is satisfied but the extremum
    // structure has degenerated, so this is not an optimal schedule.
    const auto& w = last->state.omegas;
    if (!(T(1) / w.front() > T(kappa_target)) || !(T(1) / w.back() < T(kKappaMax)))
        throw ConvergenceError("solve: only a degenerate solution was found (a root 1/omega lies outside the mode range)",
                               last->residual_norm);
    return SolveReport{to_schedule(last->state, grid_size), total_iterations, last->residual_norm, digits};
}

}  // namespace

template <class T>
bool OptimizerState<T>::feasible() const {
    const std::size_t p = omegas.size();
    if (p == 0 || kappas.size() + 1 != p) return false;
    for (std::size_t i = 0; i < p; ++i) {
        if (!(omegas[i] > T(0))) return false;
        if (i + 1 < p) {
            if (!(omegas[i] > omegas[i + 1])) return false;
            const T lo = T(1) / omegas[i];
            const T hi = T(1) / omegas[i + 1];
            if (!(kappas[i] > lo && kappas[i] < hi)) return false;
        }
    }
    return true;
}

template <class T>
Matrix<T> residual_jacobian(const OptimizerState<T>& state) {
    const auto x = pack(state);
    const std::size_t n = x.size();
    const T h = fd_step<T>();
    Matrix<T> jac(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        auto xp = x;
        auto xm = x;
        xp[c] += h;
        xm[c] -= h;
        const auto rp = unpack(xp, state).residual();
        const auto rm = unpack(xm, state).residual();
        for (std::size_t r = 0; r < n; ++r)
            jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (rp[r] - rm[r]) / (2 * h);
    }
    return jac;
}

template <class T>
NewtonResult<T> newton_solve(OptimizerState<T> guess, const NewtonOptions& options) {
    const double tol = options.tolerance > 0.0 ? options.tolerance : default_tolerance<T>();
    auto r0 = try_residual(guess);
    if (!r0) throw InvariantError("newton_solve: initial state infeasible");
    std::vector<T> r = *r0;
    double norm = inf_norm(r);
    double merit = sq_norm(r);
    std::vector<T> x = pack(guess);
    OptimizerState<T> state = std::move(guess);
    const std::size_t n = x.size();

    for (int it = 0; it < options.max_iterations; ++it) {
        if (norm < tol) return {std::move(state), it, norm};

        const Matrix<T> jac = residual_jacobian(state);
        Eigen::Matrix<T, Eigen::Dynamic, 1> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = -r[i];
        const Eigen::Matrix<T, Eigen::Dynamic, 1> dx = jac.partialPivLu().solve(rhs);

        T lambda(1);
        bool accepted = false;
        for (int bt = 0; bt <= options.max_backtracks; ++bt, lambda /= 2) {
            std::vector<T> xn(n);
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + lambda * dx(static_cast<Eigen::Index>(i));
            auto candidate = unpack(xn, state);
            auto rn = try_residual(candidate);
            if (!rn) continue;
            const double mn = sq_norm(*rn);
            if (mn < merit) {
                x = std::move(xn);
                state = std::move(candidate);
                r = std::move(*rn);
                norm = inf_norm(r);
                merit = mn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (norm < std::sqrt(tol)) return {std::move(state), it, norm};
            throw ConvergenceError("newton_solve: line search exhausted", norm);
        }
    }
    if (norm < tol) return {std::move(state), options.max_iterations, norm};
    throw ConvergenceError("newton_solve: iteration cap reached", norm);
}

std::vector<int> ladder_exponents(int levels) {
    if (levels < 1) throw InvariantError("ladder_exponents: need at least one level");
    const int p = levels;
    if (p == 1) return {0};
    const int last = 2 * (p - 1);
    if (p == 2) return {0, last};
    std::vector<int> e{0};
    if (p % 2 == 1) {
        for (int k = 1; k <= p - 4; k += 2) e.push_back(k);
        e.push_back(p - 1);
        for (int k = p + 2; k <= 2 * p - 3; k += 2) e.push_back(k);
    } else {
        for (int k = 1; k <= p - 5; k += 2) e.push_back(k);
        e.push_back(p - 2);
        e.push_back(p);
        for (int k = p + 3; k <= 2 * p - 3; k += 2) e.push_back(k);
    }
    e.push_back(last);
    return e;
}

double conic_extrapolate(std::span<const double> xs, std::span<const double> ys, double target) {
    const std::size_t n = xs.size();
    if (n != ys.size() || n < 2) throw InvariantError("conic_extrapolate: need at least two points");
    if (n == 2) return ys[0] + (ys[1] - ys[0]) * (target - xs[0]) / (xs[1] - xs[0]);

    auto parabola_lsq = [&]() {
        Eigen::MatrixXd a(n, 3);
        Eigen::VectorXd b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a(i, 0) = xs[i] * xs[i];
            a(i, 1) = xs[i];
            a(i, 2) = 1.0;
            b(i) = ys[i];
        }
        const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
        return c(0) * target * target + c(1) * target + c(2);
    };
    if (n == 3) return parabola_lsq();

    // Flatness check on the last four points.
    const std::size_t o = n - 4;
    const double d2a = ys[o + 2] - 2 * ys[o + 1] + ys[o];
    const double d2b = ys[o + 3] - 2 * ys[o + 2] + ys[o + 1];
    double mean = 0.0;
    for (std::size_t i = o; i < n; ++i) mean += std::abs(ys[i]);
    mean /= 4.0;
    const bool flat = (d2a * d2b <= 0.0) || std::abs(d2a) < 1e-3 * mean || std::abs(d2b) < 1e-3 * mean;
    if (flat) return parabola_lsq();

    // Hyperbola a/(x - c) + d: linear least squares in (a, d) for each pole c,
    // scanning c outside [min x, target].
    const double xmin = *std::min_element(xs.begin(), xs.end());
    const double xmax = std::max(*std::max_element(xs.begin(), xs.end()), target);
    double best_sse = std::numeric_limits<double>::infinity();
    double best_value = parabola_lsq();
    for (int side = 0; side < 2; ++side) {
        for (int s = 0; s <= 400; ++s) {
            const double dist = 1e-2 * std::pow(10.0, s / 100.0);  // 0.01 .. 100
            const double c = side == 0 ? xmin - dist : xmax + dist;
            Eigen::MatrixXd a(n, 2);
            Eigen::VectorXd b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a(i, 0) = 1.0 / (xs[i] - c);
                a(i, 1) = 1.0;
                b(i) = ys[i];
            }
            const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
            const double sse = (a * coef - b).squaredNorm();
            if (sse < best_sse) {
                best_sse = sse;
                best_value = coef(0) / (target - c) + coef(1);
            }
        }
    }
    return best_value;
}

WeightSchedule one_level_schedule(double kappa_min, int grid_size) {
    return WeightSchedule({2.0 / (2.0 + kappa_min)}, {1.0}, std::max(grid_size, 2));
}

OptimizerState<double> initial_guess(int levels, std::span<const WeightSchedule> priors,
                                     KappaRange range) {
    if (levels < 2) throw InvariantError("initial_guess: need at least two levels");
    const double km = range.kappa_min();
    double w1 = 0.0;
    double wp = 0.0;
    if (levels == 2) {
        // Bootstrap: omega_1 well inside (1, 1/kappa_min), omega_2 at the inverse
        // midpoint of the mode range.
        w1 = 0.5 / km;
        wp = 2.0 / (km + range.kappa_max());
    } else {
        if (priors.size() < 2) throw InvariantError("initial_guess: need at least two prior schedules");
        std::vector<double> xs, y1, yp;
        for (const auto& s : priors) {
            xs.push_back(s.levels());
            y1.push_back(s.omegas().front());
            yp.push_back(s.omegas().back());
        }
        w1 = conic_extrapolate(xs, y1, levels);
        wp = conic_extrapolate(xs, yp, levels);
        // Keep the extrapolation inside the admissible region: omega_1 grows
        // with P but stays below 1/kappa_min, omega_P shrinks but stays positive.
        const double last1 = y1.back();
        const double cap = 1.0 / km;
        if (!(w1 > last1)) w1 = last1 * 1.05;
        if (!(w1 < 0.98 * cap)) w1 = std::sqrt(std::min(last1, 0.98 * cap) * 0.98 * cap);
        const double lastp = yp.back();
        if (!(wp < lastp)) wp = lastp * 0.97;
        if (!(wp > 0.5 * lastp)) wp = 0.5 * lastp;
    }

    const auto e = ladder_exponents(levels);
    const double span_exp = 2.0 * (levels - 1);
    OptimizerState<double> s{{}, {}, range, 16};
    for (int ex : e) {
        const double inv = (1.0 / w1) * std::pow(w1 / wp, ex / span_exp);
        s.omegas.push_back(1.0 / inv);
    }
    for (int i = 0; i + 1 < levels; ++i) {
        const double a = 1.0 / s.omegas[i];
        const double b = 1.0 / s.omegas[i + 1];
        s.kappas.push_back(a + (b - a) / 3.0);
    }
    return s;
}

int default_precision_digits(int levels, int n) { return (levels <= 8 && n <= 1024) ? 16 : 50; }

SolveReport solve_for_kappa(int levels, double kappa_min, int grid_size, const SolveOptions& options) {
    if (levels < 1 || levels > 15) throw InvariantError("solve: levels must be in [1, 15]");
    const int digits = options.precision_digits.value_or(default_precision_digits(levels, grid_size));
    if (digits <= 16) return solve_impl<double>(levels, kappa_min, grid_size, 16, options);
    return solve_impl<Extended>(levels, kappa_min, grid_size, 50, options);
}

SolveReport solve(int levels, int n, BoundaryKind bc, int dims, const SolveOptions& options) {
    if (n < 16) throw InvariantError("solve: N must be >= 16");
    return solve_for_kappa(levels, kappa_min(n, dims, bc), n, options);
}

template struct OptimizerState<double>;
template struct OptimizerState<Extended>;
template Matrix<double> residual_jacobian(const OptimizerState<double>&);
template Matrix<Extended> residual_jacobian(const OptimizerState<Extended>&);
template NewtonResult<double> newton_solve(OptimizerState<double>, const NewtonOptions&);
template NewtonResult<Extended> newton_solve(OptimizerState<Extended>, const NewtonOptions&);

}  // namespace srj
