// Command-line front end: optimize parameters, solve benchmark problems,
// sweep benchmarks. Summaries go to stdout as key=value lines.
//
// Exit codes: 0 converged, 1 not converged, 2 usage error, 3 numeric abort.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "srj/errors.hpp"
#include "srj/optimizer.hpp"
#include "srj/params_db.hpp"
#include "srj/problems.hpp"
#include "srj/scheduler.hpp"
#include "srj/solvers.hpp"

namespace {

using namespace srj;

enum Exit { kConverged = 0, kNotConverged = 1, kUsage = 2, kNumeric = 3 };

struct UsageError : Error {
    using Error::Error;
};

template <class T>
std::string join(const std::vector<T>& v, char sep = ',') {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? std::string(1, sep) : "") << v[i];
    return out.str();
}

void print_schedule(const WeightSchedule& s) {
    std::cout << "levels=" << s.levels() << "\nn=" << s.grid_size() << "\nrho=" << s.rho()
              << "\nomegas=" << join(s.omegas()) << "\nbetas=" << join(s.betas()) << '\n';
}

BoundaryKind parse_bc(const std::string& s) {
    return s == "dirichlet" ? BoundaryKind::dirichlet : BoundaryKind::neumann;
}

Quantization parse_quant(const std::string& s) {
    if (s == "round") return Quantization::round;
    if (s == "ceil") return Quantization::ceil;
    return Quantization::floor;
}

ParameterTable load_table(const std::string& path) {
    if (path.empty()) return ParameterTable::shipped();
    return ParameterTable::load(path);
}

// ---- optimize ----

struct OptimizeArgs {
    int p = 2;
    int n = 100;
    std::string bc = "neumann";
    int dims = 2;
    std::optional<int> digits;
    std::string out;
    bool overwrite = false;
};

int cmd_optimize(const OptimizeArgs& a) {
    std::cout.precision(17);
    SolveOptions opt;
    opt.precision_digits = a.digits;
    const SolveReport r = solve(a.p, a.n, parse_bc(a.bc), a.dims, opt);
    print_schedule(r.schedule);
    std::cout << "newton_iterations=" << r.newton_iterations << "\nresidual=" << r.final_residual_norm
              << "\nprecision_digits=" << r.precision_digits_used << '\n';
    if (!a.out.empty()) {
        ParameterTable t;
        if (std::filesystem::exists(a.out)) t = ParameterTable::load(a.out);
        ParameterRow row = computed_row(r.schedule, r.precision_digits_used > 16 ? 30 : 17);
        // The row is keyed by the grid size the optimizer solved for.
        row.n = a.n;
        t.insert(std::move(row), a.overwrite);
        t.save(a.out);
        std::cout << "table=" << a.out << '\n';
    }
    return kConverged;
}

// ---- solve ----

struct SolveArgs {
    std::string problem = "laplace";
    int n = 64;
    int ny = 0;
    int dims = 2;
    double c = 0.0;
    std::string solver = "srj";
    double omega = 1.5;
    int p = 6;
    int schedule_n = 0;  // 0: choose from the problem
    bool optimize = false;
    std::string quant = "floor";
    std::optional<double> tol;
    std::string tol_policy = "absolute";
    long max_iter = 10'000'000;
    std::uint64_t seed = 0;
    std::optional<double> noise;
    std::string csv;
    std::string table;
    bool ref_jacobi = false;
};

struct Built {
    GridProblem problem;
    std::function<double(const GridProblem&)> error;  // max error, NaN when unknown
    int natural_n;                                    // grid size to pick a schedule for
};

Built build(const SolveArgs& a) {
    if (a.problem == "laplace") {
        GridProblem p = laplace2d_neumann(a.n);
        return {std::move(p), [](const GridProblem&) { return std::nan(""); }, a.n};
    }
    if (a.problem == "poisson") {
        const int ny = a.ny > 0 ? a.ny : a.n;
        auto c = std::make_shared<AnalyticCase>(poisson2d_dirichlet(a.n, ny));
        const std::vector<int> sizes{a.n, ny};
        const int neff = static_cast<int>(std::floor(effective_n(sizes, BoundaryKind::dirichlet)));
        GridProblem p = c->problem;
        return {std::move(p), [c](const GridProblem& g) { c->problem.field() = g.field(); return c->max_error(); },
                neff};
    }
    if (a.problem == "spherical") {
        auto c = std::make_shared<AnalyticCase>(spherical_poisson(a.dims, a.n));
        const std::vector<int> sizes(static_cast<std::size_t>(a.dims), a.n);
        const int neff = static_cast<int>(std::floor(effective_n(sizes, BoundaryKind::dirichlet)));
        GridProblem p = c->problem;
        return {std::move(p), [c](const GridProblem& g) { c->problem.field() = g.field(); return c->max_error(); },
                neff};
    }
    if (a.problem == "gs-a" || a.problem == "gs-b") {
        auto c = std::make_shared<AnalyticCase>(
            grad_shafranov(a.problem == "gs-a" ? GsTest::A : GsTest::B, a.c, a.n));
        GridProblem p = c->problem;
        return {std::move(p), [c](const GridProblem& g) { c->problem.field() = g.field(); return c->max_error(); },
                a.n};
    }
    throw UsageError("unknown problem '" + a.problem + "'");
}

// Zero start for the analytic cases; Laplace gets seeded noise by default
// since its solution is trivial.
void initialise(GridProblem& p, const SolveArgs& a) {
    const double amp = a.noise.value_or(a.problem == "laplace" ? 1.0 : 0.0);
    if (amp == 0.0) return;
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    p.for_each_interior([&](std::size_t c, int, int, int) {
        if (p.active(c)) p.field()[c] += amp * dist(rng);
    });
    p.refresh_ghosts();
}

double tolerance(const SolveArgs& a) {
    if (a.tol_policy == "scaled") return 1e-5 / (static_cast<double>(a.n) * a.n);
    return a.tol.value_or(1e-10);
}

std::optional<CycleSchedule> schedule_for(const SolveArgs& a, int natural_n) {
    if (a.solver != "srj") return std::nullopt;
    const int n = a.schedule_n > 0 ? a.schedule_n : natural_n;
    const WeightSchedule s = a.optimize ? solve(a.p, n).schedule : load_table(a.table).lookup(a.p, n);
    return quantize(s, parse_quant(a.quant));
}

ResidualHistory run_solver(GridProblem& p, const SolveArgs& a, const std::optional<CycleSchedule>& cycle,
                           const SolveLimits& lim) {
    if (a.solver == "srj") return srj_solve(p, *cycle, lim);
    if (a.solver == "jacobi") return jacobi_solve(p, lim);
    if (a.solver == "gs") return gauss_seidel_solve(p, lim);
    if (a.solver == "sor") return sor_solve(p, a.omega, lim);
    throw UsageError("unknown solver '" + a.solver + "'");
}

int cmd_solve(const SolveArgs& a) {
    std::cout.precision(10);
    Built b = build(a);
    const auto cycle = schedule_for(a, b.natural_n);
    SolveLimits lim;
    lim.tolerance = tolerance(a);
    lim.max_iterations = a.max_iter;
    lim.record_history = !a.csv.empty();

    GridProblem start = b.problem;
    initialise(start, a);
    GridProblem work = start;
    const ResidualHistory h = run_solver(work, a, cycle, lim);

    std::cout << "problem=" << a.problem << "\nsolver=" << a.solver << "\ntolerance=" << lim.tolerance
              << "\niterations=" << h.iterations << "\nconverged=" << (h.converged ? 1 : 0)
              << "\nalgebraic_residual=" << h.final_algebraic_residual << '\n';
    if (cycle) {
        std::cout << "levels=" << cycle->levels() << "\nschedule_n=" << cycle->source().grid_size()
                  << "\ntheoretical_rho=" << cycle->source().rho() << "\nq=" << join(cycle->q())
                  << "\ncycle_length=" << cycle->cycle_length() << '\n';
    }
    const double err = b.error(work);
    if (!std::isnan(err)) std::cout << "max_error=" << err << '\n';
    if (!a.csv.empty()) {
        std::ofstream out(a.csv);
        if (!out) throw UsageError("cannot write " + a.csv);
        h.write_csv(out);
    }
    if (a.ref_jacobi) {
        GridProblem ref = start;
        SolveLimits rl = lim;
        rl.record_history = false;
        const ResidualHistory hj = jacobi_solve(ref, rl);
        std::cout << "jacobi_iterations=" << hj.iterations << "\njacobi_converged=" << (hj.converged ? 1 : 0)
                  << "\nmeasured_rho=" << static_cast<double>(hj.iterations) / static_cast<double>(h.iterations)
                  << '\n';
    }
    return h.converged ? kConverged : kNotConverged;
}

// ---- bench ----

struct BenchArgs {
    SolveArgs base;
    std::vector<int> ps{2, 6, 10};
    std::vector<int> ns{64, 128, 256};
    std::string out;
};

int cmd_bench(const BenchArgs& b) {
    if (b.ps.empty() || b.ns.empty()) throw UsageError("bench needs non-empty --p-list and --n-list");
    for (int p : b.ps)
        if (p < 1 || p > 15) throw UsageError("bench: levels must be in [1, 15]");
    for (int n : b.ns)
        if (n < 1) throw UsageError("bench: grid sizes must be positive");
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!b.out.empty()) {
        file.open(b.out);
        if (!file) throw UsageError("cannot write " + b.out);
        out = &file;
    }
    out->precision(10);
    *out << "problem,n,p,iterations,converged,jacobi_iterations,measured_rho,theoretical_rho\n";
    bool all = true;
    for (int n : b.ns) {
        SolveArgs a = b.base;
        a.n = n;
        a.solver = "srj";
        Built built = build(a);
        GridProblem start = built.problem;
        initialise(start, a);
        SolveLimits lim;
        lim.tolerance = tolerance(a);
        lim.max_iterations = a.max_iter;
        lim.record_history = false;
        GridProblem ref = start;
        const ResidualHistory hj = jacobi_solve(ref, lim);
        for (int p : b.ps) {
            a.p = p;
            const auto cycle = schedule_for(a, built.natural_n);
            GridProblem work = start;
            const ResidualHistory h = srj_solve(work, *cycle, lim);
            all = all && h.converged && hj.converged;
            *out << a.problem << ',' << n << ',' << p << ',' << h.iterations << ',' << (h.converged ? 1 : 0) << ','
                 << hj.iterations << ','
                 << static_cast<double>(hj.iterations) / static_cast<double>(h.iterations) << ','
                 << cycle->source().rho() << '\n';
        }
    }
    return all ? kConverged : kNotConverged;
}

void add_solve_options(CLI::App* cmd, SolveArgs& a) {
    cmd->add_option("--problem", a.problem, "laplace | poisson | spherical | gs-a | gs-b")
        ->check(CLI::IsMember({"laplace", "poisson", "spherical", "gs-a", "gs-b"}));
    cmd->add_option("--ny", a.ny, "cells along y for poisson (default: n)");
    cmd->add_option("--dims", a.dims, "dimensions of the spherical problem")->check(CLI::Range(1, 3));
    cmd->add_option("--c", a.c, "Grad-Shafranov constant C");
    cmd->add_option("--p", a.p, "SRJ levels")->check(CLI::Range(1, 15));
    cmd->add_option("--schedule-n", a.schedule_n, "grid size of the parameter row (default: from the problem)");
    cmd->add_flag("--optimize", a.optimize, "compute the schedule instead of looking it up");
    cmd->add_option("--quant", a.quant, "floor | round | ceil")->check(CLI::IsMember({"floor", "round", "ceil"}));
    cmd->add_option("--tol", a.tol, "absolute tolerance on max |u^n - u^(n-1)|");
    cmd->add_option("--tol-policy", a.tol_policy, "absolute | scaled (1e-5 / N^2)")
        ->check(CLI::IsMember({"absolute", "scaled"}));
    cmd->add_option("--max-iter", a.max_iter, "iteration cap");
    cmd->add_option("--seed", a.seed, "seed of the initial-noise generator");
    cmd->add_option("--noise", a.noise, "initial noise amplitude (default 1 for laplace, 0 otherwise)");
    cmd->add_option("--table", a.table, "parameter table file (default: shipped)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scheduled relaxation Jacobi: parameters and benchmark solves"};
    app.require_subcommand(1);

    OptimizeArgs oa;
    auto* opt = app.add_subcommand("optimize", "compute optimal parameters for (P, N)");
    opt->add_option("--p", oa.p, "levels")->required()->check(CLI::Range(1, 15));
    opt->add_option("--n", oa.n, "grid size")->required()->check(CLI::PositiveNumber);
    opt->add_option("--bc", oa.bc, "neumann | dirichlet")->check(CLI::IsMember({"neumann", "dirichlet"}));
    opt->add_option("--dims", oa.dims, "dimensions")->check(CLI::Range(1, 3));
    opt->add_option("--precision", oa.digits, "working digits (<= 16 double, else 50-digit)");
    opt->add_option("--out", oa.out, "append the row to this table file");
    opt->add_flag("--overwrite", oa.overwrite, "replace an existing (P, N) row");

    SolveArgs sa;
    auto* sol = app.add_subcommand("solve", "run one solver on a benchmark problem");
    sol->add_option("--n", sa.n, "cells per axis (points per axis for gs-*)")->check(CLI::PositiveNumber);
    sol->add_option("--solver", sa.solver, "srj | jacobi | gs | sor")
        ->check(CLI::IsMember({"srj", "jacobi", "gs", "sor"}));
    sol->add_option("--omega", sa.omega, "SOR weight");
    sol->add_option("--csv", sa.csv, "write the residual history here");
    sol->add_flag("--ref-jacobi", sa.ref_jacobi, "also run Jacobi from the same start and report the ratio");
    add_solve_options(sol, sa);

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "SRJ vs Jacobi iteration ratios over P and N");
    bench->add_option("--p-list", ba.ps, "levels to run")->delimiter(',');
    bench->add_option("--n-list", ba.ns, "grid sizes to run")->delimiter(',');
    bench->add_option("--out", ba.out, "CSV output (default: stdout)");
    add_solve_options(bench, ba.base);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*opt) return cmd_optimize(oa);
        if (*sol) return cmd_solve(sa);
        return cmd_bench(ba);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (best residual " << e.best_residual() << ")\n";
        return kNotConverged;
    } catch (const OverflowError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    } catch (const PoleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
}
