#include "srj/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "srj/errors.hpp"

namespace srj {

namespace {

constexpr double kTinyFactor = 1e-300;

void check_schedule(const std::vector<double>& omegas, const std::vector<double>& betas,
                    int grid_size) {
    auto fail = [](const std::string& msg) { throw InvariantError("WeightSchedule: " + msg); };
    if (omegas.empty()) fail("no levels");
    if (omegas.size() != betas.size()) fail("omega/beta length mismatch");
    if (grid_size < 2) fail("grid size must be >= 2");
    const std::size_t p = omegas.size();
    for (std::size_t i = 0; i < p; ++i) {
        if (!std::isfinite(omegas[i]) || omegas[i] <= 0.0) fail("weights must be positive");
        if (i + 1 < p && !(omegas[i] > omegas[i + 1])) fail("weights must be strictly decreasing");
    }
    if (p >= 2) {
        if (!(omegas.back() < 1.0)) fail("smallest weight must lie in (0,1)");
        if (!(omegas.front() > 1.0)) fail("largest weight must exceed 1");
    }
    double sum = 0.0;
    for (double b : betas) {
        if (!(b > 0.0 && b <= 1.0)) fail("betas must lie in (0,1]");
        sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "betas sum to " << sum << ", not 1";
        fail(os.str());
    }
}

}  // namespace

KappaRange::KappaRange(double kappa_min) : kappa_min_(kappa_min) {
    if (!(kappa_min > 0.0 && kappa_min < kKappaMax))
        throw InvariantError("KappaRange: need 0 < kappa_min < 2");
}

WeightSchedule::WeightSchedule(std::vector<double> omegas, std::vector<double> betas,
                               int grid_size)
    : omegas_(std::move(omegas)), betas_(std::move(betas)), grid_size_(grid_size) {
    check_schedule(omegas_, betas_, grid_size_);
    rho_ = 0.0;
    for (std::size_t i = 0; i < omegas_.size(); ++i) rho_ += omegas_[i] * betas_[i];
}

WeightSchedule WeightSchedule::normalized(std::vector<double> omegas, std::vector<double> betas,
                                          int grid_size) {
    const double sum = std::accumulate(betas.begin(), betas.end(), 0.0);
    if (!(sum > 0.0)) throw InvariantError("WeightSchedule: betas must be positive");
    for (double& b : betas) b /= sum;
    return WeightSchedule(std::move(omegas), std::move(betas), grid_size);
}

WeightSchedule WeightSchedule::jacobi(int grid_size) { return WeightSchedule({1.0}, {1.0}, grid_size); }

double log_gamma(const WeightSchedule& schedule, double kappa) {
    const auto& w = schedule.omegas();
    const auto& b = schedule.betas();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double factor = std::abs(1.0 - w[i] * kappa);
        if (factor < kTinyFactor) return -std::numeric_limits<double>::infinity();
        acc += b[i] * std::log(factor);
    }
    return acc;
}

double gamma(const WeightSchedule& schedule, double kappa) {
    const double lg = log_gamma(schedule, kappa);
    return std::isinf(lg) ? 0.0 : std::exp(lg);
}

double log_gamma_slope(const WeightSchedule& schedule, double kappa) {
    const auto& w = schedule.omegas();
    const auto& b = schedule.betas();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double denom = 1.0 - kappa * w[i];
        if (std::abs(denom) <= 4.0 * std::numeric_limits<double>::epsilon())
            throw PoleError("log_gamma_slope: kappa coincides with 1/omega");
        acc += b[i] * w[i] / denom;
    }
    return acc;
}

double performance_index(const WeightSchedule& schedule) {
    const auto& w = schedule.omegas();
    const auto& b = schedule.betas();
    return std::inner_product(w.begin(), w.end(), b.begin(), 0.0);
}

std::vector<double> interior_extrema(const WeightSchedule& schedule) {
    const auto& w = schedule.omegas();
    std::vector<double> out;
    out.reserve(w.size() > 0 ? w.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        // The slope runs from -inf just above 1/omega_i to +inf just below
        // 1/omega_{i+1}, so there is exactly one sign change.
        double lo = 1.0 / w[i];
        double hi = 1.0 / w[i + 1];
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            double s;
            try {
                s = log_gamma_slope(schedule, mid);
            } catch (const PoleError&) {
                break;
            }
            (s < 0.0 ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

double kappa_min_model(double n) {
    const double s = std::sin(std::numbers::pi / (2.0 * n));
    return s * s;
}

double effective_n(std::span<const int> sizes, BoundaryKind bc) {
    if (sizes.empty()) throw InvariantError("effective_n: no axes");
    for (int n : sizes)
        if (n < 2) throw InvariantError("effective_n: sizes must be >= 2");
    const double d = static_cast<double>(sizes.size());
    double arg = 0.0;
    if (bc == BoundaryKind::neumann) {
        const int n = *std::max_element(sizes.begin(), sizes.end());
        arg = std::sqrt(2.0 / d) * std::sin(std::numbers::pi / (2.0 * n));
    } else {
        double sum = 0.0;
        for (int n : sizes) {
            const double s = std::sin(std::numbers::pi / (2.0 * n));
            sum += s * s;
        }
        arg = std::sqrt(2.0 / d * sum);
    }
    arg = std::min(arg, 1.0);
    return std::numbers::pi / (2.0 * std::asin(arg));
}

double effective_n(int n, int dims, BoundaryKind bc) {
    if (dims < 1 || dims > 3) throw InvariantError("effective_n: dims must be 1, 2 or 3");
    const std::vector<int> sizes(static_cast<std::size_t>(dims), n);
    return effective_n(sizes, bc);
}

double kappa_min(int n, int dims, BoundaryKind bc) {
    if (n < 2) throw InvariantError("kappa_min: N must be >= 2");
    if (dims < 1 || dims > 3) throw InvariantError("kappa_min: dims must be 1, 2 or 3");
    if (bc == BoundaryKind::neumann) {
        const double s = std::sin(std::numbers::pi / (2.0 * n));
        return 2.0 / dims * s * s;
    }
    return kappa_min_model(effective_n(n, dims, bc));
}

double kappa_min(std::span<const int> sizes, BoundaryKind bc) {
    return kappa_min_model(effective_n(sizes, bc));
}

}  // namespace srj
