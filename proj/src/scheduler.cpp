#include "srj/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "srj/errors.hpp"

namespace srj {

namespace {

constexpr int kStabilitySamples = 10000;

int sum_of(const std::vector<int>& q) {
    long long m = 0;
    for (int v : q) {
        if (v <= 0) throw InvariantError("CycleSchedule: repetition counts must be positive");
        m += v;
    }
    if (m > std::numeric_limits<int>::max()) throw InvariantError("CycleSchedule: cycle too long");
    return static_cast<int>(m);
}

// log of prod |1 - omega_i kappa|^q_i; -inf when a factor vanishes.
double log_cycle_amplification(const std::vector<double>& omegas, const std::vector<int>& q, double kappa) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double f = std::abs(1.0 - omegas[i] * kappa);
        if (f < 1e-300) return -std::numeric_limits<double>::infinity();
        acc += q[i] * std::log(f);
    }
    return acc;
}

}  // namespace

CycleSchedule::CycleSchedule(std::vector<int> q, WeightSchedule source)
    : q_(std::move(q)), m_(sum_of(q_)), source_(std::move(source)) {
    if (static_cast<int>(q_.size()) != source_.levels())
        throw InvariantError("CycleSchedule: one count per weight required");
    if (q_.front() != 1) throw InvariantError("CycleSchedule: q_1 must be 1");
    sequence_ = layout(q_, source_.omegas());
}

CycleSchedule quantize(const WeightSchedule& schedule, Quantization strategy) {
    const auto& b = schedule.betas();
    std::vector<int> q;
    q.reserve(b.size());
    for (double bi : b) {
        const double r = bi / b.front();
        double v = 0.0;
        switch (strategy) {
            case Quantization::floor: v = std::floor(r); break;
            case Quantization::round: v = std::round(r); break;
            case Quantization::ceil: v = std::ceil(r); break;
        }
        if (v < 1.0) throw InvariantError("quantize: a repetition count rounds to zero");
        q.push_back(static_cast<int>(v));
    }
    q.front() = 1;
    return CycleSchedule(std::move(q), schedule);
}

CycleStability validate_cycle(const CycleSchedule& cycle, const KappaRange& range) {
    const auto& w = cycle.source().omegas();
    const auto& q = cycle.q();
    CycleStability out{0.0, range.kappa_min(), false};
    double best = -std::numeric_limits<double>::infinity();
    auto probe = [&](double kappa) {
        const double v = log_cycle_amplification(w, q, kappa);
        if (v > best) {
            best = v;
            out.kappa_at_max = kappa;
        }
    };

    const double lo = std::log(range.kappa_min());
    const double hi = std::log(range.kappa_max());
    for (int s = 0; s < kStabilitySamples; ++s)
        probe(std::exp(lo + (hi - lo) * s / (kStabilitySamples - 1)));
    probe(range.kappa_max());

    // The quantized cycle has its own extrema, those of Gamma with beta = q/M.
    std::vector<double> frac;
    for (int v : q) frac.push_back(static_cast<double>(v) / cycle.cycle_length());
    const auto quantized = WeightSchedule::normalized(w, frac, cycle.source().grid_size());
    for (double k : interior_extrema(quantized))
        if (k >= range.kappa_min() && k <= range.kappa_max()) probe(k);

    out.max_amplification = std::exp(best);
    out.stable = out.max_amplification < 1.0;
    return out;
}

std::vector<double> layout(const std::vector<int>& q, const std::vector<double>& omegas) {
    if (q.size() != omegas.size()) throw InvariantError("layout: q and omegas differ in length");
    const int m = sum_of(q);
    const int p = static_cast<int>(q.size());
    std::vector<double> seq(static_cast<std::size_t>(m));
    std::vector<char> used(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < p; ++i) {
        const double offset = static_cast<double>(i) / p;
        for (int j = 0; j < q[i]; ++j) {
            int pos = static_cast<int>(std::lround((j + offset) * m / q[i])) % m;
            while (used[static_cast<std::size_t>(pos)]) pos = (pos + 1) % m;
            used[static_cast<std::size_t>(pos)] = 1;
            seq[static_cast<std::size_t>(pos)] = omegas[static_cast<std::size_t>(i)];
        }
    }
    return seq;
}

}  // namespace srj
