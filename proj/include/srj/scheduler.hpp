#pragma once

// Integer cycles from real cycle fractions: repetition counts, stability of
// the resulting M-cycle and the order in which the weights are applied.

#include <vector>

#include "srj/core.hpp"

namespace srj {

enum class Quantization { floor, round, ceil };

/// One M-cycle: weight omega_i applied q_i times, M = sum q_i, q_1 = 1.
class CycleSchedule {
public:
    /// Builds the cycle and lays out its weight sequence with `layout`.
    CycleSchedule(std::vector<int> q, WeightSchedule source);

    const std::vector<int>& q() const noexcept { return q_; }
    int cycle_length() const noexcept { return m_; }
    const std::vector<double>& weight_sequence() const noexcept { return sequence_; }
    const WeightSchedule& source() const noexcept { return source_; }
    int levels() const noexcept { return static_cast<int>(q_.size()); }

private:
    std::vector<int> q_;
    int m_;
    std::vector<double> sequence_;
    WeightSchedule source_;
};

/// q_i = strategy(beta_i / beta_1), so q_1 = 1.
CycleSchedule quantize(const WeightSchedule& schedule, Quantization strategy = Quantization::floor);

struct CycleStability {
    double max_amplification;  // max over the sample of prod |1 - omega_i kappa|^q_i
    double kappa_at_max;
    bool stable;               // max_amplification < 1
};

/// Per-cycle amplification sampled at 10^4 log-spaced points of
/// [kappa_min, 2] plus the interior extrema of the quantized factor.
CycleStability validate_cycle(const CycleSchedule& cycle, const KappaRange& range);

/// Evenly spread sequence of M weights. Class i (0-based, in the given order)
/// claims slots round((j + i/P) M / q_i) for j < q_i; an occupied slot passes
/// to the next free one, scanning forward cyclically.
std::vector<double> layout(const std::vector<int>& q, const std::vector<double>& omegas);

}  // namespace srj
