#pragma once

// Brute-force reference implementations. They enumerate outcomes directly and
// share no code with the library, so they serve as independent oracles.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "frog/notification.hpp"

namespace oracle {

/// Sum over all 2^k correctness patterns of P(pattern) where at least
/// `threshold` voters are correct (default: strict majority for odd k).
inline double majority(std::span<const double> acc, std::size_t threshold = 0) {
    const std::size_t k = acc.size();
    if (threshold == 0) threshold = (k + 1) / 2;
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        double p = 1.0;
        std::size_t correct = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (mask & (1u << j)) {
                p *= acc[j];
                ++correct;
            } else {
                p *= 1.0 - acc[j];
            }
        }
        if (correct >= threshold) total += p;
    }
    return total;
}

/// Enumerates all R^k joint choices with choice 0 correct and wrong voters
/// uniform over the other R - 1; success iff choice 0 has a strict plurality.
inline double multichoice(std::span<const double> acc, int R) {
    const std::size_t k = acc.size();
    std::vector<int> choice(k, 0);
    double total = 0.0;
    while (true) {
        double p = 1.0;
        std::vector<int> votes(static_cast<std::size_t>(R), 0);
        for (std::size_t j = 0; j < k; ++j) {
            p *= choice[j] == 0 ? acc[j] : (1.0 - acc[j]) / (R - 1);
            ++votes[static_cast<std::size_t>(choice[j])];
        }
        bool wins = true;
        for (int r = 1; r < R; ++r) wins = wins && votes[0] > votes[static_cast<std::size_t>(r)];
        if (wins) total += p;
        std::size_t pos = 0;
        while (pos < k && ++choice[pos] == R) choice[pos++] = 0;
        if (pos == k) break;
    }
    return total;
}

/// Smallest odd subset size whose majority accuracy reaches q, or 0 if none.
inline std::size_t min_set_size(double q, std::span<const double> pool) {
    const std::size_t n = pool.size();
    std::size_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
        if (size % 2 == 0 || (best != 0 && size >= best)) continue;
        std::vector<double> subset;
        for (std::size_t j = 0; j < n; ++j) {
            if (mask & (1u << j)) subset.push_back(pool[j]);
        }
        if (majority(subset) >= q) best = size;
    }
    return best;
}

/// Dominated-peer count recomputed from the definition.
inline std::size_t dominated_count(const frog::notification::WorkerSummary& x,
                                   std::span<const frog::notification::WorkerSummary> cohort) {
    std::size_t n = 0;
    for (const auto& y : cohort) {
        const bool more_available = x.availability > y.availability;
        const bool no_less_accurate = !(x.mean_accuracy < y.mean_accuracy);
        const bool no_slower = !(x.mean_response > y.mean_response);
        if (more_available && no_less_accurate && no_slower) ++n;
    }
    return n;
}

/// Riemann sum of the density over one period at 1-minute resolution.
inline double integrate_minutes(const frog::notification::AdaptiveKde& kde) {
    double total = 0.0;
    for (double t = 0.0; t < kde.period(); t += 60.0) total += kde.density(t) * 60.0;
    return total;
}

} // namespace oracle
