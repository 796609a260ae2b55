#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace asip {

// Deterministic seeded generator. The raw engine output is specified by the
// standard, and all distributions are derived here from the raw bits, so the
// same seed yields the same sequence on every platform and toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    /// Index drawn proportionally to nonnegative weights.
    std::size_t pick_weighted(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    /// Derive an independent stream (for per-instance sub-generators).
    Rng fork(std::uint64_t salt) {
        return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace asip
