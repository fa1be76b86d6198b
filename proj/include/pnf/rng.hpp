// Deterministic sampling. SplitMix64 is the documented counter-based
// generator: state advances by 0x9E3779B97F4A7C15 and each output is the
// finalizer of the current state, so identical (seed, draw order) pairs
// reproduce bit-identically on every platform.
#pragma once

#include <cstdint>
#include <vector>

#include "pnf/chart.hpp"

namespace pnf {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

private:
    std::uint64_t state_;
};

// All samples for a run are drawn upfront in index order, so parallel
// consumers see the same points as a sequential run.
inline std::vector<Vec> sample_box(const ChartBox& box, int count, std::uint64_t seed,
                                   double shrink = 1.0) {
    SplitMix64 rng(seed);
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        Vec x(box.dim());
        for (int i = 0; i < box.dim(); ++i) {
            const auto& b = box.bounds()[static_cast<std::size_t>(i)];
            double mid = 0.5 * (b[0] + b[1]);
            double half = 0.5 * (b[1] - b[0]) * shrink;
            x[i] = rng.next_in(mid - half, mid + half);
        }
        out.push_back(std::move(x));
    }
    return out;
}

// Uniform in the centered cube [-r, r]^dim.
inline std::vector<Vec> sample_cube(int dim, double r, int count, std::uint64_t seed) {
    return sample_box(ChartBox::cube(dim, r), count, seed);
}

} // namespace pnf
