#pragma once

#include <cmath>
#include <cstdint>

namespace exactrep {

/// Counter-based per-path random stream. The state is a strongly mixed hash
/// of (seed, path index) advanced by a fixed increment, so path p always sees
/// the same draws no matter which worker runs it or in which order.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t path) {
        const std::uint64_t a = finalize(seed + 0x9E3779B97F4A7C15ULL);
        const std::uint64_t b = finalize(path + 0xD1B54A32D192ED03ULL);
        state_ = finalize(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
    }

    /// Uniform draw strictly inside (0, 1).
    double uniform() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return (static_cast<double>(finalize(state_) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace exactrep
