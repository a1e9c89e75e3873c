#pragma once

#include <cstdint>
#include <random>

namespace impulse {

/// splitmix64 mixing step; used to spread seeds across replications.
inline std::uint64_t split_mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for replication `index` of a run with `master` seed. Replications
/// never share generator state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return split_mix64(master ^ split_mix64(index + 1));
}

/// Standard normal sampler: mt19937_64 + Box-Muller. Box-Muller keeps the
/// stream independent of the standard library's normal_distribution
/// implementation, so identical seeds give identical paths everywhere.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite
        const double u1 = 1.0 - (engine_() >> 11) * 0x1.0p-53;
        const double u2 = (engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace impulse
