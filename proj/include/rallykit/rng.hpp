#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace rallykit {

// Deterministic PRNG with a stable cross-platform bit stream: xoshiro256++
// seeded through splitmix64.  std::mt19937 + std::normal_distribution would
// not guarantee identical sequences across standard library implementations,
// which breaks byte-identical trace replay.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    // Independent per-episode stream: a master seed and an episode index map
    // to a child seed through one splitmix64 round over the mixed pair.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        std::uint64_t x = master_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        return Rng(splitmix64(x));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller without a cached spare so the draw count per call is fixed;
    // a cached spare would make interleaved consumers order-dependent.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    Eigen::Vector3d normal3(double sigma) {
        return {sigma * normal(), sigma * normal(), sigma * normal()};
    }

    // Uniform in the closed ball of given radius, by rejection from the cube.
    Eigen::Vector3d uniform_in_ball(double radius) {
        if (radius <= 0.0) return Eigen::Vector3d::Zero();
        while (true) {
            const Eigen::Vector3d p{uniform(-1.0, 1.0), uniform(-1.0, 1.0),
                                    uniform(-1.0, 1.0)};
            if (p.squaredNorm() <= 1.0) return radius * p;
        }
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace rallykit
