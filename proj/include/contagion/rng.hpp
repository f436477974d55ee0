#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace contagion {

// Deterministic random source. All draws are derived from the raw mt19937_64
// stream with explicit transforms, so a given seed reproduces the same
// sequence on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent child stream: hash (master, stream) into a fresh seed so
    // parallel consumers never share state.
    static Rng substream(std::uint64_t master, std::uint64_t stream) {
        return Rng(mix(master ^ mix(stream + 0x9e3779b97f4a7c15ULL)));
    }

    // Uniform on [0, 1): top 53 bits of the generator output.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer on [lo, hi], inclusive, via rejection on a bit mask.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo);
        if (range == 0) return lo;
        std::uint64_t mask = range;
        mask |= mask >> 1;  mask |= mask >> 2;  mask |= mask >> 4;
        mask |= mask >> 8;  mask |= mask >> 16; mask |= mask >> 32;
        std::uint64_t draw;
        do {
            draw = gen_() & mask;
        } while (draw > range);
        return lo + static_cast<std::int64_t>(draw);
    }

    // Marsaglia polar method; caches the spare deviate.
    double normal(double mean, double sd) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sd * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return mean + sd * u * scale;
    }

    std::uint64_t raw() { return gen_(); }

private:
    static std::uint64_t mix(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
    bool has_spare_{false};
    double spare_{0.0};
};

}  // namespace contagion
