#ifndef ATD_RNG_HPP
#define ATD_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>

namespace atd {

/**
 * @brief Seeded random source.
 *
 * All randomness in the library (initialization, sampling, splitting,
 * synthetic data) is drawn from an instance of this class, so a fixed seed
 * reproduces a run exactly on a given standard library.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /** Uniform index in `[0, n)`. `n` must be positive. */
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    double uniform(double lower, double upper) {
        return std::uniform_real_distribution<double>(lower, upper)(engine_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    /** Draw a seed for a derived, independent stream. */
    std::uint64_t split() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}

#endif
