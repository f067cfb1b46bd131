#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace gaze {

// Seeded generator with pinned transforms. The standard distribution
// adapters are implementation-defined, so uniform/gaussian draws are derived
// from raw mt19937_64 words directly; identical seeds give identical
// sequences on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    double gaussian(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(gen_() % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 gen_;
    double spare_{0.0};
    bool have_spare_{false};
};

} // namespace gaze
