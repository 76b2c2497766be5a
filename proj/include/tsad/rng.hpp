// Seeded random number generation with bit-reproducible streams.
//
// std::mt19937_64 output is fully specified by the standard; the floating
// point conversions below are done from raw bits rather than through
// std::uniform_real_distribution / std::normal_distribution, whose results
// are implementation-defined and would break cross-platform determinism.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tsad/tensor.hpp"

namespace tsad {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw Error("bad_bound", "Rng::below(0)");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

enum class InitScheme { xavier_uniform, zeros };

// Xavier/Glorot uniform in +-sqrt(6 / (fan_in + fan_out)), with the fans
// taken from the trailing two axes (a rank-1 shape counts as fan_out only).
inline Tensor init_weights(Rng& rng, Shape shape, InitScheme scheme = InitScheme::xavier_uniform) {
    const std::size_t n = shape_numel(shape);
    std::vector<double> data(n, 0.0);
    if (scheme == InitScheme::xavier_uniform) {
        const std::size_t r = shape.size();
        const std::size_t fan_in = r >= 2 ? shape[r - 2] : 1;
        const std::size_t fan_out = shape[r - 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : data) v = rng.uniform(-bound, bound);
    }
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace tsad
