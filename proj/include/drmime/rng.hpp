#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "drmime/errors.hpp"

namespace drmime {

// Deterministic RNG. std::mt19937_64 is bit-exact across platforms, but the
// std:: distributions are not, so the distributions here are hand-rolled on
// top of the raw 64-bit stream. Same seed, same draw order, same values,
// everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw InvalidArgument("Rng::below: n must be positive");
        const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
        for (;;) {
            const std::uint64_t r = eng_();
            if (r <= limit) return r % n;
        }
    }

    // Standard normal via Box-Muller. Caches the second deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    // k distinct indices from 0..n-1 (partial Fisher-Yates), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n) throw InvalidArgument("Rng::sample_without_replacement: k exceeds n");
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace drmime
