#ifndef STAGEMAP_RNG_HPP
#define STAGEMAP_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace stagemap {

// All randomness in the project flows through this wrapper. The generator is
// std::mt19937_64 (a fixed, well-specified algorithm); integer and real draws
// are reduced by hand instead of going through std::*_distribution, whose
// output is implementation-defined. Same seed, same draw sequence, on every
// platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // Uniform double in [0, 1), 53 significant bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    // Fisher-Yates, high-to-low.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace stagemap

#endif
