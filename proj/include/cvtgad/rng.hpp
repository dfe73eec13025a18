#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cvtgad {

// Seeded generator with hand-rolled draws so that identical seeds give
// identical streams on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    // Independent stream for a named sub-purpose of the same master seed.
    Rng fork(std::uint64_t salt) const {
        return Rng(seed_ ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace cvtgad
