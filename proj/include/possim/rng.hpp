#pragma once

#include <cstdint>
#include <random>

namespace possim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based substream: the generator for (seed, index) depends only on
// those two values, so Monte Carlo output is independent of thread count and
// iteration order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s ^= index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
        std::uint64_t b = splitmix64(s);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        Rng r(0);
        r.eng_.seed(seq);
        return r;
    }

    double uniform() { return unif_(eng_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unif_(eng_); }
    double normal() { return std::normal_distribution<double>()(eng_); }
    double gamma(double shape, double scale) {
        return std::gamma_distribution<double>(shape, scale)(eng_);
    }
    double exponential() { return std::exponential_distribution<double>()(eng_); }
    double chisq(double dof) { return gamma(dof / 2.0, 2.0); }
    int binomial(int trials, double p) {
        return std::binomial_distribution<int>(trials, p)(eng_);
    }
    std::uint64_t integer(std::uint64_t n) {  // uniform on {0,...,n-1}
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

} // namespace possim
