#ifndef SPTRACK_RNG_HPP
#define SPTRACK_RNG_HPP

#include <cstdint>
#include <cmath>
#include <random>

namespace sptrack {

// splitmix64 finalizer, used both as a generator seeder and as a mixing hash
// for deriving independent substreams from (seed, tag...) tuples.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed) { return splitmix64(seed); }

template <typename... Tags>
uint64_t mix_seed(uint64_t seed, uint64_t tag, Tags... rest) {
    return mix_seed(splitmix64(seed ^ splitmix64(tag)), rest...);
}

/**
 * Seedable random stream with deterministic substream derivation.
 *
 * Substreams derived via child() depend only on the parent's seed and the
 * tags, never on how many draws the parent has made. This keeps per-particle
 * and per-run streams reproducible regardless of evaluation order or worker
 * count.
 */
class RngStream {
public:
    explicit RngStream(uint64_t seed) : seed_(seed), gen_(mix_seed(seed)) {}

    template <typename... Tags>
    RngStream child(Tags... tags) const {
        return RngStream(mix_seed(seed_, static_cast<uint64_t>(tags)...));
    }

    uint64_t seed() const { return seed_; }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + uniform() * (b - a); }

    // standard normal via Box-Muller; spare value cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) {
        return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sptrack

#endif
