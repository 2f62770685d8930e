#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace dta {

// Deterministic PRNG with hand-rolled distributions. The standard library's
// distribution objects are implementation-defined, which would tie results to
// a particular libstdc++; everything here is pinned so that a (config, seed)
// pair reproduces byte-identical results on any build.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Child-stream derivation: hash the master seed with one or two stream ids.
// Adding parallelism never changes the draws of any stream.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t sub = 0) {
    uint64_t s = master;
    uint64_t a = splitmix64(s);
    s = a ^ (stream * 0x9E3779B97F4A7C15ull);
    uint64_t b = splitmix64(s);
    s = b ^ (sub * 0xD1B54A32D192ED03ull);
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t seed() const { return seed_; }

    // xoshiro256++
    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // exponential inter-arrival time; rate in events/ms
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // Box-Muller without caching
    double normal(double mean, double sd) {
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return mean + sd * r * std::cos(2.0 * M_PI * u2);
    }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

    // Fisher-Yates
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    std::vector<int> permutation(int n) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        shuffle(idx);
        return idx;
    }

    Rng child(uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t seed_;
    uint64_t s_[4];
};

}  // namespace dta
