#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace loam {

// splitmix64: used both as a seed expander and to derive named substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic 64-bit RNG (xoshiro256++). All randomness in the project
// flows through this engine so runs are byte-identical across platforms;
// std::<distribution> types are implementation-defined and never used.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        have_gauss_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
        return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // standard normal via Box-Muller (cached pair for determinism, no rejection)
    double normal() {
        if (have_gauss_) {
            have_gauss_ = false;
            return cached_gauss_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_gauss_ = r * std::sin(theta);
        have_gauss_ = true;
        return r * std::cos(theta);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double cached_gauss_ = 0.0;
    bool have_gauss_;
};

// FNV-1a over the bytes of `name`, folded into `root`. Used to derive
// independent named seed substreams from one experiment root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ root;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    h ^= index + 0x9e3779b97f4a7c15ULL;
    std::uint64_t sm = h;
    return splitmix64(sm);
}

}  // namespace loam
