#ifndef MLAB_RNG_HPP
#define MLAB_RNG_HPP

#include <cstdint>
#include <random>

namespace mlab {

// splitmix64 step, used to derive independent stream seeds from a master
// seed. Trials get mix_seed(master, suite_tag, trial_index) so they can run
// in any order (or in parallel) and still be reproducible one by one.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2));
    std::uint64_t r = splitmix64(s);
    return r ? r : 0x1234567ull;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(eng_);
    }

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(eng_);
    }

    double gaussian(double sd) {
        std::normal_distribution<double> d(0.0, sd);
        return d(eng_);
    }

    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

    std::uint64_t raw() { return eng_(); }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

} // namespace mlab

#endif
