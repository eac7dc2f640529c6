#ifndef MLAB_FUZZ_HPP
#define MLAB_FUZZ_HPP

// Random instance generators shared by the randomized suites and the tests.
// Everything is driven by an explicit Rng so a failure can be replayed from
// its seed alone.

#include <memory>
#include <utility>
#include <vector>

#include "mlab/rng.hpp"
#include "mlab/transform.hpp"

namespace mlab {

inline Filtration dyadic_filtration(int depth) {
    const int n = 1 << depth;
    std::vector<Partition> steps;
    for (int k = 0; k <= depth; ++k) {
        std::vector<int> lab(n);
        for (int i = 0; i < n; ++i) lab[i] = i >> (depth - k);
        steps.emplace_back(lab);
    }
    return Filtration(std::move(steps));
}

// random refining chain: each step splits up to two existing blocks
inline Filtration random_filtration(Rng& rng, int n, int horizon) {
    std::vector<Partition> steps{Partition::trivial(n)};
    std::vector<int> lab(n, 0);
    int next = 1;
    for (int k = 1; k <= horizon; ++k) {
        int splits = rng.uniform_int(0, 2);
        for (int s = 0; s < splits; ++s) {
            std::vector<std::vector<int>> blocks(next);
            for (int i = 0; i < n; ++i) blocks[lab[i]].push_back(i);
            std::vector<int> big;
            for (int b = 0; b < next; ++b)
                if (blocks[b].size() >= 2) big.push_back(b);
            if (big.empty()) break;
            int b = big[rng.uniform_int(0, static_cast<int>(big.size()) - 1)];
            for (int i : blocks[b])
                if (rng.coin()) lab[i] = next;
            // keep the split honest: both sides must stay populated
            bool any_old = false, any_new = false;
            for (int i : blocks[b]) {
                any_old |= lab[i] == b;
                any_new |= lab[i] == next;
            }
            if (!any_new) continue;
            if (!any_old) lab[blocks[b].front()] = b;
            ++next;
        }
        steps.emplace_back(lab);
    }
    return Filtration(std::move(steps));
}

// strictly positive masses; exact scalars get small integer weights over a
// common denominator, floats get a normalized uniform draw
template <class S>
SpacePtr<S> random_space(Rng& rng, int size) {
    std::vector<S> masses(size);
    if (scalar_traits<S>::exact) {
        long long total = 0;
        std::vector<int> w(size);
        for (int i = 0; i < size; ++i) {
            w[i] = rng.uniform_int(1, 24);
            total += w[i];
        }
        for (int i = 0; i < size; ++i)
            masses[i] = scalar_traits<S>::ratio(w[i], total);
    } else {
        double total = 0;
        std::vector<double> w(size);
        for (int i = 0; i < size; ++i) {
            w[i] = rng.uniform(0.05, 1.0);
            total += w[i];
        }
        for (int i = 0; i < size; ++i) masses[i] = S(w[i] / total);
    }
    return make_space(std::move(masses));
}

// bounded values: exact scalars use fractions p/q with |p| <= 24, q <= 12
template <class S>
Rv<S> random_rv(Rng& rng, const SpacePtr<S>& space) {
    std::vector<S> v(space->size());
    for (auto& x : v) {
        if (scalar_traits<S>::exact)
            x = scalar_traits<S>::ratio(rng.uniform_int(-24, 24), rng.uniform_int(1, 12));
        else
            x = S(rng.uniform(-1.0, 1.0));
    }
    return Rv<S>(space, std::move(v));
}

// weight process with |K_k| <= 1 and K_k constant on every H_k atom
template <class S>
Process<S> random_weight_process(Rng& rng, const ProductFiltrationPair<S>& pair) {
    Process<S> out;
    for (int k = 0; k <= pair.horizon(); ++k) {
        const Partition& h = pair.H(k);
        std::vector<S> per_block(h.block_count());
        for (auto& x : per_block) {
            if (scalar_traits<S>::exact)
                x = scalar_traits<S>::ratio(rng.uniform_int(-12, 12), 12);
            else
                x = S(rng.uniform(-1.0, 1.0));
        }
        std::vector<S> v(h.size());
        for (int i = 0; i < h.size(); ++i) v[i] = per_block[h.block_of(i)];
        out.push_back(Rv<S>(pair.product(), std::move(v)));
    }
    return out;
}

template <class S>
MartingaleInputs<S> random_inputs(Rng& rng, int n1, int n2, int horizon,
                                  bool with_weights = false) {
    auto s1 = random_space<S>(rng, n1);
    auto s2 = random_space<S>(rng, n2);
    auto pair = std::make_shared<const ProductFiltrationPair<S>>(
        s1, s2, random_filtration(rng, n1, horizon), random_filtration(rng, n2, horizon));
    Rv<S> x = random_rv(rng, pair->product());
    Rv<S> y = random_rv(rng, pair->product());
    Rv<S> z = random_rv(rng, pair->product());
    Process<S> k;
    if (with_weights) k = random_weight_process(rng, *pair);
    return make_martingale_inputs(pair, std::move(x), std::move(y), std::move(z),
                                  std::move(k));
}

} // namespace mlab

#endif
