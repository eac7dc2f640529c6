#ifndef MLAB_PRODUCT_HPP
#define MLAB_PRODUCT_HPP

// Product of two filtered finite spaces. The first factor carries the
// filtration (A_k), the second (B_k). On the product we expose three
// derived partition chains:
//   F_k: A_k-atom x single outcome   (first margin filtered, second full)
//   G_k: single outcome x B_k-atom
//   H_k: A_k-atom x B_k-atom         (= F_k meet G_k)
// plus the one-sided "fiber" conditional expectations, which average over a
// single margin and are the workhorse for everything downstream.

#include <memory>
#include <utility>
#include <vector>

#include "mlab/errors.hpp"
#include "mlab/prob_space.hpp"
#include "mlab/rng.hpp"

namespace mlab {

enum class Axis { first = 1, second = 2 };

template <class S>
struct MarginBlocks {
    std::vector<std::vector<int>> members;
    std::vector<S> mass;
};

template <class S>
class ProductFiltrationPair {
public:
    ProductFiltrationPair(SpacePtr<S> s1, SpacePtr<S> s2, Filtration f1, Filtration f2)
        : s1_(std::move(s1)), s2_(std::move(s2)), f1_(std::move(f1)), f2_(std::move(f2)) {
        require(s1_ && s2_, "product: null factor space");
        require(f1_.size() == s1_->size(), "product: first filtration size mismatch");
        require(f2_.size() == s2_->size(), "product: second filtration size mismatch");
        require(f1_.horizon() == f2_.horizon(), "product: filtrations must share a horizon");
        n1_ = s1_->size();
        n2_ = s2_->size();
        std::vector<S> pm;
        pm.reserve(static_cast<size_t>(n1_) * n2_);
        for (int i = 0; i < n1_; ++i)
            for (int j = 0; j < n2_; ++j) pm.push_back(s1_->mass(i) * s2_->mass(j));
        product_ = make_space<S>(std::move(pm));

        const int n = horizon();
        for (int k = 0; k <= n; ++k) {
            a_blocks_.push_back(margin_blocks(f1_.at(k), *s1_));
            b_blocks_.push_back(margin_blocks(f2_.at(k), *s2_));
            F_.push_back(lift(f1_.at(k), Partition::singletons(n2_)));
            G_.push_back(lift(Partition::singletons(n1_), f2_.at(k)));
            H_.push_back(lift(f1_.at(k), f2_.at(k)));
        }
    }

    int horizon() const { return f1_.horizon(); }
    int size1() const { return n1_; }
    int size2() const { return n2_; }
    const SpacePtr<S>& space1() const { return s1_; }
    const SpacePtr<S>& space2() const { return s2_; }
    const SpacePtr<S>& product() const { return product_; }
    const Filtration& filt1() const { return f1_; }
    const Filtration& filt2() const { return f2_; }

    int index(int i, int j) const { return i * n2_ + j; }

    const Partition& F(int k) const { return F_[check_step(k)]; }
    const Partition& G(int k) const { return G_[check_step(k)]; }
    const Partition& H(int k) const { return H_[check_step(k)]; }

    // atoms A_k-block x B_l-block, for mixed-step conditioning
    Partition rect_partition(int k, int l) const {
        check_step(k);
        check_step(l);
        return lift(f1_.at(k), f2_.at(l));
    }

    const MarginBlocks<S>& a_blocks(int k) const { return a_blocks_[check_step(k)]; }
    const MarginBlocks<S>& b_blocks(int k) const { return b_blocks_[check_step(k)]; }

    // Average over the chosen margin's step-k atoms, the other coordinate
    // held fixed. Axis::first averages the first coordinate (so the result
    // equals E(w | F_k)); Axis::second gives E(w | G_k).
    Rv<S> fiber_cond_exp(const Rv<S>& w, Axis axis, int k) const {
        check_product_rv(w);
        check_step(k);
        std::vector<S> out(w.size(), S(0));
        if (axis == Axis::first) {
            const auto& mb = a_blocks_[k];
            for (size_t b = 0; b < mb.members.size(); ++b) {
                const auto& blk = mb.members[b];
                for (int j = 0; j < n2_; ++j) {
                    S num(0);
                    for (int i : blk) num += s1_->mass(i) * w[index(i, j)];
                    const S avg = num / mb.mass[b];
                    for (int i : blk) out[index(i, j)] = avg;
                }
            }
        } else {
            const auto& mb = b_blocks_[k];
            for (size_t b = 0; b < mb.members.size(); ++b) {
                const auto& blk = mb.members[b];
                for (int i = 0; i < n1_; ++i) {
                    S num(0);
                    for (int j : blk) num += s2_->mass(j) * w[index(i, j)];
                    const S avg = num / mb.mass[b];
                    for (int j : blk) out[index(i, j)] = avg;
                }
            }
        }
        return Rv<S>(product_, std::move(out));
    }

    // one-step martingale difference of the fiber conditioning
    Rv<S> fiber_diff(const Rv<S>& w, Axis axis, int k) const {
        require(k >= 0 && k + 1 <= horizon(), "fiber_diff: step out of range");
        return fiber_cond_exp(w, axis, k + 1) - fiber_cond_exp(w, axis, k);
    }

private:
    int check_step(int k) const {
        require(k >= 0 && k <= horizon(), "product: step index out of range");
        return k;
    }
    void check_product_rv(const Rv<S>& w) const {
        require(w.size() == n1_ * n2_, "product: rv does not live on the product space");
    }

    static MarginBlocks<S> margin_blocks(const Partition& p, const Space<S>& sp) {
        MarginBlocks<S> mb;
        mb.members = p.blocks();
        mb.mass.reserve(mb.members.size());
        for (const auto& blk : mb.members) {
            S m(0);
            for (int i : blk) m += sp.mass(i);
            mb.mass.push_back(m);
        }
        return mb;
    }

    Partition lift(const Partition& pa, const Partition& pb) const {
        std::vector<int> lab(static_cast<size_t>(n1_) * n2_);
        const int bc = pb.block_count();
        for (int i = 0; i < n1_; ++i)
            for (int j = 0; j < n2_; ++j)
                lab[index(i, j)] = pa.block_of(i) * bc + pb.block_of(j);
        return Partition(std::move(lab));
    }

    SpacePtr<S> s1_, s2_, product_;
    Filtration f1_, f2_;
    int n1_ = 0, n2_ = 0;
    std::vector<Partition> F_, G_, H_;
    std::vector<MarginBlocks<S>> a_blocks_, b_blocks_;
};

// w(i, i) as a variable on the first factor; needs equal factor sizes.
// Used by the identity checks that evaluate both slots of a two-argument
// kernel at the same point.
template <class S>
Rv<S> diagonal(const ProductFiltrationPair<S>& pair, const Rv<S>& w) {
    require(pair.size1() == pair.size2(), "diagonal: factor sizes differ");
    std::vector<S> out(pair.size1());
    for (int i = 0; i < pair.size1(); ++i) out[i] = w[pair.index(i, i)];
    return Rv<S>(pair.space1(), std::move(out));
}

// Identity: conditioning the second slot of V(x, y) at y -> x' and then the
// first slot x' -> x agrees with conditioning both slots straight to x.
// Returns the max-abs gap; zero for every V when both factors carry the same
// space and filtration.
template <class S>
S double_conditioning_diagonal_gap(const ProductFiltrationPair<S>& self_pair,
                                   const Rv<S>& v, int k) {
    const Rv<S> inner = self_pair.fiber_cond_exp(v, Axis::second, k);
    const Rv<S> lhs = cond_exp(diagonal(self_pair, inner), self_pair.filt1().at(k));
    const Rv<S> both = self_pair.fiber_cond_exp(inner, Axis::first, k);
    const Rv<S> rhs = diagonal(self_pair, both);
    return max_abs(lhs - rhs);
}

struct CommuteReport {
    double max_swap_gap = 0.0;   // E(E(w|p)|q) vs E(E(w|q)|p)
    double max_meet_gap = 0.0;   // either order vs E(w | p meet q)
    double max_factor_gap = 0.0; // conditional product rule for indicator events
};

// Samples random variables and random unions of blocks, measuring how far
// the two conditionings are from commuting. On product pairs (p = F_k,
// q = G_l) all three gaps vanish; on general partitions they need not.
template <class S>
CommuteReport check_commuting(const SpacePtr<S>& space, const Partition& p,
                              const Partition& q, int samples, std::uint64_t seed) {
    require(p.size() == space->size() && q.size() == space->size(),
            "check_commuting: partition size mismatch");
    Rng rng(seed);
    const Partition meet = sigma_intersect(p, q);
    CommuteReport rep;
    for (int s = 0; s < samples; ++s) {
        std::vector<S> vals(space->size());
        for (S& x : vals)
            x = scalar_traits<S>::ratio(rng.uniform_int(-16, 16), rng.uniform_int(1, 8));
        Rv<S> w(space, std::move(vals));
        const Rv<S> pq = cond_exp(cond_exp(w, p), q);
        const Rv<S> qp = cond_exp(cond_exp(w, q), p);
        const Rv<S> wm = cond_exp(w, meet);
        rep.max_swap_gap = std::max(rep.max_swap_gap, to_double(max_abs(pq - qp)));
        rep.max_meet_gap = std::max(rep.max_meet_gap, to_double(max_abs(pq - wm)));

        // indicator events built from whole blocks of p and q
        std::vector<S> ia(space->size(), S(0)), ib(space->size(), S(0));
        for (const auto& blk : p.blocks())
            if (rng.coin())
                for (int i : blk) ia[i] = S(1);
        for (const auto& blk : q.blocks())
            if (rng.coin())
                for (int i : blk) ib[i] = S(1);
        Rv<S> a(space, std::move(ia)), b(space, std::move(ib));
        const Rv<S> joint = cond_exp(a * b, meet);
        const Rv<S> split = cond_exp(a, meet) * cond_exp(b, meet);
        rep.max_factor_gap = std::max(rep.max_factor_gap, to_double(max_abs(joint - split)));
    }
    return rep;
}

template <class S>
CommuteReport check_commuting(const ProductFiltrationPair<S>& pair, int k, int l,
                              int samples, std::uint64_t seed) {
    return check_commuting(pair.product(), pair.F(k), pair.G(l), samples, seed);
}

} // namespace mlab

#endif
