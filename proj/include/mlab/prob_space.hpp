#ifndef MLAB_PROB_SPACE_HPP
#define MLAB_PROB_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "mlab/errors.hpp"
#include "mlab/numeric.hpp"
#include "mlab/partition.hpp"

namespace mlab {

// Finite probability space: outcome masses, all strictly positive, summing
// to one (exactly in exact mode, to 1e-12 in float mode). Zero-mass outcomes
// are rejected rather than carried around; conditional expectations never
// have to guard a 0/0 and almost-sure statements become pointwise ones.
template <class S>
class Space {
public:
    explicit Space(std::vector<S> mass) : mass_(std::move(mass)) {
        require(!mass_.empty(), "space: needs at least one outcome");
        S total(0);
        for (const S& m : mass_) {
            require(m > S(0), "space: outcome mass must be positive");
            total += m;
        }
        if constexpr (scalar_traits<S>::exact) {
            require(total == S(1), "space: masses must sum to one");
        } else {
            require(std::abs(to_double(total) - 1.0) <= kInputTol,
                    "space: masses must sum to one");
        }
    }

    int size() const { return static_cast<int>(mass_.size()); }
    const S& mass(int i) const { return mass_[i]; }
    const std::vector<S>& masses() const { return mass_; }

private:
    std::vector<S> mass_;
};

template <class S>
using SpacePtr = std::shared_ptr<const Space<S>>;

template <class S>
SpacePtr<S> make_space(std::vector<S> mass) {
    return std::make_shared<const Space<S>>(std::move(mass));
}

template <class S>
SpacePtr<S> uniform_space(int n) {
    require(n > 0, "space: needs at least one outcome");
    std::vector<S> m(n, scalar_traits<S>::ratio(1, n));
    return make_space<S>(std::move(m));
}

// Random variable: a value per outcome, tied to its space.
template <class S>
class Rv {
public:
    Rv(SpacePtr<S> space, std::vector<S> values)
        : space_(std::move(space)), v_(std::move(values)) {
        require(space_ != nullptr, "rv: null space");
        require(static_cast<int>(v_.size()) == space_->size(),
                "rv: value count does not match space size");
    }

    int size() const { return static_cast<int>(v_.size()); }
    const S& operator[](int i) const { return v_[i]; }
    S& operator[](int i) { return v_[i]; }
    const std::vector<S>& values() const { return v_; }
    const SpacePtr<S>& space() const { return space_; }

private:
    SpacePtr<S> space_;
    std::vector<S> v_;
};

template <class S>
Rv<S> constant_rv(const SpacePtr<S>& space, const S& c) {
    return Rv<S>(space, std::vector<S>(space->size(), c));
}

namespace detail {
template <class S>
void check_same_shape(const Rv<S>& a, const Rv<S>& b, const char* what) {
    require(a.size() == b.size(), what);
}
} // namespace detail

template <class S>
Rv<S> operator+(const Rv<S>& a, const Rv<S>& b) {
    detail::check_same_shape(a, b, "rv: shape mismatch in +");
    std::vector<S> out(a.values());
    for (int i = 0; i < b.size(); ++i) out[i] += b[i];
    return Rv<S>(a.space(), std::move(out));
}

template <class S>
Rv<S> operator-(const Rv<S>& a, const Rv<S>& b) {
    detail::check_same_shape(a, b, "rv: shape mismatch in -");
    std::vector<S> out(a.values());
    for (int i = 0; i < b.size(); ++i) out[i] -= b[i];
    return Rv<S>(a.space(), std::move(out));
}

// pointwise product
template <class S>
Rv<S> operator*(const Rv<S>& a, const Rv<S>& b) {
    detail::check_same_shape(a, b, "rv: shape mismatch in *");
    std::vector<S> out(a.values());
    for (int i = 0; i < b.size(); ++i) out[i] *= b[i];
    return Rv<S>(a.space(), std::move(out));
}

template <class S>
Rv<S> operator*(const S& c, const Rv<S>& a) {
    std::vector<S> out(a.values());
    for (S& x : out) x *= c;
    return Rv<S>(a.space(), std::move(out));
}

template <class S>
Rv<S> abs_rv(const Rv<S>& a) {
    std::vector<S> out(a.values());
    for (S& x : out) x = abs_val(x);
    return Rv<S>(a.space(), std::move(out));
}

template <class S>
Rv<S> square(const Rv<S>& a) {
    return a * a;
}

// pointwise square root; tolerates tiny negatives from rounding
inline Rv<double> sqrt_rv(const Rv<double>& v) {
    std::vector<double> out(v.values());
    for (auto& x : out) {
        require(x >= -1e-15, "sqrt_rv: negative value");
        x = std::sqrt(std::max(x, 0.0));
    }
    return Rv<double>(v.space(), std::move(out));
}

// E x, fixed left-to-right accumulation for run-to-run determinism
template <class S>
S expectation(const Rv<S>& x) {
    S acc(0);
    for (int i = 0; i < x.size(); ++i) acc += x.space()->mass(i) * x[i];
    return acc;
}

template <class S>
S max_abs(const Rv<S>& x) {
    S best(0);
    for (int i = 0; i < x.size(); ++i) best = std::max(best, abs_val(x[i]));
    return best;
}

template <class S>
S min_value(const Rv<S>& x) {
    S best = x[0];
    for (int i = 1; i < x.size(); ++i) best = std::min(best, x[i]);
    return best;
}

// E(x | partition): block-wise weighted average, assigned back to members.
template <class S>
Rv<S> cond_exp(const Rv<S>& x, const Partition& part) {
    require(part.size() == x.size(), "cond_exp: partition size mismatch");
    std::vector<S> out(x.size(), S(0));
    for (const auto& blk : part.blocks()) {
        S num(0), den(0);
        for (int i : blk) {
            num += x.space()->mass(i) * x[i];
            den += x.space()->mass(i);
        }
        const S avg = num / den;
        for (int i : blk) out[i] = avg;
    }
    return Rv<S>(x.space(), std::move(out));
}

// max over blocks of the value spread inside the block; 0 iff measurable
template <class S>
S measurability_gap(const Rv<S>& x, const Partition& part) {
    require(part.size() == x.size(), "measurability_gap: partition size mismatch");
    S worst(0);
    for (const auto& blk : part.blocks()) {
        S lo = x[blk.front()], hi = lo;
        for (int i : blk) {
            lo = std::min(lo, x[i]);
            hi = std::max(hi, x[i]);
        }
        worst = std::max(worst, S(hi - lo));
    }
    return worst;
}

// L^p norm in the space's measure. Values are normalized by the max before
// powering, which keeps the result finite for large inputs and makes
// norm(c*x) == |c|*norm(x) exact when c is a power of two (the ratio
// homogeneity checks rely on that). p = inf gives the sup norm.
template <class S>
double lp_norm(const Rv<S>& x, double p) {
    require(p >= 1.0, "lp_norm: p must be >= 1");
    const int n = x.size();
    double mx = 0.0;
    for (int i = 0; i < n; ++i) mx = std::max(mx, std::abs(to_double(x[i])));
    if (std::isinf(p)) return mx;
    if (mx == 0.0) return 0.0;
    const long ip = std::lround(p);
    const bool integral = std::abs(p - static_cast<double>(ip)) < 1e-12;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = std::abs(to_double(x[i])) / mx;
        double tp;
        if (integral) {
            tp = 1.0;
            for (long j = 0; j < ip; ++j) tp *= t;
        } else if (p == 1.5) {
            tp = t * std::sqrt(t);
        } else {
            tp = std::pow(t, p);
        }
        acc += to_double(x.space()->mass(i)) * tp;
    }
    return mx * std::pow(acc, 1.0 / p);
}

// exact second moment E x^2, used where float norms would lose exactness
template <class S>
S second_moment(const Rv<S>& x) {
    return expectation(x * x);
}

// Gap in the conditional product-of-increments identity on one space:
// conditioning the product of two martingale increments at step k equals
// conditioning the telescoped products at levels k+1 and k.
template <class S>
S increment_product_gap(const Rv<S>& u1, const Rv<S>& u2, const Filtration& f, int k) {
    require(k >= 0 && k + 1 <= f.horizon(), "increment_product_gap: step out of range");
    const Rv<S> a1 = cond_exp(u1, f.at(k + 1)), a0 = cond_exp(u1, f.at(k));
    const Rv<S> b1 = cond_exp(u2, f.at(k + 1)), b0 = cond_exp(u2, f.at(k));
    const Rv<S> lhs = cond_exp((a1 - a0) * (b1 - b0), f.at(k));
    const Rv<S> rhs = cond_exp(a1 * b1 - a0 * b0, f.at(k));
    return max_abs(lhs - rhs);
}

} // namespace mlab

#endif
