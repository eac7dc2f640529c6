#ifndef MLAB_TRANSFORM_HPP
#define MLAB_TRANSFORM_HPP

// Discrete-time transforms on a filtered product pair. Conventions:
//   process        vector of variables indexed 0..n on one space
//   (u . v)_n      sum_{k=1..n} u_{k-1} (v_k - v_{k-1})
// The inputs bundle carries terminal variables X, Y, Z, the predictable
// weight process K (H_k-measurable, defaults to the constant 1), and the
// derived martingales X_k = E(X|F_k), Y_k = E(Y|G_k).

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "mlab/product.hpp"

namespace mlab {

template <class S>
using Process = std::vector<Rv<S>>;

template <class S>
Rv<S> dot_transform(const Process<S>& u, const Process<S>& v, int n) {
    require(n >= 0, "dot_transform: negative horizon");
    require(static_cast<int>(u.size()) > n - 1 && static_cast<int>(v.size()) > n,
            "dot_transform: horizon exceeds process length");
    require(!v.empty(), "dot_transform: empty process");
    Rv<S> acc = S(0) * v.front(); // zero on the right space
    for (int k = 1; k <= n; ++k) acc = acc + u[k - 1] * (v[k] - v[k - 1]);
    return acc;
}

template <class S>
struct MartingaleInputs {
    std::shared_ptr<const ProductFiltrationPair<S>> pair;
    Rv<S> X, Y, Z;
    Process<S> K;      // 0..n, step k measurable w.r.t. H_k
    Process<S> Xk, Yk; // derived martingales, 0..n

    int horizon() const { return pair->horizon(); }
};

// Builds the bundle and validates: K_k is H_k-measurable and the derived
// processes satisfy the one-step martingale property (exactly in exact mode,
// to 1e-10 in float mode; the property is a consequence of the projections,
// so a violation here means a broken filtration or masses).
template <class S>
MartingaleInputs<S> make_martingale_inputs(
    std::shared_ptr<const ProductFiltrationPair<S>> pair, Rv<S> X, Rv<S> Y, Rv<S> Z,
    Process<S> K = {}) {
    require(pair != nullptr, "inputs: null pair");
    const int n = pair->horizon();
    if (K.empty()) {
        for (int k = 0; k <= n; ++k) K.push_back(constant_rv<S>(pair->product(), S(1)));
    }
    require(static_cast<int>(K.size()) == n + 1, "inputs: weight process length mismatch");

    MartingaleInputs<S> in{std::move(pair), std::move(X), std::move(Y), std::move(Z),
                           std::move(K), {}, {}};
    const auto& pr = *in.pair;
    require(in.X.size() == pr.product()->size() && in.Y.size() == pr.product()->size() &&
                in.Z.size() == pr.product()->size(),
            "inputs: variables must live on the product space");

    const S tol = scalar_traits<S>::exact ? S(0) : S(1e-10);
    for (int k = 0; k <= n; ++k) {
        require(in.K[k].size() == pr.product()->size(), "inputs: weight lives off the space");
        require(measurability_gap(in.K[k], pr.H(k)) <= tol,
                "inputs: weight step not measurable at its time");
        in.Xk.push_back(pr.fiber_cond_exp(in.X, Axis::first, k));
        in.Yk.push_back(pr.fiber_cond_exp(in.Y, Axis::second, k));
    }
    for (int k = 0; k + 1 <= n; ++k) {
        require(max_abs(cond_exp(in.Xk[k + 1], pr.F(k)) - in.Xk[k]) <= tol,
                "inputs: first martingale property failed");
        require(max_abs(cond_exp(in.Yk[k + 1], pr.G(k)) - in.Yk[k]) <= tol,
                "inputs: second martingale property failed");
    }
    return in;
}

namespace detail {
template <class S>
Process<S> pointwise_product(const Process<S>& a, const Process<S>& b) {
    Process<S> out;
    out.reserve(a.size());
    for (size_t k = 0; k < a.size(); ++k) out.push_back(a[k] * b[k]);
    return out;
}
} // namespace detail

// (K X . Y)_n = sum K_{k-1} X_{k-1} (Y_k - Y_{k-1})
template <class S>
Rv<S> weighted_x_dot_y(const MartingaleInputs<S>& in, int n) {
    return dot_transform(detail::pointwise_product(in.K, in.Xk), in.Yk, n);
}

template <class S>
Rv<S> weighted_y_dot_x(const MartingaleInputs<S>& in, int n) {
    return dot_transform(detail::pointwise_product(in.K, in.Yk), in.Xk, n);
}

// transform of the product process, (K . XY)_n = sum K_{k-1} d(X_k Y_k)
template <class S>
Rv<S> product_transform(const MartingaleInputs<S>& in, int n) {
    return dot_transform(in.K, detail::pointwise_product(in.Xk, in.Yk), n);
}

// (K . X)_n or (K . Y)_n
template <class S>
Rv<S> weight_dot_martingale(const MartingaleInputs<S>& in, Axis axis, int n) {
    return dot_transform(in.K, axis == Axis::first ? in.Xk : in.Yk, n);
}

// prefixes (K . M)_0 .. (K . M)_n as a process (a martingale itself)
template <class S>
Process<S> weight_dot_prefixes(const MartingaleInputs<S>& in, Axis axis, int n) {
    const Process<S>& m = axis == Axis::first ? in.Xk : in.Yk;
    Process<S> out{S(0) * m.front()};
    for (int k = 1; k <= n; ++k)
        out.push_back(out.back() + in.K[k - 1] * (m[k] - m[k - 1]));
    return out;
}

// plain (X . Y)_n with unit weights, the object the control process bounds
template <class S>
Rv<S> plain_x_dot_y(const MartingaleInputs<S>& in, int n) {
    return dot_transform(in.Xk, in.Yk, n);
}

// max-abs residual of the product rule
// (K . XY)_n - (K X . Y)_n - (K Y . X)_n - sum K_{k-1} dX_k dY_k
template <class S>
S splitting_residual(const MartingaleInputs<S>& in, int n) {
    Rv<S> acc = product_transform(in, n) - weighted_x_dot_y(in, n) - weighted_y_dot_x(in, n);
    for (int k = 1; k <= n; ++k)
        acc = acc - in.K[k - 1] * (in.Xk[k] - in.Xk[k - 1]) * (in.Yk[k] - in.Yk[k - 1]);
    return max_abs(acc);
}

// | E (K.M)_n^2 - E sum K_{k-1}^2 (dM_k)^2 |, the energy identity for the
// weighted transform; holds because K_{k-1} is measurable one step earlier
template <class S>
S isometry_gap(const MartingaleInputs<S>& in, Axis axis, int n) {
    const Rv<S> t = weight_dot_martingale(in, axis, n);
    S rhs(0);
    const Process<S>& m = axis == Axis::first ? in.Xk : in.Yk;
    for (int k = 1; k <= n; ++k) {
        const Rv<S> d = in.K[k - 1] * (m[k] - m[k - 1]);
        rhs += expectation(d * d);
    }
    const S lhs = expectation(t * t);
    return abs_val(S(lhs - rhs));
}

template <class S>
Rv<S> burkholder_transform(const Process<S>& K, const Process<S>& M, int n) {
    return dot_transform(K, M, n);
}

// || (K.M)_n ||_q / (max_k ||K_k||_inf ||M_n||_q); 0 when the base norm is 0
template <class S>
double burkholder_ratio(const Process<S>& K, const Process<S>& M, int n, double q) {
    require(n >= 1, "burkholder_ratio: needs at least one step");
    const double num = lp_norm(burkholder_transform(K, M, n), q);
    double kmax = 0.0;
    for (int k = 0; k <= n - 1; ++k)
        kmax = std::max(kmax, lp_norm(K[k], std::numeric_limits<double>::infinity()));
    const double den = kmax * lp_norm(M[n], q);
    return den > 0.0 ? num / den : 0.0;
}

// Smallest constant A with E(U|H_{k+1}) <= A E(U|H_k) pointwise for U >= 0:
// the worst parent-to-child atom mass ratio along the H chain. Horizon 0
// gives 1. Uniform two-axis dyadic refinement gives exactly 4.
template <class S>
S uniform_growth_constant(const ProductFiltrationPair<S>& pair) {
    S best(1);
    const auto& masses = pair.product()->masses();
    const int n = pair.horizon();
    for (int k = 0; k + 1 <= n; ++k) {
        const Partition& parent = pair.H(k);
        std::vector<S> pmass(parent.block_count(), S(0));
        for (int i = 0; i < parent.size(); ++i) pmass[parent.block_of(i)] += masses[i];
        for (const auto& blk : pair.H(k + 1).blocks()) {
            S cmass(0);
            for (int i : blk) cmass += masses[i];
            const S ratio = pmass[parent.block_of(blk.front())] / cmass;
            best = std::max(best, ratio);
        }
    }
    return best;
}

struct TransformRatios {
    double cross_lhs = 0, cross_rhs = 0, cross_ratio = 0;
    double product_lhs = 0, product_rhs = 0, product_ratio = 0;
};

// Norm ratios for the weighted transforms at exponents (4/3, 4, 2). The
// cross ratio is the quantified one (bounded by 3/2); the product ratio is
// recorded for tables only.
template <class S>
TransformRatios transform_norm_ratios(const MartingaleInputs<S>& in, int n) {
    TransformRatios r;
    const double p43 = 4.0 / 3.0;
    const double x4 = lp_norm(in.Xk[n], 4.0);
    const double y4 = lp_norm(in.Yk[n], 4.0);
    const double ky2 = lp_norm(weight_dot_martingale(in, Axis::second, n), 2.0);
    const double kx2 = lp_norm(weight_dot_martingale(in, Axis::first, n), 2.0);
    r.cross_lhs = lp_norm(weighted_x_dot_y(in, n), p43);
    r.cross_rhs = x4 * ky2;
    r.cross_ratio = r.cross_rhs > 0 ? r.cross_lhs / r.cross_rhs : 0.0;
    r.product_lhs = lp_norm(product_transform(in, n), p43);
    r.product_rhs = x4 * ky2 + y4 * kx2;
    r.product_ratio = r.product_rhs > 0 ? r.product_lhs / r.product_rhs : 0.0;
    return r;
}

} // namespace mlab

#endif
