#ifndef MLAB_PARAPRODUCT_HPP
#define MLAB_PARAPRODUCT_HPP

// Paraproducts on a two-dimensional dyadic grid. The grid is the uniform
// product of two cyclic axes of side 2^depth, filtered dyadically, so the
// martingale machinery applies directly. Alongside the conditional
// averages E_k there are smoothed projections P_k given by cyclic kernel
// averaging at width 2^(depth-k): a left-aligned box or a centered hat.
// The two paraproducts (conditional and smoothed) differ by two square
// function terms and two boundary terms; the identity is pure summation
// by parts, so it holds for any kernel and exactly in rational mode.

#include <cmath>
#include <cstdlib>
#include <memory>
#include <vector>

#include "mlab/transform.hpp"

namespace mlab {

template <class S>
struct DyadicGrid {
    int depth = 0;
    int side = 1; // 2^depth cells per axis
    std::shared_ptr<const ProductFiltrationPair<S>> pair;

    const SpacePtr<S>& space() const { return pair->product(); }
    int index(int i, int j) const { return pair->index(i, j); }
};

template <class S>
DyadicGrid<S> make_dyadic_grid(int depth) {
    require(depth >= 1 && depth <= 12, "grid: depth out of range");
    const int side = 1 << depth;
    std::vector<Partition> steps;
    for (int k = 0; k <= depth; ++k) {
        std::vector<int> lab(side);
        for (int i = 0; i < side; ++i) lab[i] = i >> (depth - k);
        steps.emplace_back(std::move(lab));
    }
    auto sp = uniform_space<S>(side);
    DyadicGrid<S> g;
    g.depth = depth;
    g.side = side;
    g.pair = std::make_shared<const ProductFiltrationPair<S>>(sp, sp, Filtration(steps),
                                                              Filtration(steps));
    return g;
}

enum class Kernel { box, triangle };

// cyclic kernel weights at width w: box averages the offsets 0..w-1,
// triangle weights offset j by (w-|j|)/w^2 for |j| < w; width 1 is the
// identity for both
template <class S>
std::vector<std::pair<int, S>> kernel_weights(Kernel kind, int w) {
    std::vector<std::pair<int, S>> out;
    if (kind == Kernel::box) {
        for (int j = 0; j < w; ++j) out.emplace_back(j, scalar_traits<S>::ratio(1, w));
    } else {
        for (int j = -(w - 1); j <= w - 1; ++j)
            out.emplace_back(j, scalar_traits<S>::ratio(w - std::abs(j),
                                                        static_cast<long>(w) * w));
    }
    return out;
}

// out(i) = sum_j weight(j) h(i - j), cyclically, along the chosen axis
template <class S>
Rv<S> smooth_projection(const DyadicGrid<S>& g, const Rv<S>& h, Axis axis, int k,
                        Kernel kind) {
    require(k >= 0 && k <= g.depth, "projection: step out of range");
    const int n = g.side;
    const int w = 1 << (g.depth - k);
    const auto wgt = kernel_weights<S>(kind, w);
    std::vector<S> out(static_cast<size_t>(n) * n, S(0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            S acc(0);
            for (const auto& [off, c] : wgt) {
                const int src = ((axis == Axis::first ? i : j) - off % n + n) % n;
                acc += c * (axis == Axis::first ? h[g.index(src, j)] : h[g.index(i, src)]);
            }
            out[g.index(i, j)] = acc;
        }
    }
    return Rv<S>(g.space(), std::move(out));
}

// sum_k E(f|F_k) (E(g|G_{k+1}) - E(g|G_k))
template <class S>
Rv<S> martingale_paraproduct(const DyadicGrid<S>& g, const Rv<S>& f, const Rv<S>& h) {
    Rv<S> acc = S(0) * f;
    for (int k = 0; k < g.depth; ++k)
        acc = acc + g.pair->fiber_cond_exp(f, Axis::first, k) *
                        g.pair->fiber_diff(h, Axis::second, k);
    return acc;
}

// sum_k P_k f (P_{k+1} g - P_k g), both axes smoothed with the same kernel
template <class S>
Rv<S> smooth_paraproduct(const DyadicGrid<S>& g, const Rv<S>& f, const Rv<S>& h,
                         Kernel kind) {
    Rv<S> acc = S(0) * f;
    for (int k = 0; k < g.depth; ++k)
        acc = acc + smooth_projection(g, f, Axis::first, k, kind) *
                        (smooth_projection(g, h, Axis::second, k + 1, kind) -
                         smooth_projection(g, h, Axis::second, k, kind));
    return acc;
}

enum class SquareKind {
    mart, // conditional differences, k = 0..depth-1
    conv, // smoothed differences, k = 0..depth-1
    mixed // smoothed minus conditional at equal step, k = 0..depth
};

// pointwise sum of squares of the chosen difference family
template <class S>
Rv<S> square_function_sq(const DyadicGrid<S>& g, const Rv<S>& h, Axis axis, SquareKind kind,
                         Kernel kernel = Kernel::box) {
    Rv<S> acc = S(0) * h;
    if (kind == SquareKind::mixed) {
        for (int k = 0; k <= g.depth; ++k) {
            const Rv<S> d =
                smooth_projection(g, h, axis, k, kernel) - g.pair->fiber_cond_exp(h, axis, k);
            acc = acc + d * d;
        }
        return acc;
    }
    for (int k = 0; k < g.depth; ++k) {
        const Rv<S> d = kind == SquareKind::mart
                            ? g.pair->fiber_diff(h, axis, k)
                            : smooth_projection(g, h, axis, k + 1, kernel) -
                                  smooth_projection(g, h, axis, k, kernel);
        acc = acc + d * d;
    }
    return acc;
}

template <class S>
struct ParaproductGaps {
    S decomposition_gap{0};    // smoothed minus conditional vs the assembled terms
    S mart_telescope_gap{0};   // constant f: conditional paraproduct telescopes
    S smooth_telescope_gap{0}; // constant f: smoothed paraproduct telescopes
};

template <class S>
ParaproductGaps<S> paraproduct_gaps(const DyadicGrid<S>& g, const Rv<S>& f, const Rv<S>& h,
                                    Kernel kind) {
    const auto& pr = *g.pair;
    const int d = g.depth;
    ParaproductGaps<S> out;

    const Rv<S> big = smooth_paraproduct(g, f, h, kind);
    const Rv<S> small = martingale_paraproduct(g, f, h);

    Rv<S> assembled = S(0) * f;
    for (int k = 0; k < d; ++k) {
        const Rv<S> pf = smooth_projection(g, f, Axis::first, k, kind);
        const Rv<S> ef = pr.fiber_cond_exp(f, Axis::first, k);
        assembled = assembled + (pf - ef) * (smooth_projection(g, h, Axis::second, k + 1, kind) -
                                             smooth_projection(g, h, Axis::second, k, kind));
        assembled = assembled - pr.fiber_diff(f, Axis::first, k) *
                                    (smooth_projection(g, h, Axis::second, k + 1, kind) -
                                     pr.fiber_cond_exp(h, Axis::second, k + 1));
    }
    assembled = assembled + pr.fiber_cond_exp(f, Axis::first, d) *
                                (smooth_projection(g, h, Axis::second, d, kind) -
                                 pr.fiber_cond_exp(h, Axis::second, d));
    assembled = assembled - pr.fiber_cond_exp(f, Axis::first, 0) *
                                (smooth_projection(g, h, Axis::second, 0, kind) -
                                 pr.fiber_cond_exp(h, Axis::second, 0));
    out.decomposition_gap = max_abs(big - small - assembled);

    const Rv<S> one = constant_rv<S>(g.space(), S(1));
    out.mart_telescope_gap =
        max_abs(martingale_paraproduct(g, one, h) -
                (pr.fiber_cond_exp(h, Axis::second, d) - pr.fiber_cond_exp(h, Axis::second, 0)));
    out.smooth_telescope_gap =
        max_abs(smooth_paraproduct(g, one, h, kind) -
                (smooth_projection(g, h, Axis::second, d, kind) -
                 smooth_projection(g, h, Axis::second, 0, kind)));
    return out;
}

// min over grid points of the Cauchy-Schwarz majorant minus the actual
// difference of the two paraproducts
inline double cs_majorant_margin(const DyadicGrid<double>& g, const Rv<double>& f,
                                 const Rv<double>& h, Kernel kind) {
    const auto& pr = *g.pair;
    const int d = g.depth;
    const Rv<double> diff = smooth_paraproduct(g, f, h, kind) - martingale_paraproduct(g, f, h);
    const Rv<double> majorant =
        sqrt_rv(square_function_sq(g, f, Axis::first, SquareKind::mixed, kind)) *
            sqrt_rv(square_function_sq(g, h, Axis::second, SquareKind::conv, kind)) +
        sqrt_rv(square_function_sq(g, f, Axis::first, SquareKind::mart)) *
            sqrt_rv(square_function_sq(g, h, Axis::second, SquareKind::mixed, kind)) +
        abs_rv(pr.fiber_cond_exp(f, Axis::first, d)) *
            abs_rv(smooth_projection(g, h, Axis::second, d, kind) -
                   pr.fiber_cond_exp(h, Axis::second, d)) +
        abs_rv(pr.fiber_cond_exp(f, Axis::first, 0)) *
            abs_rv(smooth_projection(g, h, Axis::second, 0, kind) -
                   pr.fiber_cond_exp(h, Axis::second, 0));
    return min_value(majorant - abs_rv(diff));
}

// || conditional paraproduct ||_{4/3} / (||f||_4 ||g||_2)
inline double twisted_norm_ratio(const DyadicGrid<double>& g, const Rv<double>& f,
                                 const Rv<double>& h) {
    const double den = lp_norm(f, 4.0) * lp_norm(h, 2.0);
    if (den == 0.0) return 0.0;
    return lp_norm(martingale_paraproduct(g, f, h), 4.0 / 3.0) / den;
}

// the same ratio on fixed smooth profiles, comparable across depths
inline double profile_norm_ratio(int depth) {
    auto g = make_dyadic_grid<double>(depth);
    const int n = g.side;
    const double tau = 6.283185307179586476925287;
    std::vector<double> fv(static_cast<size_t>(n) * n), hv(fv.size());
    for (int i = 0; i < n; ++i) {
        const double x = tau * (i + 0.5) / n;
        for (int j = 0; j < n; ++j) {
            const double y = tau * (j + 0.5) / n;
            fv[g.index(i, j)] = std::sin(x) * std::cos(y) + 0.25 * std::cos(x);
            hv[g.index(i, j)] = std::cos(x) * std::sin(2.0 * y) + 0.5 * std::sin(y);
        }
    }
    return twisted_norm_ratio(g, Rv<double>(g.space(), std::move(fv)),
                              Rv<double>(g.space(), std::move(hv)));
}

} // namespace mlab

#endif
