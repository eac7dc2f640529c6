#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlab/fuzz.hpp"
#include "mlab/paraproduct.hpp"

using namespace mlab;

namespace {

// indicator of column j = 0 resp. row i = 0
template <class S>
Rv<S> spike(const DyadicGrid<S>& g, Axis axis) {
    std::vector<S> v(static_cast<size_t>(g.side) * g.side, S(0));
    for (int t = 0; t < g.side; ++t)
        v[axis == Axis::first ? g.index(0, t) : g.index(t, 0)] = S(1);
    return Rv<S>(g.space(), std::move(v));
}

} // namespace

TEST_CASE("kernel weights sum to one, width one is the identity") {
    for (int w : {1, 2, 4, 8}) {
        for (Kernel kind : {Kernel::box, Kernel::triangle}) {
            Rational total(0);
            for (const auto& [off, c] : kernel_weights<Rational>(kind, w)) {
                (void)off;
                total += c;
            }
            CHECK(total == Rational(1));
        }
    }
    auto g = make_dyadic_grid<Rational>(2);
    Rng rng(11);
    const Rv<Rational> h = random_rv<Rational>(rng, g.space());
    for (Kernel kind : {Kernel::box, Kernel::triangle}) {
        CHECK(max_abs(smooth_projection(g, h, Axis::first, g.depth, kind) - h) == Rational(0));
        CHECK(max_abs(smooth_projection(g, h, Axis::second, g.depth, kind) - h) == Rational(0));
    }
}

TEST_CASE("spike profiles on eight cells match the hand values") {
    auto g = make_dyadic_grid<Rational>(3);
    // width 4 at step 1; triangle spreads the spike as a centered hat,
    // the box drags it to the right
    const Rv<Rational> tri = smooth_projection(g, spike(g, Axis::second), Axis::second, 1,
                                               Kernel::triangle);
    const Rv<Rational> box = smooth_projection(g, spike(g, Axis::second), Axis::second, 1,
                                               Kernel::box);
    const int hat[8] = {4, 3, 2, 1, 0, 1, 2, 3};
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            CHECK(tri[g.index(i, j)] == Rational(hat[j], 16));
            CHECK(box[g.index(i, j)] == (j < 4 ? Rational(1, 4) : Rational(0)));
        }
    }
    // same along the first axis
    const Rv<Rational> tri1 = smooth_projection(g, spike(g, Axis::first), Axis::first, 1,
                                                Kernel::triangle);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) CHECK(tri1[g.index(i, j)] == Rational(hat[i], 16));
}

TEST_CASE("full width box projection is the plain conditional average") {
    auto g = make_dyadic_grid<Rational>(2);
    Rng rng(23);
    const Rv<Rational> h = random_rv<Rational>(rng, g.space());
    for (Axis axis : {Axis::first, Axis::second})
        CHECK(max_abs(smooth_projection(g, h, axis, 0, Kernel::box) -
                      g.pair->fiber_cond_exp(h, axis, 0)) == Rational(0));
}

TEST_CASE("conditional paraproduct, hand value on a 2x2 grid") {
    auto g = make_dyadic_grid<Rational>(1);
    Rv<Rational> f(g.space(), {Rational(1), Rational(2), Rational(3), Rational(4)});
    Rv<Rational> h(g.space(), {Rational(5), Rational(-1), Rational(2), Rational(0)});
    // E(f|F_0) = (2,3,2,3), g - E(g|G_0) = (3,-3,1,-1)
    const Rv<Rational> t = martingale_paraproduct(g, f, h);
    CHECK(t[g.index(0, 0)] == Rational(6));
    CHECK(t[g.index(0, 1)] == Rational(-9));
    CHECK(t[g.index(1, 0)] == Rational(2));
    CHECK(t[g.index(1, 1)] == Rational(-3));
}

TEST_CASE("haar input gives a flat martingale square function") {
    auto g = make_dyadic_grid<Rational>(1);
    Rv<Rational> f(g.space(), {Rational(1), Rational(1), Rational(-1), Rational(-1)});
    const Rv<Rational> sq = square_function_sq(g, f, Axis::first, SquareKind::mart);
    CHECK(max_abs(sq - constant_rv<Rational>(g.space(), Rational(1))) == Rational(0));
}

TEST_CASE("constant first argument telescopes exactly") {
    for (int depth : {2, 3}) {
        auto g = make_dyadic_grid<Rational>(depth);
        Rng rng(100 + depth);
        const Rv<Rational> h = random_rv<Rational>(rng, g.space());
        const Rv<Rational> f = random_rv<Rational>(rng, g.space());
        for (Kernel kind : {Kernel::box, Kernel::triangle}) {
            const auto gaps = paraproduct_gaps(g, f, h, kind);
            CHECK(gaps.mart_telescope_gap == Rational(0));
            CHECK(gaps.smooth_telescope_gap == Rational(0));
        }
        // at full depth the conditional average is the identity, so the
        // telescoped value is g minus its marginal average
        const Rv<Rational> one = constant_rv<Rational>(g.space(), Rational(1));
        CHECK(max_abs(martingale_paraproduct(g, one, h) -
                      (h - g.pair->fiber_cond_exp(h, Axis::second, 0))) == Rational(0));
    }
}

TEST_CASE("difference decomposition is exact in rational arithmetic") {
    for (int depth : {2, 3}) {
        for (int trial = 0; trial < 6; ++trial) {
            Rng rng(mix_seed(7, depth, trial));
            auto g = make_dyadic_grid<Rational>(depth);
            const Rv<Rational> f = random_rv<Rational>(rng, g.space());
            const Rv<Rational> h = random_rv<Rational>(rng, g.space());
            for (Kernel kind : {Kernel::box, Kernel::triangle})
                CHECK(paraproduct_gaps(g, f, h, kind).decomposition_gap == Rational(0));
        }
    }
}

TEST_CASE("difference decomposition stays at rounding level in doubles") {
    double worst = 0.0;
    for (int depth : {3, 4}) {
        const int trials = depth == 3 ? 20 : 5;
        for (int trial = 0; trial < trials; ++trial) {
            Rng rng(mix_seed(8, depth, trial));
            auto g = make_dyadic_grid<double>(depth);
            const Rv<double> f = random_rv<double>(rng, g.space());
            const Rv<double> h = random_rv<double>(rng, g.space());
            for (Kernel kind : {Kernel::box, Kernel::triangle}) {
                const auto gaps = paraproduct_gaps(g, f, h, kind);
                worst = std::max(worst, gaps.decomposition_gap);
                worst = std::max(worst, gaps.mart_telescope_gap);
                worst = std::max(worst, gaps.smooth_telescope_gap);
            }
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("majorant dominates the paraproduct difference pointwise") {
    for (int depth : {3, 4}) {
        const int trials = depth == 3 ? 15 : 5;
        for (int trial = 0; trial < trials; ++trial) {
            Rng rng(mix_seed(9, depth, trial));
            auto g = make_dyadic_grid<double>(depth);
            const Rv<double> f = random_rv<double>(rng, g.space());
            const Rv<double> h = random_rv<double>(rng, g.space());
            for (Kernel kind : {Kernel::box, Kernel::triangle})
                CHECK(cs_majorant_margin(g, f, h, kind) >= -1e-12);
        }
    }
}

TEST_CASE("twisted ratio stays under the transform constant") {
    double best = 0.0;
    for (int depth = 2; depth <= 4; ++depth) {
        for (int trial = 0; trial < 12; ++trial) {
            Rng rng(mix_seed(10, depth, trial));
            auto g = make_dyadic_grid<double>(depth);
            const Rv<double> f = random_rv<double>(rng, g.space());
            const Rv<double> h = random_rv<double>(rng, g.space());
            const double r = twisted_norm_ratio(g, f, h);
            CHECK(r <= 1.5 + 1e-9);
            best = std::max(best, r);
        }
    }
    CHECK(best > 0.1);
}

TEST_CASE("profile ratio stabilizes with depth") {
    double r[7];
    for (int depth = 3; depth <= 6; ++depth) {
        r[depth] = profile_norm_ratio(depth);
        CHECK(std::isfinite(r[depth]));
        CHECK(r[depth] > 0.0);
    }
    CHECK(std::abs(r[6] - r[5]) < 0.2 * r[5]);
}
