#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "mlab/stochastic.hpp"

using namespace mlab;

namespace {

EnsembleConfig small_config() {
    EnsembleConfig cfg;
    cfg.m1 = 16;
    cfg.m2 = 16;
    cfg.steps = 64; // 4 slots of 16
    cfg.t = 1.0;
    cfg.seed = 42;
    return cfg;
}

const BrownianProductEnsemble& small_ens() {
    static BrownianProductEnsemble e(small_config());
    return e;
}

const BrownianProductEnsemble& main_ens() {
    static BrownianProductEnsemble e([] {
        EnsembleConfig cfg;
        cfg.m1 = 256;
        cfg.m2 = 256;
        cfg.steps = 1024;
        cfg.t = 1.0;
        cfg.seed = 2026;
        return cfg;
    }());
    return e;
}

MartingalePairSpec mixed_spec() {
    return MartingalePairSpec{PathFunctional::tanh_terminal, PathFunctional::sign_terminal};
}

} // namespace

TEST_CASE("ensemble construction validates its config") {
    EnsembleConfig cfg = small_config();
    cfg.m1 = 12; // not a power of two
    CHECK_THROWS_AS(BrownianProductEnsemble{cfg}, Error);
    cfg = small_config();
    cfg.steps = 66; // 4 slots cannot split 66 steps evenly
    CHECK_THROWS_AS(BrownianProductEnsemble{cfg}, Error);
    cfg = small_config();
    cfg.t = 0.0;
    CHECK_THROWS_AS(BrownianProductEnsemble{cfg}, Error);
    cfg = small_config();
    cfg.m2 = 1;
    CHECK_THROWS_AS(BrownianProductEnsemble{cfg}, Error);
    cfg = small_config();
    cfg.m1 = 12;
    cfg.mode = PathMode::iid; // iid mode has no power-of-two constraint
    BrownianProductEnsemble ok(cfg);
    CHECK(ok.slots(Axis::first) == 0);
}

TEST_CASE("stratified sign structure is exact across paths") {
    const auto& ens = small_ens();
    const int m = ens.m1();
    // every path starts at zero; the all-minus path mirrors the all-plus one
    for (int i = 0; i < m; ++i) CHECK(ens.a(i, 0) == 0.0);
    for (int s = 0; s <= ens.steps(); ++s) CHECK(ens.a(m - 1, s) == -ens.a(0, s));
    // within the first slot only the top bit matters: 2 distinct prefixes
    CHECK(prefix_partition(ens, Axis::first, 8).block_count() == 2);
    CHECK(prefix_partition(ens, Axis::first, 16).block_count() == 2);
    CHECK(prefix_partition(ens, Axis::first, 17).block_count() == 4);
    CHECK(prefix_partition(ens, Axis::first, 32).block_count() == 4);
    CHECK(prefix_partition(ens, Axis::first, 64).block_count() == 16);
    CHECK(prefix_partition(ens, Axis::first, 0).block_count() == 1);
    CHECK(ens.slot_boundary(Axis::first, 16));
    CHECK(!ens.slot_boundary(Axis::first, 24));
}

TEST_CASE("path families pass the distribution sanity checks") {
    for (Axis axis : {Axis::first, Axis::second}) {
        const PathFamilyStats st = family_stats(small_ens(), axis);
        CHECK(st.mean_sigmas <= 5.0);
        CHECK(st.var_sigmas <= 5.0);
        CHECK(st.corr_sigmas <= 5.0);
        CHECK(st.worst_qv_sigmas <= 5.0);
    }
    EnsembleConfig cfg = small_config();
    cfg.mode = PathMode::iid;
    cfg.m1 = 32;
    cfg.m2 = 32;
    cfg.steps = 256;
    BrownianProductEnsemble iid(cfg);
    for (Axis axis : {Axis::first, Axis::second}) {
        const PathFamilyStats st = family_stats(iid, axis);
        CHECK(st.mean_sigmas <= 5.0);
        CHECK(st.var_sigmas <= 5.0);
        CHECK(st.corr_sigmas <= 5.0);
        CHECK(st.worst_qv_sigmas <= 5.0);
    }
    // continuous increments make the prefix classes collapse to singletons
    CHECK(prefix_partition(iid, Axis::first, 1).block_count() == 32);
}

TEST_CASE("snapshot roundtrip restores the ensemble bit for bit") {
    const auto& ens = small_ens();
    const std::string data = "/tmp/mlab_test_paths.bin";
    const std::string meta = "/tmp/mlab_test_paths.json";
    save_ensemble(ens, data, meta);
    const BrownianProductEnsemble back = load_ensemble(data, meta);
    CHECK(back.config().seed == ens.config().seed);
    CHECK(back.config().mode == ens.config().mode);
    CHECK(back.m1() == ens.m1());
    CHECK(back.steps() == ens.steps());
    CHECK(back.a_raw() == ens.a_raw());
    CHECK(back.b_raw() == ens.b_raw());
    // a truncated data file is rejected
    {
        std::FILE* f = std::fopen(data.c_str(), "wb");
        std::fputs("short", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_ensemble(data, meta), Error);
    {
        std::FILE* f = std::fopen(meta.c_str(), "wb");
        std::fputs("{ not json", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_ensemble(data, meta), Error);
    std::remove(data.c_str());
    std::remove(meta.c_str());
}

TEST_CASE("zero and unit integrands behave as the definitions demand") {
    const auto& ens = small_ens();
    const MartingalePairSpec spec = mixed_spec();
    const TimeGrid grid = dyadic_time_grid(ens.steps(), 4);

    const ElementaryProcess zero = constant_elementary(ens, grid, 0.0);
    CHECK(max_abs(stochastic_integral(ens, spec, zero)) == 0.0);
    CHECK(seminorm(ens, spec, zero) == 0.0);

    const ElementaryProcess unit = constant_elementary(ens, grid, 1.0);
    const Rv<double> telescoped =
        process_x(ens, spec, ens.steps()) * process_y(ens, spec, ens.steps()) -
        process_x(ens, spec, 0) * process_y(ens, spec, 0);
    CHECK(max_abs(stochastic_integral(ens, spec, unit) - telescoped) <= 1e-12);

    // increment orthogonality collapses the unit seminorm to terminal variances
    const double sn = seminorm(ens, spec, unit);
    const double direct =
        std::sqrt(expectation(square(process_x(ens, spec, ens.steps()))) +
                  expectation(square(process_y(ens, spec, ens.steps()))));
    CHECK(std::abs(sn - direct) <= 1e-10);
}

TEST_CASE("two interval integral matches its direct expansion") {
    EnsembleConfig cfg;
    cfg.m1 = 4;
    cfg.m2 = 4;
    cfg.steps = 8; // 2 slots of 4
    cfg.t = 0.5;
    cfg.seed = 7;
    BrownianProductEnsemble ens(cfg);
    const MartingalePairSpec spec = mixed_spec();
    const TimeGrid grid = dyadic_time_grid(8, 2);
    const Integrand fn = [](const PathPrefix& pa, const PathPrefix& pb) {
        return std::cos(pa.last() - pb.last());
    };
    const ElementaryProcess h = make_elementary(ens, grid, fn);
    const Rv<double> got = stochastic_integral(ens, spec, h);
    for (int i = 0; i < 4; ++i) {
        const double u = apply_functional(spec.u, ens.a(i, 8));
        for (int j = 0; j < 4; ++j) {
            const double v = apply_functional(spec.v, ens.b(j, 8));
            auto xy = [&](int s) { return ens.a(i, s) * v * u * ens.b(j, s); };
            const double k0 = std::cos(ens.a(i, 0) - ens.b(j, 0));
            const double k1 = std::cos(ens.a(i, 4) - ens.b(j, 4));
            const double want = k0 * (xy(4) - xy(0)) + k1 * (xy(8) - xy(4));
            CHECK(std::abs(got[ens.index(i, j)] - want) <= 1e-15);
        }
    }
}

TEST_CASE("power of two scaling is exact and the ratio is scale free") {
    const auto& ens = small_ens();
    const MartingalePairSpec spec = mixed_spec();
    const ElementaryProcess h = make_elementary(
        ens, dyadic_time_grid(ens.steps(), 4),
        [](const PathPrefix& pa, const PathPrefix& pb) { return std::sin(pa.last() + pb.last()); });
    const Rv<double> base = stochastic_integral(ens, spec, h);
    for (double c : {2.0, 0.25, -8.0}) {
        const ElementaryProcess hc = scale_elementary(h, c);
        CHECK(max_abs(stochastic_integral(ens, spec, hc) - c * base) == 0.0);
        CHECK(normalized_integral_ratio(ens, spec, hc) == normalized_integral_ratio(ens, spec, h));
    }
}

TEST_CASE("martingale property holds exactly on slot aligned grids") {
    const auto& ens = small_ens();
    CHECK(martingale_mean_gap(ens, dyadic_time_grid(ens.steps(), 4)) <= 1e-12);
    CHECK(slot_aligned(ens, dyadic_time_grid(ens.steps(), 4)));
    CHECK(slot_aligned(ens, dyadic_time_grid(ens.steps(), 2)));
    CHECK(!slot_aligned(ens, dyadic_time_grid(ens.steps(), 8)));
}

TEST_CASE("redundant partition points change nothing") {
    const auto& ens = small_ens();
    const MartingalePairSpec spec = mixed_spec();
    const ElementaryProcess h = make_elementary(
        ens, dyadic_time_grid(ens.steps(), 2),
        [](const PathPrefix& pa, const PathPrefix& pb) {
            return std::tanh(pa.last() * pb.last());
        });
    // slot boundary insert: both gaps at rounding level
    const RepresentationReport aligned = representation_check(ens, spec, h, 16);
    CHECK(aligned.integral_gap <= 1e-12);
    CHECK(aligned.seminorm_gap <= 1e-10);
    // interior insert off the slot grid: the integral identity is algebraic
    const RepresentationReport off = representation_check(ens, spec, h, 24);
    CHECK(off.integral_gap <= 1e-12);
    CHECK_THROWS_AS(insert_point(h, 32), Error); // already a stop
}

TEST_CASE("discrete isometry holds to rounding on aligned grids") {
    const auto& ens = small_ens();
    for (auto spec : {MartingalePairSpec{}, mixed_spec(),
                      MartingalePairSpec{PathFunctional::sign_terminal,
                                         PathFunctional::sign_terminal}}) {
        const ElementaryProcess h = make_elementary(
            ens, dyadic_time_grid(ens.steps(), 4),
            [](const PathPrefix& pa, const PathPrefix& pb) {
                return std::sin(2.0 * pa.last()) * std::cos(pb.last());
            });
        CHECK(integral_isometry_gap(ens, spec, h) <= 1e-10);
    }
}

TEST_CASE("moment stability stays near one for the built in functionals") {
    EnsembleConfig cfg = small_config();
    cfg.steps = 128;
    for (auto f : {PathFunctional::one, PathFunctional::sign_terminal,
                   PathFunctional::tanh_terminal}) {
        const double r = moment_stability(MartingalePairSpec{f, f}, cfg);
        CHECK(r > 0.5);
        CHECK(r < 2.0);
    }
}

TEST_CASE("normalized integral ratio is stable across dyadic refinements") {
    const auto& ens = main_ens();
    const RefinementReport rep = refinement_study(
        ens, mixed_spec(), {4, 8, 16, 32, 64},
        [](const PathPrefix& pa, const PathPrefix& pb) {
            return std::tanh(pa.last() + pb.last());
        });
    REQUIRE(rep.ratios.size() == 5);
    for (double r : rep.ratios) {
        CHECK(std::isfinite(r));
        CHECK(r > 0.0);
    }
    CHECK(rep.spread < 3.0);
}

TEST_CASE("sampled strategies stay under the quantified cap") {
    const auto& ens = main_ens();
    const BoundednessReport rep = boundedness_check(ens, mixed_spec(), 8, 10, 99);
    CHECK(rep.capped);
    CHECK(rep.worst_norm > 0.0);
    CHECK(rep.worst_ratio <= 1.0);
}

TEST_CASE("refining approximations of a clipped path target are cauchy") {
    const auto& ens = main_ens();
    const MartingalePairSpec spec = mixed_spec();
    // Monotone decay needs cross-path averaging. The stratified design
    // reuses one segment shape per slot up to sign, so distances on grids
    // finer than a slot ride on a handful of draws and can jump at an
    // unlucky seed. Independent paths restore the averaging.
    EnsembleConfig ic;
    ic.m1 = 256;
    ic.m2 = 256;
    ic.steps = 1024;
    ic.t = 1.0;
    ic.seed = 2026;
    ic.mode = PathMode::iid;
    const BrownianProductEnsemble iid_ens(ic);
    const CauchyReport rep = cauchy_convergence(iid_ens, spec, {8, 16, 32, 64});
    REQUIRE(rep.distances.size() == 3);
    CHECK(rep.decreasing);
    // the 4 -> 8 pair lives on slot aligned grids, so the transform
    // estimate chain gives a computable cap for its distance
    const CauchyReport aligned = cauchy_convergence(ens, spec, {4, 8});
    const double x4 = lp_norm(process_x(ens, spec, ens.steps()), 4.0);
    const double y4 = lp_norm(process_y(ens, spec, ens.steps()), 4.0);
    Rv<double> sum_dy2 = constant_rv<double>(ens.space(), 0.0);
    const TimeGrid fine = dyadic_time_grid(ens.steps(), 8);
    for (int k = 0; k < 8; ++k) {
        const Rv<double> dy = process_y(ens, spec, fine.stops[k + 1]) -
                              process_y(ens, spec, fine.stops[k]);
        sum_dy2 = sum_dy2 + square(dy);
    }
    const double cap_factor = 1.5 * (x4 + y4) + lp_norm(sqrt_rv(sum_dy2), 4.0);
    CHECK(aligned.distances[0] <=
          aligned.seminorm_distances[0] * cap_factor * (1.0 + 1e-9));
}

TEST_CASE("terminal sign factors make the product visibly non adapted") {
    const NonadaptedReport rep = nonadapted_demo(5, 8);
    CHECK(rep.replicas == 8);
    CHECK(rep.residual_mean > 0.0);
    CHECK(rep.sigma_margin >= 5.0);
    CHECK(rep.adapted_gap == 0.0);
    CHECK(rep.worst_qv_sigmas <= 5.0);
    CHECK(rep.mean_total_variation >= 5.0); // total variation blows up as dt shrinks
}
