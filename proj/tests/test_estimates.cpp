#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlab/estimates.hpp"
#include "mlab/fuzz.hpp"

using namespace mlab;

namespace {

// uniform 4-point first margin refined in one step, one-point second margin
std::shared_ptr<const ProductFiltrationPair<double>> indicator_pair() {
    auto s1 = uniform_space<double>(4);
    auto s2 = uniform_space<double>(1);
    Filtration f1({Partition::trivial(4), Partition::singletons(4)});
    Filtration f2(std::vector<Partition>(2, Partition::trivial(1)));
    return std::make_shared<const ProductFiltrationPair<double>>(s1, s2, f1, f2);
}

} // namespace

TEST_CASE("exponent triple validation") {
    ExponentTriple e(3.0, 3.0, 1.5);
    CHECK(e.r_dual == doctest::Approx(3.0));
    CHECK_THROWS_AS(ExponentTriple(3.0, 3.0, 1.4), Error);
    CHECK_THROWS_AS(ExponentTriple(2.0, 3.0, 1.2), Error);
    CHECK_THROWS_AS(ExponentTriple(6.0, 6.0, 3.0), Error);
}

TEST_CASE("scan stop") {
    std::vector<double> v{1.0, 5.0, 5.0};
    CHECK(scan_stop(v, 2.0) == 1);
    CHECK(scan_stop(v, 1.0) == 0);
    CHECK(scan_stop(v, 10.0) == 3);
}

TEST_CASE("level sum of an indicator, hand values") {
    auto pair = indicator_pair();
    Rv<double> x(pair->product(), {1.0, 0.0, 0.0, 0.0});
    Process<double> sm;
    for (int k = 0; k <= 1; ++k) sm.push_back(cond_exp(x * x, pair->H(k)));
    CHECK(sm[0][0] == doctest::Approx(0.25));
    CHECK(sm[1][0] == doctest::Approx(1.0));

    // running max takes values 1 and 1/4; levels at and below 1/4 all carry
    // full mass, so the sum is 1/8 / (1 - 1/8) + 1/4 = 11/28
    auto rep = doob_check(sm, x, 3.0);
    CHECK(rep.level_sum == doctest::Approx(11.0 / 28.0).epsilon(1e-12));
    CHECK(rep.majorant == doctest::Approx(11.0 / 28.0).epsilon(1e-12));
    CHECK(rep.measured_constant == doctest::Approx(11.0 / 7.0).epsilon(1e-12));
    CHECK(rep.pointwise_ok);
    CHECK(rep.monotone);
}

TEST_CASE("level family on the indicator chain") {
    auto pair = indicator_pair();
    Rv<double> x(pair->product(), {1.0, 0.0, 0.0, 0.0});
    Process<double> sm;
    for (int k = 0; k <= 1; ++k) sm.push_back(cond_exp(x * x, pair->H(k)));
    auto fam = build_level_family(sm, 1);
    CHECK_FALSE(fam.degenerate);
    CHECK(fam.m_lo == -2);
    REQUIRE(fam.levels() == 4);
    for (int w = 0; w < 4; ++w) {
        CHECK(fam.times[0][w] == 0); // pinned bottom
        CHECK(fam.times[1][w] == 0); // threshold 1/4 passed immediately
        CHECK(fam.times[2][w] == 1); // threshold 1 never passed off the spike
        CHECK(fam.times[3][w] == 1); // pinned top
    }

    Process<double> zero{constant_rv<double>(pair->product(), 0.0),
                         constant_rv<double>(pair->product(), 0.0)};
    auto deg = build_level_family(zero, 1);
    CHECK(deg.degenerate);
    CHECK(deg.levels() == 2);
}

TEST_CASE("window bounds on fuzzed instances") {
    Rng rng(60601);
    for (int trial = 0; trial < 60; ++trial) {
        auto in = random_inputs<double>(rng, rng.uniform_int(2, 5), rng.uniform_int(2, 5),
                                        rng.uniform_int(1, 4));
        auto rep = stopping_check(in);
        CHECK(rep.partition_ok);
        CHECK(rep.stopping_property_gap <= 1e-12);
        CHECK(rep.coverage_gap <= 1e-12);
        CHECK(rep.min_margin_beta >= -1e-10);
        CHECK(rep.min_margin_norm >= -1e-10);
        CHECK(rep.min_margin_cap >= -1e-10);
        CHECK(rep.cap_level_margin >= -1e-10);
        CHECK(rep.triples_checked > 0);
    }
}

TEST_CASE("growth constant is exactly 4 on the uniform dyadic pair") {
    Rng rng(5);
    auto sp = uniform_space<double>(4);
    auto pair = std::make_shared<const ProductFiltrationPair<double>>(
        sp, sp, dyadic_filtration(2), dyadic_filtration(2));
    auto in = make_martingale_inputs(pair, random_rv(rng, pair->product()),
                                     random_rv(rng, pair->product()),
                                     random_rv(rng, pair->product()));
    auto rep = stopping_check(in);
    CHECK(rep.growth_constant == 4.0);
    CHECK(rep.partition_ok);
    CHECK(rep.min_margin_cap >= -1e-10);

    // the growth constant is a pointwise conditional bound: check it on a
    // nonnegative variable directly
    Rv<double> u = abs_rv(random_rv(rng, pair->product()));
    for (int k = 1; k <= pair->horizon(); ++k) {
        const Rv<double> fine = cond_exp(u, pair->H(k));
        const Rv<double> coarse = cond_exp(u, pair->H(k - 1));
        CHECK(min_value(4.0 * coarse - fine) >= -1e-12);
    }
}

TEST_CASE("assembled bound at (3, 3, 3/2)") {
    ExponentTriple e(3.0, 3.0, 1.5);
    Rng rng(909);
    for (int trial = 0; trial < 40; ++trial) {
        auto in = random_inputs<double>(rng, rng.uniform_int(2, 5), rng.uniform_int(2, 5),
                                        rng.uniform_int(2, 4));
        auto rep = full_triple_bound(in, e);
        CHECK(rep.dominated);
        CHECK(rep.subsum_ok);
        CHECK(rep.geometric_ok);
        CHECK(std::isfinite(rep.majorant_ratio));
        CHECK(rep.direct_ratio <= rep.majorant_ratio + 1e-12);
    }
}

TEST_CASE("assembled bound tolerates degenerate variables") {
    CHECK_THROWS_AS(ExponentTriple(4.0, 4.0, 2.0), Error); // r must stay below 2
    auto pair = indicator_pair();
    auto zero = constant_rv<double>(pair->product(), 0.0);
    Rv<double> x(pair->product(), {1.0, 0.0, 0.0, 0.0});
    auto in = make_martingale_inputs(pair, x, zero, x);
    auto rep = full_triple_bound(in, ExponentTriple(3.0, 3.0, 1.5));
    CHECK(rep.direct == 0.0);
    CHECK(rep.majorant == 0.0);
    CHECK(rep.dominated);
    CHECK(rep.direct_ratio == 0.0);
}
