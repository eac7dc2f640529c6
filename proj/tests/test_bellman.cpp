#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlab/bellman.hpp"
#include "mlab/fuzz.hpp"

using namespace mlab;

namespace {

template <class S>
std::shared_ptr<const ProductFiltrationPair<S>> tiny_pair() {
    auto sp = uniform_space<S>(2);
    return std::make_shared<const ProductFiltrationPair<S>>(sp, sp, dyadic_filtration(1),
                                                            dyadic_filtration(1));
}

template <class S>
MartingaleInputs<S> witness_inputs() {
    auto pair = tiny_pair<S>();
    auto sp = pair->product();
    Rv<S> x(sp, {S(2), S(2), S(0), S(0)});
    Rv<S> y(sp, {S(1), S(-1), S(1), S(-1)});
    return make_martingale_inputs(pair, x, y, y);
}

} // namespace

TEST_CASE("gamma and delta, hand values on a 2x2 grid") {
    auto pair = tiny_pair<Rational>();
    Rv<Rational> x(pair->product(), {Rational(1), Rational(2), Rational(3), Rational(4)});
    // step 0 (both margins trivial): avg over i',i'' of (avg_j x(i',j)x(i'',j))^2
    //   = ((5/2)^2 + 2*(11/2)^2 + (25/2)^2)/4 = 223/4
    const Rv<Rational> g0 = gamma_k(*pair, x, x, 0);
    CHECK(g0[0] == Rational(223, 4));
    CHECK(max_abs(g0 - constant_rv<Rational>(pair->product(), Rational(223, 4))) ==
          Rational(0));
    // step 1 (both margins full): the inner averages collapse to x^4
    const Rv<Rational> g1 = gamma_k(*pair, x, x, 1);
    CHECK(g1[0] == Rational(1));
    CHECK(g1[3] == Rational(256));
    // E(gamma_1|H_0) = (1+16+81+256)/4 = 177/2, so the increment is 131/4
    const Rv<Rational> d0 = delta_k(*pair, x, x, 0);
    CHECK(d0[0] == Rational(131, 4));
    CHECK(max_abs(d0 - delta_k_expanded(*pair, x, x, 0)) == Rational(0));
}

TEST_CASE("pairing increment on the witness instance") {
    auto in = witness_inputs<Rational>();
    const Rv<Rational> a0 = alpha_k(in, 0);
    CHECK(a0[0] == Rational(1)); // H_0 is trivial, E(alpha_0) = E((X.Y)_1 Z) = 1
    CHECK(max_abs(a0 - alpha_k_fiber(in, 0)) == Rational(0));
    auto rep = control_chain_check(in);
    CHECK(rep.pairing_sum_gap == Rational(0));
    CHECK(rep.drift_margin >= Rational(0));
    CHECK(rep.telescoping_margin >= Rational(0));

    auto ind = witness_inputs<double>();
    auto repd = control_chain_check(ind);
    CHECK(repd.dual_ratio == doctest::Approx(std::pow(8.0, -0.25)).epsilon(1e-12));
    CHECK(repd.dual_ratio >= 0.5);
}

TEST_CASE("zeta collapses to eta when the variables coincide") {
    Rng rng(777);
    for (int trial = 0; trial < 15; ++trial) {
        auto pair = std::make_shared<const ProductFiltrationPair<Rational>>(
            random_space<Rational>(rng, 3), random_space<Rational>(rng, 4),
            random_filtration(rng, 3, 2), random_filtration(rng, 4, 2));
        Rv<Rational> x = random_rv(rng, pair->product());
        Rv<Rational> y = random_rv(rng, pair->product());
        auto in = make_martingale_inputs(pair, x, y, x); // Z = X
        for (int k = 0; k + 1 <= in.horizon(); ++k)
            CHECK(max_abs(zeta_k(in, k) - eta_k(*pair, x, k)) == Rational(0));
    }
}

TEST_CASE("control chain, exact instances") {
    Rng rng(424242);
    for (int trial = 0; trial < 40; ++trial) {
        auto in = random_inputs<Rational>(rng, rng.uniform_int(2, 4), rng.uniform_int(2, 4),
                                          rng.uniform_int(1, 3));
        auto rep = control_chain_check(in);
        CHECK(rep.alpha_route_gap == Rational(0));
        CHECK(rep.delta_route_gap == Rational(0));
        CHECK(rep.epsilon_identity_gap == Rational(0));
        CHECK(rep.drift_identity_gap == Rational(0));
        CHECK(rep.pairing_sum_gap == Rational(0));
        CHECK(rep.alpha_bound_margin >= Rational(0));
        CHECK(rep.zeta_bound_margin >= Rational(0));
        CHECK(rep.eta_bound_margin >= Rational(0));
        CHECK(rep.drift_margin >= Rational(0));
        CHECK(rep.beta_min >= Rational(0));
        CHECK(rep.size_margin >= Rational(0));
        CHECK(rep.telescoping_margin >= Rational(0));
    }
}

TEST_CASE("control chain, float instances") {
    Rng rng(31337);
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        auto in = random_inputs<double>(rng, rng.uniform_int(2, 5), rng.uniform_int(2, 5),
                                        rng.uniform_int(1, 4));
        auto rep = control_chain_check(in);
        CHECK(rep.alpha_route_gap <= 1e-12);
        CHECK(rep.delta_route_gap <= 1e-12);
        CHECK(rep.epsilon_identity_gap <= 1e-12);
        CHECK(rep.drift_identity_gap <= 1e-12);
        CHECK(rep.pairing_sum_gap <= 1e-12);
        CHECK(rep.drift_margin >= -1e-12);
        CHECK(rep.beta_min >= -1e-12);
        CHECK(rep.size_margin >= -1e-12);
        CHECK(rep.telescoping_margin >= -1e-12);
        worst_ratio = std::max(worst_ratio, rep.dual_ratio);
    }
    CHECK(worst_ratio <= 1.5 + 1e-9);
    CHECK(worst_ratio > 0.05);
}

TEST_CASE("horizon zero degenerates quietly") {
    auto sp = uniform_space<double>(3);
    auto pair = std::make_shared<const ProductFiltrationPair<double>>(
        sp, sp, Filtration({Partition::trivial(3)}), Filtration({Partition::trivial(3)}));
    auto x = constant_rv<double>(pair->product(), 2.0);
    auto in = make_martingale_inputs(pair, x, x, x);
    auto rep = control_chain_check(in);
    CHECK(rep.pairing_sum_gap == 0.0);
    CHECK(rep.beta_min >= 0.0);
    CHECK(rep.size_margin >= -1e-12);
}
