#ifndef MLAB_BELLMAN_HPP
#define MLAB_BELLMAN_HPP

// Control quantities for the pairing E((X.Y)_n Z) on a filtered product
// pair, in the style of a discrete Bellman-function argument: a nonnegative
// control sequence beta_k whose conditional drift dominates the pairing
// increment alpha_k pointwise. Everything here is an atomwise finite sum,
// so in exact mode every identity below is checked to literal zero.
//
// Margin conventions: X generates a martingale on the first axis, Y on the
// second, Z is an arbitrary variable on the product. All outputs are
// constant on H_k atoms (A_k-block x B_k-block rectangles).

#include <optional>
#include <vector>

#include "mlab/transform.hpp"

namespace mlab {

namespace detail {

// step-(k+1) margin blocks grouped under their step-k parents
inline std::vector<std::vector<int>> child_blocks(const Partition& fine,
                                                  const Partition& coarse) {
    std::vector<std::vector<int>> out(coarse.block_count());
    const auto fb = fine.blocks();
    for (size_t f = 0; f < fb.size(); ++f)
        out[coarse.block_of(fb[f].front())].push_back(static_cast<int>(f));
    return out;
}

} // namespace detail

// gamma_k(v, w): on the atom a x b the average over ordered pairs
// i', i'' in a (conditional first-margin weights) of the square of
// avg_{j in b} v(i',j) w(i'',j) (conditional second-margin weights).
// Symmetric in (v, w). By Cauchy-Schwarz gamma_k(v,v) <= E(v^2|H_k)^2.
template <class S>
Rv<S> gamma_k(const ProductFiltrationPair<S>& pr, const Rv<S>& v, const Rv<S>& w, int k) {
    const auto& A = pr.a_blocks(k);
    const auto& B = pr.b_blocks(k);
    std::vector<S> out(static_cast<size_t>(pr.size1()) * pr.size2());
    for (size_t ba = 0; ba < A.members.size(); ++ba) {
        const auto& ma = A.members[ba];
        for (size_t bb = 0; bb < B.members.size(); ++bb) {
            const auto& mb = B.members[bb];
            S acc(0);
            for (int i1 : ma) {
                for (int i2 : ma) {
                    S inner(0);
                    for (int j : mb)
                        inner += pr.space2()->mass(j) * v[pr.index(i1, j)] * w[pr.index(i2, j)];
                    inner /= B.mass[bb];
                    acc += pr.space1()->mass(i1) * pr.space1()->mass(i2) * inner * inner;
                }
            }
            acc /= A.mass[ba] * A.mass[ba];
            for (int i : ma)
                for (int j : mb) out[pr.index(i, j)] = acc;
        }
    }
    return Rv<S>(pr.product(), std::move(out));
}

// control sequence
// beta_k = E(Y_k^2|H_k)/2 + gamma_k(X,Z)/2 + gamma_k(X,X)/4 + gamma_k(Z,Z)/4
template <class S>
Rv<S> beta_k(const MartingaleInputs<S>& in, int k) {
    const auto& pr = *in.pair;
    const S half = scalar_traits<S>::ratio(1, 2);
    const S quarter = scalar_traits<S>::ratio(1, 4);
    return half * cond_exp(in.Yk[k] * in.Yk[k], pr.H(k)) +
           half * gamma_k(pr, in.X, in.Z, k) +
           quarter * gamma_k(pr, in.X, in.X, k) + quarter * gamma_k(pr, in.Z, in.Z, k);
}

// pairing increment: alpha_k = E(dY_{k+1} (E(X_k Z|G_{k+1}) - E(X_k Z|G_k)) | H_k).
// Summing expectations over k recovers E((X.Y)_n Z) because dY_{k+1} is
// orthogonal to G_k.
template <class S>
Rv<S> alpha_k(const MartingaleInputs<S>& in, int k) {
    const auto& pr = *in.pair;
    const Rv<S> dy = in.Yk[k + 1] - in.Yk[k];
    const Rv<S> dxz = pr.fiber_diff(in.Xk[k] * in.Z, Axis::second, k);
    return cond_exp(dy * dxz, pr.H(k));
}

// Same quantity assembled from single-margin fibers: a triple average over
// i' (the Z fiber), i'' (the X fiber) and j of
//   dY(j) * [ (second-margin fiber difference of j" -> X(i'',j") Z(i',j"))(j) ].
template <class S>
Rv<S> alpha_k_fiber(const MartingaleInputs<S>& in, int k) {
    const auto& pr = *in.pair;
    const auto& A = pr.a_blocks(k);
    const auto& B = pr.b_blocks(k);
    const Partition& bfine = pr.filt2().at(k + 1);
    const auto& Bn = pr.b_blocks(k + 1);
    const Rv<S> dy = in.Yk[k + 1] - in.Yk[k];
    std::vector<S> out(static_cast<size_t>(pr.size1()) * pr.size2());
    for (size_t ba = 0; ba < A.members.size(); ++ba) {
        const auto& ma = A.members[ba];
        for (size_t bb = 0; bb < B.members.size(); ++bb) {
            const auto& mb = B.members[bb];
            S acc(0);
            for (int i1 : ma) {   // Z fiber
                for (int i2 : ma) { // X fiber
                    // coarse average of f(j") = X(i2,j") Z(i1,j") over b
                    S coarse(0);
                    for (int j : mb)
                        coarse += pr.space2()->mass(j) * in.X[pr.index(i2, j)] *
                                  in.Z[pr.index(i1, j)];
                    coarse /= B.mass[bb];
                    for (int j : mb) {
                        const int child = bfine.block_of(j);
                        S fine(0);
                        for (int j2 : Bn.members[child])
                            fine += pr.space2()->mass(j2) * in.X[pr.index(i2, j2)] *
                                    in.Z[pr.index(i1, j2)];
                        fine /= Bn.mass[child];
                        acc += pr.space1()->mass(i1) * pr.space1()->mass(i2) *
                               pr.space2()->mass(j) * dy[pr.index(i1, j)] * (fine - coarse);
                    }
                }
            }
            acc /= A.mass[ba] * A.mass[ba] * B.mass[bb];
            for (int i : ma)
                for (int j : mb) out[pr.index(i, j)] = acc;
        }
    }
    return Rv<S>(pr.product(), std::move(out));
}

// epsilon_k: the same triple average with the squared fiber difference in
// place of dY times the difference; the quadratic term in the pointwise
// bound 2|alpha_k| <= E(dY^2|H_k) + epsilon_k.
template <class S>
Rv<S> epsilon_k(const MartingaleInputs<S>& in, int k) {
    const auto& pr = *in.pair;
    const auto& A = pr.a_blocks(k);
    const auto& B = pr.b_blocks(k);
    const Partition& bfine = pr.filt2().at(k + 1);
    const auto& Bn = pr.b_blocks(k + 1);
    std::vector<S> out(static_cast<size_t>(pr.size1()) * pr.size2());
    for (size_t ba = 0; ba < A.members.size(); ++ba) {
        const auto& ma = A.members[ba];
        for (size_t bb = 0; bb < B.members.size(); ++bb) {
            const auto& mb = B.members[bb];
            S acc(0);
            for (int i1 : ma) {
                for (int i2 : ma) {
                    S coarse(0);
                    for (int j : mb)
                        coarse += pr.space2()->mass(j) * in.X[pr.index(i2, j)] *
                                  in.Z[pr.index(i1, j)];
                    coarse /= B.mass[bb];
                    for (int j : mb) {
                        const int child = bfine.block_of(j);
                        S fine(0);
                        for (int j2 : Bn.members[child])
                            fine += pr.space2()->mass(j2) * in.X[pr.index(i2, j2)] *
                                    in.Z[pr.index(i1, j2)];
                        fine /= Bn.mass[child];
                        const S d = fine - coarse;
                        acc += pr.space1()->mass(i1) * pr.space1()->mass(i2) *
                               pr.space2()->mass(j) * d * d;
                    }
                }
            }
            acc /= A.mass[ba] * A.mass[ba] * B.mass[bb];
            for (int i : ma)
                for (int j : mb) out[pr.index(i, j)] = acc;
        }
    }
    return Rv<S>(pr.product(), std::move(out));
}

// conditional increment of gamma: delta_k(v,w) = E(gamma_{k+1}(v,w)|H_k) - gamma_k(v,w)
template <class S>
Rv<S> delta_k(const ProductFiltrationPair<S>& pr, const Rv<S>& v, const Rv<S>& w, int k) {
    return cond_exp(gamma_k(pr, v, w, k + 1), pr.H(k)) - gamma_k(pr, v, w, k);
}

// the same increment assembled in one pass from child-block sums, used to
// cross-check delta_k through an independent code path
template <class S>
Rv<S> delta_k_expanded(const ProductFiltrationPair<S>& pr, const Rv<S>& v, const Rv<S>& w,
                       int k) {
    const auto& A = pr.a_blocks(k);
    const auto& B = pr.b_blocks(k);
    const auto& An = pr.a_blocks(k + 1);
    const auto& Bn = pr.b_blocks(k + 1);
    const auto achild = detail::child_blocks(pr.filt1().at(k + 1), pr.filt1().at(k));
    const auto bchild = detail::child_blocks(pr.filt2().at(k + 1), pr.filt2().at(k));
    std::vector<S> out(static_cast<size_t>(pr.size1()) * pr.size2());
    for (size_t ba = 0; ba < A.members.size(); ++ba) {
        const auto& ma = A.members[ba];
        for (size_t bb = 0; bb < B.members.size(); ++bb) {
            const auto& mb = B.members[bb];
            S fine_part(0);
            for (int ca : achild[ba]) {
                for (int cb : bchild[bb]) {
                    S acc(0);
                    for (int i1 : An.members[ca]) {
                        for (int i2 : An.members[ca]) {
                            S inner(0);
                            for (int j : Bn.members[cb])
                                inner += pr.space2()->mass(j) * v[pr.index(i1, j)] *
                                         w[pr.index(i2, j)];
                            inner /= Bn.mass[cb];
                            acc += pr.space1()->mass(i1) * pr.space1()->mass(i2) * inner *
                                   inner;
                        }
                    }
                    acc /= An.mass[ca] * An.mass[ca];
                    fine_part += (An.mass[ca] / A.mass[ba]) * (Bn.mass[cb] / B.mass[bb]) * acc;
                }
            }
            S coarse(0);
            for (int i1 : ma) {
                for (int i2 : ma) {
                    S inner(0);
                    for (int j : mb)
                        inner += pr.space2()->mass(j) * v[pr.index(i1, j)] * w[pr.index(i2, j)];
                    inner /= B.mass[bb];
                    coarse += pr.space1()->mass(i1) * pr.space1()->mass(i2) * inner * inner;
                }
            }
            coarse /= A.mass[ba] * A.mass[ba];
            const S val = fine_part - coarse;
            for (int i : ma)
                for (int j : mb) out[pr.index(i, j)] = val;
        }
    }
    return Rv<S>(pr.product(), std::move(out));
}

// zeta_k: the correction in epsilon_k = delta_k(X,Z) - zeta_k. On each atom,
// an average over second-margin children b', pairs j'', j''' in b', of
//   avg_{i in a} [D_A(X(.,j'')X(.,j'''))(i)] [D_A(Z(.,j'')Z(.,j'''))(i)]
// where D_A is the first-margin fiber difference between steps k+1 and k.
template <class S>
Rv<S> zeta_k(const MartingaleInputs<S>& in, int k) {
    const auto& pr = *in.pair;
    const auto& A = pr.a_blocks(k);
    const auto& B = pr.b_blocks(k);
    const auto& An = pr.a_blocks(k + 1);
    const auto& Bn = pr.b_blocks(k + 1);
    const Partition& afine = pr.filt1().at(k + 1);
    const auto bchild = detail::child_blocks(pr.filt2().at(k + 1), pr.filt2().at(k));
    std::vector<S> out(static_cast<size_t>(pr.size1()) * pr.size2());
    for (size_t ba = 0; ba < A.members.size(); ++ba) {
        const auto& ma = A.members[ba];
        for (size_t bb = 0; bb < B.members.size(); ++bb) {
            S acc(0);
            for (int cb : bchild[bb]) {
                const auto& mbf = Bn.members[cb];
                S pairsum(0);
                for (int j1 : mbf) {
                    for (int j2 : mbf) {
                        // first-margin functions i -> X(i,j1)X(i,j2), i -> Z(i,j1)Z(i,j2)
                        S coarse_x(0), coarse_z(0);
                        for (int i : ma) {
                            coarse_x += pr.space1()->mass(i) * in.X[pr.index(i, j1)] *
                                        in.X[pr.index(i, j2)];
                            coarse_z += pr.space1()->mass(i) * in.Z[pr.index(i, j1)] *
                                        in.Z[pr.index(i, j2)];
                        }
                        coarse_x /= A.mass[ba];
                        coarse_z /= A.mass[ba];
                        S wsum(0);
                        for (int i : ma) {
                            const int ca = afine.block_of(i);
                            S fine_x(0), fine_z(0);
                            for (int i2 : An.members[ca]) {
                                fine_x += pr.space1()->mass(i2) * in.X[pr.index(i2, j1)] *
                                          in.X[pr.index(i2, j2)];
                                fine_z += pr.space1()->mass(i2) * in.Z[pr.index(i2, j1)] *
                                          in.Z[pr.index(i2, j2)];
                            }
                            fine_x /= An.mass[ca];
                            fine_z /= An.mass[ca];
                            wsum += pr.space1()->mass(i) * (fine_x - coarse_x) *
                                    (fine_z - coarse_z);
                        }
                        wsum /= A.mass[ba];
                        pairsum += pr.space2()->mass(j1) * pr.space2()->mass(j2) * wsum;
                    }
                }
                pairsum /= Bn.mass[cb] * Bn.mass[cb];
                acc += (Bn.mass[cb] / B.mass[bb]) * pairsum;
            }
            for (int i : ma)
                for (int j : B.members[bb]) out[pr.index(i, j)] = acc;
        }
    }
    return Rv<S>(pr.product(), std::move(out));
}

// eta_k(v): the diagonal version of zeta with both factors built from v,
// so each term is a square; satisfies |zeta_k| <= (eta_k(X) + eta_k(Z))/2
// and eta_k(v) <= delta_k(v,v).
template <class S>
Rv<S> eta_k(const ProductFiltrationPair<S>& pr, const Rv<S>& v, int k) {
    const auto& A = pr.a_blocks(k);
    const auto& B = pr.b_blocks(k);
    const auto& An = pr.a_blocks(k + 1);
    const auto& Bn = pr.b_blocks(k + 1);
    const Partition& afine = pr.filt1().at(k + 1);
    const auto bchild = detail::child_blocks(pr.filt2().at(k + 1), pr.filt2().at(k));
    std::vector<S> out(static_cast<size_t>(pr.size1()) * pr.size2());
    for (size_t ba = 0; ba < A.members.size(); ++ba) {
        const auto& ma = A.members[ba];
        for (size_t bb = 0; bb < B.members.size(); ++bb) {
            S acc(0);
            for (int cb : bchild[bb]) {
                const auto& mbf = Bn.members[cb];
                S pairsum(0);
                for (int j1 : mbf) {
                    for (int j2 : mbf) {
                        S coarse_v(0);
                        for (int i : ma)
                            coarse_v += pr.space1()->mass(i) * v[pr.index(i, j1)] *
                                        v[pr.index(i, j2)];
                        coarse_v /= A.mass[ba];
                        S wsum(0);
                        for (int i : ma) {
                            const int ca = afine.block_of(i);
                            S fine_v(0);
                            for (int i2 : An.members[ca])
                                fine_v += pr.space1()->mass(i2) * v[pr.index(i2, j1)] *
                                          v[pr.index(i2, j2)];
                            fine_v /= An.mass[ca];
                            const S d = fine_v - coarse_v;
                            wsum += pr.space1()->mass(i) * d * d;
                        }
                        wsum /= A.mass[ba];
                        pairsum += pr.space2()->mass(j1) * pr.space2()->mass(j2) * wsum;
                    }
                }
                pairsum /= Bn.mass[cb] * Bn.mass[cb];
                acc += (Bn.mass[cb] / B.mass[bb]) * pairsum;
            }
            for (int i : ma)
                for (int j : B.members[bb]) out[pr.index(i, j)] = acc;
        }
    }
    return Rv<S>(pr.product(), std::move(out));
}

// Everything the randomized control suite asserts about one instance.
// Gaps are expected to vanish; margins are expected nonnegative.
template <class S>
struct ControlChainReport {
    S alpha_route_gap{0};      // direct alpha vs fiber-assembled alpha
    S delta_route_gap{0};      // delta vs its expanded form, three variable pairs
    S epsilon_identity_gap{0}; // epsilon - (delta(X,Z) - zeta)
    S drift_identity_gap{0};   // E(beta_{k+1}-beta_k|H_k) vs its closed form
    S pairing_sum_gap{0};      // E((X.Y)_n Z) vs sum of E(alpha_k)
    S alpha_bound_margin{0};   // E(dY^2|H)/2 + eps/2 - |alpha|
    S zeta_bound_margin{0};    // eta(X)/2 + eta(Z)/2 - |zeta|
    S eta_bound_margin{0};     // delta(v,v) - eta(v)
    S drift_margin{0};         // E(beta_{k+1}|H_k) - beta_k - |alpha_k|
    S beta_min{0};             // smallest beta value seen
    S size_margin{0};          // E(X^2|H)^2/2 + E(Y^2|H)/2 + E(Z^2|H)^2/2 - beta
    S telescoping_margin{0};   // E(beta_n) - E(beta_0) - sum E|alpha_k|
    double dual_ratio = 0;     // |E((X.Y)_n Z)| / (||X||_4 ||Y||_2 ||Z||_4)
};

template <class S>
ControlChainReport<S> control_chain_check(const MartingaleInputs<S>& in) {
    const auto& pr = *in.pair;
    const int n = in.horizon();
    const S half = scalar_traits<S>::ratio(1, 2);
    const S quarter = scalar_traits<S>::ratio(1, 4);

    ControlChainReport<S> rep;
    std::optional<S> drift_m, alpha_m, zeta_m, eta_m, beta_m, size_m;
    auto see_min = [](std::optional<S>& slot, const S& v) {
        if (!slot || v < *slot) slot = v;
    };

    S sum_alpha(0), sum_abs_alpha(0);
    std::vector<Rv<S>> betas;
    for (int k = 0; k <= n; ++k) betas.push_back(beta_k(in, k));

    for (int k = 0; k + 1 <= n; ++k) {
        const Rv<S> a_direct = alpha_k(in, k);
        const Rv<S> a_fiber = alpha_k_fiber(in, k);
        rep.alpha_route_gap = std::max(rep.alpha_route_gap, max_abs(a_direct - a_fiber));

        const Rv<S> dxz = delta_k(pr, in.X, in.Z, k);
        const Rv<S> dxx = delta_k(pr, in.X, in.X, k);
        const Rv<S> dzz = delta_k(pr, in.Z, in.Z, k);
        rep.delta_route_gap = std::max(
            {rep.delta_route_gap, max_abs(dxz - delta_k_expanded(pr, in.X, in.Z, k)),
             max_abs(dxx - delta_k_expanded(pr, in.X, in.X, k)),
             max_abs(dzz - delta_k_expanded(pr, in.Z, in.Z, k))});

        const Rv<S> eps = epsilon_k(in, k);
        const Rv<S> zet = zeta_k(in, k);
        const Rv<S> eta_x = eta_k(pr, in.X, k);
        const Rv<S> eta_z = eta_k(pr, in.Z, k);
        rep.epsilon_identity_gap =
            std::max(rep.epsilon_identity_gap, max_abs(eps - (dxz - zet)));
        see_min(zeta_m, min_value(half * eta_x + half * eta_z - abs_rv(zet)));
        see_min(eta_m, min_value(dxx - eta_x));
        see_min(eta_m, min_value(dzz - eta_z));

        const Rv<S> dy = in.Yk[k + 1] - in.Yk[k];
        const Rv<S> dy2 = cond_exp(dy * dy, pr.H(k));
        see_min(alpha_m, min_value(half * dy2 + half * eps - abs_rv(a_direct)));

        const Rv<S> drift = cond_exp(betas[k + 1], pr.H(k)) - betas[k];
        rep.drift_identity_gap = std::max(
            rep.drift_identity_gap,
            max_abs(drift - (half * dy2 + half * dxz + quarter * dxx + quarter * dzz)));
        see_min(drift_m, min_value(drift - abs_rv(a_direct)));

        sum_alpha += expectation(a_direct);
        sum_abs_alpha += expectation(abs_rv(a_direct));
    }

    for (int k = 0; k <= n; ++k) {
        see_min(beta_m, min_value(betas[k]));
        const Rv<S> cx = cond_exp(in.X * in.X, pr.H(k));
        const Rv<S> cy = cond_exp(in.Y * in.Y, pr.H(k));
        const Rv<S> cz = cond_exp(in.Z * in.Z, pr.H(k));
        see_min(size_m, min_value(half * cx * cx + half * cy + half * cz * cz - betas[k]));
    }

    const S paired = expectation(plain_x_dot_y(in, n) * in.Z);
    rep.pairing_sum_gap = abs_val(S(paired - sum_alpha));
    rep.telescoping_margin =
        S(expectation(betas[n]) - expectation(betas[0]) - sum_abs_alpha);

    rep.alpha_bound_margin = alpha_m.value_or(S(0));
    rep.zeta_bound_margin = zeta_m.value_or(S(0));
    rep.eta_bound_margin = eta_m.value_or(S(0));
    rep.drift_margin = drift_m.value_or(S(0));
    rep.beta_min = beta_m.value_or(S(0));
    rep.size_margin = size_m.value_or(S(0));

    const double den = lp_norm(in.X, 4.0) * lp_norm(in.Y, 2.0) * lp_norm(in.Z, 4.0);
    rep.dual_ratio = den > 0 ? std::abs(to_double(paired)) / den : 0.0;
    return rep;
}

} // namespace mlab

#endif
