#ifndef MLAB_SUITES_HPP
#define MLAB_SUITES_HPP

// The five verification suites behind the command line runner and the
// acceptance gate. Each runner is deterministic given its config: instance
// seeds derive from the master seed by fixed tags, reductions accumulate in
// a fixed order, and no clock or environment state enters the records.

#include <string>
#include <vector>

#include "mlab/bellman.hpp"
#include "mlab/report.hpp"

namespace mlab {

// Worst gaps of the five transform identities on one input bundle: the
// product-rule splitting, the weighted-transform energy identity (both
// axes), the martingale property of transform prefixes, the cross transform
// against the prefix process, and the pairing of the plain transform with
// the summed increment expectations.
template <class S>
struct IdentityGaps {
    S splitting{0};
    S energy{0};
    S prefix_martingale{0};
    S cross_vs_prefix{0};
    S pairing_sum{0};

    S worst() const {
        return std::max({splitting, energy, prefix_martingale, cross_vs_prefix,
                         pairing_sum});
    }
};

template <class S>
IdentityGaps<S> identity_gaps(const MartingaleInputs<S>& in) {
    const auto& pr = *in.pair;
    const int n = in.horizon();
    IdentityGaps<S> g;
    g.splitting = splitting_residual(in, n);
    g.energy = std::max(isometry_gap(in, Axis::first, n), isometry_gap(in, Axis::second, n));

    const Process<S> pref1 = weight_dot_prefixes(in, Axis::first, n);
    const Process<S> pref2 = weight_dot_prefixes(in, Axis::second, n);
    for (int k = 0; k + 1 <= n; ++k) {
        g.prefix_martingale =
            std::max({g.prefix_martingale, max_abs(cond_exp(pref1[k + 1], pr.F(k)) - pref1[k]),
                      max_abs(cond_exp(pref2[k + 1], pr.G(k)) - pref2[k])});
    }
    g.cross_vs_prefix =
        std::max(max_abs(weighted_x_dot_y(in, n) - dot_transform(in.Xk, pref2, n)),
                 max_abs(weighted_y_dot_x(in, n) - dot_transform(in.Yk, pref1, n)));

    S alphas(0);
    for (int k = 0; k + 1 <= n; ++k) alphas += expectation(alpha_k(in, k));
    g.pairing_sum = abs_val(S(expectation(plain_x_dot_y(in, n) * in.Z) - alphas));
    return g;
}

SuiteReport run_identities_suite(const SuiteConfig& cfg);
SuiteReport run_bellman_suite(const SuiteConfig& cfg);
SuiteReport run_estimates_suite(const SuiteConfig& cfg);
SuiteReport run_paraproduct_suite(const SuiteConfig& cfg);
SuiteReport run_stochastic_suite(const SuiteConfig& cfg);

bool known_suite(const std::string& id); // the five above, or "all"
std::vector<SuiteReport> run_suites(const std::string& id, const SuiteConfig& cfg);

// Re-runs the check recorded in a failure artifact. Instance artifacts are
// regenerated from their seed and byte-compared against the embedded
// serialization before re-evaluation; config-level artifacts re-run their
// suite and extract the named check. Malformed artifacts raise Error.
CheckRecord replay_artifact(const Json& artifact);

} // namespace mlab

#endif
