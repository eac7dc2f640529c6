#ifndef MLAB_ESTIMATES_HPP
#define MLAB_ESTIMATES_HPP

// Stopping-time localization and the resulting norm bounds, measured in
// floating point. The martingales are sliced into dyadic size levels; on
// each window between consecutive level passages the pairing increments are
// summed and compared against three nested bounds: the stopped control
// value, the stopped-moment product, and the level cap obtained from the
// atom growth constant. Level sums over all windows reassemble the global
// quantity exactly, which is checked.

#include <memory>
#include <vector>

#include "mlab/bellman.hpp"

namespace mlab {

struct ExponentTriple {
    double p, q, r, r_dual;
    ExponentTriple(double p_, double q_, double r_);
};

// first index whose value reaches the threshold, else values.size()
int scan_stop(const std::vector<double>& values, double threshold);

// Passage times of one conditional-second-moment chain through the size
// levels 2^(2m). times[l][omega] is the passage time of level m_lo + l.
// The bottom time is pinned to 0 and the top to the horizon, so consecutive
// pairs tile {0..n-1} pointwise even on atoms where the variable vanishes.
struct LevelFamily {
    bool degenerate = false;
    int m_lo = 0;
    std::vector<std::vector<int>> times;
    int levels() const { return static_cast<int>(times.size()); }
    int level_of(int l) const { return m_lo + l; }
};

LevelFamily build_level_family(const Process<double>& second_moments, int horizon);

struct StoppingData {
    std::shared_ptr<const ProductFiltrationPair<double>> pair;
    Process<double> x2, y2, z2; // E(V^2|H_k) chains
    Process<double> betas;
    std::vector<Rv<double>> alpha_abs;
    LevelFamily lx, ly, lz;
    double growth = 1.0;
    int horizon = 0;
};

StoppingData build_stopping(const MartingaleInputs<double>& in);

// One window triple: sigma is the latest previous-level passage, tau the
// earliest current-level passage, clamped so the window is never inverted.
// p_sigma is taken on the unclamped sigma.
struct LocalizedTriple {
    int m1 = 0, m2 = 0, m3 = 0;
    bool active = false; // all three level families carry real thresholds
    double lhs = 0, p_sigma = 0;
    double bound_beta = 0, bound_norm = 0, bound_cap = 0;
    double cap_level_margin = 0; // min over stopped moments of A 2^(2m) - value
};

std::vector<LocalizedTriple> localized_triples(const StoppingData& sd);

struct StoppingReport {
    bool partition_ok = false;        // per-variable and triple window tiling
    double stopping_property_gap = 0; // measurability of {T <= k}
    double coverage_gap = 0;          // sum of window sums vs sum of E|alpha_k|
    double min_margin_beta = 0, min_margin_norm = 0, min_margin_cap = 0;
    double cap_level_margin = 0;
    int triples_checked = 0, triples_active = 0;
    double growth_constant = 1.0;
};

StoppingReport stopping_check(const MartingaleInputs<double>& in);

// Dyadic level sum of one running-max chain against its pointwise majorant
// E(bar^(p/2)) / (1 - 2^-p), with the constant-probability lower tail summed
// in closed form. measured_constant divides by ||v||_p^p.
struct DoobReport {
    double level_sum = 0, majorant = 0, measured_constant = 0;
    bool pointwise_ok = false, monotone = false;
};

DoobReport doob_check(const Process<double>& second_moments, const Rv<double>& v, double p);

// The assembled bound at exponents (p, q, r): the pairing against the
// level-sum majorant 1.5 A^(3/2) sum 2^(m1+m2+m3) min of tail probabilities,
// plus the per-variable level sums that control the majorant.
struct TripleBoundReport {
    double direct = 0, majorant = 0;
    double direct_ratio = 0, majorant_ratio = 0;
    double dsum[3] = {0, 0, 0};   // per-variable level sums at p, q, r'
    double subsum[3] = {0, 0, 0}; // shifted-threshold sums
    bool subsum_ok = false, geometric_ok = false, dominated = false;
};

TripleBoundReport full_triple_bound(const MartingaleInputs<double>& in,
                                    const ExponentTriple& e);

} // namespace mlab

#endif
