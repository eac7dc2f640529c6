#include "mlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sum_{m <= M} 2^(m p) = 2^(M p) / (1 - 2^-p)
double lower_tail(int M, double p) { return std::pow(2.0, M * p) / (1.0 - std::pow(2.0, -p)); }

// sum over integer levels m of 2^(m p) P(bar >= 2^(2m - shift)), the
// constant lower region in closed form
double level_sum_of(const std::vector<double>& bar, const std::vector<double>& mass,
                    double p, int shift) {
    double minpos = kInf, maxv = 0.0, ppos = 0.0;
    for (size_t w = 0; w < bar.size(); ++w) {
        if (bar[w] > 0.0) {
            minpos = std::min(minpos, bar[w]);
            ppos += mass[w];
        }
        maxv = std::max(maxv, bar[w]);
    }
    if (maxv == 0.0) return 0.0;
    int bot = static_cast<int>(std::floor((std::log2(minpos) + shift) / 2.0));
    while (std::ldexp(1.0, 2 * bot - shift) > minpos) --bot;
    double total = lower_tail(bot, p) * ppos;
    for (int m = bot + 1;; ++m) {
        const double thr = std::ldexp(1.0, 2 * m - shift);
        double pm = 0.0;
        for (size_t w = 0; w < bar.size(); ++w)
            if (bar[w] >= thr) pm += mass[w];
        if (pm == 0.0) break;
        total += std::pow(2.0, m * p) * pm;
    }
    return total;
}

std::vector<double> running_max(const Process<double>& sm, int upto) {
    std::vector<double> bar(sm[0].values());
    for (int k = 1; k <= upto; ++k)
        for (int w = 0; w < sm[k].size(); ++w) bar[w] = std::max(bar[w], sm[k][w]);
    return bar;
}

} // namespace

ExponentTriple::ExponentTriple(double p_, double q_, double r_) : p(p_), q(q_), r(r_) {
    require(p > 2.0 && q > 2.0, "exponents: p and q must exceed 2");
    require(r > 1.0 && r < 2.0, "exponents: r must lie in (1,2)");
    require(std::abs(1.0 / r - 1.0 / p - 1.0 / q) <= 1e-12,
            "exponents: 1/r = 1/p + 1/q required");
    r_dual = r / (r - 1.0);
}

int scan_stop(const std::vector<double>& values, double threshold) {
    for (size_t k = 0; k < values.size(); ++k)
        if (values[k] >= threshold) return static_cast<int>(k);
    return static_cast<int>(values.size());
}

LevelFamily build_level_family(const Process<double>& sm, int horizon) {
    require(static_cast<int>(sm.size()) == horizon + 1, "levels: chain length mismatch");
    const int nomega = sm[0].size();
    LevelFamily fam;

    double maxval = 0.0, minpos0 = kInf;
    for (int w = 0; w < nomega; ++w) {
        if (sm[0][w] > 0.0) minpos0 = std::min(minpos0, sm[0][w]);
        for (int k = 0; k <= horizon; ++k) maxval = std::max(maxval, sm[k][w]);
    }
    if (maxval == 0.0) {
        fam.degenerate = true;
        fam.m_lo = 0;
        fam.times.push_back(std::vector<int>(nomega, 0));
        fam.times.push_back(std::vector<int>(nomega, horizon));
        return fam;
    }

    int m_lo = static_cast<int>(std::floor(std::log2(minpos0) / 2.0)) - 1;
    while (std::ldexp(1.0, 2 * m_lo) > minpos0) --m_lo;
    int m_hi = static_cast<int>(std::ceil(std::log2(maxval) / 2.0)) + 1;
    if (m_hi < m_lo + 2) m_hi = m_lo + 2;

    fam.m_lo = m_lo;
    fam.times.push_back(std::vector<int>(nomega, 0));
    std::vector<double> path(horizon + 1);
    for (int m = m_lo + 1; m <= m_hi - 1; ++m) {
        const double thr = std::ldexp(1.0, 2 * m);
        std::vector<int> t(nomega);
        for (int w = 0; w < nomega; ++w) {
            for (int k = 0; k <= horizon; ++k) path[k] = sm[k][w];
            t[w] = std::min(scan_stop(path, thr), horizon);
        }
        fam.times.push_back(std::move(t));
    }
    fam.times.push_back(std::vector<int>(nomega, horizon));

    for (size_t l = 1; l < fam.times.size(); ++l)
        for (int w = 0; w < nomega; ++w)
            require(fam.times[l - 1][w] <= fam.times[l][w], "levels: passage order broken");
    return fam;
}

StoppingData build_stopping(const MartingaleInputs<double>& in) {
    StoppingData sd;
    sd.pair = in.pair;
    sd.horizon = in.horizon();
    const auto& pr = *in.pair;
    for (int k = 0; k <= sd.horizon; ++k) {
        sd.x2.push_back(cond_exp(in.X * in.X, pr.H(k)));
        sd.y2.push_back(cond_exp(in.Y * in.Y, pr.H(k)));
        sd.z2.push_back(cond_exp(in.Z * in.Z, pr.H(k)));
        sd.betas.push_back(beta_k(in, k));
    }
    for (int k = 0; k + 1 <= sd.horizon; ++k) sd.alpha_abs.push_back(abs_rv(alpha_k(in, k)));
    sd.lx = build_level_family(sd.x2, sd.horizon);
    sd.ly = build_level_family(sd.y2, sd.horizon);
    sd.lz = build_level_family(sd.z2, sd.horizon);
    sd.growth = uniform_growth_constant(pr);
    return sd;
}

std::vector<LocalizedTriple> localized_triples(const StoppingData& sd) {
    const int n = sd.horizon;
    const auto& mass = sd.pair->product()->masses();
    const int nomega = static_cast<int>(mass.size());
    const bool active_all = !sd.lx.degenerate && !sd.ly.degenerate && !sd.lz.degenerate;
    const double acap = 1.5 * std::pow(sd.growth, 1.5);

    std::vector<LocalizedTriple> out;
    for (int l1 = 1; l1 < sd.lx.levels(); ++l1) {
        for (int l2 = 1; l2 < sd.ly.levels(); ++l2) {
            for (int l3 = 1; l3 < sd.lz.levels(); ++l3) {
                LocalizedTriple t;
                t.m1 = sd.lx.level_of(l1);
                t.m2 = sd.ly.level_of(l2);
                t.m3 = sd.lz.level_of(l3);
                t.active = active_all;
                double beta_cap = 0.0, xc = 0.0, yc = 0.0, zc = 0.0;
                for (int w = 0; w < nomega; ++w) {
                    const int sig_raw = std::max({sd.lx.times[l1 - 1][w],
                                                  sd.ly.times[l2 - 1][w],
                                                  sd.lz.times[l3 - 1][w]});
                    const int tau = std::min({sd.lx.times[l1][w], sd.ly.times[l2][w],
                                              sd.lz.times[l3][w]});
                    const int sig = std::min(sig_raw, tau);
                    double s = 0.0;
                    for (int k = sig; k < tau; ++k) s += sd.alpha_abs[k][w];
                    t.lhs += mass[w] * s;
                    if (sig_raw < n) t.p_sigma += mass[w];
                    if (tau > 0) {
                        beta_cap = std::max(beta_cap, sd.betas[tau][w]);
                        xc = std::max(xc, sd.x2[tau][w]);
                        yc = std::max(yc, sd.y2[tau][w]);
                        zc = std::max(zc, sd.z2[tau][w]);
                    }
                }
                t.bound_beta = beta_cap * t.p_sigma;
                t.bound_norm = 1.5 * std::sqrt(xc * yc * zc) * t.p_sigma;
                if (t.active) {
                    t.bound_cap =
                        acap * std::ldexp(1.0, t.m1 + t.m2 + t.m3) * t.p_sigma;
                    t.cap_level_margin =
                        std::min({sd.growth * std::ldexp(1.0, 2 * t.m1) - xc,
                                  sd.growth * std::ldexp(1.0, 2 * t.m2) - yc,
                                  sd.growth * std::ldexp(1.0, 2 * t.m3) - zc});
                }
                out.push_back(t);
            }
        }
    }
    return out;
}

namespace {

bool tiles_pointwise(const LevelFamily& fam, int horizon, int nomega) {
    for (int w = 0; w < nomega; ++w) {
        for (int k = 0; k < horizon; ++k) {
            int hits = 0;
            for (int l = 1; l < fam.levels(); ++l)
                if (fam.times[l - 1][w] <= k && k < fam.times[l][w]) ++hits;
            if (hits != 1) return false;
        }
    }
    return true;
}

double passage_measurability(const LevelFamily& fam, const ProductFiltrationPair<double>& pr) {
    double gap = 0.0;
    const int nomega = pr.product()->size();
    for (int l = 0; l < fam.levels(); ++l) {
        for (int k = 0; k <= pr.horizon(); ++k) {
            std::vector<double> ind(nomega);
            for (int w = 0; w < nomega; ++w) ind[w] = fam.times[l][w] <= k ? 1.0 : 0.0;
            gap = std::max(gap,
                           measurability_gap(Rv<double>(pr.product(), std::move(ind)),
                                             pr.H(k)));
        }
    }
    return gap;
}

} // namespace

StoppingReport stopping_check(const MartingaleInputs<double>& in) {
    const StoppingData sd = build_stopping(in);
    const int nomega = sd.pair->product()->size();

    StoppingReport rep;
    rep.growth_constant = sd.growth;
    rep.partition_ok = tiles_pointwise(sd.lx, sd.horizon, nomega) &&
                       tiles_pointwise(sd.ly, sd.horizon, nomega) &&
                       tiles_pointwise(sd.lz, sd.horizon, nomega);
    rep.stopping_property_gap =
        std::max({passage_measurability(sd.lx, *sd.pair),
                  passage_measurability(sd.ly, *sd.pair),
                  passage_measurability(sd.lz, *sd.pair)});

    double total_alpha = 0.0;
    for (const auto& a : sd.alpha_abs) total_alpha += expectation(a);

    const auto triples = localized_triples(sd);
    double covered = 0.0;
    double mb = kInf, mn = kInf, mc = kInf, ml = kInf;
    for (const auto& t : triples) {
        covered += t.lhs;
        mb = std::min(mb, t.bound_beta - t.lhs);
        mn = std::min(mn, t.bound_norm - t.lhs);
        if (t.active) {
            mc = std::min(mc, t.bound_cap - t.lhs);
            ml = std::min(ml, t.cap_level_margin);
            ++rep.triples_active;
        }
    }
    rep.triples_checked = static_cast<int>(triples.size());
    rep.coverage_gap = std::abs(covered - total_alpha);
    rep.min_margin_beta = triples.empty() ? 0.0 : mb;
    rep.min_margin_norm = triples.empty() ? 0.0 : mn;
    rep.min_margin_cap = rep.triples_active == 0 ? 0.0 : mc;
    rep.cap_level_margin = rep.triples_active == 0 ? 0.0 : ml;
    return rep;
}

DoobReport doob_check(const Process<double>& sm, const Rv<double>& v, double p) {
    require(p > 1.0, "doob: exponent must exceed 1");
    require(!sm.empty(), "doob: empty chain");
    const auto& mass = sm[0].space()->masses();
    const int n = static_cast<int>(sm.size()) - 1;

    DoobReport rep;
    double prev = 0.0;
    rep.monotone = true;
    for (int k = 0; k <= n; ++k) {
        const double dk = level_sum_of(running_max(sm, k), mass, p, 0);
        if (dk < prev - 1e-12) rep.monotone = false;
        prev = dk;
        if (k == n) rep.level_sum = dk;
    }

    const auto bar = running_max(sm, n);
    double mpow = 0.0;
    for (size_t w = 0; w < bar.size(); ++w) mpow += mass[w] * std::pow(bar[w], p / 2.0);
    rep.majorant = mpow / (1.0 - std::pow(2.0, -p));
    rep.pointwise_ok = rep.level_sum <= rep.majorant + 1e-10 * (1.0 + rep.majorant);

    const double vnorm = lp_norm(v, p);
    rep.measured_constant = vnorm > 0.0 ? rep.level_sum / std::pow(vnorm, p) : 0.0;
    return rep;
}

TripleBoundReport full_triple_bound(const MartingaleInputs<double>& in,
                                    const ExponentTriple& e) {
    const auto& pr = *in.pair;
    const int n = in.horizon();
    Process<double> x2, y2, z2;
    for (int k = 0; k <= n; ++k) {
        x2.push_back(cond_exp(in.X * in.X, pr.H(k)));
        y2.push_back(cond_exp(in.Y * in.Y, pr.H(k)));
        z2.push_back(cond_exp(in.Z * in.Z, pr.H(k)));
    }
    const auto& mass = pr.product()->masses();
    const std::vector<double> bars[3] = {running_max(x2, n), running_max(y2, n),
                                         running_max(z2, n)};
    const double ev[3] = {e.p, e.q, e.r_dual};

    TripleBoundReport rep;
    rep.direct = std::abs(expectation(plain_x_dot_y(in, n) * in.Z));
    const double growth = uniform_growth_constant(pr);
    const double scale = std::pow(growth, 1.5);

    rep.geometric_ok = true;
    for (double p : ev)
        if (1.0 / (1.0 - std::pow(2.0, -p)) > 2.0 + 1e-12) rep.geometric_ok = false;

    rep.subsum_ok = true;
    for (int v = 0; v < 3; ++v) {
        rep.dsum[v] = level_sum_of(bars[v], mass, ev[v], 0);
        rep.subsum[v] = level_sum_of(bars[v], mass, ev[v], 2);
        if (rep.subsum[v] >
            std::pow(2.0, ev[v] + 2.0) * rep.dsum[v] * (1.0 + 1e-9) + 1e-12)
            rep.subsum_ok = false;
    }

    // tail probabilities F_v(m) = P(bar_v >= 2^(2m-2)); below bot_v the value
    // freezes at P(bar_v > 0), above top_v it vanishes
    int bot[3], top[3];
    double ppos[3] = {0, 0, 0};
    bool any_zero = false;
    for (int v = 0; v < 3; ++v) {
        double minpos = kInf, maxv = 0.0;
        for (size_t w = 0; w < bars[v].size(); ++w) {
            if (bars[v][w] > 0.0) {
                minpos = std::min(minpos, bars[v][w]);
                ppos[v] += mass[w];
            }
            maxv = std::max(maxv, bars[v][w]);
        }
        if (maxv == 0.0) {
            any_zero = true;
            break;
        }
        bot[v] = static_cast<int>(std::floor((std::log2(minpos) + 2.0) / 2.0));
        while (std::ldexp(1.0, 2 * bot[v] - 2) > minpos) --bot[v];
        top[v] = bot[v];
        while (true) {
            const double thr = std::ldexp(1.0, 2 * (top[v] + 1) - 2);
            bool hit = false;
            for (size_t w = 0; w < bars[v].size(); ++w)
                if (bars[v][w] >= thr) {
                    hit = true;
                    break;
                }
            if (!hit) break;
            ++top[v];
        }
    }

    double majorant = 0.0;
    if (!any_zero) {
        const int botsum = bot[0] + bot[1] + bot[2];
        std::vector<double> F[3];
        int lo[3];
        for (int v = 0; v < 3; ++v) {
            lo[v] = botsum - (top[0] + top[1] + top[2] - top[v]) - 48;
            lo[v] = std::min(lo[v], bot[v]);
            F[v].resize(top[v] - lo[v] + 1);
            for (int m = lo[v]; m <= top[v]; ++m) {
                if (m <= bot[v]) {
                    F[v][m - lo[v]] = ppos[v];
                    continue;
                }
                const double thr = std::ldexp(1.0, 2 * m - 2);
                double pm = 0.0;
                for (size_t w = 0; w < bars[v].size(); ++w)
                    if (bars[v][w] >= thr) pm += mass[w];
                F[v][m - lo[v]] = pm;
            }
        }
        for (int m1 = lo[0]; m1 <= top[0]; ++m1)
            for (int m2 = lo[1]; m2 <= top[1]; ++m2)
                for (int m3 = lo[2]; m3 <= top[2]; ++m3)
                    majorant += std::ldexp(1.0, m1 + m2 + m3) *
                                std::min({F[0][m1 - lo[0]], F[1][m2 - lo[1]],
                                          F[2][m3 - lo[2]]});
        majorant *= 1.5 * scale;
    }
    rep.majorant = majorant;
    rep.dominated = rep.direct <= rep.majorant * (1.0 + 1e-6) + 1e-12;

    const double den = scale * lp_norm(in.X, e.p) * lp_norm(in.Y, e.q) *
                       lp_norm(in.Z, e.r_dual);
    rep.direct_ratio = den > 0.0 ? rep.direct / den : 0.0;
    rep.majorant_ratio = den > 0.0 ? rep.majorant / den : 0.0;
    return rep;
}

} // namespace mlab
