#include "mlab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mlab/errors.hpp"

namespace mlab {

double apply_functional(PathFunctional f, double terminal) {
    switch (f) {
    case PathFunctional::one: return 1.0;
    case PathFunctional::sign_terminal:
        return terminal > 0.0 ? 1.0 : (terminal < 0.0 ? -1.0 : 0.0);
    case PathFunctional::tanh_terminal: return std::tanh(terminal);
    }
    fail("functional: unknown kind");
}

TimeGrid dyadic_time_grid(int steps, int n) {
    require(n >= 1, "grid: need at least one interval");
    require(steps % n == 0, "grid: interval count must divide the step count");
    TimeGrid g;
    g.stops.reserve(n + 1);
    for (int k = 0; k <= n; ++k) g.stops.push_back(k * (steps / n));
    return g;
}

bool slot_aligned(const BrownianProductEnsemble& ens, const TimeGrid& grid) {
    for (int s : grid.stops)
        if (!ens.slot_boundary(Axis::first, s) || !ens.slot_boundary(Axis::second, s))
            return false;
    return true;
}

namespace {

void check_grid(const BrownianProductEnsemble& ens, const TimeGrid& grid) {
    require(grid.intervals() >= 1, "grid: empty");
    require(grid.stops.front() == 0 && grid.stops.back() == ens.steps(),
            "grid: must span 0..steps");
    for (size_t k = 1; k < grid.stops.size(); ++k)
        require(grid.stops[k - 1] < grid.stops[k], "grid: stops must increase");
}

} // namespace

ElementaryProcess make_elementary(const BrownianProductEnsemble& ens, const TimeGrid& grid,
                                  const Integrand& fn) {
    check_grid(ens, grid);
    ElementaryProcess h;
    h.grid = grid;
    for (int k = 0; k < grid.intervals(); ++k) {
        const int len = grid.stops[k] + 1;
        std::vector<double> v(static_cast<size_t>(ens.m1()) * ens.m2());
        for (int i = 0; i < ens.m1(); ++i) {
            const PathPrefix pa{ens.a_path(i), len};
            for (int j = 0; j < ens.m2(); ++j)
                v[ens.index(i, j)] = fn(pa, PathPrefix{ens.b_path(j), len});
        }
        h.values.emplace_back(ens.space(), std::move(v));
    }
    return h;
}

ElementaryProcess constant_elementary(const BrownianProductEnsemble& ens, const TimeGrid& grid,
                                      double c) {
    check_grid(ens, grid);
    ElementaryProcess h;
    h.grid = grid;
    for (int k = 0; k < grid.intervals(); ++k)
        h.values.push_back(constant_rv<double>(ens.space(), c));
    return h;
}

ElementaryProcess scale_elementary(const ElementaryProcess& h, double c) {
    ElementaryProcess out;
    out.grid = h.grid;
    for (const auto& v : h.values) out.values.push_back(c * v);
    return out;
}

Rv<double> process_x(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                     int step) {
    require(step >= 0 && step <= ens.steps(), "process: step out of range");
    std::vector<double> vb(ens.m2());
    for (int j = 0; j < ens.m2(); ++j)
        vb[j] = apply_functional(spec.v, ens.b(j, ens.steps()));
    std::vector<double> v(static_cast<size_t>(ens.m1()) * ens.m2());
    for (int i = 0; i < ens.m1(); ++i) {
        const double ai = ens.a(i, step);
        for (int j = 0; j < ens.m2(); ++j) v[ens.index(i, j)] = ai * vb[j];
    }
    return Rv<double>(ens.space(), std::move(v));
}

Rv<double> process_y(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                     int step) {
    require(step >= 0 && step <= ens.steps(), "process: step out of range");
    std::vector<double> ua(ens.m1());
    for (int i = 0; i < ens.m1(); ++i)
        ua[i] = apply_functional(spec.u, ens.a(i, ens.steps()));
    std::vector<double> v(static_cast<size_t>(ens.m1()) * ens.m2());
    for (int i = 0; i < ens.m1(); ++i) {
        for (int j = 0; j < ens.m2(); ++j) v[ens.index(i, j)] = ua[i] * ens.b(j, step);
    }
    return Rv<double>(ens.space(), std::move(v));
}

Rv<double> stochastic_integral(const BrownianProductEnsemble& ens,
                               const MartingalePairSpec& spec, const ElementaryProcess& h) {
    check_grid(ens, h.grid);
    const int n = h.grid.intervals();
    require(static_cast<int>(h.values.size()) == n, "integral: malformed step process");
    std::vector<double> acc(static_cast<size_t>(ens.m1()) * ens.m2(), 0.0);
    const int total = static_cast<int>(acc.size());
    Rv<double> prev = process_x(ens, spec, 0) * process_y(ens, spec, 0);
    for (int k = 0; k < n; ++k) {
        const int s = h.grid.stops[k + 1];
        const Rv<double> cur = process_x(ens, spec, s) * process_y(ens, spec, s);
        const Rv<double>& kv = h.values[k];
        for (int w = 0; w < total; ++w) acc[w] += kv[w] * (cur[w] - prev[w]);
        prev = cur;
    }
    return Rv<double>(ens.space(), std::move(acc));
}

namespace {

double seminorm_sq(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                   const ElementaryProcess& h) {
    check_grid(ens, h.grid);
    const int n = h.grid.intervals();
    require(static_cast<int>(h.values.size()) == n, "seminorm: malformed step process");
    double acc = 0.0;
    Rv<double> px = process_x(ens, spec, 0);
    Rv<double> py = process_y(ens, spec, 0);
    for (int k = 0; k < n; ++k) {
        const int s = h.grid.stops[k + 1];
        Rv<double> nx = process_x(ens, spec, s);
        Rv<double> ny = process_y(ens, spec, s);
        const Rv<double> k2 = square(h.values[k]);
        acc += expectation(k2 * square(nx - px));
        acc += expectation(k2 * square(ny - py));
        px = std::move(nx);
        py = std::move(ny);
    }
    return acc;
}

} // namespace

double seminorm(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                const ElementaryProcess& h) {
    return std::sqrt(seminorm_sq(ens, spec, h));
}

ElementaryProcess insert_point(const ElementaryProcess& h, int step) {
    const auto& stops = h.grid.stops;
    ElementaryProcess out;
    for (size_t k = 0; k + 1 < stops.size(); ++k) {
        if (stops[k] < step && step < stops[k + 1]) {
            out.grid.stops = stops;
            out.grid.stops.insert(out.grid.stops.begin() + static_cast<long>(k) + 1, step);
            out.values = h.values;
            out.values.insert(out.values.begin() + static_cast<long>(k), h.values[k]);
            return out;
        }
    }
    fail("insert_point: step is not interior to any interval");
}

RepresentationReport representation_check(const BrownianProductEnsemble& ens,
                                          const MartingalePairSpec& spec,
                                          const ElementaryProcess& h, int step) {
    const ElementaryProcess h2 = insert_point(h, step);
    RepresentationReport rep;
    rep.integral_gap =
        max_abs(stochastic_integral(ens, spec, h) - stochastic_integral(ens, spec, h2));
    rep.seminorm_gap = std::abs(seminorm(ens, spec, h) - seminorm(ens, spec, h2));
    return rep;
}

double integral_isometry_gap(const BrownianProductEnsemble& ens,
                             const MartingalePairSpec& spec, const ElementaryProcess& h) {
    const int n = h.grid.intervals();
    Rv<double> tx = constant_rv<double>(ens.space(), 0.0);
    Rv<double> ty = constant_rv<double>(ens.space(), 0.0);
    Rv<double> px = process_x(ens, spec, 0);
    Rv<double> py = process_y(ens, spec, 0);
    for (int k = 0; k < n; ++k) {
        const int s = h.grid.stops[k + 1];
        Rv<double> nx = process_x(ens, spec, s);
        Rv<double> ny = process_y(ens, spec, s);
        tx = tx + h.values[k] * (nx - px);
        ty = ty + h.values[k] * (ny - py);
        px = std::move(nx);
        py = std::move(ny);
    }
    return std::abs(expectation(square(tx)) + expectation(square(ty)) -
                    seminorm_sq(ens, spec, h));
}

Partition prefix_partition(const BrownianProductEnsemble& ens, Axis axis, int step) {
    require(step >= 0 && step <= ens.steps(), "prefix_partition: step out of range");
    const int m = axis == Axis::first ? ens.m1() : ens.m2();
    std::map<std::vector<double>, int> classes;
    std::vector<int> labels(m);
    for (int i = 0; i < m; ++i) {
        const double* p = axis == Axis::first ? ens.a_path(i) : ens.b_path(i);
        std::vector<double> key(p, p + step + 1);
        auto [it, fresh] = classes.emplace(std::move(key), static_cast<int>(classes.size()));
        labels[i] = it->second;
        (void)fresh;
    }
    return Partition(labels);
}

double martingale_mean_gap(const BrownianProductEnsemble& ens, const TimeGrid& grid) {
    check_grid(ens, grid);
    double worst = 0.0;
    for (Axis axis : {Axis::first, Axis::second}) {
        auto value = [&](int path, int s) {
            return axis == Axis::first ? ens.a(path, s) : ens.b(path, s);
        };
        for (int k = 0; k + 1 < static_cast<int>(grid.stops.size()); ++k) {
            const Partition part = prefix_partition(ens, axis, grid.stops[k]);
            for (const auto& blk : part.blocks()) {
                double mean = 0.0;
                for (int i : blk) mean += value(i, grid.stops[k + 1]) - value(i, grid.stops[k]);
                worst = std::max(worst, std::abs(mean / static_cast<double>(blk.size())));
            }
        }
    }
    return worst;
}

double normalized_integral_ratio(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                        const ElementaryProcess& h) {
    const double num = lp_norm(stochastic_integral(ens, spec, h), 4.0 / 3.0);
    const double den = seminorm(ens, spec, h) *
                       (lp_norm(process_x(ens, spec, ens.steps()), 4.0) +
                        lp_norm(process_y(ens, spec, ens.steps()), 4.0));
    if (den == 0.0) return 0.0;
    return num / den;
}

RefinementReport refinement_study(const BrownianProductEnsemble& ens,
                                  const MartingalePairSpec& spec,
                                  const std::vector<int>& levels, const Integrand& fn) {
    RefinementReport rep;
    rep.levels = levels;
    double lo = 0.0, hi = 0.0;
    for (int n : levels) {
        const auto h = make_elementary(ens, dyadic_time_grid(ens.steps(), n), fn);
        const double r = normalized_integral_ratio(ens, spec, h);
        rep.ratios.push_back(r);
        if (rep.ratios.size() == 1) {
            lo = hi = r;
        } else {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    rep.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    return rep;
}

double elementary_integral_cap(const BrownianProductEnsemble& ens,
                               const MartingalePairSpec& spec, const TimeGrid& grid) {
    check_grid(ens, grid);
    double ex2 = 0.0, ey2 = 0.0;
    Rv<double> sum_dy2 = constant_rv<double>(ens.space(), 0.0);
    Rv<double> px = process_x(ens, spec, 0);
    Rv<double> py = process_y(ens, spec, 0);
    for (size_t k = 1; k < grid.stops.size(); ++k) {
        Rv<double> nx = process_x(ens, spec, grid.stops[k]);
        Rv<double> ny = process_y(ens, spec, grid.stops[k]);
        ex2 += expectation(square(nx - px));
        ey2 += expectation(square(ny - py));
        sum_dy2 = sum_dy2 + square(ny - py);
        px = std::move(nx);
        py = std::move(ny);
    }
    const double x4 = lp_norm(process_x(ens, spec, ens.steps()), 4.0);
    const double y4 = lp_norm(process_y(ens, spec, ens.steps()), 4.0);
    return 1.5 * x4 * std::sqrt(ey2) + 1.5 * y4 * std::sqrt(ex2) +
           std::sqrt(ex2) * lp_norm(sqrt_rv(sum_dy2), 4.0);
}

BoundednessReport boundedness_check(const BrownianProductEnsemble& ens,
                                    const MartingalePairSpec& spec, int n, int trials,
                                    std::uint64_t seed) {
    require(trials >= 2, "boundedness: need at least the two constant trials");
    const TimeGrid grid = dyadic_time_grid(ens.steps(), n);
    require(slot_aligned(ens, grid), "boundedness: cap needs a slot-aligned grid");
    BoundednessReport rep;
    rep.trials = trials;
    rep.cap = elementary_integral_cap(ens, spec, grid);
    for (int trial = 0; trial < trials; ++trial) {
        ElementaryProcess h;
        if (trial < 2) {
            h = constant_elementary(ens, grid, trial == 0 ? 1.0 : -1.0);
        } else {
            Rng rng(mix_seed(seed, 31, static_cast<std::uint64_t>(trial)));
            const double c1 = rng.uniform(-2.0, 2.0);
            const double c2 = rng.uniform(-2.0, 2.0);
            const double c3 = rng.uniform(-3.14159265358979, 3.14159265358979);
            h = make_elementary(ens, grid,
                                [c1, c2, c3](const PathPrefix& pa, const PathPrefix& pb) {
                                    return std::sin(c1 * pa.last() + c2 * pb.last() + c3);
                                });
        }
        rep.worst_norm =
            std::max(rep.worst_norm, lp_norm(stochastic_integral(ens, spec, h), 4.0 / 3.0));
    }
    rep.worst_ratio = rep.cap > 0.0 ? rep.worst_norm / rep.cap : 0.0;
    rep.capped = rep.worst_norm <= rep.cap * (1.0 + 1e-9);
    return rep;
}

CauchyReport cauchy_convergence(const BrownianProductEnsemble& ens,
                                const MartingalePairSpec& spec,
                                const std::vector<int>& levels) {
    require(levels.size() >= 2, "cauchy: need at least two levels");
    const Integrand target = [](const PathPrefix& pa, const PathPrefix&) {
        return std::clamp(pa.last(), -1.0, 1.0);
    };
    CauchyReport rep;
    rep.levels = levels;
    ElementaryProcess coarse = make_elementary(ens, dyadic_time_grid(ens.steps(), levels[0]),
                                               target);
    Rv<double> coarse_int = stochastic_integral(ens, spec, coarse);
    for (size_t j = 1; j < levels.size(); ++j) {
        require(levels[j] % levels[j - 1] == 0 && levels[j] > levels[j - 1],
                "cauchy: levels must refine");
        ElementaryProcess fine = make_elementary(ens, dyadic_time_grid(ens.steps(), levels[j]),
                                                 target);
        Rv<double> fine_int = stochastic_integral(ens, spec, fine);
        rep.distances.push_back(lp_norm(fine_int - coarse_int, 4.0 / 3.0));

        const int ratio = levels[j] / levels[j - 1];
        ElementaryProcess diff;
        diff.grid = fine.grid;
        for (int k = 0; k < fine.grid.intervals(); ++k)
            diff.values.push_back(fine.values[k] - coarse.values[k / ratio]);
        rep.seminorm_distances.push_back(seminorm(ens, spec, diff));

        coarse = std::move(fine);
        coarse_int = std::move(fine_int);
    }
    rep.decreasing = true;
    for (size_t j = 1; j < rep.distances.size(); ++j)
        rep.decreasing = rep.decreasing && rep.distances[j] < rep.distances[j - 1];
    return rep;
}

double moment_stability(const MartingalePairSpec& spec, const EnsembleConfig& base) {
    EnsembleConfig small = base;
    small.mode = PathMode::iid;
    EnsembleConfig big = small;
    big.m1 *= 2;
    big.m2 *= 2;
    big.seed = mix_seed(base.seed, 99);
    auto norm_sum = [&](const EnsembleConfig& cfg) {
        BrownianProductEnsemble ens(cfg);
        return lp_norm(process_x(ens, spec, cfg.steps), 4.0) +
               lp_norm(process_y(ens, spec, cfg.steps), 4.0);
    };
    const double lo = norm_sum(small);
    require(lo > 0.0, "moment_stability: degenerate base spec");
    return norm_sum(big) / lo;
}

NonadaptedReport nonadapted_demo(std::uint64_t seed, int replicas) {
    require(replicas >= 2, "demo: need at least two replicas");
    NonadaptedReport rep;
    rep.replicas = replicas;
    std::vector<double> residuals;
    for (int r = 0; r < replicas; ++r) {
        EnsembleConfig cfg;
        cfg.m1 = 64;
        cfg.m2 = 64;
        cfg.steps = 768; // 6 slots of 128 steps each
        cfg.t = 1.0;
        cfg.seed = mix_seed(seed, 77, static_cast<std::uint64_t>(r));
        BrownianProductEnsemble ens(cfg);
        const int eps_step = cfg.steps / 8;

        const Partition p1 = prefix_partition(ens, Axis::first, eps_step);
        const Partition p2 = prefix_partition(ens, Axis::second, eps_step);
        std::vector<int> lab(static_cast<size_t>(cfg.m1) * cfg.m2);
        for (int i = 0; i < cfg.m1; ++i)
            for (int j = 0; j < cfg.m2; ++j)
                lab[ens.index(i, j)] = p1.block_of(i) * p2.block_count() + p2.block_of(j);
        const Partition atoms{lab};

        MartingalePairSpec signs{PathFunctional::sign_terminal, PathFunctional::sign_terminal};
        const Rv<double> w = process_x(ens, signs, eps_step) * process_y(ens, signs, eps_step);
        // Normalize by E w^2: the raw residual carries a chi-square scale
        // factor from the time-e path values that swamps replica averaging,
        // while the ratio isolates the unexplained variance fraction.
        const double scale = expectation(square(w));
        require(scale > 0.0, "demo: degenerate product");
        residuals.push_back(expectation(square(w - cond_exp(w, atoms))) / scale);

        MartingalePairSpec plain;
        const Rv<double> adapted =
            process_x(ens, plain, eps_step) * process_y(ens, plain, eps_step);
        rep.adapted_gap = std::max(rep.adapted_gap, measurability_gap(adapted, atoms));

        for (Axis axis : {Axis::first, Axis::second}) {
            const PathFamilyStats st = family_stats(ens, axis);
            rep.worst_qv_sigmas = std::max(rep.worst_qv_sigmas, st.worst_qv_sigmas);
            if (axis == Axis::first) rep.mean_total_variation += st.mean_total_variation;
        }
    }
    double mean = 0.0;
    for (double v : residuals) mean += v;
    mean /= replicas;
    double var = 0.0;
    for (double v : residuals) var += (v - mean) * (v - mean);
    var /= (replicas - 1);
    rep.residual_mean = mean;
    rep.residual_se = std::sqrt(var / replicas);
    rep.sigma_margin = rep.residual_se > 0.0 ? mean / rep.residual_se : 0.0;
    rep.mean_total_variation /= replicas;
    return rep;
}

} // namespace mlab
