#include "mlab/brownian.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mlab/errors.hpp"

namespace mlab {

namespace {

bool power_of_two(int m) { return m >= 1 && (m & (m - 1)) == 0; }

int log2_exact(int m) {
    int l = 0;
    while ((1 << l) < m) ++l;
    return l;
}

void validate(const EnsembleConfig& cfg) {
    require(cfg.m1 >= 2 && cfg.m2 >= 2, "ensemble: need at least two paths per family");
    require(cfg.steps >= 1, "ensemble: need at least one step");
    require(cfg.t > 0.0, "ensemble: horizon must be positive");
    if (cfg.mode == PathMode::stratified) {
        require(power_of_two(cfg.m1) && power_of_two(cfg.m2),
                "ensemble: stratified mode needs power-of-two path counts");
        require(cfg.steps % log2_exact(cfg.m1) == 0 && cfg.steps % log2_exact(cfg.m2) == 0,
                "ensemble: steps must split evenly into slots");
    }
}

// one family: m paths, values 0..steps, path-major
std::vector<double> generate_family(const EnsembleConfig& cfg, int m, std::uint64_t tag) {
    const int steps = cfg.steps;
    const double sd = std::sqrt(cfg.dt());
    std::vector<double> paths(static_cast<size_t>(m) * (steps + 1), 0.0);
    if (cfg.mode == PathMode::iid) {
        for (int i = 0; i < m; ++i) {
            Rng rng(mix_seed(cfg.seed, tag, static_cast<std::uint64_t>(i)));
            double* p = paths.data() + static_cast<size_t>(i) * (steps + 1);
            for (int s = 0; s < steps; ++s) p[s + 1] = p[s] + rng.gaussian(sd);
        }
        return paths;
    }
    const int slots = log2_exact(m);
    const int seg = steps / slots;
    Rng rng(mix_seed(cfg.seed, tag));
    std::vector<double> segments(static_cast<size_t>(steps));
    for (double& g : segments) g = rng.gaussian(sd);
    for (int i = 0; i < m; ++i) {
        double* p = paths.data() + static_cast<size_t>(i) * (steps + 1);
        for (int j = 0; j < slots; ++j) {
            const double sign = (i >> (slots - 1 - j)) & 1 ? -1.0 : 1.0;
            const double* g = segments.data() + static_cast<size_t>(j) * seg;
            for (int s = 0; s < seg; ++s) {
                const int at = j * seg + s;
                p[at + 1] = p[at] + sign * g[s];
            }
        }
    }
    return paths;
}

} // namespace

BrownianProductEnsemble::BrownianProductEnsemble(const EnsembleConfig& cfg) : cfg_(cfg) {
    validate(cfg_);
    a_ = generate_family(cfg_, cfg_.m1, 1);
    b_ = generate_family(cfg_, cfg_.m2, 2);
    space_ = uniform_space<double>(cfg_.m1 * cfg_.m2);
}

BrownianProductEnsemble::BrownianProductEnsemble(const EnsembleConfig& cfg,
                                                 std::vector<double> a, std::vector<double> b)
    : cfg_(cfg), a_(std::move(a)), b_(std::move(b)) {
    validate(cfg_);
    require(a_.size() == static_cast<size_t>(cfg_.m1) * (cfg_.steps + 1),
            "ensemble: A data size mismatch");
    require(b_.size() == static_cast<size_t>(cfg_.m2) * (cfg_.steps + 1),
            "ensemble: B data size mismatch");
    space_ = uniform_space<double>(cfg_.m1 * cfg_.m2);
}

int BrownianProductEnsemble::slots(Axis axis) const {
    if (cfg_.mode != PathMode::stratified) return 0;
    return log2_exact(axis == Axis::first ? cfg_.m1 : cfg_.m2);
}

bool BrownianProductEnsemble::slot_boundary(Axis axis, int s) const {
    if (s == 0 || s == cfg_.steps) return true;
    const int L = slots(axis);
    if (L == 0) return false;
    return s % (cfg_.steps / L) == 0;
}

PathFamilyStats family_stats(const BrownianProductEnsemble& ens, Axis axis) {
    const int m = axis == Axis::first ? ens.m1() : ens.m2();
    const int steps = ens.steps();
    const double dt = ens.dt();
    auto value = [&](int path, int s) {
        return axis == Axis::first ? ens.a(path, s) : ens.b(path, s);
    };

    // distinct draws: one stratified path covers every segment once
    const bool strat = ens.config().mode == PathMode::stratified;
    const int pool = strat ? 1 : m;
    const size_t n_draws = static_cast<size_t>(pool) * steps;
    double sum = 0.0, sum2 = 0.0, lag = 0.0;
    for (int i = 0; i < pool; ++i) {
        double prev = 0.0;
        for (int s = 0; s < steps; ++s) {
            const double d = value(i, s + 1) - value(i, s);
            sum += d;
            sum2 += d * d;
            if (s > 0) lag += prev * d;
            prev = d;
        }
    }
    PathFamilyStats out;
    const double nd = static_cast<double>(n_draws);
    out.mean_sigmas = std::abs(sum / nd) / std::sqrt(dt / nd);
    out.var_sigmas = std::abs(sum2 / nd / dt - 1.0) / std::sqrt(2.0 / nd);
    const double nl = nd - pool; // lag pairs per path: steps - 1
    out.corr_sigmas = std::abs(lag / nl) / (dt / std::sqrt(nl));

    double worst_qv = 0.0, tv = 0.0;
    for (int i = 0; i < m; ++i) {
        double qv = 0.0, av = 0.0;
        for (int s = 0; s < steps; ++s) {
            const double d = value(i, s + 1) - value(i, s);
            qv += d * d;
            av += std::abs(d);
        }
        worst_qv = std::max(worst_qv, std::abs(qv - ens.t()));
        tv += av;
    }
    out.worst_qv_sigmas = worst_qv / (dt * std::sqrt(2.0 * steps));
    out.mean_total_variation = tv / m;
    return out;
}

void save_ensemble(const BrownianProductEnsemble& ens, const std::string& data_path,
                   const std::string& meta_path) {
    const EnsembleConfig& cfg = ens.config();
    nlohmann::json meta;
    meta["seed"] = cfg.seed;
    meta["m1"] = cfg.m1;
    meta["m2"] = cfg.m2;
    meta["steps"] = cfg.steps;
    meta["t"] = cfg.t;
    meta["dt"] = cfg.dt();
    meta["mode"] = cfg.mode == PathMode::stratified ? "stratified" : "iid";
    meta["layout"] = "path-major-f64";
    {
        std::ofstream mf(meta_path);
        require(mf.good(), "save: cannot open sidecar for writing");
        mf << meta.dump(2) << "\n";
    }
    std::ofstream df(data_path, std::ios::binary);
    require(df.good(), "save: cannot open data file for writing");
    df.write(reinterpret_cast<const char*>(ens.a_raw().data()),
             static_cast<std::streamsize>(ens.a_raw().size() * sizeof(double)));
    df.write(reinterpret_cast<const char*>(ens.b_raw().data()),
             static_cast<std::streamsize>(ens.b_raw().size() * sizeof(double)));
    require(df.good(), "save: write failed");
}

BrownianProductEnsemble load_ensemble(const std::string& data_path,
                                      const std::string& meta_path) {
    std::ifstream mf(meta_path);
    require(mf.good(), "load: cannot open sidecar");
    nlohmann::json meta;
    try {
        mf >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("load: bad sidecar: ") + e.what());
    }
    require(meta.value("layout", "") == "path-major-f64", "load: unknown layout");
    EnsembleConfig cfg;
    cfg.seed = meta.at("seed").get<std::uint64_t>();
    cfg.m1 = meta.at("m1").get<int>();
    cfg.m2 = meta.at("m2").get<int>();
    cfg.steps = meta.at("steps").get<int>();
    cfg.t = meta.at("t").get<double>();
    cfg.mode = meta.at("mode").get<std::string>() == "iid" ? PathMode::iid
                                                           : PathMode::stratified;
    const size_t na = static_cast<size_t>(cfg.m1) * (cfg.steps + 1);
    const size_t nb = static_cast<size_t>(cfg.m2) * (cfg.steps + 1);
    std::ifstream df(data_path, std::ios::binary);
    require(df.good(), "load: cannot open data file");
    std::vector<double> a(na), b(nb);
    df.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(na * sizeof(double)));
    df.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(nb * sizeof(double)));
    require(df.gcount() == static_cast<std::streamsize>(nb * sizeof(double)),
            "load: data file truncated");
    return BrownianProductEnsemble(cfg, std::move(a), std::move(b));
}

} // namespace mlab
