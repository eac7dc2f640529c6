#ifndef MLAB_BROWNIAN_HPP
#define MLAB_BROWNIAN_HPP

// Discrete Brownian path ensembles. Two independent families A and B hold
// m1 resp. m2 paths sampled on a uniform grid of `steps` increments over
// [0, t]; an outcome of the product space is a pair of path indices with
// weight 1/(m1 m2).
//
// The default construction is sign-stratified: time splits into L = log2(m)
// slots, one Gaussian segment is drawn per slot, and path i uses slot j's
// segment with the sign of bit L-1-j of i. Each path is then a genuine
// discrete Brownian path, while across paths every empirical conditional
// expectation of post-slot increments given a slot-boundary prefix is zero
// by cancellation, not just in the large-sample limit. That makes the
// ensemble an exact instance of the finite martingale model, so identity
// checks (isometry, representation independence) hold to rounding error.
// The iid mode draws every path independently and only satisfies the
// martingale identities statistically.

#include <cstdint>
#include <string>
#include <vector>

#include "mlab/product.hpp"
#include "mlab/rng.hpp"

namespace mlab {

enum class PathMode { stratified, iid };

struct EnsembleConfig {
    int m1 = 256;
    int m2 = 256;
    int steps = 1024;
    double t = 1.0;
    std::uint64_t seed = 1;
    PathMode mode = PathMode::stratified;

    double dt() const { return t / steps; }
};

class BrownianProductEnsemble {
public:
    explicit BrownianProductEnsemble(const EnsembleConfig& cfg);
    // wraps precomputed path data (loading snapshots); sizes must match
    BrownianProductEnsemble(const EnsembleConfig& cfg, std::vector<double> a,
                            std::vector<double> b);

    const EnsembleConfig& config() const { return cfg_; }
    int m1() const { return cfg_.m1; }
    int m2() const { return cfg_.m2; }
    int steps() const { return cfg_.steps; }
    double t() const { return cfg_.t; }
    double dt() const { return cfg_.dt(); }

    // path value at step s = 0..steps; every path starts at zero
    double a(int path, int s) const { return a_[at(path, s)]; }
    double b(int path, int s) const { return b_[at(path, s)]; }
    const double* a_path(int path) const { return a_.data() + at(path, 0); }
    const double* b_path(int path) const { return b_.data() + at(path, 0); }
    const std::vector<double>& a_raw() const { return a_; }
    const std::vector<double>& b_raw() const { return b_; }

    const SpacePtr<double>& space() const { return space_; }
    int index(int i, int j) const { return i * cfg_.m2 + j; }

    // slot structure of the stratified design (0 slots in iid mode)
    int slots(Axis axis) const;
    bool slot_boundary(Axis axis, int s) const;

private:
    size_t at(int path, int s) const {
        return static_cast<size_t>(path) * (cfg_.steps + 1) + static_cast<size_t>(s);
    }
    EnsembleConfig cfg_;
    std::vector<double> a_, b_;
    SpacePtr<double> space_;
};

// Pooled sanity statistics of one family, in standard-error units. The
// distinct-draw stream is path 0 in stratified mode (all signs +1, so its
// increments are exactly the raw segments) and all paths pooled in iid mode.
struct PathFamilyStats {
    double mean_sigmas = 0;       // pooled increment mean against zero
    double var_sigmas = 0;        // pooled increment variance against dt
    double corr_sigmas = 0;       // lag-1 autocorrelation of the draw stream
    double worst_qv_sigmas = 0;   // per-path quadratic variation against t
    double mean_total_variation = 0;
};

PathFamilyStats family_stats(const BrownianProductEnsemble& ens, Axis axis);

// Snapshot persistence: raw little-endian doubles, A block then B block,
// each path-major with steps+1 values per path; the sidecar records the
// config and layout. Loading restores the ensemble bit for bit.
void save_ensemble(const BrownianProductEnsemble& ens, const std::string& data_path,
                   const std::string& meta_path);
BrownianProductEnsemble load_ensemble(const std::string& data_path,
                                      const std::string& meta_path);

} // namespace mlab

#endif
