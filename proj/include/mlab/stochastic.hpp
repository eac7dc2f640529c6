#ifndef MLAB_STOCHASTIC_HPP
#define MLAB_STOCHASTIC_HPP

// Elementary stochastic integrals against the product X_s Y_s of two
// martingales living on separate factors of a Brownian product ensemble:
// X_s = A_s V(B path), Y_s = U(A path) B_s, with bounded terminal
// functionals U, V. X is a martingale once the full B path is known and Y
// once the full A path is known, but the product need not be adapted to
// the common-knowledge filtration; that is the situation the transform
// estimates are built for.
//
// Integrands are step processes on a grid of step indices. Their values
// are produced by a functional that receives both paths truncated to the
// interval's left endpoint, so measurability at the left endpoint holds by
// construction rather than by a posteriori checking.

#include <cstdint>
#include <functional>
#include <vector>

#include "mlab/brownian.hpp"

namespace mlab {

enum class PathFunctional { one, sign_terminal, tanh_terminal };

double apply_functional(PathFunctional f, double terminal);

// X_s = A_s * v(B terminal), Y_s = u(A terminal) * B_s
struct MartingalePairSpec {
    PathFunctional v = PathFunctional::one;
    PathFunctional u = PathFunctional::one;
};

struct TimeGrid {
    std::vector<int> stops; // step indices, stops.front() = 0, stops.back() = steps
    int intervals() const { return static_cast<int>(stops.size()) - 1; }
};

// n equal intervals; n must divide the step count
TimeGrid dyadic_time_grid(int steps, int n);

// true if every grid stop is a slot boundary of both families; the exact
// identity checks require this, statistical ones do not
bool slot_aligned(const BrownianProductEnsemble& ens, const TimeGrid& grid);

struct PathPrefix {
    const double* values = nullptr; // steps 0..len-1
    int len = 0;
    double last() const { return values[len - 1]; }
};

using Integrand = std::function<double(const PathPrefix&, const PathPrefix&)>;

// values[k] is the integrand on (t_k, t_{k+1}]; by the left-continuity
// convention the time-zero value coincides with values[0]
struct ElementaryProcess {
    TimeGrid grid;
    std::vector<Rv<double>> values;
};

ElementaryProcess make_elementary(const BrownianProductEnsemble& ens, const TimeGrid& grid,
                                  const Integrand& fn);
ElementaryProcess constant_elementary(const BrownianProductEnsemble& ens, const TimeGrid& grid,
                                      double c);
ElementaryProcess scale_elementary(const ElementaryProcess& h, double c);

Rv<double> process_x(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                     int step);
Rv<double> process_y(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                     int step);

// sum_k K_k (X_{t_{k+1}} Y_{t_{k+1}} - X_{t_k} Y_{t_k}) per outcome
Rv<double> stochastic_integral(const BrownianProductEnsemble& ens,
                               const MartingalePairSpec& spec, const ElementaryProcess& h);

// (E sum K^2 (dX)^2 + E sum K^2 (dY)^2)^{1/2}
double seminorm(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                const ElementaryProcess& h);

// redundant partition point: same integrand value on both halves
ElementaryProcess insert_point(const ElementaryProcess& h, int step);

struct RepresentationReport {
    double integral_gap = 0;
    double seminorm_gap = 0;
};
RepresentationReport representation_check(const BrownianProductEnsemble& ens,
                                          const MartingalePairSpec& spec,
                                          const ElementaryProcess& h, int step);

// |seminorm^2 - ||sum K dX||_2^2 - ||sum K dY||_2^2|
double integral_isometry_gap(const BrownianProductEnsemble& ens,
                             const MartingalePairSpec& spec, const ElementaryProcess& h);

// groups paths by exact equality of the value prefix up to `step`
Partition prefix_partition(const BrownianProductEnsemble& ens, Axis axis, int step);

// worst conditional mean of a grid increment given the prefix classes at
// the interval's left endpoint, over both families; zero to rounding on a
// slot-aligned grid of a stratified ensemble
double martingale_mean_gap(const BrownianProductEnsemble& ens, const TimeGrid& grid);

// || integral ||_{4/3} / (seminorm * (||X_t||_4 + ||Y_t||_4)); 0 when the
// denominator vanishes
double normalized_integral_ratio(const BrownianProductEnsemble& ens, const MartingalePairSpec& spec,
                        const ElementaryProcess& h);

struct RefinementReport {
    std::vector<int> levels;
    std::vector<double> ratios;
    double spread = 0; // max ratio / min ratio
};
RefinementReport refinement_study(const BrownianProductEnsemble& ens,
                                  const MartingalePairSpec& spec,
                                  const std::vector<int>& levels, const Integrand& fn);

// Quantified cap for |integrand| <= 1, every factor measured on the
// ensemble: splitting plus the 3/2 cross-transform estimate on each half
// plus Cauchy-Schwarz and Hoelder on the remainder,
//   1.5 ||X_t||_4 (E sum dY^2)^{1/2} + 1.5 ||Y_t||_4 (E sum dX^2)^{1/2}
//   + (E sum dX^2)^{1/2} ||(sum dY^2)^{1/2}||_4.
double elementary_integral_cap(const BrownianProductEnsemble& ens,
                               const MartingalePairSpec& spec, const TimeGrid& grid);

struct BoundednessReport {
    int trials = 0;
    double worst_norm = 0; // max ||integral||_{4/3} over sampled |K| <= 1
    double cap = 0;
    double worst_ratio = 0;
    bool capped = false;
};
BoundednessReport boundedness_check(const BrownianProductEnsemble& ens,
                                    const MartingalePairSpec& spec, int n, int trials,
                                    std::uint64_t seed);

// refining left-endpoint approximations of the clipped path target
// K_s = clamp(A_s, [-1, 1]); distances between consecutive integrals
struct CauchyReport {
    std::vector<int> levels;
    std::vector<double> distances;          // ||integral_{j+1} - integral_j||_{4/3}
    std::vector<double> seminorm_distances; // ||H_{j+1} - H_j|| on the finer grid
    bool decreasing = false;
};
CauchyReport cauchy_convergence(const BrownianProductEnsemble& ens,
                                const MartingalePairSpec& spec,
                                const std::vector<int>& levels);

// Ratio of ||X_t||_4 + ||Y_t||_4 between a doubled-path iid ensemble and
// the base one; a ratio far from 1 flags a spec without stable fourth
// moments. Built-in functionals are bounded, so the ratio stays near 1.
double moment_stability(const MartingalePairSpec& spec, const EnsembleConfig& base);

// With U, V the terminal signs, X_e Y_e is far from its conditional
// expectation given the time-e common-knowledge classes, demonstrating
// non-adaptedness; with U = V = 1 the product is exactly measurable.
struct NonadaptedReport {
    int replicas = 0;
    // E (X_e Y_e - E(X_e Y_e | H_e))^2 / E (X_e Y_e)^2, averaged over
    // replicas; the normalization cancels the path-scale factor so the
    // statistic is the unexplained variance fraction.
    double residual_mean = 0;
    double residual_se = 0;
    double sigma_margin = 0;
    double adapted_gap = 0;   // measurability gap of the U = V = 1 product
    double worst_qv_sigmas = 0;
    double mean_total_variation = 0;
};
NonadaptedReport nonadapted_demo(std::uint64_t seed, int replicas);

} // namespace mlab

#endif
