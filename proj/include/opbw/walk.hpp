#ifndef OPBW_WALK_HPP
#define OPBW_WALK_HPP

#include <cstdint>
#include <vector>

#include "opbw/backbone.hpp"
#include "opbw/environment.hpp"
#include "opbw/lattice.hpp"
#include "opbw/pmf.hpp"
#include "opbw/rng.hpp"
#include "opbw/view.hpp"

namespace opbw {

// One-step transition law at a site: weight per displacement z, ||z|| <= 1,
// indexed in neighborhood_displacements order. On the backbone the walk
// steps uniformly onto the open successors (at least one exists below the
// horizon by construction); off it, uniformly onto all 3^d neighbours.
struct LocalKernel {
    Site site;
    int d = 1;
    std::vector<double> weights;

    double weight_of(const Coord& displacement) const;
    double sum() const;
};

LocalKernel step_distribution(const BackboneField& backbone, const EnvironmentWindow& env, const Site& site);

// Kernel of the environment-seen-from-the-particle chain at the view's
// origin: proportional to xi at time 1 when the origin site is open and
// some neighbour survives, uniform otherwise. Coincides with
// step_distribution at the viewed site.
LocalKernel g_kernel(const EnvironmentView& view);

// Samples a displacement from g_kernel and returns the view shifted by
// (Y, 1). Iterating realizes the point-of-view-of-the-particle chain.
EnvironmentView environment_chain_step(const EnvironmentView& view, SplitMix64& rng);

struct WalkPath {
    Site start;
    std::vector<Coord> positions;  // positions[k] = X_{start.n + k}, positions[0] = start.x

    int steps() const { return static_cast<int>(positions.size()) - 1; }
};

WalkPath sample_path(const BackboneField& backbone, const EnvironmentWindow& env, const Site& start,
                     int steps, SplitMix64& rng);

// Pushes a slice measure forward through the quenched kernels:
//   out(z, t+k) = sum_y init(y, t) * P_omega^{(y,t)}(X_{t+k} = z).
// The support box grows by one per step; every touched site must lie in
// the window with time below the horizon. Mass-preserving.
SpatialPmf forward_evolve(const BackboneField& backbone, const EnvironmentWindow& env,
                          const SpatialPmf& init, int steps);

// Same push restricted to the fixed initial box: mass stepping outside is
// dropped. Values at sites whose backward cone stays inside the box are
// identical to the growing variant; used by the density estimator, whose
// reads sit at least `steps` away from the box edge. Needs the box padded
// by one inside the window for the successor probes.
SpatialPmf forward_evolve_clipped(const BackboneField& backbone, const EnvironmentWindow& env,
                                  const SpatialPmf& init, int steps);

// Exact quenched law by forward dynamic programming from a point mass.
SpatialPmf quenched_law(const BackboneField& backbone, const EnvironmentWindow& env, const Site& start,
                        int steps);

// Mean over independent environments of the exact quenched law, with
// per-site standard errors. Deterministic given the seed.
AveragedLaw annealed_law(int d, double p, const Site& start, int steps, int64_t replicas, uint64_t seed,
                         int threads = 1, int32_t horizon_margin = 50);

// One quenched-law DP per replica, harvesting the slices named in
// step_counts (ascending). Shares the environment work across step counts.
std::vector<AveragedLaw> annealed_law_family(int d, double p, const Site& start,
                                             const std::vector<int>& step_counts, int64_t replicas,
                                             uint64_t seed, int threads = 1, int32_t horizon_margin = 50);

// The p = 1 law in closed form: n-fold convolution of the uniform law on
// {z : ||z|| <= 1}, built as a product of per-axis convolution powers.
// Independent of the DP code paths so it can serve as an oracle.
SpatialPmf analytic_uniform_law(int d, const Site& start, int steps);

}  // namespace opbw

#endif
