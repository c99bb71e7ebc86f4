#ifndef OPBW_LLT_HPP
#define OPBW_LLT_HPP

#include <cstdint>
#include <vector>

#include "opbw/backbone.hpp"
#include "opbw/density.hpp"
#include "opbw/environment.hpp"
#include "opbw/pmf.hpp"
#include "opbw/walk.hpp"

namespace opbw {

// Anchored tiling of Z^d into cubes of side ell: box k spans
// [k*ell, (k+1)*ell) per axis. Every site belongs to exactly one box.
struct BoxPartition {
    int d = 1;
    int32_t side = 1;

    Box box_containing(const Coord& x) const {
        Box b;
        for (int i = 0; i < d; ++i) {
            b.lo[static_cast<size_t>(i)] =
                static_cast<int32_t>(floor_div(x[static_cast<size_t>(i)], side) * side);
            b.extent[static_cast<size_t>(i)] = side;
        }
        return b;
    }
    // anchor of the box containing x, as a box id per axis
    Coord box_id(const Coord& x) const {
        Coord id{};
        for (int i = 0; i < d; ++i)
            id[static_cast<size_t>(i)] = static_cast<int32_t>(floor_div(x[static_cast<size_t>(i)], side));
        return id;
    }
};

BoxPartition partition_boxes(int d, int32_t side);

// sum over the union of supports of |nu1 - nu2| at their common slice time
double l1_distance(const SpatialPmf& nu1, const SpatialPmf& nu2);

// Space-time convolution with the quenched transition semigroup:
// (nu * que)_k(x, t+k) = sum_y nu(y,t) P_omega^{(y,t)}(X_{t+k} = x),
// i.e. the forward evolution of nu by k quenched steps.
SpatialPmf convolve_quenched(const BackboneField& backbone, const EnvironmentWindow& env,
                             const SpatialPmf& nu1, int k);

// The three slice measures interpolating between the annealed law with
// density prefactor and the quenched law, with the box-smoothed middle
// measure on the anchored partition of side ell.
struct HybridMeasureSet {
    int32_t time = 0;
    int32_t box_side = 1;
    SpatialPmf ann_pre;   // annealed(x) * phi(x) / Z
    SpatialPmf quenched;  // quenched law
    SpatialPmf box_pre;   // quenched box mass smeared by phi within each box
    double z = 0.0;       // sum_x annealed(x) * phi(x)
    int64_t degenerate_boxes = 0;  // boxes whose phi sum vanished (mass spread uniformly)
};

HybridMeasureSet hybrid_measures(const BackboneField& backbone, const EnvironmentWindow& env, int32_t n,
                                 int32_t ell, const DensityField& phi, const SpatialPmf& annealed);

// Z_{omega,n} = sum_x annealed(x) * phi(x); tends to 1 as n grows.
double z_normalizer(const SpatialPmf& annealed, const DensityField& phi);

// The local-limit comparison statistic at slice n:
//   raw        = sum_x |quenched(x) - annealed(x) * phi(x)|
//   normalized = sum_x |quenched(x) - annealed(x) * phi(x) / Z|
struct LltStatistic {
    double raw = 0.0;
    double normalized = 0.0;
    double z = 0.0;
};

LltStatistic llt_statistic(const SpatialPmf& quenched, const SpatialPmf& annealed,
                           const DensityField& phi);

// One evaluation of the three-distance chain between the hybrid measures,
// with k intermediate quenched steps and partition side ell:
//   l1_ann:  || nu_ann_pre(.,n) - (nu_ann_pre * nu_que)_k ||_1
//   l2_box:  || (nu_ann_pre * nu_que)_k - (nu_box_pre * nu_que)_k ||_1
//   l3_que:  || (nu_box_pre * nu_que)_k - (nu_que * nu_que)_k ||_1
// The comparison statistic obeys raw <= l1 + l2 + l3 + |Z_n - 1| up to
// floating-point slack; triangle_slack records that margin.
struct LltChainReport {
    int n = 0;
    int k = 0;
    int32_t ell = 1;
    LltStatistic stat;
    double l1_ann = 0.0;
    double l2_box = 0.0;
    double l3_que = 0.0;
    double z_at_n = 0.0;
    double z_at_nk = 0.0;
    int64_t degenerate_boxes = 0;
    double triangle_slack = 0.0;
};

LltChainReport llt_chain(const BackboneField& backbone, const EnvironmentWindow& env, int32_t n, int k,
                         int32_t ell, const DensityField& phi_n, const DensityField& phi_nk,
                         const SpatialPmf& annealed_n, const SpatialPmf& annealed_nk);

enum class BoxEvent { G1, G2, G4 };

// Quenched-annealed box comparison events for a walk from z = (x,m):
//  G4: every partition box of side ceil(N^{theta/2}) at time N satisfies
//      |quenched box mass - annealed box mass| <= N^{-d(1-theta)/2 - (3/20)theta}.
//  G1: over a grid of intermediate times M in [2N/5, N], every box inside
//      the diffusive window satisfies |q - a| <= N^{d(theta-1)/2}.
//  G2: same scan as G1 on the quenched mass alone against
//      log^h(N) * N^{-d(1-theta)/2}; the report carries the smallest
//      integer h >= 0 that makes the event hold.
struct BoxEventReport {
    BoxEvent which = BoxEvent::G4;
    int N = 0;
    double theta = 0.0;
    int32_t box_side = 0;
    double max_discrepancy = 0.0;  // max |q - a| (G1/G4) or max quenched box mass (G2)
    double threshold = 0.0;
    bool holds = false;            // max <= threshold
    bool off_backbone = false;     // xi_m(x) = 0 at the start site
    int smallest_h = 0;            // G2 only
    std::vector<int> m_grid;       // absolute times scanned (G1/G2)
};

// The annealed side is a family of averaged (or analytic) laws for the
// step counts the event needs, all started from the origin at time 0.
struct AnnealedFamily {
    std::vector<int> step_counts;
    std::vector<SpatialPmf> laws;

    const SpatialPmf& law_for(int steps) const;
};

// grid of absolute times scanned by G1/G2: eight equally spaced values in
// [2N/5, N], deduplicated and sorted
std::vector<int> box_event_m_grid(int N);

// validity window for start sites z: |x_i| <= sqrt(N) log^3(N) / 24 and
// 0 <= m <= N/3
bool in_start_window(int d, const Site& z, int N);

BoxEventReport box_comparison_event(const BackboneField& backbone, const EnvironmentWindow& env,
                                    const Site& z, int N, double theta, BoxEvent which,
                                    const AnnealedFamily& annealed);

}  // namespace opbw

#endif
