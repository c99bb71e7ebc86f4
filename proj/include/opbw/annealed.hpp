#ifndef OPBW_ANNEALED_HPP
#define OPBW_ANNEALED_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "opbw/pmf.hpp"
#include "opbw/survival.hpp"

namespace opbw {

// Laws needed by the derivative estimates at one grid point n: the law from
// the origin after n and n-1 steps, and after n-1 steps from a start
// displaced by +e1 in space and by +1 in time (both observed at slice n).
// For the p = 1 closed form the shifted entries are exact translations; the
// Monte Carlo variant estimates each from shared environments and carries
// standard errors.
struct LawsAtN {
    int n = 0;
    SpatialPmf from_origin;          // n steps from (o, 0)
    SpatialPmf from_origin_minus1;   // n-1 steps from (o, 0)
    SpatialPmf from_shifted_space;   // n steps from (e1, 0)
    SpatialPmf from_shifted_time;    // n-1 steps from (o, 1), slice n
    std::optional<double> max_stderr;  // MC only: largest per-site standard error seen
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    int points = 0;
};

// least squares of log(value) against log(n); points with value <= 0 or a
// noise flag are excluded
SlopeFit fit_log_slope(const std::vector<int>& n_grid, const std::vector<double>& values,
                       const std::vector<uint8_t>& exclude);

struct DerivativeReport {
    std::vector<int> n_grid;
    // sup over x of the four differences, per n
    std::vector<double> start_space;   // law(o,.) vs law(e1,.)
    std::vector<double> start_time;    // start (o,0) vs (o,1), same slice
    std::vector<double> target_space;  // law(x) vs law(x+e1)
    std::vector<double> target_time;   // slice n vs slice n-1
    std::vector<double> sup_law;       // sup_x law(x)
    std::vector<uint8_t> noise_flag;   // 1 when MC error dominates the measured difference
    SlopeFit start_space_slope, start_time_slope, target_space_slope, target_time_slope, sup_law_slope;
};

// Closed-form laws at p = 1.
std::vector<LawsAtN> analytic_laws_for_derivatives(int d, const std::vector<int>& n_grid);

// Averaged-law variant sharing environments across the three starts.
std::vector<LawsAtN> mc_laws_for_derivatives(int d, double p, const std::vector<int>& n_grid,
                                             int64_t replicas, uint64_t seed, int threads = 1,
                                             int32_t horizon_margin = 50);

DerivativeReport derivative_estimates(const std::vector<LawsAtN>& laws);

// Partition smoothness sum at box side floor(n^epsilon):
//   sum over boxes, sum over x in box of (max over the box - value at x).
double partition_smoothness(const SpatialPmf& law, double epsilon);

struct DisplacementTailPoint {
    int n = 0;
    int64_t radius = 0;          // ceil(sqrt(n) log^3 N)
    double annealed_tail = 0.0;  // mean over environments of the quenched tail mass
    double h_threshold = 0.0;    // quenched tail bound defining the concentration event
    double h_frequency = 0.0;    // fraction of environments whose quenched tail met it
    int64_t replicas = 0;
};

// Annealed displacement-tail estimate at radius sqrt(n) log^3 N, plus the
// per-environment event that the quenched tail stays below the square root
// of the annealed estimate (the default threshold).
std::vector<DisplacementTailPoint> displacement_tail(int d, double p, const std::vector<int>& n_grid,
                                                     int N, int64_t replicas, uint64_t seed,
                                                     int threads = 1, int32_t horizon_margin = 50);

}  // namespace opbw

#endif
