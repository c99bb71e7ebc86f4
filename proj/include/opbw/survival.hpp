#ifndef OPBW_SURVIVAL_HPP
#define OPBW_SURVIVAL_HPP

#include <cstdint>
#include <optional>
#include <vector>

namespace opbw {

// 95% Wilson score interval for a binomial proportion.
struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};
WilsonInterval wilson_interval(int64_t successes, int64_t trials, double z = 1.959963984540054);

struct SurvivalPoint {
    double p = 0.0;
    int64_t replicas = 0;
    int64_t survived = 0;
    double fraction = 0.0;
    WilsonInterval ci;
};

struct SurvivalScan {
    int d = 1;
    int32_t horizon = 0;
    std::vector<SurvivalPoint> points;
    // smallest grid p whose survival CI lower bound exceeds the threshold
    std::optional<double> working_point(double threshold = 0.3) const;
};

// Empirical probability that the origin is connected to the horizon,
// per value of p. Certifies a supercritical working point for a run; no
// critical value is assumed from elsewhere.
SurvivalScan survival_scan(int d, const std::vector<double>& p_values, int32_t horizon,
                           int64_t replicas, uint64_t seed, int threads = 1);

}  // namespace opbw

#endif
