#include "opbw/survival.hpp"

#include <cmath>

#include "opbw/backbone.hpp"
#include "opbw/environment.hpp"
#include "opbw/parallel.hpp"
#include "opbw/rng.hpp"

namespace opbw {

WilsonInterval wilson_interval(int64_t successes, int64_t trials, double z) {
    WilsonInterval w;
    if (trials <= 0) return w;
    double n = static_cast<double>(trials);
    double phat = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double centre = phat + z2 / (2.0 * n);
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    w.lo = (centre - half) / denom;
    w.hi = (centre + half) / denom;
    if (w.lo < 0.0) w.lo = 0.0;
    if (w.hi > 1.0) w.hi = 1.0;
    return w;
}

SurvivalScan survival_scan(int d, const std::vector<double>& p_values, int32_t horizon,
                           int64_t replicas, uint64_t seed, int threads) {
    if (replicas < 1) throw std::invalid_argument("survival_scan: replicas must be >= 1");
    if (horizon < 1) throw std::invalid_argument("survival_scan: horizon must be >= 1");

    SurvivalScan scan;
    scan.d = d;
    scan.horizon = horizon;

    // the cone of the origin up to the horizon fits exactly
    LatticeGeometry g = LatticeGeometry::create(d, horizon, 0, horizon);
    const Coord o = origin_coord();

    for (size_t pi = 0; pi < p_values.size(); ++pi) {
        double p = p_values[pi];
        std::vector<uint8_t> alive(static_cast<size_t>(replicas), 0);
        parallel_for(replicas, threads, [&](int64_t r) {
            uint64_t env_seed = derive_seed(seed, kStreamScan, (static_cast<uint64_t>(pi) << 32) | static_cast<uint64_t>(r));
            EnvironmentWindow env = EnvironmentWindow::generate(g, p, env_seed);
            BackboneField bb = BackboneField::compute(env, horizon);
            alive[static_cast<size_t>(r)] = bb.on_backbone_unchecked(o, 0) ? 1 : 0;
        });
        SurvivalPoint pt;
        pt.p = p;
        pt.replicas = replicas;
        for (uint8_t a : alive) pt.survived += a;
        pt.fraction = static_cast<double>(pt.survived) / static_cast<double>(replicas);
        pt.ci = wilson_interval(pt.survived, replicas);
        scan.points.push_back(pt);
    }
    return scan;
}

std::optional<double> SurvivalScan::working_point(double threshold) const {
    for (const SurvivalPoint& pt : points)
        if (pt.ci.lo > threshold) return pt.p;
    return std::nullopt;
}

}  // namespace opbw
