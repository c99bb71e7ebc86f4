#ifndef OPBW_PAIRWALK_HPP
#define OPBW_PAIRWALK_HPP

#include <cstdint>
#include <vector>

#include "opbw/backbone.hpp"
#include "opbw/environment.hpp"
#include "opbw/rng.hpp"
#include "opbw/survival.hpp"
#include "opbw/walk.hpp"

namespace opbw {

// Two walks drawn independently in one environment, started at the same
// time, with their per-step sup-norm distances.
struct PairTrace {
    WalkPath first;
    WalkPath second;
    std::vector<int32_t> distance;  // distance[i] = ||X_i - X'_i||, i = 0..steps
};

PairTrace sample_pair(const BackboneField& backbone, const EnvironmentWindow& env, const Site& start1,
                      const Site& start2, int steps, SplitMix64& rng);

// default close-encounter radius: ceil(log^2 N), natural log
int32_t encounter_radius(int N);

// #{1 <= i <= N : distance[i] < radius}
int64_t encounter_count(const PairTrace& trace, int N, int32_t radius);

// Renewal surrogate: times t at which the walk sits on the backbone and its
// entire past lies inside the backward speed-1 cone of (X_t, t). A stand-in
// for regeneration-time gap statistics; the joint version requires the cone
// condition of both walks simultaneously.
struct RenewalSurrogate {
    std::vector<int32_t> times;  // absolute times, strictly increasing
    std::vector<int32_t> gaps;   // consecutive differences
    int32_t max_gap = 0;         // 0 when fewer than two renewals
    int32_t gap_bound = 0;       // ceil(log^2 N) used for the indicator
    bool all_gaps_within_bound = false;
};

RenewalSurrogate cone_renewal_gaps(const WalkPath& path, const BackboneField& backbone, int N);
RenewalSurrogate joint_cone_renewal_gaps(const PairTrace& trace, const BackboneField& backbone, int N);

// Exact law of the difference of two independent p=1 walks after i steps
// per axis: used as the closed-form oracle for encounter counts on the full
// cluster. Returns sum_{i=1..N} P(||D_i|| < radius) for a pair started at
// distance `initial_gap` on the first axis.
double expected_encounters_full_cluster(int d, int N, int32_t radius, int32_t initial_gap);

struct EncounterReplica {
    int64_t index = 0;
    uint64_t env_seed = 0;
    int32_t start_gap = 0;
    int64_t count = 0;
    bool exceeded = false;
    int64_t renewal_count = 0;  // joint cone renewals
    int32_t max_gap = 0;
    bool gaps_within_bound = false;
};

struct EncounterTailResult {
    int N = 0;
    double epsilon = 0.0;
    int32_t radius = 0;
    double threshold = 0.0;  // N^{1/2+epsilon}
    std::vector<EncounterReplica> replicas;
    double exceedance = 0.0;
    WilsonInterval ci;
};

// Fraction of replicas (fresh environment, fresh pair) whose close-encounter
// count before time N exceeds N^{1/2+epsilon}. Starts cycle through the
// given first-axis gaps so no single initial placement is privileged.
EncounterTailResult encounter_tail_experiment(int d, double p, int N, double epsilon, int64_t replicas,
                                              uint64_t seed, const std::vector<int32_t>& start_gaps,
                                              int threads = 1, int32_t horizon_margin = 50);

}  // namespace opbw

#endif
