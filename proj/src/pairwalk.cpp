#include "opbw/pairwalk.hpp"

#include <cmath>
#include <string>

#include "opbw/parallel.hpp"

namespace opbw {

PairTrace sample_pair(const BackboneField& backbone, const EnvironmentWindow& env, const Site& start1,
                      const Site& start2, int steps, SplitMix64& rng) {
    if (start1.n != start2.n)
        throw std::invalid_argument("sample_pair: the two walks must start at the same time");
    PairTrace trace;
    trace.first = sample_path(backbone, env, start1, steps, rng);
    trace.second = sample_path(backbone, env, start2, steps, rng);
    trace.distance.resize(static_cast<size_t>(steps) + 1);
    const int d = env.geometry().d();
    for (int k = 0; k <= steps; ++k)
        trace.distance[static_cast<size_t>(k)] =
            sup_norm(trace.first.positions[static_cast<size_t>(k)],
                     trace.second.positions[static_cast<size_t>(k)], d);
    return trace;
}

int32_t encounter_radius(int N) {
    double l = std::log(static_cast<double>(N));
    return static_cast<int32_t>(std::ceil(l * l));
}

int64_t encounter_count(const PairTrace& trace, int N, int32_t radius) {
    if (static_cast<int>(trace.distance.size()) <= N)
        throw std::invalid_argument("encounter_count: trace shorter than N steps");
    int64_t count = 0;
    for (int i = 1; i <= N; ++i)
        if (trace.distance[static_cast<size_t>(i)] < radius) ++count;
    return count;
}

namespace {

// Incremental cone test: the past of (X_t, t) lies in its backward cone iff
// per axis max_{s<t}(X_s,i + s) <= x_i + t and min_{s<t}(X_s,i - s) >= x_i - t.
struct ConeTracker {
    int d;
    std::array<int64_t, kMaxDim> max_plus{};
    std::array<int64_t, kMaxDim> min_minus{};
    bool first = true;

    explicit ConeTracker(int dim) : d(dim) {}

    bool is_cone_point(const Coord& x, int64_t t) const {
        if (first) return true;
        for (int i = 0; i < d; ++i) {
            int64_t xi = x[static_cast<size_t>(i)];
            if (max_plus[static_cast<size_t>(i)] > xi + t) return false;
            if (min_minus[static_cast<size_t>(i)] < xi - t) return false;
        }
        return true;
    }
    void absorb(const Coord& x, int64_t t) {
        for (int i = 0; i < d; ++i) {
            int64_t xi = x[static_cast<size_t>(i)];
            if (first || xi + t > max_plus[static_cast<size_t>(i)]) max_plus[static_cast<size_t>(i)] = xi + t;
            if (first || xi - t < min_minus[static_cast<size_t>(i)]) min_minus[static_cast<size_t>(i)] = xi - t;
        }
        first = false;
    }
};

RenewalSurrogate collect_renewals(const std::vector<const WalkPath*>& paths, const BackboneField& backbone,
                                  int N) {
    RenewalSurrogate out;
    out.gap_bound = encounter_radius(N);
    const int d = backbone.geometry().d();
    const int steps = paths[0]->steps();
    std::vector<ConeTracker> trackers(paths.size(), ConeTracker(d));

    for (int k = 0; k <= steps; ++k) {
        int64_t t = paths[0]->start.n + k;
        bool renewal = true;
        for (size_t j = 0; j < paths.size(); ++j) {
            const Coord& x = paths[j]->positions[static_cast<size_t>(k)];
            if (!trackers[j].is_cone_point(x, t) ||
                !backbone.on_backbone_unchecked(x, static_cast<int32_t>(t))) {
                renewal = false;
            }
        }
        if (renewal) out.times.push_back(static_cast<int32_t>(t));
        for (size_t j = 0; j < paths.size(); ++j)
            trackers[j].absorb(paths[j]->positions[static_cast<size_t>(k)], t);
    }

    out.gaps.reserve(out.times.size());
    for (size_t i = 1; i < out.times.size(); ++i) {
        int32_t gap = out.times[i] - out.times[i - 1];
        out.gaps.push_back(gap);
        if (gap > out.max_gap) out.max_gap = gap;
    }
    out.all_gaps_within_bound = out.max_gap <= out.gap_bound;
    return out;
}

}  // namespace

RenewalSurrogate cone_renewal_gaps(const WalkPath& path, const BackboneField& backbone, int N) {
    return collect_renewals({&path}, backbone, N);
}

RenewalSurrogate joint_cone_renewal_gaps(const PairTrace& trace, const BackboneField& backbone, int N) {
    return collect_renewals({&trace.first, &trace.second}, backbone, N);
}

double expected_encounters_full_cluster(int d, int N, int32_t radius, int32_t initial_gap) {
    // difference of two independent uniform {-1,0,1} steps per axis
    const double q[5] = {1.0 / 9.0, 2.0 / 9.0, 3.0 / 9.0, 2.0 / 9.0, 1.0 / 9.0};

    // evolve one axis law and record P(|D_i| < radius) per step; the double
    // buffers start zeroed and every step assigns its whole reachable range,
    // so unassigned cells stay exactly zero
    auto axis_inside = [&](int32_t start_offset) {
        std::vector<double> inside(static_cast<size_t>(N) + 1, 0.0);
        const int64_t R = 2 * static_cast<int64_t>(N) + std::abs(start_offset) + 2;  // centre index
        const int64_t len = 2 * R + 1;
        std::vector<double> law(static_cast<size_t>(len), 0.0);
        std::vector<double> next(static_cast<size_t>(len), 0.0);
        law[static_cast<size_t>(R + start_offset)] = 1.0;
        for (int i = 1; i <= N; ++i) {
            const int64_t reach = 2 * static_cast<int64_t>(i) + std::abs(start_offset);
            for (int64_t x = R - reach; x <= R + reach; ++x) {
                double acc = 0.0;
                for (int j = -2; j <= 2; ++j) {
                    int64_t y = x - j;
                    if (y >= 0 && y < len) acc += law[static_cast<size_t>(y)] * q[static_cast<size_t>(j + 2)];
                }
                next[static_cast<size_t>(x)] = acc;
            }
            law.swap(next);
            double s = 0.0;
            for (int64_t x = R - radius + 1; x <= R + radius - 1; ++x) s += law[static_cast<size_t>(x)];
            inside[static_cast<size_t>(i)] = s;
        }
        return inside;
    };

    std::vector<double> gap_inside = axis_inside(initial_gap);
    const std::vector<double>* other_axes = &gap_inside;
    std::vector<double> zero_inside;
    if (d > 1 && initial_gap != 0) {
        zero_inside = axis_inside(0);
        other_axes = &zero_inside;
    }

    double total = 0.0;
    for (int i = 1; i <= N; ++i) {
        double p = gap_inside[static_cast<size_t>(i)];
        for (int ax = 1; ax < d; ++ax) p *= (*other_axes)[static_cast<size_t>(i)];
        total += p;
    }
    return total;
}

EncounterTailResult encounter_tail_experiment(int d, double p, int N, double epsilon, int64_t replicas,
                                              uint64_t seed, const std::vector<int32_t>& start_gaps,
                                              int threads, int32_t horizon_margin) {
    if (replicas < 100) throw std::invalid_argument("encounter_tail_experiment: replicas must be >= 100");
    if (start_gaps.empty()) throw std::invalid_argument("encounter_tail_experiment: need start gaps");

    EncounterTailResult result;
    result.N = N;
    result.epsilon = epsilon;
    result.radius = encounter_radius(N);
    result.threshold = std::pow(static_cast<double>(N), 0.5 + epsilon);

    int32_t max_gap = 0;
    for (int32_t gp : start_gaps) max_gap = std::max(max_gap, std::abs(gp));
    const LatticeGeometry g = LatticeGeometry::create(d, N + max_gap + 1, 0, N + horizon_margin);
    const int32_t horizon = g.t_max();

    result.replicas.resize(static_cast<size_t>(replicas));
    parallel_for(replicas, threads, [&](int64_t r) {
        EncounterReplica& rec = result.replicas[static_cast<size_t>(r)];
        rec.index = r;
        rec.env_seed = derive_seed(seed, kStreamReplicaEnv, static_cast<uint64_t>(r));
        rec.start_gap = start_gaps[static_cast<size_t>(r % static_cast<int64_t>(start_gaps.size()))];

        EnvironmentWindow env = EnvironmentWindow::generate(g, p, rec.env_seed);
        BackboneField bb = BackboneField::compute(env, horizon);
        Coord second_start{};
        second_start[0] = rec.start_gap;
        SplitMix64 rng(derive_seed(seed, kStreamPairWalk, static_cast<uint64_t>(r)));
        PairTrace trace =
            sample_pair(bb, env, Site{origin_coord(), 0}, Site{second_start, 0}, N, rng);
        rec.count = encounter_count(trace, N, result.radius);
        rec.exceeded = static_cast<double>(rec.count) > result.threshold;
        RenewalSurrogate joint = joint_cone_renewal_gaps(trace, bb, N);
        rec.renewal_count = static_cast<int64_t>(joint.times.size());
        rec.max_gap = joint.max_gap;
        rec.gaps_within_bound = joint.all_gaps_within_bound;
    });

    int64_t exceeded = 0;
    for (const EncounterReplica& rec : result.replicas) exceeded += rec.exceeded ? 1 : 0;
    result.exceedance = static_cast<double>(exceeded) / static_cast<double>(replicas);
    result.ci = wilson_interval(exceeded, replicas);
    return result;
}

}  // namespace opbw
