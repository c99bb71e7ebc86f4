#include "opbw/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "opbw/parallel.hpp"

namespace opbw {

double LocalKernel::weight_of(const Coord& displacement) const {
    const std::vector<Coord> disp = neighborhood_displacements(d);
    for (size_t i = 0; i < disp.size(); ++i)
        if (sup_norm(disp[i], displacement, d) == 0) return weights[i];
    return 0.0;
}

double LocalKernel::sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

namespace {

void require_kernel_site(const LatticeGeometry& g, int32_t horizon, const Site& site, const char* who) {
    g.require_contains(site.x, site.n, who);
    if (site.n >= horizon)
        throw RangeError(std::string(who) + ": time " + std::to_string(site.n) +
                         " has no successor slice below horizon " + std::to_string(horizon));
    for (int i = 0; i < g.d(); ++i) {
        int32_t v = site.x[static_cast<size_t>(i)];
        if (v <= -g.half_width() || v >= g.half_width())
            throw RangeError(std::string(who) + ": neighbourhood leaves the window spatially");
    }
}

}  // namespace

LocalKernel step_distribution(const BackboneField& backbone, const EnvironmentWindow& env, const Site& site) {
    const LatticeGeometry& g = env.geometry();
    require_kernel_site(g, backbone.horizon(), site, "step_distribution");

    const std::vector<Coord> disp = neighborhood_displacements(g.d());
    LocalKernel k;
    k.site = site;
    k.d = g.d();
    k.weights.assign(disp.size(), 0.0);

    if (backbone.on_backbone_unchecked(site.x, site.n)) {
        int open = 0;
        for (size_t i = 0; i < disp.size(); ++i)
            if (backbone.on_backbone_unchecked(coord_add(site.x, disp[i], g.d()), site.n + 1)) ++open;
        double w = 1.0 / static_cast<double>(open);
        for (size_t i = 0; i < disp.size(); ++i)
            if (backbone.on_backbone_unchecked(coord_add(site.x, disp[i], g.d()), site.n + 1))
                k.weights[i] = w;
    } else {
        double w = 1.0 / static_cast<double>(disp.size());
        for (size_t i = 0; i < disp.size(); ++i) k.weights[i] = w;
    }
    return k;
}

LocalKernel g_kernel(const EnvironmentView& view) {
    const LatticeGeometry& g = view.base().geometry();
    const int d = g.d();
    const std::vector<Coord> disp = neighborhood_displacements(d);
    const Coord o = origin_coord();

    LocalKernel k;
    k.site = Site{view.offset(), view.time_offset()};
    k.d = d;
    k.weights.assign(disp.size(), 0.0);

    bool open_here = view.open(o, 0);
    int survivors = 0;
    std::vector<uint8_t> xi1(disp.size(), 0);
    for (size_t i = 0; i < disp.size(); ++i) {
        xi1[i] = view.on_backbone(disp[i], 1) ? 1 : 0;
        survivors += xi1[i];
    }

    if (open_here && survivors > 0) {
        double denom = static_cast<double>(survivors);
        for (size_t i = 0; i < disp.size(); ++i)
            if (xi1[i]) k.weights[i] = 1.0 / denom;
    } else {
        double w = 1.0 / static_cast<double>(disp.size());
        for (size_t i = 0; i < disp.size(); ++i) k.weights[i] = w;
    }
    return k;
}

namespace {

// shared sampling core: uniform index among open successors, or among all
// 3^d neighbours when off the backbone
Coord sample_step(const BackboneField& backbone, const LatticeGeometry& g,
                  const std::vector<Coord>& disp, const Coord& x, int32_t n, SplitMix64& rng) {
    if (backbone.on_backbone_unchecked(x, n)) {
        uint32_t open = 0;
        for (const Coord& z : disp)
            if (backbone.on_backbone_unchecked(coord_add(x, z, g.d()), n + 1)) ++open;
        uint32_t pick = rng.next_below(open);
        for (const Coord& z : disp) {
            if (backbone.on_backbone_unchecked(coord_add(x, z, g.d()), n + 1)) {
                if (pick == 0) return z;
                --pick;
            }
        }
        throw std::logic_error("sample_step: backbone site with no open successor");
    }
    return disp[rng.next_below(static_cast<uint32_t>(disp.size()))];
}

}  // namespace

EnvironmentView environment_chain_step(const EnvironmentView& view, SplitMix64& rng) {
    const LatticeGeometry& g = view.base().geometry();
    Site site{view.offset(), view.time_offset()};
    require_kernel_site(g, view.backbone().horizon(), site, "environment_chain_step");
    const std::vector<Coord> disp = neighborhood_displacements(g.d());
    Coord y = sample_step(view.backbone(), g, disp, site.x, site.n, rng);
    return view.shifted(y, 1);
}

WalkPath sample_path(const BackboneField& backbone, const EnvironmentWindow& env, const Site& start,
                     int steps, SplitMix64& rng) {
    if (steps < 0) throw std::invalid_argument("sample_path: steps must be >= 0");
    const LatticeGeometry& g = env.geometry();
    g.require_contains(start.x, start.n, "sample_path");

    WalkPath path;
    path.start = start;
    path.positions.reserve(static_cast<size_t>(steps) + 1);
    path.positions.push_back(start.x);

    const std::vector<Coord> disp = neighborhood_displacements(g.d());
    Coord x = start.x;
    for (int k = 0; k < steps; ++k) {
        Site here{x, start.n + k};
        require_kernel_site(g, backbone.horizon(), here, "sample_path");
        x = coord_add(x, sample_step(backbone, g, disp, x, here.n, rng), g.d());
        path.positions.push_back(x);
    }
    return path;
}

namespace {

SpatialPmf evolve_impl(const BackboneField& backbone, const EnvironmentWindow& env,
                       const SpatialPmf& init, int steps, bool grow) {
    const LatticeGeometry& g = env.geometry();
    const int d = g.d();
    if (init.d() != d) throw std::invalid_argument("forward_evolve: dimension mismatch");
    if (steps < 0) throw std::invalid_argument("forward_evolve: steps must be >= 0");
    if (init.time() + steps > backbone.horizon())
        throw RangeError("forward_evolve: evolution reaches time " + std::to_string(init.time() + steps) +
                         " above horizon " + std::to_string(backbone.horizon()));
    if (init.time() < g.t_min())
        throw RangeError("forward_evolve: start slice below window");

    // growing mode needs the final box in-window; clipped mode additionally
    // probes xi one site beyond the fixed box
    const Box final_box = grow ? init.support().padded(d, steps) : init.support();
    const Box probe_box = grow ? final_box : final_box.padded(d, 1);
    for (int i = 0; i < d; ++i) {
        if (probe_box.lo[static_cast<size_t>(i)] < -g.half_width() ||
            probe_box.lo[static_cast<size_t>(i)] + probe_box.extent[static_cast<size_t>(i)] - 1 > g.half_width())
            throw RangeError("forward_evolve: support escapes window; need half_width >= support radius + steps");
    }

    SpatialPmf cur = init.reframed(final_box);
    if (steps == 0) return cur;

    // strides for window spatial indices and for the working box
    int64_t wstride[kMaxDim], fstride[kMaxDim];
    wstride[d - 1] = 1;
    fstride[d - 1] = 1;
    for (int i = d - 2; i >= 0; --i) {
        wstride[i] = wstride[i + 1] * g.width();
        fstride[i] = fstride[i + 1] * final_box.extent[static_cast<size_t>(i + 1)];
    }

    const std::vector<Coord> disp = neighborhood_displacements(d);
    const size_t nd = disp.size();
    std::vector<int64_t> woff(nd), foff(nd);
    for (size_t j = 0; j < nd; ++j) {
        int64_t w = 0, f = 0;
        for (int i = 0; i < d; ++i) {
            w += static_cast<int64_t>(disp[j][static_cast<size_t>(i)]) * wstride[i];
            f += static_cast<int64_t>(disp[j][static_cast<size_t>(i)]) * fstride[i];
        }
        woff[j] = w;
        foff[j] = f;
    }

    const int64_t spatial = g.spatial_count();
    const BitField& xi = backbone.xi();
    std::vector<double> next(cur.raw().size());
    const double uniform_w = 1.0 / static_cast<double>(nd);

    for (int k = 0; k < steps; ++k) {
        const int32_t t = init.time() + k;
        const int64_t slice_now = (static_cast<int64_t>(t) - g.t_min()) * spatial;
        const int64_t slice_next = slice_now + spatial;

        // mass so far lives in init.support padded by k (or the fixed box)
        Box active = grow ? init.support().padded(d, k) : init.support();
        std::fill(next.begin(), next.end(), 0.0);

        Coord y{};
        int64_t widx = 0, fidx = 0;
        for (int i = 0; i < d; ++i) {
            y[static_cast<size_t>(i)] = active.lo[static_cast<size_t>(i)];
            widx += (static_cast<int64_t>(y[static_cast<size_t>(i)]) + g.half_width()) * wstride[i];
            fidx += static_cast<int64_t>(y[static_cast<size_t>(i)] - final_box.lo[static_cast<size_t>(i)]) * fstride[i];
        }
        const int64_t active_vol = active.volume(d);
        double* curv = cur.raw().data();
        for (int64_t s = 0; s < active_vol; ++s) {
            double m = curv[fidx];
            if (m != 0.0) {
                bool interior = grow;
                if (!grow) {
                    interior = true;
                    for (int i = 0; i < d; ++i) {
                        int32_t v = y[static_cast<size_t>(i)];
                        if (v == final_box.lo[static_cast<size_t>(i)] ||
                            v == final_box.lo[static_cast<size_t>(i)] + final_box.extent[static_cast<size_t>(i)] - 1) {
                            interior = false;
                            break;
                        }
                    }
                }
                if (xi.get(slice_now + widx)) {
                    int open = 0;
                    for (size_t j = 0; j < nd; ++j)
                        if (xi.get(slice_next + widx + woff[j])) ++open;
                    double w = m / static_cast<double>(open);
                    for (size_t j = 0; j < nd; ++j) {
                        if (!xi.get(slice_next + widx + woff[j])) continue;
                        if (interior || final_box.contains(coord_add(y, disp[j], d), d))
                            next[static_cast<size_t>(fidx + foff[j])] += w;
                    }
                } else {
                    double w = m * uniform_w;
                    for (size_t j = 0; j < nd; ++j) {
                        if (interior || final_box.contains(coord_add(y, disp[j], d), d))
                            next[static_cast<size_t>(fidx + foff[j])] += w;
                    }
                }
            }
            // odometer over the active box, keeping both flat indices in step
            int i = d - 1;
            while (i >= 0 && y[static_cast<size_t>(i)] ==
                                 active.lo[static_cast<size_t>(i)] + active.extent[static_cast<size_t>(i)] - 1) {
                int64_t span = active.extent[static_cast<size_t>(i)] - 1;
                y[static_cast<size_t>(i)] = active.lo[static_cast<size_t>(i)];
                widx -= span * wstride[i];
                fidx -= span * fstride[i];
                --i;
            }
            if (i < 0) break;
            ++y[static_cast<size_t>(i)];
            widx += wstride[i];
            fidx += fstride[i];
        }
        cur.raw().swap(next);
    }

    SpatialPmf out(d, init.time() + steps, final_box);
    out.raw() = cur.raw();
    return out;
}

}  // namespace

SpatialPmf forward_evolve(const BackboneField& backbone, const EnvironmentWindow& env,
                          const SpatialPmf& init, int steps) {
    return evolve_impl(backbone, env, init, steps, true);
}

SpatialPmf forward_evolve_clipped(const BackboneField& backbone, const EnvironmentWindow& env,
                                  const SpatialPmf& init, int steps) {
    return evolve_impl(backbone, env, init, steps, false);
}

SpatialPmf quenched_law(const BackboneField& backbone, const EnvironmentWindow& env, const Site& start,
                        int steps) {
    env.geometry().require_contains(start.x, start.n, "quenched_law");
    return forward_evolve(backbone, env, SpatialPmf::delta(env.geometry().d(), start.x, start.n), steps);
}

namespace {

LatticeGeometry annealed_geometry(int d, const Site& start, int steps, int32_t horizon_margin) {
    int32_t reach = 0;
    for (int i = 0; i < d; ++i) reach = std::max(reach, std::abs(start.x[static_cast<size_t>(i)]));
    return LatticeGeometry::create(d, reach + steps + 1, start.n, start.n + steps + horizon_margin);
}

}  // namespace

std::vector<AveragedLaw> annealed_law_family(int d, double p, const Site& start,
                                             const std::vector<int>& step_counts, int64_t replicas,
                                             uint64_t seed, int threads, int32_t horizon_margin) {
    if (replicas < 2) throw std::invalid_argument("annealed_law: replicas must be >= 2");
    if (step_counts.empty()) throw std::invalid_argument("annealed_law_family: no step counts");
    for (size_t i = 0; i + 1 < step_counts.size(); ++i)
        if (step_counts[i] >= step_counts[i + 1])
            throw std::invalid_argument("annealed_law_family: step counts must be strictly increasing");

    const int max_steps = step_counts.back();
    const LatticeGeometry g = annealed_geometry(d, start, max_steps, horizon_margin);
    const int32_t horizon = g.t_max();

    // Per-block Welford accumulators merged in fixed block order (Chan's
    // formula), so the aggregate is independent of thread scheduling and
    // identical replica laws yield exactly zero variance.
    struct Partial {
        int64_t count = 0;
        std::vector<std::vector<double>> mean;  // per step count
        std::vector<std::vector<double>> m2;
    };
    const int64_t kBlock = 32;  // fixed so aggregation order never depends on thread count
    const int64_t blocks = (replicas + kBlock - 1) / kBlock;
    std::vector<Partial> partials(static_cast<size_t>(blocks));

    std::vector<int64_t> vol(step_counts.size());
    for (size_t si = 0; si < step_counts.size(); ++si)
        vol[si] = Box::ball(d, start.x, step_counts[si]).volume(d);

    parallel_for(blocks, threads, [&](int64_t b) {
        Partial& part = partials[static_cast<size_t>(b)];
        part.mean.resize(step_counts.size());
        part.m2.resize(step_counts.size());
        for (size_t si = 0; si < step_counts.size(); ++si) {
            part.mean[si].assign(static_cast<size_t>(vol[si]), 0.0);
            part.m2[si].assign(static_cast<size_t>(vol[si]), 0.0);
        }
        const int64_t r_end = std::min(replicas, (b + 1) * kBlock);
        for (int64_t r = b * kBlock; r < r_end; ++r) {
            uint64_t env_seed = derive_seed(seed, kStreamAnnealedEnv, static_cast<uint64_t>(r));
            EnvironmentWindow env = EnvironmentWindow::generate(g, p, env_seed);
            BackboneField bb = BackboneField::compute(env, horizon);
            SpatialPmf law = SpatialPmf::delta(d, start.x, start.n);
            int done = 0;
            ++part.count;
            for (size_t si = 0; si < step_counts.size(); ++si) {
                law = forward_evolve(bb, env, law, step_counts[si] - done);
                done = step_counts[si];
                const double inv_count = 1.0 / static_cast<double>(part.count);
                for (int64_t i = 0; i < law.size(); ++i) {
                    double v = law.at_flat(i);
                    double& mu = part.mean[si][static_cast<size_t>(i)];
                    double delta = v - mu;
                    mu += delta * inv_count;
                    part.m2[si][static_cast<size_t>(i)] += delta * (v - mu);
                }
            }
        }
    });

    std::vector<AveragedLaw> out(step_counts.size());
    const double R = static_cast<double>(replicas);
    for (size_t si = 0; si < step_counts.size(); ++si) {
        AveragedLaw& law = out[si];
        law.replicas = replicas;
        law.mean = SpatialPmf(d, start.n + step_counts[si], Box::ball(d, start.x, step_counts[si]));
        law.stderrs.assign(static_cast<size_t>(vol[si]), 0.0);
        std::vector<double>& mean = law.mean.raw();
        std::vector<double>& m2 = law.stderrs;  // reused as the merged M2 until the last loop
        int64_t count = 0;
        for (int64_t b = 0; b < blocks; ++b) {
            const Partial& part = partials[static_cast<size_t>(b)];
            const int64_t nb = part.count;
            if (nb == 0) continue;
            if (count == 0) {
                for (int64_t i = 0; i < vol[si]; ++i) {
                    mean[static_cast<size_t>(i)] = part.mean[si][static_cast<size_t>(i)];
                    m2[static_cast<size_t>(i)] = part.m2[si][static_cast<size_t>(i)];
                }
            } else {
                const double na = static_cast<double>(count);
                const double nbd = static_cast<double>(nb);
                const double nab = na + nbd;
                for (int64_t i = 0; i < vol[si]; ++i) {
                    double delta = part.mean[si][static_cast<size_t>(i)] - mean[static_cast<size_t>(i)];
                    mean[static_cast<size_t>(i)] += delta * (nbd / nab);
                    m2[static_cast<size_t>(i)] +=
                        part.m2[si][static_cast<size_t>(i)] + delta * delta * (na * nbd / nab);
                }
            }
            count += nb;
        }
        for (int64_t i = 0; i < vol[si]; ++i) {
            double var = m2[static_cast<size_t>(i)] / (R - 1.0);
            if (var < 0.0) var = 0.0;
            law.stderrs[static_cast<size_t>(i)] = std::sqrt(var / R);
        }
    }
    return out;
}

AveragedLaw annealed_law(int d, double p, const Site& start, int steps, int64_t replicas, uint64_t seed,
                         int threads, int32_t horizon_margin) {
    std::vector<AveragedLaw> fam =
        annealed_law_family(d, p, start, {steps}, replicas, seed, threads, horizon_margin);
    return std::move(fam.front());
}

SpatialPmf analytic_uniform_law(int d, const Site& start, int steps) {
    if (steps < 0) throw std::invalid_argument("analytic_uniform_law: steps must be >= 0");
    // per-axis law of a lazy +-1 walk with uniform increments on {-1,0,1}
    std::vector<double> axis{1.0};
    for (int k = 1; k <= steps; ++k) {
        std::vector<double> nxt(static_cast<size_t>(2 * k + 1), 0.0);
        auto prev = [&](int64_t j) -> double {
            // previous law spans [-(k-1), k-1] stored with offset k-1
            if (j < 0 || j >= static_cast<int64_t>(axis.size())) return 0.0;
            return axis[static_cast<size_t>(j)];
        };
        for (int64_t x = 0; x < static_cast<int64_t>(nxt.size()); ++x)
            nxt[static_cast<size_t>(x)] = (prev(x - 2) + prev(x - 1) + prev(x)) / 3.0;
        axis.swap(nxt);
    }

    SpatialPmf law(d, start.n + steps, Box::ball(d, start.x, steps));
    for (int64_t i = 0; i < law.size(); ++i) {
        Coord x = law.coord_of(i);
        double v = 1.0;
        for (int j = 0; j < d; ++j)
            v *= axis[static_cast<size_t>(x[static_cast<size_t>(j)] - start.x[static_cast<size_t>(j)] + steps)];
        law.raw()[static_cast<size_t>(i)] = v;
    }
    return law;
}

}  // namespace opbw
