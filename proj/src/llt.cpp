#include "opbw/llt.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace opbw {

BoxPartition partition_boxes(int d, int32_t side) {
    if (side < 1) throw std::invalid_argument("partition_boxes: side must be >= 1");
    return BoxPartition{d, side};
}

double l1_distance(const SpatialPmf& nu1, const SpatialPmf& nu2) {
    if (nu1.time() != nu2.time())
        throw std::invalid_argument("l1_distance: slice mismatch (" + std::to_string(nu1.time()) + " vs " +
                                    std::to_string(nu2.time()) + ")");
    const int d = nu1.d();
    Box u = nu1.support();
    for (int i = 0; i < d; ++i) {
        int32_t lo = std::min(u.lo[static_cast<size_t>(i)], nu2.support().lo[static_cast<size_t>(i)]);
        int32_t hi = std::max(u.lo[static_cast<size_t>(i)] + u.extent[static_cast<size_t>(i)],
                              nu2.support().lo[static_cast<size_t>(i)] +
                                  nu2.support().extent[static_cast<size_t>(i)]);
        u.lo[static_cast<size_t>(i)] = lo;
        u.extent[static_cast<size_t>(i)] = hi - lo;
    }
    double sum = 0.0, comp = 0.0;
    for (int64_t i = 0, vol = u.volume(d); i < vol; ++i) {
        Coord x = u.coord_at(i, d);
        double y = std::abs(nu1.value(x) - nu2.value(x)) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

SpatialPmf convolve_quenched(const BackboneField& backbone, const EnvironmentWindow& env,
                             const SpatialPmf& nu1, int k) {
    return forward_evolve(backbone, env, nu1, k);
}

namespace {

// smallest union of whole partition boxes covering `b`
Box box_cover(const BoxPartition& part, const Box& b) {
    Box cover;
    for (int i = 0; i < part.d; ++i) {
        int64_t lo = floor_div(b.lo[static_cast<size_t>(i)], part.side) * part.side;
        int64_t hi_site = static_cast<int64_t>(b.lo[static_cast<size_t>(i)]) + b.extent[static_cast<size_t>(i)] - 1;
        int64_t hi = (floor_div(hi_site, part.side) + 1) * part.side;
        cover.lo[static_cast<size_t>(i)] = static_cast<int32_t>(lo);
        cover.extent[static_cast<size_t>(i)] = static_cast<int32_t>(hi - lo);
    }
    return cover;
}

void require_covers(const SpatialPmf& field, const Box& needed, const char* who) {
    for (int i = 0; i < field.d(); ++i) {
        int32_t flo = field.support().lo[static_cast<size_t>(i)];
        int32_t fhi = flo + field.support().extent[static_cast<size_t>(i)];
        int32_t nlo = needed.lo[static_cast<size_t>(i)];
        int32_t nhi = nlo + needed.extent[static_cast<size_t>(i)];
        if (nlo < flo || nhi > fhi)
            throw RangeError(std::string(who) + ": density field does not cover the required region");
    }
}

double kahan_add(double& sum, double& comp, double y) {
    double yy = y - comp;
    double t = sum + yy;
    comp = (t - sum) - yy;
    sum = t;
    return sum;
}

}  // namespace

double z_normalizer(const SpatialPmf& annealed, const DensityField& phi) {
    if (annealed.time() != phi.time())
        throw std::invalid_argument("z_normalizer: annealed law and density field are on different slices");
    require_covers(phi.phi, annealed.support(), "z_normalizer");
    double z = 0.0, comp = 0.0;
    for (int64_t i = 0; i < annealed.size(); ++i) {
        Coord x = annealed.coord_of(i);
        kahan_add(z, comp, annealed.at_flat(i) * phi.value(x));
    }
    return z;
}

LltStatistic llt_statistic(const SpatialPmf& quenched, const SpatialPmf& annealed,
                           const DensityField& phi) {
    if (quenched.time() != annealed.time() || quenched.time() != phi.time())
        throw std::invalid_argument("llt_statistic: inputs live on different slices");
    require_covers(phi.phi, annealed.support(), "llt_statistic");

    LltStatistic st;
    st.z = z_normalizer(annealed, phi);

    const int d = quenched.d();
    Box u = quenched.support();
    for (int i = 0; i < d; ++i) {
        int32_t lo = std::min(u.lo[static_cast<size_t>(i)], annealed.support().lo[static_cast<size_t>(i)]);
        int32_t hi = std::max(u.lo[static_cast<size_t>(i)] + u.extent[static_cast<size_t>(i)],
                              annealed.support().lo[static_cast<size_t>(i)] +
                                  annealed.support().extent[static_cast<size_t>(i)]);
        u.lo[static_cast<size_t>(i)] = lo;
        u.extent[static_cast<size_t>(i)] = hi - lo;
    }
    double raw = 0.0, raw_c = 0.0, norm = 0.0, norm_c = 0.0;
    for (int64_t i = 0, vol = u.volume(d); i < vol; ++i) {
        Coord x = u.coord_at(i, d);
        double q = quenched.value(x);
        double ap = annealed.value(x) * phi.value(x);
        kahan_add(raw, raw_c, std::abs(q - ap));
        kahan_add(norm, norm_c, std::abs(q - ap / st.z));
    }
    st.raw = raw;
    st.normalized = norm;
    return st;
}

HybridMeasureSet hybrid_measures(const BackboneField& backbone, const EnvironmentWindow& env, int32_t n,
                                 int32_t ell, const DensityField& phi, const SpatialPmf& annealed) {
    const int d = env.geometry().d();
    if (n < 0) throw std::invalid_argument("hybrid_measures: slice must be >= start time");
    BoxPartition part = partition_boxes(d, ell);

    HybridMeasureSet set;
    set.time = n;
    set.box_side = ell;
    set.quenched = quenched_law(backbone, env, Site{origin_coord(), 0}, n);

    const Box cover = box_cover(part, set.quenched.support());
    require_covers(phi.phi, cover, "hybrid_measures");
    if (annealed.time() != n || phi.time() != n)
        throw std::invalid_argument("hybrid_measures: annealed law or density field on the wrong slice");

    // annealed-with-prefactor measure
    set.z = z_normalizer(annealed, phi);
    set.ann_pre = SpatialPmf(d, n, annealed.support());
    for (int64_t i = 0; i < annealed.size(); ++i) {
        Coord x = annealed.coord_of(i);
        set.ann_pre.raw()[static_cast<size_t>(i)] = annealed.at_flat(i) * phi.value(x) / set.z;
    }

    // box-smoothed quenched measure with phi weights inside each box
    set.box_pre = SpatialPmf(d, n, cover);
    Coord id_lo = part.box_id(cover.lo);
    Coord id_extent{};
    for (int i = 0; i < d; ++i)
        id_extent[static_cast<size_t>(i)] = cover.extent[static_cast<size_t>(i)] / ell;
    Box id_box{id_lo, id_extent};
    for (int64_t b = 0, nb = id_box.volume(d); b < nb; ++b) {
        Coord id = id_box.coord_at(b, d);
        Box cell;
        for (int i = 0; i < d; ++i) {
            cell.lo[static_cast<size_t>(i)] = id[static_cast<size_t>(i)] * ell;
            cell.extent[static_cast<size_t>(i)] = ell;
        }
        double qmass = set.quenched.box_sum(cell);
        double phisum = phi.phi.box_sum(cell);
        if (phisum > 0.0) {
            for (int64_t j = 0, cv = cell.volume(d); j < cv; ++j) {
                Coord x = cell.coord_at(j, d);
                set.box_pre.at(x) = qmass * phi.value(x) / phisum;
            }
        } else {
            ++set.degenerate_boxes;
            double w = qmass / static_cast<double>(cell.volume(d));
            for (int64_t j = 0, cv = cell.volume(d); j < cv; ++j) set.box_pre.at(cell.coord_at(j, d)) = w;
        }
    }
    return set;
}

LltChainReport llt_chain(const BackboneField& backbone, const EnvironmentWindow& env, int32_t n, int k,
                         int32_t ell, const DensityField& phi_n, const DensityField& phi_nk,
                         const SpatialPmf& annealed_n, const SpatialPmf& annealed_nk) {
    if (k < 1 || k > n) throw std::invalid_argument("llt_chain: need 1 <= k <= n");
    LltChainReport rep;
    rep.n = n;
    rep.k = k;
    rep.ell = ell;

    HybridMeasureSet at_nk = hybrid_measures(backbone, env, n - k, ell, phi_nk, annealed_nk);
    rep.z_at_nk = at_nk.z;
    rep.degenerate_boxes = at_nk.degenerate_boxes;

    SpatialPmf conv_ann = convolve_quenched(backbone, env, at_nk.ann_pre, k);
    SpatialPmf conv_box = convolve_quenched(backbone, env, at_nk.box_pre, k);
    SpatialPmf conv_que = convolve_quenched(backbone, env, at_nk.quenched, k);

    SpatialPmf que_n = quenched_law(backbone, env, Site{origin_coord(), 0}, n);
    rep.stat = llt_statistic(que_n, annealed_n, phi_n);
    rep.z_at_n = rep.stat.z;

    SpatialPmf ann_pre_n(annealed_n.d(), n, annealed_n.support());
    for (int64_t i = 0; i < annealed_n.size(); ++i)
        ann_pre_n.raw()[static_cast<size_t>(i)] =
            annealed_n.at_flat(i) * phi_n.value(annealed_n.coord_of(i)) / rep.z_at_n;

    rep.l1_ann = l1_distance(ann_pre_n, conv_ann);
    rep.l2_box = l1_distance(conv_ann, conv_box);
    rep.l3_que = l1_distance(conv_box, conv_que);

    // raw <= ||que - ann_pre|| + |Z-1| and que_n == conv_que exactly
    rep.triangle_slack =
        rep.l1_ann + rep.l2_box + rep.l3_que + std::abs(rep.z_at_n - 1.0) - rep.stat.raw;
    return rep;
}

const SpatialPmf& AnnealedFamily::law_for(int steps) const {
    for (size_t i = 0; i < step_counts.size(); ++i)
        if (step_counts[i] == steps) return laws[i];
    throw std::invalid_argument("AnnealedFamily: no law for " + std::to_string(steps) + " steps");
}

std::vector<int> box_event_m_grid(int N) {
    std::set<int> grid;
    double lo = 2.0 * N / 5.0;
    for (int j = 0; j < 8; ++j) grid.insert(static_cast<int>(std::lround(lo + (N - lo) * j / 7.0)));
    return {grid.begin(), grid.end()};
}

bool in_start_window(int d, const Site& z, int N) {
    double logN = std::log(static_cast<double>(N));
    double w = std::sqrt(static_cast<double>(N)) * logN * logN * logN / 24.0;
    for (int i = 0; i < d; ++i)
        if (std::abs(z.x[static_cast<size_t>(i)]) > w) return false;
    return z.n >= 0 && 3 * z.n <= N;
}

namespace {

// max over partition boxes touching `support` (and lying inside the path
// window when `contained` is set) of |q-box-mass - a-box-mass|; the
// annealed law is translated by `shift` before reading.
double max_box_discrepancy(const SpatialPmf& q, const SpatialPmf* a, const Coord& shift,
                           const BoxPartition& part, int32_t window_radius, bool contained) {
    const int d = q.d();
    Box cover = box_cover(part, q.support());
    Coord id_lo = part.box_id(cover.lo);
    Coord id_extent{};
    for (int i = 0; i < d; ++i)
        id_extent[static_cast<size_t>(i)] = cover.extent[static_cast<size_t>(i)] / part.side;
    Box id_box{id_lo, id_extent};

    double best = 0.0;
    for (int64_t b = 0, nb = id_box.volume(d); b < nb; ++b) {
        Coord id = id_box.coord_at(b, d);
        Box cell;
        bool ok = true;
        for (int i = 0; i < d; ++i) {
            cell.lo[static_cast<size_t>(i)] = id[static_cast<size_t>(i)] * part.side;
            cell.extent[static_cast<size_t>(i)] = part.side;
            int32_t clo = cell.lo[static_cast<size_t>(i)];
            int32_t chi = clo + part.side - 1;
            if (contained && (clo < -window_radius || chi > window_radius)) ok = false;
        }
        if (!ok) continue;
        double qm = q.box_sum(cell);
        double diff;
        if (a != nullptr) {
            Box translated = cell;
            for (int i = 0; i < d; ++i) translated.lo[static_cast<size_t>(i)] -= shift[static_cast<size_t>(i)];
            diff = std::abs(qm - a->box_sum(translated));
        } else {
            diff = qm;  // G2 scans the quenched mass itself
        }
        if (diff > best) best = diff;
    }
    return best;
}

}  // namespace

BoxEventReport box_comparison_event(const BackboneField& backbone, const EnvironmentWindow& env,
                                    const Site& z, int N, double theta, BoxEvent which,
                                    const AnnealedFamily& annealed) {
    const int d = env.geometry().d();
    if (theta <= 0.0 || theta > 1.0) throw std::invalid_argument("box_comparison_event: theta in (0,1]");
    if (!in_start_window(d, z, N))
        throw std::invalid_argument("box_comparison_event: start outside the comparison start window");

    const double logN = std::log(static_cast<double>(N));
    BoxEventReport rep;
    rep.which = which;
    rep.N = N;
    rep.theta = theta;
    rep.box_side = static_cast<int32_t>(std::ceil(std::pow(static_cast<double>(N), theta / 2.0)));
    rep.off_backbone = !backbone.on_backbone(z.x, z.n);
    BoxPartition part = partition_boxes(d, rep.box_side);
    const int32_t window_radius = static_cast<int32_t>(std::ceil(std::sqrt(static_cast<double>(N)) * logN * logN * logN));

    if (which == BoxEvent::G4) {
        SpatialPmf q = quenched_law(backbone, env, z, N - z.n);
        const SpatialPmf& a = annealed.law_for(N - z.n);
        rep.max_discrepancy = max_box_discrepancy(q, &a, z.x, part, window_radius, false);
        rep.threshold = std::pow(static_cast<double>(N), -d * (1.0 - theta) / 2.0 - 3.0 * theta / 20.0);
        rep.holds = rep.max_discrepancy <= rep.threshold;
        return rep;
    }

    rep.m_grid = box_event_m_grid(N);
    SpatialPmf q = SpatialPmf::delta(d, z.x, z.n);
    int done = z.n;
    double best = 0.0;
    for (int M : rep.m_grid) {
        q = forward_evolve(backbone, env, q, M - done);
        done = M;
        if (which == BoxEvent::G1) {
            const SpatialPmf& a = annealed.law_for(M - z.n);
            best = std::max(best, max_box_discrepancy(q, &a, z.x, part, window_radius, true));
        } else {
            best = std::max(best, max_box_discrepancy(q, nullptr, z.x, part, window_radius, true));
        }
    }
    rep.max_discrepancy = best;

    if (which == BoxEvent::G1) {
        rep.threshold = std::pow(static_cast<double>(N), d * (theta - 1.0) / 2.0);
        rep.holds = rep.max_discrepancy <= rep.threshold;
    } else {
        double base = std::pow(static_cast<double>(N), -d * (1.0 - theta) / 2.0);
        int h = 0;
        if (rep.max_discrepancy > base)
            h = static_cast<int>(std::ceil(std::log(rep.max_discrepancy / base) / std::log(logN)));
        if (h < 0) h = 0;
        rep.smallest_h = h;
        rep.threshold = std::pow(logN, h) * base;
        rep.holds = rep.max_discrepancy <= rep.threshold;
    }
    return rep;
}

}  // namespace opbw
