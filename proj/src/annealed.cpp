#include "opbw/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "opbw/backbone.hpp"
#include "opbw/environment.hpp"
#include "opbw/llt.hpp"
#include "opbw/parallel.hpp"
#include "opbw/rng.hpp"
#include "opbw/walk.hpp"

namespace opbw {

SlopeFit fit_log_slope(const std::vector<int>& n_grid, const std::vector<double>& values,
                       const std::vector<uint8_t>& exclude) {
    SlopeFit fit;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < n_grid.size(); ++i) {
        if (i < exclude.size() && exclude[i]) continue;
        if (values[i] <= 0.0) continue;
        xs.push_back(std::log(static_cast<double>(n_grid[i])));
        ys.push_back(std::log(values[i]));
    }
    fit.points = static_cast<int>(xs.size());
    if (fit.points < 2) return fit;
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(xs.size()));
    return fit;
}

std::vector<LawsAtN> analytic_laws_for_derivatives(int d, const std::vector<int>& n_grid) {
    std::vector<LawsAtN> out;
    const Coord o = origin_coord();
    Coord e1{};
    e1[0] = 1;
    for (int n : n_grid) {
        if (n < 2) throw std::invalid_argument("derivative grid needs n >= 2");
        LawsAtN row;
        row.n = n;
        row.from_origin = analytic_uniform_law(d, Site{o, 0}, n);
        row.from_origin_minus1 = analytic_uniform_law(d, Site{o, 0}, n - 1);
        row.from_shifted_space = analytic_uniform_law(d, Site{e1, 0}, n);
        row.from_shifted_time = analytic_uniform_law(d, Site{o, 1}, n - 1);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<LawsAtN> mc_laws_for_derivatives(int d, double p, const std::vector<int>& n_grid,
                                             int64_t replicas, uint64_t seed, int threads,
                                             int32_t horizon_margin) {
    const Coord o = origin_coord();
    Coord e1{};
    e1[0] = 1;

    std::set<int> origin_steps;
    std::vector<int> grid_steps, minus1_steps;
    for (int n : n_grid) {
        if (n < 2) throw std::invalid_argument("derivative grid needs n >= 2");
        origin_steps.insert(n);
        origin_steps.insert(n - 1);
        grid_steps.push_back(n);
        minus1_steps.push_back(n - 1);
    }
    std::vector<int> origin_grid(origin_steps.begin(), origin_steps.end());

    // one shared set of environments: the family calls derive identical
    // per-replica seeds, and site states depend on absolute coordinates only
    std::vector<AveragedLaw> fam_o =
        annealed_law_family(d, p, Site{o, 0}, origin_grid, replicas, seed, threads, horizon_margin);
    std::vector<AveragedLaw> fam_space =
        annealed_law_family(d, p, Site{e1, 0}, grid_steps, replicas, seed, threads, horizon_margin);
    std::vector<AveragedLaw> fam_time =
        annealed_law_family(d, p, Site{o, 1}, minus1_steps, replicas, seed, threads, horizon_margin);

    auto find_in = [](const std::vector<AveragedLaw>& fam, const std::vector<int>& steps,
                      int want) -> const AveragedLaw& {
        for (size_t i = 0; i < steps.size(); ++i)
            if (steps[i] == want) return fam[i];
        throw std::logic_error("mc_laws_for_derivatives: harvest point missing");
    };

    std::vector<LawsAtN> out;
    for (size_t gi = 0; gi < n_grid.size(); ++gi) {
        int n = n_grid[gi];
        LawsAtN row;
        row.n = n;
        const AveragedLaw& a_n = find_in(fam_o, origin_grid, n);
        const AveragedLaw& a_n1 = find_in(fam_o, origin_grid, n - 1);
        const AveragedLaw& b_n = fam_space[gi];
        const AveragedLaw& c_n = fam_time[gi];
        row.from_origin = a_n.mean;
        row.from_origin_minus1 = a_n1.mean;
        row.from_shifted_space = b_n.mean;
        row.from_shifted_time = c_n.mean;
        double worst = 0.0;
        for (const AveragedLaw* law : {&a_n, &a_n1, &b_n, &c_n})
            for (double se : law->stderrs) worst = std::max(worst, se);
        row.max_stderr = worst;
        out.push_back(std::move(row));
    }
    return out;
}

namespace {

double sup_abs_difference(const SpatialPmf& a, const SpatialPmf& b, const Coord& b_shift) {
    const int d = a.d();
    Box u = a.support().padded(d, 1);
    double best = 0.0;
    for (int64_t i = 0, vol = u.volume(d); i < vol; ++i) {
        Coord x = u.coord_at(i, d);
        Coord xb = coord_add(x, b_shift, d);
        double diff = std::abs(a.value(x) - b.value(xb));
        if (diff > best) best = diff;
    }
    return best;
}

}  // namespace

DerivativeReport derivative_estimates(const std::vector<LawsAtN>& laws) {
    if (laws.size() < 2) throw std::invalid_argument("derivative_estimates: need at least two grid points");
    DerivativeReport rep;
    const int d = laws.front().from_origin.d();
    Coord zero{};
    Coord e1{};
    e1[0] = 1;

    for (const LawsAtN& row : laws) {
        rep.n_grid.push_back(row.n);
        double t_space = sup_abs_difference(row.from_origin, row.from_origin, e1);
        double t_time = sup_abs_difference(row.from_origin, row.from_origin_minus1, zero);
        double s_space = sup_abs_difference(row.from_origin, row.from_shifted_space, zero);
        double s_time = sup_abs_difference(row.from_origin, row.from_shifted_time, zero);
        double sup_law = 0.0;
        for (int64_t i = 0; i < row.from_origin.size(); ++i)
            sup_law = std::max(sup_law, row.from_origin.at_flat(i));

        rep.target_space.push_back(t_space);
        rep.target_time.push_back(t_time);
        rep.start_space.push_back(s_space);
        rep.start_time.push_back(s_time);
        rep.sup_law.push_back(sup_law);

        uint8_t noisy = 0;
        if (row.max_stderr) {
            double smallest = std::min(std::min(t_space, t_time), std::min(s_space, s_time));
            if (*row.max_stderr > 0.5 * smallest) noisy = 1;
        }
        rep.noise_flag.push_back(noisy);
    }
    (void)d;

    rep.start_space_slope = fit_log_slope(rep.n_grid, rep.start_space, rep.noise_flag);
    rep.start_time_slope = fit_log_slope(rep.n_grid, rep.start_time, rep.noise_flag);
    rep.target_space_slope = fit_log_slope(rep.n_grid, rep.target_space, rep.noise_flag);
    rep.target_time_slope = fit_log_slope(rep.n_grid, rep.target_time, rep.noise_flag);
    rep.sup_law_slope = fit_log_slope(rep.n_grid, rep.sup_law, rep.noise_flag);
    return rep;
}

double partition_smoothness(const SpatialPmf& law, double epsilon) {
    const int d = law.d();
    const int n = law.time();
    const int32_t side = static_cast<int32_t>(std::floor(std::pow(static_cast<double>(n), epsilon)));
    if (side < 1) throw std::invalid_argument("partition_smoothness: floor(n^epsilon) < 1");
    BoxPartition part = partition_boxes(d, side);

    // cover the support by whole partition boxes
    Coord lo_id = part.box_id(law.support().lo);
    Coord hi_site{};
    for (int i = 0; i < d; ++i)
        hi_site[static_cast<size_t>(i)] = law.support().lo[static_cast<size_t>(i)] +
                                          law.support().extent[static_cast<size_t>(i)] - 1;
    Coord hi_id = part.box_id(hi_site);
    Box id_box;
    for (int i = 0; i < d; ++i) {
        id_box.lo[static_cast<size_t>(i)] = lo_id[static_cast<size_t>(i)];
        id_box.extent[static_cast<size_t>(i)] = hi_id[static_cast<size_t>(i)] - lo_id[static_cast<size_t>(i)] + 1;
    }

    double sum = 0.0, comp = 0.0;
    for (int64_t b = 0, nb = id_box.volume(d); b < nb; ++b) {
        Coord id = id_box.coord_at(b, d);
        Box cell;
        for (int i = 0; i < d; ++i) {
            cell.lo[static_cast<size_t>(i)] = id[static_cast<size_t>(i)] * side;
            cell.extent[static_cast<size_t>(i)] = side;
        }
        double maxv = 0.0;
        for (int64_t j = 0, cv = cell.volume(d); j < cv; ++j)
            maxv = std::max(maxv, law.value(cell.coord_at(j, d)));
        double contrib = static_cast<double>(cell.volume(d)) * maxv - law.box_sum(cell);
        double y = contrib - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

std::vector<DisplacementTailPoint> displacement_tail(int d, double p, const std::vector<int>& n_grid,
                                                     int N, int64_t replicas, uint64_t seed, int threads,
                                                     int32_t horizon_margin) {
    if (replicas < 2) throw std::invalid_argument("displacement_tail: replicas must be >= 2");
    std::vector<int> grid = n_grid;
    std::sort(grid.begin(), grid.end());
    const int max_n = grid.back();
    const double logN = std::log(static_cast<double>(N));
    const LatticeGeometry g = LatticeGeometry::create(d, max_n + 1, 0, max_n + horizon_margin);
    const int32_t horizon = g.t_max();

    std::vector<int64_t> radius(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        radius[i] = static_cast<int64_t>(std::ceil(std::sqrt(static_cast<double>(grid[i])) * logN * logN * logN));

    // per-replica quenched tails, kept per n for the two-pass threshold
    std::vector<std::vector<double>> tails(grid.size(),
                                           std::vector<double>(static_cast<size_t>(replicas), 0.0));
    parallel_for(replicas, threads, [&](int64_t r) {
        uint64_t env_seed = derive_seed(seed, kStreamReplicaEnv, static_cast<uint64_t>(r));
        EnvironmentWindow env = EnvironmentWindow::generate(g, p, env_seed);
        BackboneField bb = BackboneField::compute(env, horizon);
        SpatialPmf law = SpatialPmf::delta(d, origin_coord(), 0);
        int done = 0;
        for (size_t gi = 0; gi < grid.size(); ++gi) {
            law = forward_evolve(bb, env, law, grid[gi] - done);
            done = grid[gi];
            double tail;
            if (radius[gi] > grid[gi]) {
                tail = 0.0;  // beyond the speed-1 cone
            } else {
                Box inner = Box::ball(d, origin_coord(), static_cast<int32_t>(radius[gi]) - 1);
                tail = 1.0 - law.box_sum(inner);
                if (tail < 0.0) tail = 0.0;
            }
            tails[gi][static_cast<size_t>(r)] = tail;
        }
    });

    std::vector<DisplacementTailPoint> out;
    for (size_t gi = 0; gi < grid.size(); ++gi) {
        DisplacementTailPoint pt;
        pt.n = grid[gi];
        pt.radius = radius[gi];
        pt.replicas = replicas;
        double mean = 0.0;
        for (double t : tails[gi]) mean += t;
        mean /= static_cast<double>(replicas);
        pt.annealed_tail = mean;
        pt.h_threshold = std::sqrt(mean);
        int64_t held = 0;
        for (double t : tails[gi])
            if (t <= pt.h_threshold) ++held;
        pt.h_frequency = static_cast<double>(held) / static_cast<double>(replicas);
        out.push_back(pt);
    }
    return out;
}

}  // namespace opbw
