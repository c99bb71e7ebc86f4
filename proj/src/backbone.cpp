#include "opbw/backbone.hpp"

#include <string>

namespace opbw {

BackboneField::BackboneField(const LatticeGeometry& g, int32_t horizon)
    : geom_(g), horizon_(horizon), xi_(g) {}

void BackboneField::require_in_range(const Coord& x, int32_t n) const {
    geom_.require_contains(x, n, "BackboneField::on_backbone");
    if (n > horizon_)
        throw RangeError("BackboneField::on_backbone: time " + std::to_string(n) +
                         " is above the horizon " + std::to_string(horizon_));
}

namespace {

// d = 1 slices are single bit rows; the three-neighbour OR is three shifted
// copies of the next row.
void sweep_row_1d(const uint64_t* bits_row, const uint64_t* xi_next, uint64_t* xi_row, int64_t words) {
    for (int64_t i = 0; i < words; ++i) {
        uint64_t centre = xi_next[i];
        uint64_t left = (centre << 1) | (i > 0 ? xi_next[i - 1] >> 63 : 0ULL);
        uint64_t right = (centre >> 1) | (i + 1 < words ? xi_next[i + 1] << 63 : 0ULL);
        xi_row[i] = bits_row[i] & (centre | left | right);
    }
}

}  // namespace

BackboneField BackboneField::compute(const EnvironmentWindow& env, int32_t horizon) {
    const LatticeGeometry& g = env.geometry();
    if (horizon < g.t_min() || horizon > g.t_max())
        throw RangeError("compute_backbone: horizon " + std::to_string(horizon) + " outside [" +
                         std::to_string(g.t_min()) + "," + std::to_string(g.t_max()) + "]");

    BackboneField bb(g, horizon);
    const int d = g.d();
    const int64_t spatial = g.spatial_count();
    const int64_t horizon_slice = horizon - g.t_min();

    // top slice: connected to the horizon iff open there
    {
        const uint64_t* src = env.bits().slice_words(horizon_slice);
        uint64_t* dst = bb.xi_.slice_words(horizon_slice);
        for (int64_t i = 0; i < env.bits().words_per_slice(); ++i) dst[i] = src[i];
    }

    if (d == 1) {
        const int64_t words = env.bits().words_per_slice();
        for (int64_t slice = horizon_slice - 1; slice >= 0; --slice)
            sweep_row_1d(env.bits().slice_words(slice), bb.xi_.slice_words(slice + 1),
                         bb.xi_.slice_words(slice), words);
        return bb;
    }

    const std::vector<Coord> disp = neighborhood_displacements(d);
    for (int64_t slice = horizon_slice - 1; slice >= 0; --slice) {
        const int32_t n = g.t_min() + static_cast<int32_t>(slice);
        Coord x{};
        for (int i = 0; i < d; ++i) x[static_cast<size_t>(i)] = -g.half_width();
        for (int64_t s = 0; s < spatial; ++s) {
            int64_t idx = slice * spatial + s;
            if (env.open_at(idx)) {
                for (const Coord& z : disp) {
                    Coord y = coord_add(x, z, d);
                    if (!g.contains_spatial(y)) continue;
                    if (bb.xi_.get((slice + 1) * spatial + g.spatial_index(y))) {
                        bb.xi_.set(idx, true);
                        break;
                    }
                }
            }
            int i = d - 1;
            while (i >= 0 && x[static_cast<size_t>(i)] == g.half_width()) {
                x[static_cast<size_t>(i)] = -g.half_width();
                --i;
            }
            if (i >= 0) ++x[static_cast<size_t>(i)];
        }
        (void)n;
    }
    return bb;
}

namespace {

bool reaches_horizon(const EnvironmentWindow& env, const std::vector<Coord>& disp, const Coord& x,
                     int32_t n, int32_t horizon) {
    if (!env.open_unchecked(x, n)) return false;
    if (n == horizon) return true;
    const LatticeGeometry& g = env.geometry();
    for (const Coord& z : disp) {
        Coord y = coord_add(x, z, g.d());
        if (!g.contains_spatial(y)) continue;
        if (reaches_horizon(env, disp, y, n + 1, horizon)) return true;
    }
    return false;
}

}  // namespace

BackboneField brute_force_backbone(const EnvironmentWindow& env, int32_t horizon) {
    const LatticeGeometry& g = env.geometry();
    if (horizon < g.t_min() || horizon > g.t_max())
        throw RangeError("brute_force_backbone: horizon out of range");
    if (g.spatial_count() > 32 || horizon - g.t_min() > 9)
        throw CapacityError("brute_force_backbone: window too large for path enumeration");

    BackboneField bb(g, horizon);
    const std::vector<Coord> disp = neighborhood_displacements(g.d());
    const int64_t spatial = g.spatial_count();
    for (int32_t n = g.t_min(); n <= horizon; ++n) {
        for (int64_t s = 0; s < spatial; ++s) {
            Coord x = g.coord_at(s);
            if (reaches_horizon(env, disp, x, n, horizon))
                bb.xi_.set(g.site_index(x, n), true);
        }
    }
    return bb;
}

}  // namespace opbw
