#include "opbw/lattice.hpp"

#include <limits>

namespace opbw {

LatticeGeometry LatticeGeometry::create(int d, int32_t half_width, int32_t t_min, int32_t t_max) {
    if (d < 1 || d > kMaxDim)
        throw std::invalid_argument("LatticeGeometry: d must be in [1, " + std::to_string(kMaxDim) + "], got " + std::to_string(d));
    if (half_width < 1) throw std::invalid_argument("LatticeGeometry: half_width must be >= 1");
    if (t_min > t_max) throw std::invalid_argument("LatticeGeometry: t_min > t_max");

    LatticeGeometry g;
    g.d_ = d;
    g.half_width_ = half_width;
    g.t_min_ = t_min;
    g.t_max_ = t_max;

    // capacity check before anything allocates
    const int64_t kMaxSites = int64_t(1) << 36;  // 64 Gbit of site states
    int64_t w = 2 * static_cast<int64_t>(half_width) + 1;
    int64_t spatial = 1;
    for (int i = 0; i < d; ++i) {
        if (spatial > kMaxSites / w)
            throw CapacityError("LatticeGeometry: (2L+1)^d overflows the site budget");
        spatial *= w;
    }
    int64_t slices = static_cast<int64_t>(t_max) - t_min + 1;
    if (spatial > kMaxSites / slices)
        throw CapacityError("LatticeGeometry: window of " + std::to_string(spatial) + " x " +
                            std::to_string(slices) + " sites exceeds the site budget");
    g.spatial_count_ = spatial;

    int64_t p3 = 1;
    for (int i = 0; i < d; ++i) p3 *= 3;
    g.pow3_d_ = p3;
    return g;
}

void LatticeGeometry::require_contains(const Coord& x, int32_t n, const char* who) const {
    if (!contains(x, n)) {
        std::string msg(who);
        msg += ": site (";
        for (int i = 0; i < d_; ++i) {
            if (i) msg += ",";
            msg += std::to_string(x[static_cast<size_t>(i)]);
        }
        msg += "; " + std::to_string(n) + ") outside window [-" + std::to_string(half_width_) + "," +
               std::to_string(half_width_) + "]^" + std::to_string(d_) + " x [" + std::to_string(t_min_) +
               "," + std::to_string(t_max_) + "]";
        throw RangeError(msg);
    }
}

std::vector<Coord> neighborhood_displacements(int d) {
    std::vector<Coord> out;
    int64_t count = 1;
    for (int i = 0; i < d; ++i) count *= 3;
    out.reserve(static_cast<size_t>(count));
    Coord z{};
    for (int i = 0; i < d; ++i) z[static_cast<size_t>(i)] = -1;
    while (true) {
        out.push_back(z);
        int i = d - 1;
        while (i >= 0 && z[static_cast<size_t>(i)] == 1) {
            z[static_cast<size_t>(i)] = -1;
            --i;
        }
        if (i < 0) break;
        ++z[static_cast<size_t>(i)];
    }
    return out;
}

}  // namespace opbw
