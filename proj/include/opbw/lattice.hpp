#ifndef OPBW_LATTICE_HPP
#define OPBW_LATTICE_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace opbw {

// Spatial dimensions are runtime parameters; coordinates are stored in a
// fixed-size array with unused axes pinned to zero.
inline constexpr int kMaxDim = 8;

using Coord = std::array<int32_t, kMaxDim>;

inline Coord make_coord(std::initializer_list<int32_t> xs) {
    Coord c{};
    int i = 0;
    for (int32_t v : xs) c[static_cast<size_t>(i++)] = v;
    return c;
}

inline Coord origin_coord() { return Coord{}; }

// sup-norm distance, the only norm used in this model
inline int32_t sup_norm(const Coord& a, const Coord& b, int d) {
    int32_t m = 0;
    for (int i = 0; i < d; ++i) {
        int32_t diff = a[static_cast<size_t>(i)] - b[static_cast<size_t>(i)];
        if (diff < 0) diff = -diff;
        if (diff > m) m = diff;
    }
    return m;
}

inline Coord coord_add(const Coord& a, const Coord& b, int d) {
    Coord r{};
    for (int i = 0; i < d; ++i) r[static_cast<size_t>(i)] = a[static_cast<size_t>(i)] + b[static_cast<size_t>(i)];
    return r;
}

inline Coord coord_sub(const Coord& a, const Coord& b, int d) {
    Coord r{};
    for (int i = 0; i < d; ++i) r[static_cast<size_t>(i)] = a[static_cast<size_t>(i)] - b[static_cast<size_t>(i)];
    return r;
}

struct Site {
    Coord x{};
    int32_t n = 0;
};

// floor division / modulo for box anchoring with negative coordinates
inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

struct RangeError : std::out_of_range {
    explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

// Finite space-time block [-L, L]^d x [t_min, t_max].
// Site order used for packed storage and binary dumps: time-major, then
// spatial row-major with the last coordinate varying fastest.
class LatticeGeometry {
  public:
    static LatticeGeometry create(int d, int32_t half_width, int32_t t_min, int32_t t_max);

    int d() const { return d_; }
    int32_t half_width() const { return half_width_; }
    int32_t t_min() const { return t_min_; }
    int32_t t_max() const { return t_max_; }

    int64_t width() const { return 2 * static_cast<int64_t>(half_width_) + 1; }
    int64_t spatial_count() const { return spatial_count_; }
    int64_t slice_count() const { return static_cast<int64_t>(t_max_) - t_min_ + 1; }
    int64_t site_count() const { return spatial_count_ * slice_count(); }
    int64_t neighborhood_size() const { return pow3_d_; }  // 3^d

    bool contains_spatial(const Coord& x) const {
        for (int i = 0; i < d_; ++i) {
            int32_t v = x[static_cast<size_t>(i)];
            if (v < -half_width_ || v > half_width_) return false;
        }
        return true;
    }
    bool contains_time(int32_t n) const { return n >= t_min_ && n <= t_max_; }
    bool contains(const Coord& x, int32_t n) const {
        return contains_time(n) && contains_spatial(x);
    }

    int64_t spatial_index(const Coord& x) const {
        int64_t idx = 0;
        for (int i = 0; i < d_; ++i) idx = idx * width() + (x[static_cast<size_t>(i)] + half_width_);
        return idx;
    }
    int64_t site_index(const Coord& x, int32_t n) const {
        return (static_cast<int64_t>(n) - t_min_) * spatial_count_ + spatial_index(x);
    }
    Coord coord_at(int64_t spatial_index) const {
        Coord c{};
        for (int i = d_ - 1; i >= 0; --i) {
            c[static_cast<size_t>(i)] = static_cast<int32_t>(spatial_index % width()) - half_width_;
            spatial_index /= width();
        }
        return c;
    }

    void require_contains(const Coord& x, int32_t n, const char* who) const;

    bool operator==(const LatticeGeometry& o) const {
        return d_ == o.d_ && half_width_ == o.half_width_ && t_min_ == o.t_min_ && t_max_ == o.t_max_;
    }

  private:
    LatticeGeometry() = default;
    int d_ = 1;
    int32_t half_width_ = 1;
    int32_t t_min_ = 0;
    int32_t t_max_ = 0;
    int64_t spatial_count_ = 0;
    int64_t pow3_d_ = 0;
};

// Axis-aligned spatial box: [lo_i, lo_i + extent_i) per axis.
struct Box {
    Coord lo{};
    std::array<int32_t, kMaxDim> extent{};

    static Box cube_centred(int d, const Coord& centre, int32_t side) {
        Box b;
        for (int i = 0; i < d; ++i) {
            b.lo[static_cast<size_t>(i)] = centre[static_cast<size_t>(i)] - side / 2;
            b.extent[static_cast<size_t>(i)] = side;
        }
        return b;
    }
    // smallest box containing the sup-norm ball of the given radius
    static Box ball(int d, const Coord& centre, int32_t radius) {
        Box b;
        for (int i = 0; i < d; ++i) {
            b.lo[static_cast<size_t>(i)] = centre[static_cast<size_t>(i)] - radius;
            b.extent[static_cast<size_t>(i)] = 2 * radius + 1;
        }
        return b;
    }
    int64_t volume(int d) const {
        int64_t v = 1;
        for (int i = 0; i < d; ++i) v *= extent[static_cast<size_t>(i)];
        return v;
    }
    bool contains(const Coord& x, int d) const {
        for (int i = 0; i < d; ++i) {
            int32_t v = x[static_cast<size_t>(i)];
            int32_t l = lo[static_cast<size_t>(i)];
            if (v < l || v >= l + extent[static_cast<size_t>(i)]) return false;
        }
        return true;
    }
    Box padded(int d, int32_t pad) const {
        Box b = *this;
        for (int i = 0; i < d; ++i) {
            b.lo[static_cast<size_t>(i)] -= pad;
            b.extent[static_cast<size_t>(i)] += 2 * pad;
        }
        return b;
    }
    int64_t flat_index(const Coord& x, int d) const {
        int64_t idx = 0;
        for (int i = 0; i < d; ++i)
            idx = idx * extent[static_cast<size_t>(i)] + (x[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]);
        return idx;
    }
    Coord coord_at(int64_t flat, int d) const {
        Coord c{};
        for (int i = d - 1; i >= 0; --i) {
            c[static_cast<size_t>(i)] = lo[static_cast<size_t>(i)] + static_cast<int32_t>(flat % extent[static_cast<size_t>(i)]);
            flat /= extent[static_cast<size_t>(i)];
        }
        return c;
    }
};

// Enumerates the 3^d displacements z with sup-norm ||z|| <= 1 in a fixed
// deterministic order (odometer over axes, -1 before 0 before +1, first
// axis slowest). Sampling code relies on this order being stable.
std::vector<Coord> neighborhood_displacements(int d);

}  // namespace opbw

#endif
