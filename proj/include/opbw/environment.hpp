#ifndef OPBW_ENVIRONMENT_HPP
#define OPBW_ENVIRONMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "opbw/lattice.hpp"

namespace opbw {

// Packed bit plane over a lattice window, one bit per site. Slices are
// padded to 64-bit word boundaries so slice rows can be processed with
// word operations.
class BitField {
  public:
    BitField() = default;
    explicit BitField(const LatticeGeometry& g);

    bool get(int64_t site_index) const {
        int64_t slice = site_index / spatial_count_;
        int64_t within = site_index % spatial_count_;
        int64_t w = slice * words_per_slice_ + within / 64;
        return (words_[static_cast<size_t>(w)] >> (within % 64)) & 1ULL;
    }
    void set(int64_t site_index, bool v) {
        int64_t slice = site_index / spatial_count_;
        int64_t within = site_index % spatial_count_;
        int64_t w = slice * words_per_slice_ + within / 64;
        uint64_t mask = 1ULL << (within % 64);
        if (v)
            words_[static_cast<size_t>(w)] |= mask;
        else
            words_[static_cast<size_t>(w)] &= ~mask;
    }

    uint64_t* slice_words(int64_t slice) { return words_.data() + slice * words_per_slice_; }
    const uint64_t* slice_words(int64_t slice) const { return words_.data() + slice * words_per_slice_; }
    int64_t words_per_slice() const { return words_per_slice_; }
    int64_t spatial_count() const { return spatial_count_; }

    bool operator==(const BitField& o) const { return words_ == o.words_; }

  private:
    int64_t spatial_count_ = 0;
    int64_t words_per_slice_ = 0;
    std::vector<uint64_t> words_;
};

// An i.i.d. Bernoulli(p) space-time field on a finite window. Each site's
// state is a pure function of (seed, absolute coordinates), so windows with
// overlapping coordinate ranges and equal seeds agree on the overlap, and
// regeneration from (geometry, p, seed) is bit-identical.
class EnvironmentWindow {
  public:
    static EnvironmentWindow generate(const LatticeGeometry& g, double p, uint64_t seed);

    // Explicit bit pattern (tests, exhaustive sweeps, file loads).
    static EnvironmentWindow from_bits(const LatticeGeometry& g, double p, uint64_t seed,
                                       const std::vector<uint8_t>& site_states);

    const LatticeGeometry& geometry() const { return geom_; }
    double p() const { return p_; }
    uint64_t seed() const { return seed_; }

    bool open(const Coord& x, int32_t n) const {
        geom_.require_contains(x, n, "EnvironmentWindow::open");
        return bits_.get(geom_.site_index(x, n));
    }
    bool open_unchecked(const Coord& x, int32_t n) const { return bits_.get(geom_.site_index(x, n)); }
    bool open_at(int64_t site_index) const { return bits_.get(site_index); }

    const BitField& bits() const { return bits_; }

    int64_t open_count() const;

    // Binary dump: magic "OPBW1", then little-endian u32 d, i32 L, i32 t_min,
    // i32 t_max, f64 p, u64 seed, then site states packed 8 per byte LSB
    // first in site-index order (time-major, spatial row-major, last
    // coordinate fastest). Trailing bits of the final byte are zero.
    void dump(std::ostream& out) const;
    static EnvironmentWindow load(std::istream& in);

  private:
    EnvironmentWindow(const LatticeGeometry& g, double p, uint64_t seed);
    LatticeGeometry geom_;
    double p_ = 0.0;
    uint64_t seed_ = 0;
    BitField bits_;
};

}  // namespace opbw

#endif
