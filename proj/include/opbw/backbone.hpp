#ifndef OPBW_BACKBONE_HPP
#define OPBW_BACKBONE_HPP

#include <cstdint>

#include "opbw/environment.hpp"
#include "opbw/lattice.hpp"

namespace opbw {

// Horizon-truncated backbone indicator: xi(x,n) = 1 iff there is a directed
// open path (x_n,n),...,(x_H,H) with x_n = x, sup-norm steps <= 1 and every
// visited site open, staying inside the window. Computed by one backward
// sweep from the horizon; xi(x,H) = bits(x,H).
//
// Sites within (horizon - n) of the spatial boundary see a clipped cone, so
// their xi is a lower bound for the infinite-lattice value; callers keep
// reads inside the containment region guaranteed by their preconditions.
class BackboneField {
  public:
    static BackboneField compute(const EnvironmentWindow& env, int32_t horizon);

    const LatticeGeometry& geometry() const { return geom_; }
    int32_t horizon() const { return horizon_; }

    bool on_backbone(const Coord& x, int32_t n) const {
        require_in_range(x, n);
        return xi_.get(geom_.site_index(x, n));
    }
    bool on_backbone_unchecked(const Coord& x, int32_t n) const { return xi_.get(geom_.site_index(x, n)); }
    bool xi_at(int64_t site_index) const { return xi_.get(site_index); }

    const BitField& xi() const { return xi_; }

    bool operator==(const BackboneField& o) const { return horizon_ == o.horizon_ && xi_ == o.xi_; }

  private:
    friend BackboneField brute_force_backbone(const EnvironmentWindow&, int32_t);
    BackboneField(const LatticeGeometry& g, int32_t horizon);
    void require_in_range(const Coord& x, int32_t n) const;

    LatticeGeometry geom_;
    int32_t horizon_ = 0;
    BitField xi_;
};

// Exponential-time oracle: explicit depth-first path enumeration of the
// definition above. Refuses windows beyond a small size.
BackboneField brute_force_backbone(const EnvironmentWindow& env, int32_t horizon);

}  // namespace opbw

#endif
