#ifndef OPBW_DENSITY_HPP
#define OPBW_DENSITY_HPP

#include <cstdint>

#include "opbw/backbone.hpp"
#include "opbw/environment.hpp"
#include "opbw/pmf.hpp"
#include "opbw/walk.hpp"

namespace opbw {

// Depth-N density estimate attached to a slice region:
//   phi_N at (x,n) = sum_y P_omega^{(y,n-N)}(X_n = x),
// the finite-depth Radon-Nikodym estimate of the particle-invariant
// environment measure against the i.i.d. law. Each value has expectation 1.
struct DensityField {
    int depth = 1;
    SpatialPmf phi;  // slice values over the region; not a pmf

    int32_t time() const { return phi.time(); }
    double value(const Coord& x) const { return phi.value(x); }
};

// Single-site estimate. The adjoint pass starts unit mass at every site of
// the slice n-N that can reach (x,n), i.e. the full backward cone plus
// nothing less; truncating the collar would bias E[phi] away from 1.
double phi_estimate(const BackboneField& backbone, const EnvironmentWindow& env, const Site& site,
                    int depth);

// Shared-pass estimate over an axis-aligned region of one slice: one
// forward evolution serves every site of the region.
DensityField phi_field(const BackboneField& backbone, const EnvironmentWindow& env, int32_t slice_time,
                       const Box& region, int depth);

// (1/n) * sum_{N=0}^{n-1} phi_N at one site; the depth-0 term is 1.
double cesaro_phi(const BackboneField& backbone, const EnvironmentWindow& env, const Site& site,
                  int max_depth);

struct ConcentrationReport {
    int32_t box_side = 0;     // M
    int depth = 0;            // estimator depth N
    double box_average = 0.0; // mean of phi over the centred cube
    double deviation = 0.0;   // |box_average - 1|
};

// Deviation of the box average of phi from 1 over the centred cube of side
// M at the field's slice.
ConcentrationReport concentration_statistic(const DensityField& field, int32_t box_side);

// CSV export: x1,..,xd,phi,depth
void write_csv(std::ostream& out, const DensityField& field);

}  // namespace opbw

#endif
