#include "opbw/density.hpp"

#include <ostream>
#include <string>

namespace opbw {

namespace {

// ones over the backward cone footprint of `region` at depth `depth`
SpatialPmf cone_ones(int d, const Box& region, int32_t slice_time, int depth) {
    SpatialPmf init(d, slice_time - depth, region.padded(d, depth));
    for (double& v : init.raw()) v = 1.0;
    return init;
}

void require_depth(int depth, const char* who) {
    if (depth < 1) throw std::invalid_argument(std::string(who) + ": depth must be >= 1");
}

}  // namespace

double phi_estimate(const BackboneField& backbone, const EnvironmentWindow& env, const Site& site,
                    int depth) {
    require_depth(depth, "phi_estimate");
    const int d = env.geometry().d();
    if (site.n - depth < env.geometry().t_min())
        throw RangeError("phi_estimate: backward cone of depth " + std::to_string(depth) +
                         " leaves the window at the bottom");
    SpatialPmf init = cone_ones(d, Box::ball(d, site.x, 0), site.n, depth);
    SpatialPmf pushed = forward_evolve_clipped(backbone, env, init, depth);
    return pushed.value(site.x);
}

DensityField phi_field(const BackboneField& backbone, const EnvironmentWindow& env, int32_t slice_time,
                       const Box& region, int depth) {
    require_depth(depth, "phi_field");
    const int d = env.geometry().d();
    if (slice_time - depth < env.geometry().t_min())
        throw RangeError("phi_field: backward cone leaves the window at the bottom");
    SpatialPmf init = cone_ones(d, region, slice_time, depth);
    SpatialPmf pushed = forward_evolve_clipped(backbone, env, init, depth);

    DensityField field;
    field.depth = depth;
    field.phi = SpatialPmf(d, slice_time, region);
    for (int64_t i = 0; i < field.phi.size(); ++i)
        field.phi.raw()[static_cast<size_t>(i)] = pushed.value(field.phi.coord_of(i));
    return field;
}

double cesaro_phi(const BackboneField& backbone, const EnvironmentWindow& env, const Site& site,
                  int max_depth) {
    if (max_depth < 1) throw std::invalid_argument("cesaro_phi: max_depth must be >= 1");
    double sum = 1.0;  // depth-0 density is the constant 1
    for (int depth = 1; depth < max_depth; ++depth) sum += phi_estimate(backbone, env, site, depth);
    return sum / static_cast<double>(max_depth);
}

ConcentrationReport concentration_statistic(const DensityField& field, int32_t box_side) {
    const int d = field.phi.d();
    Box cube = Box::cube_centred(d, origin_coord(), box_side);
    for (int i = 0; i < d; ++i) {
        int32_t lo = cube.lo[static_cast<size_t>(i)];
        int32_t hi = lo + cube.extent[static_cast<size_t>(i)];
        int32_t rlo = field.phi.support().lo[static_cast<size_t>(i)];
        int32_t rhi = rlo + field.phi.support().extent[static_cast<size_t>(i)];
        if (lo < rlo || hi > rhi)
            throw RangeError("concentration_statistic: cube of side " + std::to_string(box_side) +
                             " exceeds the field region");
    }
    ConcentrationReport rep;
    rep.box_side = box_side;
    rep.depth = field.depth;
    rep.box_average = field.phi.box_sum(cube) / static_cast<double>(cube.volume(d));
    rep.deviation = std::abs(rep.box_average - 1.0);
    return rep;
}

void write_csv(std::ostream& out, const DensityField& field) {
    for (int i = 0; i < field.phi.d(); ++i) out << "x" << (i + 1) << ",";
    out << "phi,depth\n";
    field.phi.for_each([&](const Coord& x, double v) {
        for (int i = 0; i < field.phi.d(); ++i) out << x[static_cast<size_t>(i)] << ",";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << "," << field.depth << "\n";
    });
}

}  // namespace opbw
