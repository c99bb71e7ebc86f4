#include "opbw/pmf.hpp"

#include <cstdio>
#include <ostream>

namespace opbw {

double SpatialPmf::total() const {
    double sum = 0.0, comp = 0.0;
    for (double v : values_) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

void SpatialPmf::for_each(const std::function<void(const Coord&, double)>& fn) const {
    for (int64_t i = 0; i < size(); ++i) fn(box_.coord_at(i, d_), values_[static_cast<size_t>(i)]);
}

double SpatialPmf::box_sum(const Box& region) const {
    // intersect region with the support box, then sum
    Box inter;
    for (int i = 0; i < d_; ++i) {
        int32_t lo = std::max(region.lo[static_cast<size_t>(i)], box_.lo[static_cast<size_t>(i)]);
        int32_t hi = std::min(region.lo[static_cast<size_t>(i)] + region.extent[static_cast<size_t>(i)],
                              box_.lo[static_cast<size_t>(i)] + box_.extent[static_cast<size_t>(i)]);
        if (hi <= lo) return 0.0;
        inter.lo[static_cast<size_t>(i)] = lo;
        inter.extent[static_cast<size_t>(i)] = hi - lo;
    }
    double sum = 0.0, comp = 0.0;
    const int64_t vol = inter.volume(d_);
    for (int64_t i = 0; i < vol; ++i) {
        Coord x = inter.coord_at(i, d_);
        double y = values_[static_cast<size_t>(box_.flat_index(x, d_))] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

SpatialPmf SpatialPmf::reframed(const Box& support) const {
    for (int i = 0; i < d_; ++i) {
        if (support.lo[static_cast<size_t>(i)] > box_.lo[static_cast<size_t>(i)] ||
            support.lo[static_cast<size_t>(i)] + support.extent[static_cast<size_t>(i)] <
                box_.lo[static_cast<size_t>(i)] + box_.extent[static_cast<size_t>(i)])
            throw RangeError("SpatialPmf::reframed: target box does not cover the support");
    }
    SpatialPmf out(d_, time_, support);
    for (int64_t i = 0; i < size(); ++i) {
        Coord x = box_.coord_at(i, d_);
        out.values_[static_cast<size_t>(support.flat_index(x, d_))] = values_[static_cast<size_t>(i)];
    }
    return out;
}

namespace {

void write_csv_header(std::ostream& out, int d, const char* value_name, bool with_stderr) {
    for (int i = 0; i < d; ++i) out << "x" << (i + 1) << ",";
    out << value_name;
    if (with_stderr) out << ",stderr";
    out << "\n";
}

void write_value(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

}  // namespace

void write_csv(std::ostream& out, const SpatialPmf& pmf, const char* value_name) {
    write_csv_header(out, pmf.d(), value_name, false);
    pmf.for_each([&](const Coord& x, double v) {
        for (int i = 0; i < pmf.d(); ++i) out << x[static_cast<size_t>(i)] << ",";
        write_value(out, v);
        out << "\n";
    });
}

void write_csv(std::ostream& out, const AveragedLaw& law) {
    write_csv_header(out, law.mean.d(), "mass", true);
    for (int64_t i = 0; i < law.mean.size(); ++i) {
        Coord x = law.mean.coord_of(i);
        for (int j = 0; j < law.mean.d(); ++j) out << x[static_cast<size_t>(j)] << ",";
        write_value(out, law.mean.at_flat(i));
        out << ",";
        write_value(out, law.stderrs[static_cast<size_t>(i)]);
        out << "\n";
    }
}

}  // namespace opbw
