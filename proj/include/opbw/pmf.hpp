#ifndef OPBW_PMF_HPP
#define OPBW_PMF_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "opbw/lattice.hpp"

namespace opbw {

// Per-site values over a box at a fixed time slice. Used for probability
// mass functions (quenched/annealed/hybrid laws) and for density fields;
// values outside the box read as zero.
class SpatialPmf {
  public:
    SpatialPmf() = default;
    SpatialPmf(int d, int32_t time, const Box& support)
        : d_(d), time_(time), box_(support), values_(static_cast<size_t>(support.volume(d)), 0.0) {}

    static SpatialPmf delta(int d, const Coord& x, int32_t time) {
        SpatialPmf pmf(d, time, Box::ball(d, x, 0));
        pmf.values_[0] = 1.0;
        return pmf;
    }

    int d() const { return d_; }
    int32_t time() const { return time_; }
    const Box& support() const { return box_; }
    int64_t size() const { return static_cast<int64_t>(values_.size()); }

    double value(const Coord& x) const {
        if (!box_.contains(x, d_)) return 0.0;
        return values_[static_cast<size_t>(box_.flat_index(x, d_))];
    }
    double& at(const Coord& x) {
        if (!box_.contains(x, d_)) throw RangeError("SpatialPmf::at: coordinate outside support box");
        return values_[static_cast<size_t>(box_.flat_index(x, d_))];
    }
    double at_flat(int64_t i) const { return values_[static_cast<size_t>(i)]; }
    std::vector<double>& raw() { return values_; }
    const std::vector<double>& raw() const { return values_; }

    Coord coord_of(int64_t flat) const { return box_.coord_at(flat, d_); }

    // compensated (Kahan) total
    double total() const;

    void for_each(const std::function<void(const Coord&, double)>& fn) const;

    void scale(double s) {
        for (double& v : values_) v *= s;
    }

    // sum of values over box ∩ support
    double box_sum(const Box& region) const;

    // mass-preserving reframe onto a larger box
    SpatialPmf reframed(const Box& support) const;

  private:
    int d_ = 1;
    int32_t time_ = 0;
    Box box_{};
    std::vector<double> values_;
};

// Mean of exact per-environment laws with per-site standard errors.
struct AveragedLaw {
    SpatialPmf mean;
    std::vector<double> stderrs;  // aligned with mean's flat indexing
    int64_t replicas = 0;

    double stderr_at(const Coord& x) const {
        if (!mean.support().contains(x, mean.d())) return 0.0;
        return stderrs[static_cast<size_t>(mean.support().flat_index(x, mean.d()))];
    }
};

// CSV export: header "x1,..,xd,mass" (+ ",stderr" for averaged laws).
void write_csv(std::ostream& out, const SpatialPmf& pmf, const char* value_name = "mass");
void write_csv(std::ostream& out, const AveragedLaw& law);

}  // namespace opbw

#endif
