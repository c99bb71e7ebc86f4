#ifndef OPBW_VIEW_HPP
#define OPBW_VIEW_HPP

#include "opbw/backbone.hpp"
#include "opbw/environment.hpp"
#include "opbw/lattice.hpp"

namespace opbw {

// Shifted read-only view of an environment (and its backbone): reading the
// view at (x,n) reads the base at (x+offset, n+time_offset). Shifts compose
// additively. Out-of-window reads throw; nothing wraps.
class EnvironmentView {
  public:
    EnvironmentView(const EnvironmentWindow& env, const BackboneField& backbone,
                    const Coord& offset, int32_t time_offset)
        : env_(&env), backbone_(&backbone), off_(offset), toff_(time_offset) {}

    bool open(const Coord& x, int32_t n) const {
        return env_->open(shifted_coord(x), n + toff_);
    }
    bool on_backbone(const Coord& x, int32_t n) const {
        return backbone_->on_backbone(shifted_coord(x), n + toff_);
    }

    EnvironmentView shifted(const Coord& y, int32_t m) const {
        return EnvironmentView(*env_, *backbone_, coord_add(off_, y, env_->geometry().d()), toff_ + m);
    }

    const Coord& offset() const { return off_; }
    int32_t time_offset() const { return toff_; }
    const EnvironmentWindow& base() const { return *env_; }
    const BackboneField& backbone() const { return *backbone_; }

  private:
    Coord shifted_coord(const Coord& x) const { return coord_add(off_, x, env_->geometry().d()); }

    const EnvironmentWindow* env_;
    const BackboneField* backbone_;
    Coord off_{};
    int32_t toff_ = 0;
};

inline EnvironmentView shift_view(const EnvironmentWindow& env, const BackboneField& backbone,
                                  const Coord& offset, int32_t time_offset) {
    return EnvironmentView(env, backbone, offset, time_offset);
}

}  // namespace opbw

#endif
