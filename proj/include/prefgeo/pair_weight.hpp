#pragma once

#include <cmath>

#include "prefgeo/errors.hpp"
#include "prefgeo/window.hpp"

namespace prefgeo {

// Weight w(s,t) = 1(||s-t|| <= R) / (2 pi ||s-t|| |S cap (S - s + t)|):
// translation-overlap corrected, truncated at the dependence range R.
struct PairWeightSpec {
    double R = 0.1;
    Window window;

    void validate() const {
        window.validate();
        if (!(R > 0.0)) throw DataError("PairWeightSpec: R > 0 required");
        if (!(R < window.min_side()))
            throw DataError("PairWeightSpec: R must stay below the window sides");
    }
};

inline double pair_weight(double sx, double sy, double tx, double ty,
                          const PairWeightSpec& spec) {
    double dx = sx - tx, dy = sy - ty;
    double d = std::hypot(dx, dy);
    if (d <= 0.0 || d > spec.R) return 0.0;
    double overlap = spec.window.translation_overlap(dx, dy);
    return 1.0 / (2.0 * M_PI * d * overlap);
}

}  // namespace prefgeo
