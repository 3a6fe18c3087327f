#pragma once

#include <algorithm>
#include <cmath>

#include "prefgeo/errors.hpp"

namespace prefgeo {

// Rectangular observation window.
struct Window {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    double min_side() const { return std::min(width(), height()); }

    bool contains(double x, double y) const {
        return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
    }

    // Area of the window intersected with itself translated by (dx, dy):
    // (W - |dx|)(H - |dy|), zero once the translation exceeds a side.
    double translation_overlap(double dx, double dy) const {
        double ox = width() - std::abs(dx);
        double oy = height() - std::abs(dy);
        if (ox <= 0.0 || oy <= 0.0) return 0.0;
        return ox * oy;
    }

    void validate() const {
        if (!(xmax > xmin) || !(ymax > ymin))
            throw DataError("Window: xmax > xmin and ymax > ymin required");
    }
};

}  // namespace prefgeo
