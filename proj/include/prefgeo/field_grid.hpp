#pragma once

#include <cmath>
#include <vector>

#include "prefgeo/errors.hpp"
#include "prefgeo/window.hpp"

namespace prefgeo {

// Random-field realizations on the cell-center lattice of a regular grid.
// Layers are row-major over (iy * nx + ix). The X layer drives the point
// intensity, the Y layer carries the mark field, the covariate layer is the
// fixed design surface.
struct FieldGrid {
    Window window;
    int resolution = 64;  // cells per unit length
    int nx = 0, ny = 0;   // cell counts
    std::vector<double> x_field, y_field, covariate;

    static FieldGrid make(const Window& win, int resolution) {
        win.validate();
        if (resolution < 16) throw DataError("FieldGrid: resolution >= 16 required");
        FieldGrid g;
        g.window = win;
        g.resolution = resolution;
        g.nx = static_cast<int>(std::lround(win.width() * resolution));
        g.ny = static_cast<int>(std::lround(win.height() * resolution));
        if (g.nx < 2 || g.ny < 2) throw DataError("FieldGrid: window too small for resolution");
        return g;
    }

    double cell_size() const { return 1.0 / resolution; }
    double cell_area() const { return cell_size() * cell_size(); }
    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }

    double center_x(int ix) const { return window.xmin + (ix + 0.5) * cell_size(); }
    double center_y(int iy) const { return window.ymin + (iy + 0.5) * cell_size(); }

    // Bilinear interpolation on the center lattice; the half-cell boundary
    // band clamps to the nearest interior cell pair.
    double bilinear(const std::vector<double>& layer, double px, double py) const {
        double h = cell_size();
        double u = (px - window.xmin) / h - 0.5;
        double v = (py - window.ymin) / h - 0.5;
        int i0 = static_cast<int>(std::floor(u));
        int j0 = static_cast<int>(std::floor(v));
        i0 = std::max(0, std::min(i0, nx - 2));
        j0 = std::max(0, std::min(j0, ny - 2));
        double fu = std::min(1.0, std::max(0.0, u - i0));
        double fv = std::min(1.0, std::max(0.0, v - j0));
        auto at = [&](int i, int j) { return layer[static_cast<std::size_t>(j) * nx + i]; };
        return (1 - fu) * (1 - fv) * at(i0, j0) + fu * (1 - fv) * at(i0 + 1, j0) +
               (1 - fu) * fv * at(i0, j0 + 1) + fu * fv * at(i0 + 1, j0 + 1);
    }
};

}  // namespace prefgeo
