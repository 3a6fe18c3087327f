#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "prefgeo/window.hpp"

namespace prefgeo {

// Uniform spatial binning for pair enumeration within a cutoff radius.
// Visits every unordered pair (i < j by construction of the scan order)
// exactly once, in a fixed deterministic order: bins row-major, within-bin
// pairs first, then the four forward half-shell neighbours.
class PairGrid {
  public:
    PairGrid(const std::vector<double>& x, const std::vector<double>& y, const Window& win,
             double rmax)
        : x_(x), y_(y), rmax_(rmax) {
        cell_ = std::max(rmax, 1e-12);
        nx_ = std::max(1, static_cast<int>(std::floor(win.width() / cell_)));
        ny_ = std::max(1, static_cast<int>(std::floor(win.height() / cell_)));
        cell_x_ = win.width() / nx_;
        cell_y_ = win.height() / ny_;
        bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (std::size_t i = 0; i < x.size(); ++i) {
            int bx = std::min(nx_ - 1, static_cast<int>((x[i] - win.xmin) / cell_x_));
            int by = std::min(ny_ - 1, static_cast<int>((y[i] - win.ymin) / cell_y_));
            bins_[static_cast<std::size_t>(by) * nx_ + bx].push_back(i);
        }
    }

    // f(i, j, dist) over unordered pairs with dist <= rmax.
    template <class F>
    void for_each_pair(F&& f) const {
        static constexpr int kOff[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
        for (int by = 0; by < ny_; ++by)
            for (int bx = 0; bx < nx_; ++bx) {
                const auto& own = bins_[static_cast<std::size_t>(by) * nx_ + bx];
                for (std::size_t a = 0; a < own.size(); ++a)
                    for (std::size_t b = a + 1; b < own.size(); ++b)
                        emit(own[a], own[b], f);
                for (const auto& off : kOff) {
                    int ox = bx + off[0], oy = by + off[1];
                    if (ox < 0 || ox >= nx_ || oy < 0 || oy >= ny_) continue;
                    const auto& other = bins_[static_cast<std::size_t>(oy) * nx_ + ox];
                    for (std::size_t a : own)
                        for (std::size_t b : other) emit(a, b, f);
                }
            }
    }

  private:
    template <class F>
    void emit(std::size_t i, std::size_t j, F&& f) const {
        double dx = x_[i] - x_[j], dy = y_[i] - y_[j];
        double d2 = dx * dx + dy * dy;
        if (d2 <= rmax_ * rmax_) f(i, j, std::sqrt(d2));
    }

    const std::vector<double>& x_;
    const std::vector<double>& y_;
    double rmax_, cell_, cell_x_, cell_y_;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::size_t>> bins_;
};

}  // namespace prefgeo
