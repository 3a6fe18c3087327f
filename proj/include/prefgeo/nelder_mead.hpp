#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace prefgeo {

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Derivative-free simplex search (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Converged when the simplex diameter (max vertex distance to
// the best vertex, infinity norm) drops below tol.
template <class F>
NelderMeadResult nelder_mead(F&& f, const std::vector<double>& x0, double step, double tol,
                             int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step;
    std::vector<double> fs(n + 1);
    for (std::size_t v = 0; v <= n; ++v) fs[v] = f(xs[v]);

    auto order = [&]() {
        for (std::size_t a = 0; a <= n; ++a)
            for (std::size_t b = a + 1; b <= n; ++b)
                if (fs[b] < fs[a]) {
                    std::swap(fs[a], fs[b]);
                    std::swap(xs[a], xs[b]);
                }
    };
    auto diameter = [&]() {
        double dmax = 0.0;
        for (std::size_t v = 1; v <= n; ++v)
            for (std::size_t i = 0; i < n; ++i)
                dmax = std::max(dmax, std::abs(xs[v][i] - xs[0][i]));
        return dmax;
    };

    NelderMeadResult result;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        order();
        if (diameter() < tol) {
            result.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += xs[v][i] / n;

        auto blend = [&](const std::vector<double>& from, double c) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + c * (from[i] - centroid[i]);
            return p;
        };

        auto xr = blend(xs[n], -1.0);
        double fr = f(xr);
        if (fr < fs[0]) {
            auto xe = blend(xs[n], -2.0);
            double fe = f(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            bool outside = fr < fs[n];
            auto xc = blend(xs[n], outside ? -0.5 : 0.5);
            double fc = f(xc);
            if (fc < (outside ? fr : fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i)
                        xs[v][i] = xs[0][i] + 0.5 * (xs[v][i] - xs[0][i]);
                    fs[v] = f(xs[v]);
                }
            }
        }
    }
    order();
    result.x = xs[0];
    result.fx = fs[0];
    result.iterations = iter;
    return result;
}

}  // namespace prefgeo
