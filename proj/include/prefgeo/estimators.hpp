#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "prefgeo/errors.hpp"
#include "prefgeo/pair_grid.hpp"
#include "prefgeo/point_pattern.hpp"

namespace prefgeo {

// ---------------------------------------------------------------------------
// Least squares and the sill

// Raw least squares is consistent for beta*_0 = beta_0 + C_XY(0) e_1 under
// preferential sampling; the corrected vector subtracts the estimated
// cross-covariance at lag zero from the intercept slot. All residual-based
// estimators below use the RAW vector: the implicit -C_XY(0) shift in those
// residuals is exactly what keeps them unbiased under preferential sampling.
struct BetaEstimate {
    std::vector<double> beta_raw;
    std::vector<double> beta_corrected;
    double cxy0_hat = 0.0;
};

inline BetaEstimate ols_beta(const PointPattern& pat) {
    const std::size_t n = pat.size(), p = pat.covariate_dim();
    if (n < p) throw SingularDesign("ols_beta: fewer points than covariates");
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) gram(a, b) += pat.covariate(i, a) * pat.covariate(i, b);
            rhs[a] += pat.covariate(i, a) * pat.z[i];
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible())
        throw SingularDesign("ols_beta: design Gram matrix numerically singular");
    Eigen::VectorXd beta = lu.solve(rhs);
    BetaEstimate est;
    est.beta_raw.assign(beta.data(), beta.data() + p);
    est.beta_corrected = est.beta_raw;
    return est;
}

inline void correct_intercept(BetaEstimate& est, double cxy0) {
    est.cxy0_hat = cxy0;
    est.beta_corrected = est.beta_raw;
    est.beta_corrected[0] -= cxy0;
}

inline std::vector<double> residuals(const PointPattern& pat, const std::vector<double>& beta) {
    if (beta.size() != pat.covariate_dim())
        throw DataError("residuals: beta length != covariate dimension");
    std::vector<double> r(pat.size());
    for (std::size_t i = 0; i < pat.size(); ++i) {
        double m = 0.0;
        for (std::size_t a = 0; a < beta.size(); ++a) m += pat.covariate(i, a) * beta[a];
        r[i] = pat.z[i] - m;
    }
    return r;
}

// Moment estimator of the sill omega = sigma_Y^2 + sigma_e^2.
inline double sill_hat(const PointPattern& pat, const std::vector<double>& beta_raw) {
    if (pat.size() == 0) throw DataError("sill_hat: empty pattern");
    auto r = residuals(pat, beta_raw);
    double s = 0.0;
    for (double v : r) s += v * v;
    return s / static_cast<double>(r.size());
}

// ---------------------------------------------------------------------------
// Kernel curve estimators

inline double epanechnikov(double u) {
    double a = std::abs(u);
    return a < 1.0 ? 0.75 * (1.0 - a * a) : 0.0;
}

// Kernel-smoothed estimate on a lag grid. Lags with no kernel mass keep
// pair_count == 0 and a NaN value; they are omitted on output.
struct EmpiricalCurve {
    std::vector<double> lags;
    std::vector<double> values;
    std::vector<long> pair_count;
    double bandwidth = 0.0;
    std::string kernel = "epanechnikov";

    bool populated(std::size_t l) const { return pair_count[l] > 0; }

    // Linear interpolation between populated lags; flat extension below the
    // first populated lag, NaN beyond the last.
    double value_at(double r) const {
        double prev_lag = 0.0, prev_val = std::nan("");
        bool have_prev = false;
        for (std::size_t l = 0; l < lags.size(); ++l) {
            if (!populated(l)) continue;
            if (lags[l] >= r) {
                if (!have_prev) return values[l];
                double t = (r - prev_lag) / (lags[l] - prev_lag);
                return prev_val + t * (values[l] - prev_val);
            }
            prev_lag = lags[l];
            prev_val = values[l];
            have_prev = true;
        }
        return std::nan("");
    }

    void write_csv(std::ostream& os) const {
        os << "r,value,pairs\n";
        for (std::size_t l = 0; l < lags.size(); ++l)
            if (populated(l))
                os << detail::fmt_double(lags[l]) << ',' << detail::fmt_double(values[l]) << ','
                   << pair_count[l] << "\n";
    }
};

// 50 equispaced lags from h to the fitting range.
inline std::vector<double> default_lag_grid(double h, double max_lag, int count = 50) {
    std::vector<double> lags(count);
    for (int i = 0; i < count; ++i)
        lags[i] = h + (max_lag - h) * static_cast<double>(i) / (count - 1);
    return lags;
}

namespace detail {

struct CurveAccum {
    std::vector<double> num, den;
    std::vector<long> pairs;
};

// Shared pair scan: calls push(l, kern, i, j, d) for each unordered pair and
// each lag node inside the kernel support.
template <class Push>
inline void scan_pairs(const PointPattern& pat, const std::vector<double>& lags, double h,
                       Push&& push) {
    double rmax = lags.back() + h;
    PairGrid grid(pat.x, pat.y, pat.window, rmax);
    grid.for_each_pair([&](std::size_t i, std::size_t j, double d) {
        auto lo = std::lower_bound(lags.begin(), lags.end(), d - h);
        for (auto it = lo; it != lags.end() && *it < d + h; ++it) {
            double k = epanechnikov((d - *it) / h) / h;
            if (k > 0.0) push(static_cast<std::size_t>(it - lags.begin()), k, i, j, d);
        }
    });
}

}  // namespace detail

// Kernel semivariogram: ratio of kernel-weighted squared residual differences
// to twice the kernel mass. The ordered double sum reduces to unordered
// accumulation (the factor 2 cancels in the ratio exactly).
inline EmpiricalCurve semivariogram_hat(const PointPattern& pat,
                                        const std::vector<double>& beta_raw,
                                        const std::vector<double>& lags, double h) {
    if (!(h > 0.0)) throw DataError("semivariogram_hat: h > 0 required");
    auto resid = residuals(pat, beta_raw);
    EmpiricalCurve curve;
    curve.lags = lags;
    curve.bandwidth = h;
    curve.values.assign(lags.size(), std::nan(""));
    curve.pair_count.assign(lags.size(), 0);
    std::vector<double> num(lags.size(), 0.0), den(lags.size(), 0.0);
    detail::scan_pairs(pat, lags, h, [&](std::size_t l, double k, std::size_t i, std::size_t j, double) {
        double diff = resid[i] - resid[j];
        num[l] += k * diff * diff;
        den[l] += k;
        curve.pair_count[l] += 1;
    });
    for (std::size_t l = 0; l < lags.size(); ++l)
        if (den[l] > 0.0) curve.values[l] = num[l] / (2.0 * den[l]);
    return curve;
}

// Kernel cross-covariance between marks and intensity: the residual is
// attached to the first index of each ordered pair and the sum runs over
// both orderings, so each unordered pair contributes (res_i + res_j).
inline EmpiricalCurve crosscov_hat(const PointPattern& pat, const std::vector<double>& beta_raw,
                                   const std::vector<double>& lags, double h) {
    if (!(h > 0.0)) throw DataError("crosscov_hat: h > 0 required");
    auto resid = residuals(pat, beta_raw);
    EmpiricalCurve curve;
    curve.lags = lags;
    curve.bandwidth = h;
    curve.values.assign(lags.size(), std::nan(""));
    curve.pair_count.assign(lags.size(), 0);
    std::vector<double> num(lags.size(), 0.0), den(lags.size(), 0.0);
    detail::scan_pairs(pat, lags, h, [&](std::size_t l, double k, std::size_t i, std::size_t j, double) {
        num[l] += k * (resid[i] + resid[j]);
        den[l] += 2.0 * k;
        curve.pair_count[l] += 1;
    });
    for (std::size_t l = 0; l < lags.size(); ++l)
        if (den[l] > 0.0) curve.values[l] = num[l] / den[l];
    return curve;
}

// Translation-corrected kernel pair correlation function.
inline EmpiricalCurve pcf_hat(const PointPattern& pat, const std::vector<double>& lags, double h) {
    if (!(h > 0.0)) throw DataError("pcf_hat: h > 0 required");
    EmpiricalCurve curve;
    curve.lags = lags;
    curve.bandwidth = h;
    curve.values.assign(lags.size(), std::nan(""));
    curve.pair_count.assign(lags.size(), 0);
    std::vector<double> num(lags.size(), 0.0);
    const double n = static_cast<double>(pat.size());
    const double area = pat.window.area();
    double rho2 = n * (n - 1.0) / (area * area);
    double rmax = lags.back() + h;
    PairGrid grid(pat.x, pat.y, pat.window, rmax);
    grid.for_each_pair([&](std::size_t i, std::size_t j, double d) {
        double overlap = pat.window.translation_overlap(pat.x[i] - pat.x[j], pat.y[i] - pat.y[j]);
        if (overlap <= 0.0) return;
        auto lo = std::lower_bound(curve.lags.begin(), curve.lags.end(), d - h);
        for (auto it = lo; it != curve.lags.end() && *it < d + h; ++it) {
            double k = epanechnikov((d - *it) / h) / h;
            if (k > 0.0) {
                std::size_t l = static_cast<std::size_t>(it - curve.lags.begin());
                num[l] += 2.0 * k / overlap;
                curve.pair_count[l] += 1;
            }
        }
    });
    for (std::size_t l = 0; l < lags.size(); ++l)
        if (curve.pair_count[l] > 0)
            curve.values[l] = num[l] / (2.0 * M_PI * lags[l] * rho2);
    return curve;
}

// Local-linear extrapolation of the cross-covariance curve to lag zero:
// a kernel-weighted line over the populated lags r <= r0 (default 3h),
// weights tapering away from the evaluation point so the nearest lags
// dominate. Exact for constant and linear curves under any weighting.
inline double crosscov_at_zero(const EmpiricalCurve& curve, double r0 = 0.0) {
    if (r0 <= 0.0) r0 = 3.0 * curve.bandwidth;
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    long m = 0;
    const double taper = r0 * 4.0 / 3.0;  // keep weight on the boundary lag
    for (std::size_t l = 0; l < curve.lags.size(); ++l) {
        if (!curve.populated(l) || curve.lags[l] > r0) continue;
        double rx = curve.lags[l], vy = curve.values[l];
        double wt = epanechnikov(rx / taper);
        sw += wt;
        sx += wt * rx;
        sy += wt * vy;
        sxx += wt * rx * rx;
        sxy += wt * rx * vy;
        ++m;
    }
    if (m < 3)
        throw InsufficientPairs("crosscov_at_zero: fewer than 3 populated lags below r0");
    double denom = sw * sxx - sx * sx;
    if (denom <= 0.0) throw InsufficientPairs("crosscov_at_zero: degenerate small-lag design");
    double slope = (sw * sxy - sx * sy) / denom;
    return (sy - slope * sx) / sw;
}

// 8 log-spaced bandwidth candidates between 0.02 and 0.5 of the maximum lag.
inline std::vector<double> default_bandwidth_candidates(double max_lag, int count = 8) {
    std::vector<double> hs(count);
    double lo = std::log(0.02 * max_lag), hi = std::log(0.5 * max_lag);
    for (int i = 0; i < count; ++i)
        hs[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
    return hs;
}

// Leave-one-point-out cross-validation for the semivariogram bandwidth.
// For each candidate, every pair is scored twice (once per endpoint) against
// the curve refit without that endpoint's pairs, evaluated at the pair
// distance by linear interpolation between lag nodes. Degenerate scoring
// falls back to 0.1 times the median pair distance.
inline double select_bandwidth(const PointPattern& pat, const std::vector<double>& beta_raw,
                               const std::vector<double>& candidates, double max_lag) {
    if (candidates.empty()) throw DataError("select_bandwidth: no candidates");
    if (candidates.size() == 1) return candidates[0];
    auto resid = residuals(pat, beta_raw);
    const std::size_t n = pat.size();

    struct PairRec {
        std::size_t i, j;
        double d, halfsq;
    };
    std::vector<PairRec> pairs;
    {
        PairGrid grid(pat.x, pat.y, pat.window, max_lag);
        grid.for_each_pair([&](std::size_t i, std::size_t j, double d) {
            double diff = resid[i] - resid[j];
            pairs.push_back({i, j, d, 0.5 * diff * diff});
        });
    }

    double best_h = -1.0, best_score = std::numeric_limits<double>::infinity();
    std::vector<double> num, den, num_pt, den_pt;
    for (double h : candidates) {
        auto lags = default_lag_grid(h, max_lag);
        const std::size_t L = lags.size();
        num.assign(L, 0.0);
        den.assign(L, 0.0);
        num_pt.assign(n * L, 0.0);
        den_pt.assign(n * L, 0.0);
        detail::scan_pairs(pat, lags, h,
                           [&](std::size_t l, double k, std::size_t i, std::size_t j, double) {
                               double diff = resid[i] - resid[j];
                               double contrib = k * diff * diff;
                               num[l] += contrib;
                               den[l] += k;
                               num_pt[i * L + l] += contrib;
                               den_pt[i * L + l] += k;
                               num_pt[j * L + l] += contrib;
                               den_pt[j * L + l] += k;
                           });

        auto loo_value = [&](std::size_t pt, double d) -> double {
            // locate bracketing lag nodes
            auto it = std::lower_bound(lags.begin(), lags.end(), d);
            std::size_t hi_idx = static_cast<std::size_t>(it - lags.begin());
            auto node = [&](std::size_t l) -> double {
                double dd = den[l] - den_pt[pt * L + l];
                if (dd <= 0.0) return std::nan("");
                return (num[l] - num_pt[pt * L + l]) / (2.0 * dd);
            };
            if (hi_idx == 0) return node(0);
            if (hi_idx >= L) return std::nan("");
            double v0 = node(hi_idx - 1), v1 = node(hi_idx);
            if (std::isnan(v0) || std::isnan(v1)) return std::isnan(v1) ? v0 : v1;
            double t = (d - lags[hi_idx - 1]) / (lags[hi_idx] - lags[hi_idx - 1]);
            return v0 + t * (v1 - v0);
        };

        double score = 0.0;
        long terms = 0;
        for (const auto& pr : pairs) {
            if (pr.d < lags.front() || pr.d > lags.back()) continue;
            for (std::size_t pt : {pr.i, pr.j}) {
                double v = loo_value(pt, pr.d);
                if (std::isnan(v)) continue;
                double e = pr.halfsq - v;
                score += e * e;
                ++terms;
            }
        }
        if (terms == 0) continue;
        score /= static_cast<double>(terms);
        if (score < best_score) {
            best_score = score;
            best_h = h;
        }
    }
    if (best_h > 0.0) return best_h;
    // rule-of-thumb fallback
    if (pairs.empty()) return 0.1 * max_lag;
    std::vector<double> ds(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) ds[k] = pairs[k].d;
    auto mid = ds.begin() + ds.size() / 2;
    std::nth_element(ds.begin(), mid, ds.end());
    return 0.1 * *mid;
}

}  // namespace prefgeo
