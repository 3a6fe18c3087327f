#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "prefgeo/errors.hpp"
#include "prefgeo/estimators.hpp"
#include "prefgeo/pair_grid.hpp"
#include "prefgeo/point_pattern.hpp"
#include "prefgeo/rng.hpp"

namespace prefgeo {

// Plug-in pieces of the asymptotic covariance of the least squares
// estimator: Var(beta_hat) ~= A^{-1} (B + C) A^{-1} with
//   A = sum_N w w',       B = omega_hat A,
//   C = sum over distinct pairs within lag_cap of
//       [C_Y(d) + C_XY(d)^2] w(s) w(t)'.
// The pair sum is Campbell-unbiased for the second-order integral, so no
// pair-correlation estimate is needed.
struct SandwichEstimate {
    Eigen::MatrixXd A, B, C, Sigma;
    double ci_level = 0.95;
    bool psd_clipped = false;
    std::size_t pairs_used = 0;
};

inline SandwichEstimate sandwich(const PointPattern& pat, const std::vector<double>& beta_raw,
                                 double omega_hat, const EmpiricalCurve& vy_curve,
                                 const EmpiricalCurve& cxy_curve, double lag_cap) {
    const std::size_t n = pat.size(), p = pat.covariate_dim();
    if (beta_raw.size() != p) throw DataError("sandwich: beta length != covariate dimension");
    if (!(lag_cap > 0.0)) throw DataError("sandwich: lag_cap > 0 required");

    SandwichEstimate est;
    est.A = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                est.A(a, b) += pat.covariate(i, a) * pat.covariate(i, b);
    est.B = omega_hat * est.A;

    // kernel noise at sparse lags must not destabilize the quadratic form
    auto cy_at = [&](double d) {
        double v = vy_curve.value_at(d);
        if (std::isnan(v)) return 0.0;
        return std::clamp(omega_hat - v, -omega_hat, omega_hat);
    };
    auto cxy_at = [&](double d) {
        double v = cxy_curve.value_at(d);
        if (std::isnan(v)) return 0.0;
        return std::clamp(v, -omega_hat, omega_hat);
    };

    est.C = Eigen::MatrixXd::Zero(p, p);
    PairGrid grid(pat.x, pat.y, pat.window, lag_cap);
    std::size_t pairs = 0;
    grid.for_each_pair([&](std::size_t i, std::size_t j, double d) {
        double v = cy_at(d);
        double cxy = cxy_at(d);
        v += cxy * cxy;
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                est.C(a, b) += v * (pat.covariate(i, a) * pat.covariate(j, b) +
                                    pat.covariate(j, a) * pat.covariate(i, b));
        ++pairs;
    });
    est.pairs_used = pairs;
    est.C = 0.5 * (est.C + est.C.transpose()).eval();

    Eigen::MatrixXd ainv = est.A.inverse();
    Eigen::MatrixXd sigma = ainv * (est.B + est.C) * ainv;
    sigma = 0.5 * (sigma + sigma.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.eigenvalues().minCoeff() < 0.0) {
        est.psd_clipped = true;
        Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
        sigma = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        sigma = 0.5 * (sigma + sigma.transpose()).eval();
    }
    est.Sigma = sigma;
    return est;
}

struct CoefInterval {
    double center = 0.0, se = 0.0, lo = 0.0, hi = 0.0;
};

// Normal-quantile intervals. Slope intervals center at the raw estimates;
// the intercept centers at the corrected one (the only coherent choice,
// since raw beta_0 estimates beta_0 + C_XY(0)).
inline std::vector<CoefInterval> confidence_intervals(const BetaEstimate& beta,
                                                      const SandwichEstimate& sw, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw DataError("confidence_intervals: level in (0,1) required");
    const std::size_t p = beta.beta_raw.size();
    double zq = normal_quantile(0.5 * (1.0 + level));
    std::vector<CoefInterval> out(p);
    for (std::size_t a = 0; a < p; ++a) {
        double var = std::max(sw.Sigma(a, a), 0.0);
        double se = std::sqrt(var);
        double center = a == 0 ? beta.beta_corrected[0] : beta.beta_raw[a];
        out[a] = {center, se, center - zq * se, center + zq * se};
    }
    return out;
}

}  // namespace prefgeo
