#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "prefgeo/covariance.hpp"
#include "prefgeo/errors.hpp"
#include "prefgeo/estimators.hpp"
#include "prefgeo/nelder_mead.hpp"
#include "prefgeo/pair_grid.hpp"
#include "prefgeo/pair_weight.hpp"
#include "prefgeo/point_pattern.hpp"

namespace prefgeo {

enum class FitMethod { MC, CL };

inline const char* to_string(FitMethod m) { return m == FitMethod::MC ? "MC" : "CL"; }

struct FitResult {
    SemivariogramParams theta;
    double objective = 0.0;
    FitMethod method = FitMethod::CL;
    int iterations = 0;
    bool converged = false;
    std::size_t n_pairs_used = 0;  // distinct unordered pairs within R
    double seconds = 0.0;
};

// Precomputed per-pair quantities for the objective sums: distance, weight,
// squared residual difference. Pairs are hard-truncated at R (equivalent to
// the weight's indicator, cheaper to enumerate).
class PairCache {
  public:
    PairCache(const PointPattern& pat, const std::vector<double>& beta_raw,
              const PairWeightSpec& spec) {
        spec.validate();
        auto resid = residuals(pat, beta_raw);
        PairGrid grid(pat.x, pat.y, pat.window, spec.R);
        grid.for_each_pair([&](std::size_t i, std::size_t j, double dist) {
            double w = pair_weight(pat.x[i], pat.y[i], pat.x[j], pat.y[j], spec);
            if (w <= 0.0) return;
            double diff = resid[i] - resid[j];
            d_.push_back(dist);
            w_.push_back(w);
            dz2_.push_back(diff * diff);
        });
    }

    // Custom weight callable (sx, sy, tx, ty) -> weight; pairs enumerated
    // out to rmax, zero-weight pairs dropped. Only the translation-overlap
    // weight above ships tested; this hook covers experimentation.
    template <class WeightFn>
    PairCache(const PointPattern& pat, const std::vector<double>& beta_raw, double rmax,
              WeightFn&& weight) {
        auto resid = residuals(pat, beta_raw);
        PairGrid grid(pat.x, pat.y, pat.window, rmax);
        grid.for_each_pair([&](std::size_t i, std::size_t j, double dist) {
            double w = weight(pat.x[i], pat.y[i], pat.x[j], pat.y[j]);
            if (w <= 0.0) return;
            double diff = resid[i] - resid[j];
            d_.push_back(dist);
            w_.push_back(w);
            dz2_.push_back(diff * diff);
        });
    }

    // Synthetic pair set (tests, precomputed data).
    PairCache(std::vector<double> d, std::vector<double> w, std::vector<double> dz2)
        : d_(std::move(d)), w_(std::move(w)), dz2_(std::move(dz2)) {}

    std::size_t size() const { return d_.size(); }
    const std::vector<double>& distances() const { return d_; }
    const std::vector<double>& weights() const { return w_; }
    const std::vector<double>& sq_diffs() const { return dz2_; }

    double median_distance() const {
        if (d_.empty()) return 0.0;
        std::vector<double> tmp = d_;
        auto mid = tmp.begin() + tmp.size() / 2;
        std::nth_element(tmp.begin(), mid, tmp.end());
        return *mid;
    }

  private:
    std::vector<double> d_, w_, dz2_;
};

// ---------------------------------------------------------------------------
// Objectives and scores. The paper's double sums run over ordered distinct
// pairs; values below carry the factor 2 so they match a literal ordered
// loop. Normalization of the scores: score_mc equals -1/4 of the gradient of
// q_mc, score_cl equals -2 times the gradient of q_cl.

inline double q_mc(const SemivariogramParams& theta, const PairCache& cache,
                   const SemivariogramModel& model) {
    double acc = 0.0;
    const auto& d = cache.distances();
    const auto& w = cache.weights();
    const auto& dz2 = cache.sq_diffs();
    for (std::size_t k = 0; k < d.size(); ++k) {
        double g = dz2[k] - 2.0 * model(d[k], theta);
        acc += w[k] * g * g;
    }
    return 2.0 * acc;
}

inline double q_cl(const SemivariogramParams& theta, const PairCache& cache,
                   const SemivariogramModel& model) {
    double acc = 0.0;
    const auto& d = cache.distances();
    const auto& w = cache.weights();
    const auto& dz2 = cache.sq_diffs();
    for (std::size_t k = 0; k < d.size(); ++k) {
        double z = model(d[k], theta);
        if (!(z > 0.0)) return std::numeric_limits<double>::infinity();
        acc += w[k] * (dz2[k] / (2.0 * z) + std::log(z));
    }
    return 2.0 * acc;
}

inline std::array<double, 3> score_mc(const SemivariogramParams& theta, const PairCache& cache,
                                      const SemivariogramModel& model) {
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    const auto& d = cache.distances();
    const auto& w = cache.weights();
    const auto& dz2 = cache.sq_diffs();
    for (std::size_t k = 0; k < d.size(); ++k) {
        double z = model(d[k], theta);
        auto g = model.grad(d[k], theta);
        double resid = dz2[k] - 2.0 * z;
        for (int a = 0; a < 3; ++a) acc[a] += w[k] * g[a] * resid;
    }
    for (auto& v : acc) v *= 2.0;
    return acc;
}

inline std::array<double, 3> score_cl(const SemivariogramParams& theta, const PairCache& cache,
                                      const SemivariogramModel& model) {
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    const auto& d = cache.distances();
    const auto& w = cache.weights();
    const auto& dz2 = cache.sq_diffs();
    for (std::size_t k = 0; k < d.size(); ++k) {
        double z = model(d[k], theta);
        if (!(z > 0.0))
            return {std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
        auto g = model.grad(d[k], theta);
        double resid = dz2[k] - 2.0 * z;
        for (int a = 0; a < 3; ++a) acc[a] += w[k] * g[a] / (z * z) * resid;
    }
    for (auto& v : acc) v *= 2.0;
    return acc;
}

// Convenience overloads matching the estimator signatures.
inline double q_mc(const SemivariogramParams& theta, const PointPattern& pat,
                   const std::vector<double>& beta_raw, const PairWeightSpec& spec,
                   const SemivariogramModel& model = SemivariogramModel(0.5)) {
    return q_mc(theta, PairCache(pat, beta_raw, spec), model);
}
inline double q_cl(const SemivariogramParams& theta, const PointPattern& pat,
                   const std::vector<double>& beta_raw, const PairWeightSpec& spec,
                   const SemivariogramModel& model = SemivariogramModel(0.5)) {
    return q_cl(theta, PairCache(pat, beta_raw, spec), model);
}

namespace detail {

inline SemivariogramParams theta_from_log(const std::vector<double>& u) {
    // nugget floored to dodge the log singularity of the CL objective
    return {std::exp(u[0]), std::exp(u[1]), std::max(std::exp(u[2]), 1e-10)};
}

// Start 3: match zeta to the empirical semivariogram at two lags, anchored
// at the moment sill. Falls back to the caller's default on degeneracy.
inline std::optional<SemivariogramParams> curve_matched_start(const PointPattern& pat,
                                                              const std::vector<double>& beta_raw,
                                                              const PairWeightSpec& spec,
                                                              const SemivariogramModel& model,
                                                              double omega) {
    double h = 0.1 * spec.R;
    auto curve = semivariogram_hat(pat, beta_raw, default_lag_grid(h, spec.R), h);
    double r1 = 0.25 * spec.R, r2 = 0.5 * spec.R;
    double v1 = curve.value_at(r1), v2 = curve.value_at(r2);
    if (!std::isfinite(v1) || !std::isfinite(v2)) return std::nullopt;
    double c1 = omega - v1, c2 = omega - v2;
    if (!(c1 > 0.0) || !(c2 > 0.0) || !(c1 > c2)) return std::nullopt;
    double target = c1 / c2;
    // rho(r1;phi)/rho(r2;phi) decreases to 1 as phi grows; bisect on log phi
    auto ratio = [&](double phi) { return model.corr(r1, phi) / model.corr(r2, phi); };
    double lo = 1e-3 * spec.R, hi = 10.0 * spec.R;
    if (ratio(lo) < target || ratio(hi) > target) return std::nullopt;
    for (int it = 0; it < 80; ++it) {
        double mid = std::sqrt(lo * hi);
        (ratio(mid) > target ? lo : hi) = mid;
    }
    double phi = std::sqrt(lo * hi);
    double sy2 = c1 / model.corr(r1, phi);
    if (!(sy2 > 0.0) || !std::isfinite(sy2)) return std::nullopt;
    double se2 = std::max(omega - sy2, 1e-6 * omega);
    return SemivariogramParams{sy2, phi, se2};
}

}  // namespace detail

// Multi-start minimization over a prepared pair set. Start list: the moment
// start (omega/2, median distance, omega/2), a short pilot run seeded from
// it, then any caller-provided extras. Ties break toward the earlier start.
inline FitResult fit_pairs(const PairCache& cache, FitMethod method,
                           const SemivariogramModel& model, double omega,
                           const std::vector<SemivariogramParams>& extra_starts = {}) {
    auto t0 = std::chrono::steady_clock::now();
    if (cache.size() < 10) throw DataError("fit: fewer than 10 pairs within radius R");

    auto objective = [&](const std::vector<double>& u) {
        SemivariogramParams theta = detail::theta_from_log(u);
        return method == FitMethod::MC ? q_mc(theta, cache, model) : q_cl(theta, cache, model);
    };
    auto to_log = [](const SemivariogramParams& t) {
        return std::vector<double>{std::log(t.sigma_y2), std::log(t.phi_y),
                                   std::log(std::max(t.sigma_e2, 1e-10))};
    };

    std::vector<SemivariogramParams> starts;
    starts.push_back({0.5 * omega, cache.median_distance(), 0.5 * omega});
    auto pilot = nelder_mead(objective, to_log(starts[0]), 0.3, 1e-8, 200);
    starts.push_back(detail::theta_from_log(pilot.x));
    for (const auto& s : extra_starts) starts.push_back(s);

    FitResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        auto run = nelder_mead(objective, to_log(start), 0.3, 1e-8, 2000);
        if (run.fx < best.objective) {
            best.theta = detail::theta_from_log(run.x);
            best.objective = run.fx;
            best.iterations = run.iterations;
            best.converged = run.converged;
        }
    }
    best.method = method;
    best.n_pairs_used = cache.size();
    best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

// Dependence range when no externally known phi is available: a pilot
// composite-likelihood fit at a quarter of the short window side sets
// R = 4 * pilot phi, kept inside the admissible weight range.
inline double choose_weight_range(const PointPattern& pat, const std::vector<double>& beta_raw,
                                  const SemivariogramModel& model = SemivariogramModel(0.5));

// Weighted minimum-contrast / composite-likelihood fit of the semivariogram
// family to a pattern, from raw least-squares residuals.
inline FitResult fit(const PointPattern& pat, const std::vector<double>& beta_raw,
                     const PairWeightSpec& spec, FitMethod method,
                     const SemivariogramModel& model = SemivariogramModel(0.5),
                     std::optional<SemivariogramParams> init = std::nullopt) {
    auto t0 = std::chrono::steady_clock::now();
    PairCache cache(pat, beta_raw, spec);
    double omega = sill_hat(pat, beta_raw);
    std::vector<SemivariogramParams> extras;
    if (init) extras.push_back(*init);
    if (auto matched = detail::curve_matched_start(pat, beta_raw, spec, model, omega))
        extras.push_back(*matched);
    FitResult best = fit_pairs(cache, method, model, omega, extras);
    best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

inline double choose_weight_range(const PointPattern& pat, const std::vector<double>& beta_raw,
                                  const SemivariogramModel& model) {
    double side = pat.window.min_side();
    PairWeightSpec pilot{0.25 * side, pat.window};
    FitResult f = fit(pat, beta_raw, pilot, FitMethod::CL, model);
    double R = 4.0 * f.theta.phi_y;
    return std::min(std::max(R, 0.02 * side), 0.9 * side);
}

}  // namespace prefgeo
