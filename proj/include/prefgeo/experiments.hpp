#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "prefgeo/errors.hpp"
#include "prefgeo/estimators.hpp"
#include "prefgeo/fit.hpp"
#include "prefgeo/inference.hpp"
#include "prefgeo/mle.hpp"
#include "prefgeo/simulation.hpp"

namespace prefgeo {

// ---------------------------------------------------------------------------
// Records and aggregation

struct ParamEstimates {
    double beta0 = 0.0, beta1 = 0.0;
    double sigma_y2 = 0.0, phi_y = 0.0, sigma_e2 = 0.0;
};

struct ReplicateRecord {
    int replicate = 0;
    std::size_t n_points = 0;
    std::string method;         // MLE | CL | MC | SW (sandwich inference only)
    ParamEstimates est;         // beta0 corrected for CL/MC, raw for MLE
    double beta0_raw = 0.0;
    double cxy0_hat = 0.0;
    // nonparametric diagnostics at the reference lag R/4
    double omega_hat = 0.0;
    double ref_lag = 0.0;
    double vy_at_ref = 0.0;
    double cxy_at_ref = 0.0;
    double fit_seconds = 0.0;
    bool converged = true;
    bool has_ci = false;
    double se_beta1 = 0.0, ci_lo_beta1 = 0.0, ci_hi_beta1 = 0.0;
};

struct SummaryRow {
    std::string method, param;
    double truth = 0.0, mean = 0.0, bias = 0.0, sderr = 0.0, rmse = 0.0;
    long reps = 0;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
    std::vector<ReplicateRecord> records;
    long failures = 0;
    long replicates = 0;

    const SummaryRow* find(const std::string& method, const std::string& param) const {
        for (const auto& r : rows)
            if (r.method == method && r.param == param) return &r;
        return nullptr;
    }

    // Estimates only; wall-clock values live in the timing CSV so these two
    // files are byte-identical across runs and thread counts.
    void write_summary_csv(std::ostream& os) const {
        os << "method,param,truth,mean,bias,sderr,rmse,reps\n";
        char buf[256];
        for (const auto& r : rows) {
            if (r.param == "time_sec") continue;
            std::snprintf(buf, sizeof buf, "%s,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%ld\n",
                          r.method.c_str(), r.param.c_str(), r.truth, r.mean, r.bias, r.sderr,
                          r.rmse, r.reps);
            os << buf;
        }
    }

    void write_records_csv(std::ostream& os) const {
        os << "replicate,method,n_points,beta0,beta1,sigma_y2,phi_y,sigma_e2,beta0_raw,"
              "cxy0_hat,omega_hat,ref_lag,vy_at_ref,cxy_at_ref,converged\n";
        char buf[512];
        for (const auto& r : records) {
            std::snprintf(
                buf, sizeof buf,
                "%d,%s,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n",
                r.replicate, r.method.c_str(), r.n_points, r.est.beta0, r.est.beta1,
                r.est.sigma_y2, r.est.phi_y, r.est.sigma_e2, r.beta0_raw, r.cxy0_hat,
                r.omega_hat, r.ref_lag, r.vy_at_ref, r.cxy_at_ref, r.converged ? 1 : 0);
            os << buf;
        }
    }

    void write_timing_csv(std::ostream& os) const {
        os << "method,mean_seconds,sd_seconds,reps\n";
        char buf[256];
        for (const auto& r : rows) {
            if (r.param != "time_sec") continue;
            std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%ld\n", r.method.c_str(), r.mean,
                          r.sderr, r.reps);
            os << buf;
        }
    }

    // mean(SdErr) layout, one row per method
    std::string text_table() const {
        std::string out =
            "method      beta0         beta1         sigma_y2      phi_y           sigma_e2      "
            "time_sec\n";
        char buf[512];
        for (const std::string& m : {"MLE", "CL", "MC"}) {
            bool any = false;
            std::string line = m;
            line.resize(12, ' ');
            for (const std::string& p :
                 {"beta0", "beta1", "sigma_y2", "phi_y", "sigma_e2", "time_sec"}) {
                const SummaryRow* r = find(m, p);
                if (!r) continue;
                any = true;
                int prec = p == "phi_y" ? 4 : 2;
                std::snprintf(buf, sizeof buf, "%.*f(%.*f)", prec, r->mean, prec, r->sderr);
                std::string cell = buf;
                cell.resize(std::max<std::size_t>(cell.size() + 1, 14), ' ');
                line += cell;
            }
            if (any) out += line + "\n";
        }
        return out;
    }
};

namespace detail {

inline void aggregate_into(SummaryTable& table, const std::string& method,
                           const std::string& param, double truth,
                           const std::vector<double>& xs) {
    if (xs.empty()) return;
    double m = static_cast<double>(xs.size());
    double mean = 0;
    for (double v : xs) mean += v;
    mean /= m;
    double ss = 0, se = 0;
    for (double v : xs) {
        ss += (v - mean) * (v - mean);
        se += (v - truth) * (v - truth);
    }
    SummaryRow row;
    row.method = method;
    row.param = param;
    row.truth = truth;
    row.mean = mean;
    row.bias = mean - truth;
    row.sderr = xs.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    row.rmse = std::sqrt(se / m);
    row.reps = static_cast<long>(xs.size());
    table.rows.push_back(row);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Replicate fan-out

struct BenchOptions {
    int replicates = 100;
    int threads = 0;  // 0: hardware concurrency
    bool run_mle = true, run_cl = true, run_mc = true;
    bool with_ci = false;
    double ci_level = 0.95;
    double R = 0.0;       // 0: 4 * true phi_Y
    double fit_nu = 0.0;  // 0: the scenario's true smoothness
};

// Runs fn(rep) for rep in [0, reps), fanning out over a worker pool, and
// flattens the per-replicate records in replicate order (identical output
// for any worker count). Failed replicates are excluded and counted; more
// than 5% failing aborts.
inline std::pair<std::vector<ReplicateRecord>, long> run_replicates(
    int reps, int threads,
    const std::function<std::vector<ReplicateRecord>(int)>& fn) {
    if (reps <= 0) throw DataError("run_replicates: replicate count must be positive");
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
    threads = std::min(threads, reps);

    std::vector<std::vector<ReplicateRecord>> results(reps);
    std::vector<char> failed(reps, 0);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int rep = next.fetch_add(1);
            if (rep >= reps) return;
            try {
                results[rep] = fn(rep);
            } catch (const std::exception&) {
                failed[rep] = 1;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    long failures = 0;
    std::vector<ReplicateRecord> flat;
    for (int rep = 0; rep < reps; ++rep) {
        if (failed[rep]) {
            ++failures;
            continue;
        }
        for (auto& r : results[rep]) flat.push_back(std::move(r));
    }
    if (failures * 20 > reps)
        throw SimulationError("run_replicates: more than 5% of replicates failed (" +
                              std::to_string(failures) + "/" + std::to_string(reps) + ")");
    return {std::move(flat), failures};
}

// ---------------------------------------------------------------------------
// Shared per-replicate analysis

struct PatternAnalysis {
    BetaEstimate beta;
    double omega = 0.0;
    double bandwidth = 0.0;
    EmpiricalCurve vy, cxy;
    std::optional<SandwichEstimate> sw;
    std::vector<CoefInterval> ci;
};

// Raw least squares, sill, CV bandwidth, kernel curves, intercept
// correction, and (optionally) the sandwich intervals.
inline PatternAnalysis analyze_pattern(const PointPattern& pat, double R, bool with_ci,
                                       double ci_level = 0.95) {
    PatternAnalysis out;
    out.beta = ols_beta(pat);
    out.omega = sill_hat(pat, out.beta.beta_raw);
    out.bandwidth =
        select_bandwidth(pat, out.beta.beta_raw, default_bandwidth_candidates(R), R);
    auto lags = default_lag_grid(out.bandwidth, R);
    out.vy = semivariogram_hat(pat, out.beta.beta_raw, lags, out.bandwidth);
    out.cxy = crosscov_hat(pat, out.beta.beta_raw, lags, out.bandwidth);
    double cxy0;
    try {
        cxy0 = crosscov_at_zero(out.cxy);
    } catch (const InsufficientPairs&) {
        cxy0 = out.cxy.value_at(0.0);  // flat fallback at the first populated lag
        if (std::isnan(cxy0)) cxy0 = 0.0;
    }
    correct_intercept(out.beta, cxy0);
    if (with_ci) {
        out.sw = sandwich(pat, out.beta.beta_raw, out.omega, out.vy, out.cxy, R);
        out.sw->ci_level = ci_level;
        out.ci = confidence_intervals(out.beta, *out.sw, ci_level);
    }
    return out;
}

namespace detail {

inline std::vector<ReplicateRecord> run_one_replicate(const FieldSimulator& sim, int rep,
                                                      const BenchOptions& opt) {
    const ScenarioConfig& cfg = sim.config();
    double R = opt.R > 0.0 ? opt.R : 4.0 * cfg.y_params.phi;
    double nu_fit = opt.fit_nu > 0.0 ? opt.fit_nu : cfg.y_params.nu;
    SemivariogramModel model(nu_fit);

    PointPattern pat = sim.generate(static_cast<std::uint64_t>(rep));
    auto t0 = std::chrono::steady_clock::now();
    PatternAnalysis an = analyze_pattern(pat, R, opt.with_ci, opt.ci_level);
    double analysis_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double beta1 = pat.covariate_dim() > 1 ? an.beta.beta_raw[1] : 0.0;

    std::vector<ReplicateRecord> records;
    double ref_lag = 0.25 * R;
    auto base_record = [&](const std::string& method) {
        ReplicateRecord r;
        r.replicate = rep;
        r.n_points = pat.size();
        r.method = method;
        r.beta0_raw = an.beta.beta_raw[0];
        r.cxy0_hat = an.beta.cxy0_hat;
        r.omega_hat = an.omega;
        r.ref_lag = ref_lag;
        r.vy_at_ref = an.vy.value_at(ref_lag);
        r.cxy_at_ref = an.cxy.value_at(ref_lag);
        return r;
    };

    PairWeightSpec spec{R, cfg.window};
    for (FitMethod method : {FitMethod::CL, FitMethod::MC}) {
        if ((method == FitMethod::CL && !opt.run_cl) || (method == FitMethod::MC && !opt.run_mc))
            continue;
        FitResult f = fit(pat, an.beta.beta_raw, spec, method, model);
        ReplicateRecord r = base_record(to_string(method));
        r.est = {an.beta.beta_corrected[0], beta1, f.theta.sigma_y2, f.theta.phi_y,
                 f.theta.sigma_e2};
        r.fit_seconds = f.seconds + analysis_seconds;
        r.converged = f.converged;
        if (opt.with_ci && an.sw) {
            r.has_ci = true;
            r.se_beta1 = an.ci[1].se;
            r.ci_lo_beta1 = an.ci[1].lo;
            r.ci_hi_beta1 = an.ci[1].hi;
        }
        records.push_back(std::move(r));
    }
    if (opt.run_mle) {
        MleResult m = mle_fit(pat, nu_fit);
        ReplicateRecord r = base_record("MLE");
        r.est = {m.beta[0], pat.covariate_dim() > 1 ? m.beta[1] : 0.0, m.theta.sigma_y2,
                 m.theta.phi_y, m.theta.sigma_e2};
        r.fit_seconds = m.seconds;
        r.converged = m.converged;
        if (opt.with_ci && pat.covariate_dim() > 1) {
            double z = normal_quantile(0.5 * (1.0 + opt.ci_level));
            double se = std::sqrt(std::max(m.beta_cov(1, 1), 0.0));
            r.has_ci = true;
            r.se_beta1 = se;
            r.ci_lo_beta1 = m.beta[1] - z * se;
            r.ci_hi_beta1 = m.beta[1] + z * se;
        }
        records.push_back(std::move(r));
    }
    // inference-only record (the proposed method's interval does not depend
    // on the parametric fit)
    if (opt.with_ci && an.sw) {
        ReplicateRecord r = base_record("SW");
        r.est = {an.beta.beta_corrected[0], beta1, 0, 0, 0};
        r.has_ci = true;
        r.se_beta1 = an.ci[1].se;
        r.ci_lo_beta1 = an.ci[1].lo;
        r.ci_hi_beta1 = an.ci[1].hi;
        records.push_back(std::move(r));
    }
    return records;
}

inline SummaryTable summarize(const ScenarioConfig& cfg, std::vector<ReplicateRecord> records,
                              long failures, int reps) {
    SummaryTable table;
    table.failures = failures;
    table.replicates = reps;
    double beta1_truth = cfg.beta.size() > 1 ? cfg.beta[1] : 0.0;
    for (const std::string& m : {"MLE", "CL", "MC"}) {
        std::vector<double> b0, b1, sy, ph, se, tm;
        for (const auto& r : records) {
            if (r.method != m) continue;
            b0.push_back(r.est.beta0);
            b1.push_back(r.est.beta1);
            sy.push_back(r.est.sigma_y2);
            ph.push_back(r.est.phi_y);
            se.push_back(r.est.sigma_e2);
            tm.push_back(r.fit_seconds);
        }
        detail::aggregate_into(table, m, "beta0", cfg.beta[0], b0);
        detail::aggregate_into(table, m, "beta1", beta1_truth, b1);
        detail::aggregate_into(table, m, "sigma_y2", cfg.y_params.sigma2, sy);
        detail::aggregate_into(table, m, "phi_y", cfg.y_params.phi, ph);
        detail::aggregate_into(table, m, "sigma_e2", cfg.sigma_e2, se);
        detail::aggregate_into(table, m, "time_sec", 0.0, tm);
    }
    table.records = std::move(records);
    return table;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Drivers

// Parameter-estimate comparison on one scenario configuration.
inline SummaryTable run_table1(const ScenarioConfig& cfg, const BenchOptions& opt) {
    FieldSimulator sim(cfg);
    auto [records, failures] =
        run_replicates(opt.replicates, opt.threads,
                       [&](int rep) { return detail::run_one_replicate(sim, rep, opt); });
    if (records.empty()) throw DataError("run_table1: no successful replicates");
    return detail::summarize(cfg, std::move(records), failures, opt.replicates);
}

struct ExpansionWindow {
    Window window;
    int resolution;
};

// Domain-expansion study: one summary per window, same per-unit density.
inline std::vector<std::pair<ExpansionWindow, SummaryTable>> run_expansion(
    ScenarioConfig cfg, const std::vector<ExpansionWindow>& windows, const BenchOptions& opt) {
    std::vector<std::pair<ExpansionWindow, SummaryTable>> out;
    for (const auto& w : windows) {
        cfg.window = w.window;
        cfg.resolution = w.resolution;
        out.emplace_back(w, run_table1(cfg, opt));
    }
    return out;
}

struct CoverageCell {
    double gamma = 0.0;
    std::string method;  // SW (proposed) or MLE
    long covered = 0;
    long total = 0;
    double coverage = 0.0;
    double mean_se = 0.0;
};

struct CoverageResult {
    std::vector<CoverageCell> cells;
    std::vector<std::pair<double, SummaryTable>> tables;  // per gamma

    void write_csv(std::ostream& os) const {
        os << "gamma,method,covered,total,coverage,mean_se\n";
        char buf[256];
        for (const auto& c : cells) {
            std::snprintf(buf, sizeof buf, "%.10g,%s,%ld,%ld,%.10g,%.10g\n", c.gamma,
                          c.method.c_str(), c.covered, c.total, c.coverage, c.mean_se);
            os << buf;
        }
    }
};

// Confidence-interval coverage for the slope across preferential-sampling
// strengths. The proposed method's interval (SW) comes from the plug-in
// sandwich; the MLE interval from the profile information, when enabled.
inline CoverageResult run_coverage(ScenarioConfig cfg, const std::vector<double>& gamma_grid,
                                   const BenchOptions& opt) {
    if (cfg.scenario != 1) throw DataError("run_coverage: scenario 1 required");
    if (cfg.beta.size() < 2) throw DataError("run_coverage: needs the covariate slope");
    BenchOptions o = opt;
    o.with_ci = true;
    o.run_cl = false;
    o.run_mc = false;
    CoverageResult result;
    for (double gamma : gamma_grid) {
        cfg.gamma = gamma;
        FieldSimulator sim(cfg);
        auto [records, failures] =
            run_replicates(o.replicates, o.threads,
                           [&](int rep) { return detail::run_one_replicate(sim, rep, o); });
        double truth = cfg.beta[1];
        for (const std::string& m : {"SW", "MLE"}) {
            CoverageCell cell;
            cell.gamma = gamma;
            cell.method = m;
            for (const auto& r : records) {
                if (r.method != m || !r.has_ci) continue;
                ++cell.total;
                if (r.ci_lo_beta1 <= truth && truth <= r.ci_hi_beta1) ++cell.covered;
                cell.mean_se += r.se_beta1;
            }
            if (cell.total > 0) {
                cell.coverage = static_cast<double>(cell.covered) / cell.total;
                cell.mean_se /= cell.total;
                result.cells.push_back(cell);
            }
        }
        result.tables.emplace_back(gamma,
                                   detail::summarize(cfg, std::move(records), failures,
                                                     o.replicates));
    }
    return result;
}

}  // namespace prefgeo
