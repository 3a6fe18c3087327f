// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Heavy Monte-Carlo studies run at the sizes the criteria pin;
// expect roughly an hour end to end on two cores.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle_helpers.hpp"
#include "prefgeo/experiments.hpp"
#include "prefgeo/serialize.hpp"

using namespace prefgeo;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_lines;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::string line = std::string(pass ? "[PASS]" : "[FAIL]") + " criterion " +
                       std::to_string(id) + ": " + name + " -- " + detail;
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    g_lines.push_back(line);
    if (!pass) ++g_failures;
}

void info(const std::string& text) {
    std::printf("       %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

double elapsed_min(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
}

ScenarioConfig table1_scenario1() {
    ScenarioConfig cfg;
    cfg.scenario = 1;
    cfg.window = {0, 1, 0, 1};
    cfg.beta = {1.0, 1.0};
    cfg.sigma_e2 = 0.1;
    cfg.y_params = {1.0, 0.05, 1.0};
    cfg.gamma = 1.0;
    cfg.target_intensity = 400;
    cfg.resolution = 64;
    cfg.seed = 20260801;
    return cfg;
}

ScenarioConfig table1_scenario2() {
    ScenarioConfig cfg;
    cfg.scenario = 2;
    cfg.window = {0, 1, 0, 1};
    cfg.beta = {1.0, 1.0};
    cfg.sigma_e2 = 0.1;
    cfg.x_params = {1.8, 0.05, 0.5};
    cfg.xy_params = {1.0, 0.07, 0.75};
    cfg.y_params = {1.0, 0.1, 1.0};
    cfg.target_intensity = 400;
    cfg.resolution = 64;
    cfg.seed = 20260802;
    return cfg;
}

ScenarioConfig asymptotic_scenario1() {
    // the domain-expansion / coverage setting
    ScenarioConfig cfg;
    cfg.scenario = 1;
    cfg.window = {0, 1, 0, 1};
    cfg.beta = {1.0, 1.0};
    cfg.sigma_e2 = 0.1;
    cfg.y_params = {1.0, 0.1, 0.5};
    cfg.gamma = 1.0;
    cfg.target_intensity = 400;
    cfg.resolution = 64;
    cfg.seed = 20260803;
    return cfg;
}

// ---------------------------------------------------------------------- 1+2
void criteria_1_2() {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig cfg = table1_scenario1();
    BenchOptions opt;
    opt.replicates = 100;
    SummaryTable table = run_table1(cfg, opt);
    double minutes = elapsed_min(t0);

    auto mean_of = [&](const char* method, const char* param) {
        const SummaryRow* row = table.find(method, param);
        return row ? row->mean : std::nan("");
    };
    struct Band {
        const char* param;
        double target, tol;
    };
    const Band bands[] = {{"beta0", 1.0, 0.10},
                          {"beta1", 1.0, 0.05},
                          {"sigma_y2", 1.0, 0.10},
                          {"phi_y", 0.05, 0.006},
                          {"sigma_e2", 0.1, 0.02}};
    bool pass = minutes <= 30.0;
    std::string detail;
    for (const auto& b : bands) {
        double m = mean_of("CL", b.param);
        bool ok = std::isfinite(m) && std::abs(m - b.target) <= b.tol;
        pass = pass && ok;
        detail += std::string(b.param) + "=" + fmt(m) + (ok ? " " : "(out) ");
    }
    detail += "runtime=" + fmt(minutes, 3) + "min";
    report(1, "Table-1 reproduction, corrected CL means", pass, detail);
    info("full table (mean(SdErr)):");
    std::istringstream tt(table.text_table());
    for (std::string line; std::getline(tt, line);) info("  " + line);
    {
        double om = 0, cxy0 = 0, b0raw = 0;
        long m = 0;
        for (const auto& r : table.records) {
            if (r.method != "CL") continue;
            om += r.omega_hat;
            cxy0 += r.cxy0_hat;
            b0raw += r.beta0_raw;
            ++m;
        }
        info("mean sill_hat=" + fmt(om / m) + " (truth 1.1), mean Cxy(0)_hat=" +
             fmt(cxy0 / m) + ", mean raw beta0=" + fmt(b0raw / m));
    }

    double mle_b0 = mean_of("MLE", "beta0");
    double mle_sy = mean_of("MLE", "sigma_y2");
    bool pass2 = std::isfinite(mle_b0) && std::isfinite(mle_sy) && mle_b0 >= 1.25 && mle_sy <= 0.90;
    report(2, "MLE preferential-sampling bias signature", pass2,
           "mean beta0=" + fmt(mle_b0) + " (>=1.25), mean sigma_y2=" + fmt(mle_sy) + " (<=0.90)");
}

// ------------------------------------------------------------------------ 3
void criterion_3() {
    ScenarioConfig cfg = table1_scenario2();
    BenchOptions opt;
    opt.replicates = 100;
    SummaryTable table = run_table1(cfg, opt);
    const SummaryRow* cl_b0 = table.find("CL", "beta0");
    const SummaryRow* cl_sy = table.find("CL", "sigma_y2");
    const SummaryRow* mle_sy = table.find("MLE", "sigma_y2");
    bool pass = cl_b0 && cl_sy && mle_sy && std::abs(cl_b0->mean - 1.0) <= 0.25 &&
                cl_sy->mean >= 0.85 && mle_sy->mean <= 0.85;
    report(3, "scenario-2 robustness under a misspecified cross-structure", pass,
           "CL beta0=" + fmt(cl_b0 ? cl_b0->mean : std::nan("")) +
               " CL sigma_y2=" + fmt(cl_sy ? cl_sy->mean : std::nan("")) +
               " MLE sigma_y2=" + fmt(mle_sy ? mle_sy->mean : std::nan("")));
    std::istringstream tt(table.text_table());
    for (std::string line; std::getline(tt, line);) info("  " + line);
    if (!pass && cl_b0) {
        // context: the 100-replicate mean has standard error ~ SdErr/10; a
        // longer run of the same configuration locates the population value
        BenchOptions wide = opt;
        wide.replicates = 300;
        wide.run_mle = false;
        wide.run_mc = false;
        SummaryTable table300 = run_table1(cfg, wide);
        const SummaryRow* b0 = table300.find("CL", "beta0");
        info("300-replicate mean of corrected CL beta0: " + fmt(b0 ? b0->mean : std::nan("")) +
             " (gate band edge 1.25; 100-rep mean-standard-error ~" +
             fmt(cl_b0->sderr / 10.0, 2) + ")");
    }
}

// ------------------------------------------------------------------------ 4
void criterion_4() {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig cfg = asymptotic_scenario1();
    cfg.window = {0, 3, 0, 3};
    cfg.resolution = 32;
    BenchOptions opt;
    opt.replicates = 200;
    opt.run_mle = false;
    auto cov = run_coverage(cfg, {1.0}, opt);
    double minutes = elapsed_min(t0);
    const CoverageCell* sw = nullptr;
    for (const auto& c : cov.cells)
        if (c.method == "SW") sw = &c;
    bool pass = sw && minutes <= 120.0 && sw->coverage >= 0.90 && sw->coverage <= 0.98;
    report(4, "95% CI coverage for beta1 under preferential sampling", pass,
           std::string("coverage=") + (sw ? fmt(sw->coverage, 3) : "n/a") + " (" +
               (sw ? std::to_string(sw->covered) + "/" + std::to_string(sw->total) : "-") +
               "), runtime=" + fmt(minutes, 3) + "min");
    // informational: plug-in variance calibration against the Monte-Carlo
    // variance of beta1_hat across these replicates
    if (sw) {
        const auto& recs = cov.tables[0].second.records;
        std::vector<double> b1s, vars;
        for (const auto& r : recs)
            if (r.method == "SW" && r.has_ci) {
                b1s.push_back(r.est.beta1);
                vars.push_back(r.se_beta1 * r.se_beta1);
            }
        double mean = 0;
        for (double v : b1s) mean += v;
        mean /= static_cast<double>(b1s.size());
        double mc_var = 0;
        for (double v : b1s) mc_var += (v - mean) * (v - mean);
        mc_var /= static_cast<double>(b1s.size() - 1);
        double mean_var = 0;
        for (double v : vars) mean_var += v;
        mean_var /= static_cast<double>(vars.size());
        info("sandwich calibration: MC var(beta1)=" + fmt(mc_var) +
             ", mean plug-in var=" + fmt(mean_var) + ", ratio=" + fmt(mean_var / mc_var, 3));
    }
}

// ------------------------------------------------------------------------ 5
void criterion_5() {
    ScenarioConfig cfg = asymptotic_scenario1();
    BenchOptions opt;
    opt.replicates = 100;
    opt.run_mle = false;
    opt.run_mc = false;
    auto results = run_expansion(cfg, {{Window{0, 1, 0, 1}, 64}, {Window{0, 2, 0, 2}, 32}}, opt);
    const SummaryRow* b1_small = results[0].second.find("CL", "beta1");
    const SummaryRow* b1_large = results[1].second.find("CL", "beta1");
    const SummaryRow* ph_small = results[0].second.find("CL", "phi_y");
    const SummaryRow* ph_large = results[1].second.find("CL", "phi_y");
    double r_sderr = b1_small && b1_large ? b1_small->sderr / b1_large->sderr : std::nan("");
    double r_rmse = ph_small && ph_large ? ph_small->rmse / ph_large->rmse : std::nan("");
    bool pass = std::isfinite(r_sderr) && std::isfinite(r_rmse) && r_sderr >= 1.4 &&
                r_sderr <= 2.8 && r_rmse >= 1.4 && r_rmse <= 2.8;
    report(5, "increasing-domain rates from [0,1]^2 to [0,2]^2", pass,
           "SdErr(beta1) ratio=" + fmt(r_sderr, 3) + ", RMSE(phi) ratio=" + fmt(r_rmse, 3) +
               " (both in [1.4, 2.8])");

    // consistency of the nonparametric estimators across the two windows:
    // RMSE of sill_hat, V_hat(phi) and Cxy_hat(phi) should all shrink
    auto np_rmse = [&](const SummaryTable& t, auto&& pick, double truth) {
        double acc = 0;
        long m = 0;
        for (const auto& r : t.records) {
            if (r.method != "CL") continue;
            double v = pick(r);
            acc += (v - truth) * (v - truth);
            ++m;
        }
        return std::sqrt(acc / static_cast<double>(m));
    };
    double vy_truth = semivariogram(0.1, {1.0, 0.1, 0.1}, 0.5);
    double cxy_truth = matern_cov(0.1, {1.0, 0.1, 0.5});
    auto om = [](const ReplicateRecord& r) { return r.omega_hat; };
    auto vy = [](const ReplicateRecord& r) { return r.vy_at_ref; };
    auto cx = [](const ReplicateRecord& r) { return r.cxy_at_ref; };
    info("nonparametric RMSE [0,1]^2 -> [0,2]^2: sill " +
         fmt(np_rmse(results[0].second, om, 1.1), 3) + " -> " +
         fmt(np_rmse(results[1].second, om, 1.1), 3) + ", V(phi) " +
         fmt(np_rmse(results[0].second, vy, vy_truth), 3) + " -> " +
         fmt(np_rmse(results[1].second, vy, vy_truth), 3) + ", Cxy(phi) " +
         fmt(np_rmse(results[0].second, cx, cxy_truth), 3) + " -> " +
         fmt(np_rmse(results[1].second, cx, cxy_truth), 3));
}

// ------------------------------------------------------------------------ 6
void criterion_6() {
    Rng rng(606060);
    double worst = 0.0;
    std::string worst_what = "none";
    auto track = [&](const char* what, double rel) {
        if (rel > worst) {
            worst = rel;
            worst_what = what;
        }
    };
    auto rel_err = [](double a, double b) {
        double scale = std::max(std::abs(a), std::abs(b));
        return scale > 0 ? std::abs(a - b) / scale : 0.0;
    };

    for (int inst = 0; inst < 50; ++inst) {
        std::size_t n = 10 + static_cast<std::size_t>(rng.uniform() * 41);
        PointPattern pat;
        pat.window = {0, 1, 0, 1};
        pat.p = 2;
        for (std::size_t i = 0; i < n; ++i) {
            double wv = rng.normal();
            pat.add_point(rng.uniform(), rng.uniform(), 1.0 + wv + rng.normal(), {1.0, wv});
        }
        // (3) least squares
        auto est = ols_beta(pat);
        auto ref_beta = oracle::solve_normal_equations(pat);
        for (std::size_t a = 0; a < 2; ++a) track("ols", rel_err(est.beta_raw[a], ref_beta[a]));

        // (4) sill
        auto resid = oracle::residuals(pat, est.beta_raw);
        double sill_ref = 0;
        for (double v : resid) sill_ref += v * v;
        sill_ref /= static_cast<double>(n);
        track("sill", rel_err(sill_hat(pat, est.beta_raw), sill_ref));

        // (5)+(6) kernel curves
        double h = 0.03 + 0.07 * rng.uniform();
        auto lags = default_lag_grid(h, 0.45, 25);
        auto vy = semivariogram_hat(pat, est.beta_raw, lags, h);
        auto cc = crosscov_hat(pat, est.beta_raw, lags, h);
        std::vector<double> vref, cref;
        std::vector<long> pref;
        oracle::variogram_brute(pat, resid, lags, h, vref, pref);
        for (std::size_t l = 0; l < lags.size(); ++l)
            if (pref[l] > 0) track("variogram", rel_err(vy.values[l], vref[l]));
        oracle::crosscov_brute(pat, resid, lags, h, cref, pref);
        for (std::size_t l = 0; l < lags.size(); ++l)
            if (pref[l] > 0) track("crosscov", rel_err(cc.values[l], cref[l]));

        // (8)-(11) objectives and scores
        SemivariogramModel model(inst % 2 == 0 ? 0.5 : 1.0);
        SemivariogramParams theta{0.4 + rng.uniform(), 0.03 + 0.1 * rng.uniform(),
                                  0.02 + 0.2 * rng.uniform()};
        PairWeightSpec spec{0.3, pat.window};
        PairCache cache(pat, est.beta_raw, spec);
        double qm = 0, qc = 0;
        std::array<double, 3> sm{0, 0, 0}, sc{0, 0, 0};
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t t = 0; t < n; ++t) {
                if (s == t) continue;
                double d = oracle::dist(pat, s, t);
                if (d > spec.R) continue;
                double w = 1.0 / (2.0 * M_PI * d *
                                  pat.window.translation_overlap(pat.x[s] - pat.x[t],
                                                                 pat.y[s] - pat.y[t]));
                double diff = resid[s] - resid[t];
                double z = model(d, theta);
                auto g = model.grad(d, theta);
                double dev = diff * diff - 2.0 * z;
                qm += w * dev * dev;
                qc += w * (diff * diff / (2.0 * z) + std::log(z));
                for (int a = 0; a < 3; ++a) {
                    sm[a] += w * g[a] * dev;
                    sc[a] += w * g[a] / (z * z) * dev;
                }
            }
        track("q_mc", rel_err(q_mc(theta, cache, model), qm));
        track("q_cl", rel_err(q_cl(theta, cache, model), qc));
        auto smf = score_mc(theta, cache, model);
        auto scf = score_cl(theta, cache, model);
        double ns = 0, es = 0, nc = 0, ec = 0;
        for (int a = 0; a < 3; ++a) {
            es += (smf[a] - sm[a]) * (smf[a] - sm[a]);
            ns += sm[a] * sm[a];
            ec += (scf[a] - sc[a]) * (scf[a] - sc[a]);
            nc += sc[a] * sc[a];
        }
        track("score_mc", std::sqrt(es / ns));
        track("score_cl", std::sqrt(ec / nc));
    }
    report(6, "oracle equivalence of fast pair sums vs brute-force loops", worst <= 1e-12,
           "worst relative error " + fmt(worst, 3) + " (" + worst_what + ")");
}

// ------------------------------------------------------------------------ 7
void criterion_7() {
    Rng rng(777);
    bool pass = true;
    double worst_z = 0;
    for (int conf = 0; conf < 10; ++conf) {
        double mu_x = rng.uniform(-1, 1), mu_y = rng.uniform(-1, 1);
        double sd_x = 0.3 + 0.9 * rng.uniform(), sd_y = 0.3 + 1.2 * rng.uniform();
        double rho = rng.uniform(-0.85, 0.85);
        double cov_xy = rho * sd_x * sd_y;
        const long n = 1000000;
        double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
        double c1 = cov_xy + mu_y;
        double c2 = sd_y * sd_y + c1 * c1;
        for (long k = 0; k < n; ++k) {
            double zx = rng.normal(), zy = rng.normal();
            double X = mu_x + sd_x * zx;
            double Y = mu_y + sd_y * (rho * zx + std::sqrt(1 - rho * rho) * zy);
            double ex = std::exp(X);
            double d1 = Y * ex - c1 * ex;
            double d2 = Y * Y * ex - c2 * ex;
            s1 += d1;
            s1sq += d1 * d1;
            s2 += d2;
            s2sq += d2 * d2;
        }
        double m1 = s1 / n, m2 = s2 / n;
        double se1 = std::sqrt((s1sq / n - m1 * m1) / n);
        double se2 = std::sqrt((s2sq / n - m2 * m2) / n);
        double z1 = std::abs(m1) / se1, z2 = std::abs(m2) / se2;
        worst_z = std::max(worst_z, std::max(z1, z2));
        if (z1 > 3.0 || z2 > 3.0) pass = false;
    }
    report(7, "Stein-lemma moment identities for Y e^X and Y^2 e^X", pass,
           "worst |mean|/se = " + fmt(worst_z, 3) + " over 10 configurations (limit 3)");
}

// ------------------------------------------------------------------------ 8
void criterion_8() {
    double worst_k = 0, worst_m = 0;
    for (double nu : {0.5, 0.75, 1.0, 1.5}) {
        for (int i = 0; i < 40; ++i) {
            double x = std::exp(std::log(1e-3) + (std::log(30.0) - std::log(1e-3)) * i / 39.0);
            double ours = bessel_k(nu, x);
            double ref = static_cast<double>(oracle::besselk_de(nu, x));
            worst_k = std::max(worst_k, std::abs(ours - ref) / std::abs(ref));
        }
    }
    MaternParams p{1.7, 0.23, 0.5};
    for (double u = 1e-4; u <= 20.0; u *= 1.45) {
        double ours = matern_cov(u * p.phi, p);
        double ref = p.sigma2 * std::exp(-u);
        worst_m = std::max(worst_m, std::abs(ours - ref) / std::abs(ref));
    }
    bool pass = worst_k <= 1e-10 && worst_m <= 1e-12;
    report(8, "special functions vs quadrature oracle and exponential closed form", pass,
           "bessel worst rel=" + fmt(worst_k, 3) + " (<=1e-10), matern nu=1/2 worst rel=" +
               fmt(worst_m, 3) + " (<=1e-12)");
}

// ------------------------------------------------------------------------ 9
void criterion_9() {
    Rng rng(909);
    double worst_scores = 0, worst_grad = 0;
    int done = 0;
    while (done < 100) {
        std::size_t n = 20 + static_cast<std::size_t>(rng.uniform() * 11);
        PointPattern pat;
        pat.window = {0, 1, 0, 1};
        pat.p = 1;
        for (std::size_t i = 0; i < n; ++i)
            pat.add_point(rng.uniform(), rng.uniform(), rng.normal(), {1.0});
        PairWeightSpec spec{0.35, pat.window};
        std::vector<double> beta{0.0};
        PairCache cache(pat, beta, spec);
        if (cache.size() < 5) continue;
        SemivariogramModel model(done % 2 == 0 ? 0.5 : 1.0);
        SemivariogramParams theta{0.4 + 1.2 * rng.uniform(), 0.04 + 0.15 * rng.uniform(),
                                  0.02 + 0.2 * rng.uniform()};
        auto fd3 = [&](auto&& f) {
            std::array<double, 3> g;
            for (int a = 0; a < 3; ++a) {
                auto bump = [&](double s) {
                    SemivariogramParams u = theta;
                    (a == 0 ? u.sigma_y2 : a == 1 ? u.phi_y : u.sigma_e2) += s;
                    return f(u);
                };
                double step = (a == 1 ? theta.phi_y : 1.0) * 1e-6;
                g[a] = (bump(step) - bump(-step)) / (2.0 * step);
            }
            return g;
        };
        auto gm = fd3([&](const SemivariogramParams& t) { return q_mc(t, cache, model); });
        auto gc = fd3([&](const SemivariogramParams& t) { return q_cl(t, cache, model); });
        auto sm = score_mc(theta, cache, model);
        auto sc = score_cl(theta, cache, model);
        double e1 = 0, n1 = 0, e2 = 0, n2 = 0;
        for (int a = 0; a < 3; ++a) {
            e1 += std::pow(-4.0 * sm[a] - gm[a], 2);
            n1 += gm[a] * gm[a];
            e2 += std::pow(-0.5 * sc[a] - gc[a], 2);
            n2 += gc[a] * gc[a];
        }
        worst_scores = std::max(worst_scores, std::sqrt(e1 / n1));
        worst_scores = std::max(worst_scores, std::sqrt(e2 / n2));

        // analytic semivariogram gradient against central differences
        double nu = done % 2 == 0 ? 0.5 : 1.0;
        double r = 0.01 + 0.4 * rng.uniform();
        auto grad = semivariogram_grad(r, theta, nu);
        double eg = 0, ng = 0;
        for (int a = 0; a < 3; ++a) {
            auto bump = [&](double s) {
                SemivariogramParams u = theta;
                (a == 0 ? u.sigma_y2 : a == 1 ? u.phi_y : u.sigma_e2) += s;
                return semivariogram(r, u, nu);
            };
            double step = (a == 1 ? theta.phi_y : 1.0) * 1e-6;
            double fd = (bump(step) - bump(-step)) / (2.0 * step);
            eg += (grad[a] - fd) * (grad[a] - fd);
            ng += fd * fd;
        }
        worst_grad = std::max(worst_grad, std::sqrt(eg / ng));
        ++done;
    }
    bool pass = worst_scores <= 1e-6 && worst_grad <= 1e-6;
    report(9, "analytic scores and gradients vs finite differences", pass,
           "worst score rel=" + fmt(worst_scores, 3) + ", worst grad rel=" + fmt(worst_grad, 3) +
               " (<=1e-6)");
}

// ----------------------------------------------------------------------- 10
void criterion_10() {
    ScenarioConfig cfg;
    cfg.scenario = 1;
    cfg.window = {0, 1, 0, 1};
    cfg.y_params = {1.0, 0.1, 0.5};
    cfg.resolution = 16;
    cfg.target_intensity = 150;
    cfg.seed = 1010;

    bool pass = true;
    std::string detail;

    // library-level: table1 and coverage drivers across runs and threads
    std::vector<std::string> outs;
    for (int threads : {1, 2, 2}) {
        BenchOptions opt;
        opt.replicates = 5;
        opt.threads = threads;
        SummaryTable t = run_table1(cfg, opt);
        std::ostringstream s;
        t.write_summary_csv(s);
        t.write_records_csv(s);
        outs.push_back(s.str());
    }
    pass = pass && outs[0] == outs[1] && outs[1] == outs[2];
    detail += std::string("table1 driver ") + (pass ? "stable" : "UNSTABLE");

    {
        std::vector<std::string> covs;
        for (int threads : {1, 2}) {
            BenchOptions opt;
            opt.replicates = 5;
            opt.threads = threads;
            opt.run_mle = false;
            auto cov = run_coverage(cfg, {1.0}, opt);
            std::ostringstream s;
            cov.write_csv(s);
            covs.push_back(s.str());
        }
        bool ok = covs[0] == covs[1];
        pass = pass && ok;
        detail += std::string(", coverage driver ") + (ok ? "stable" : "UNSTABLE");
    }

#ifdef PREFGEO_CLI_PATH
    {
        fs::path dir = fs::temp_directory_path() / "prefgeo_acceptance_cli";
        fs::remove_all(dir);
        fs::create_directories(dir);
        {
            std::ofstream out(dir / "cfg.json");
            out << config_to_json(cfg).dump(2);
        }
        std::string base = std::string(PREFGEO_CLI_PATH) + " bench table1 --config " +
                           (dir / "cfg.json").string() + " --reps 3 --no-mle";
        int rc1 = std::system(
            (base + " --threads 1 --out " + (dir / "a").string() + " >/dev/null 2>&1").c_str());
        int rc2 = std::system(
            (base + " --threads 2 --out " + (dir / "b").string() + " >/dev/null 2>&1").c_str());
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        bool ok = rc1 == 0 && rc2 == 0 &&
                  slurp(dir / "a" / "records.csv") == slurp(dir / "b" / "records.csv") &&
                  slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv") &&
                  !slurp(dir / "a" / "records.csv").empty();
        pass = pass && ok;
        detail += std::string(", cli bench ") + (ok ? "stable" : "UNSTABLE");
        fs::remove_all(dir);
    }
#endif
    report(10, "byte-identical bench outputs across runs and thread counts", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto want = [&](int id) { return only.empty() || only.count(id) > 0; };

    auto t0 = std::chrono::steady_clock::now();
    if (want(1) || want(2)) criteria_1_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    if (want(9)) criterion_9();
    if (want(10)) criterion_10();

    std::printf("----\n%d criterion failure(s); total %.1f min\n", g_failures, elapsed_min(t0));
    return g_failures == 0 ? 0 : 1;
}
