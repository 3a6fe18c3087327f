#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "prefgeo/covariance.hpp"
#include "prefgeo/errors.hpp"
#include "prefgeo/nelder_mead.hpp"
#include "prefgeo/point_pattern.hpp"

namespace prefgeo {

// Standard Gaussian maximum likelihood ignoring the sampling mechanism:
// Z ~ N(W beta, sigma_Y^2 R_nu(phi) + sigma_e^2 I) with beta profiled out by
// generalized least squares and the total variance omega profiled in closed
// form, leaving a 2-D search over (log phi, logit nugget proportion).
struct MleResult {
    std::vector<double> beta;
    SemivariogramParams theta;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    double seconds = 0.0;
    Eigen::MatrixXd beta_cov;  // omega_hat (W' Omega^{-1} W)^{-1} at theta_hat
};

namespace detail {

struct MleWork {
    const PointPattern* pat;
    SemivariogramModel model;
    Eigen::MatrixXd dist;  // pairwise distances
    Eigen::MatrixXd W;
    Eigen::VectorXd Z;

    MleWork(const PointPattern& p, double nu) : pat(&p), model(nu) {
        const std::size_t n = p.size(), q = p.covariate_dim();
        dist.resize(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double d = std::hypot(p.x[i] - p.x[j], p.y[i] - p.y[j]);
                dist(i, j) = dist(j, i) = d;
            }
        W.resize(n, q);
        Z.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Z[i] = p.z[i];
            for (std::size_t a = 0; a < q; ++a) W(i, a) = p.covariate(i, a);
        }
    }

    // correlation matrix Omega = (1-prop) R(phi) + prop I, factorized with
    // jitter escalation. Returns negative concentrated log-likelihood and
    // fills the profiled beta / omega.
    double neg_loglik(double phi, double prop, Eigen::VectorXd* beta_out = nullptr,
                      double* omega_out = nullptr, Eigen::MatrixXd* beta_cov_out = nullptr) const {
        const auto n = static_cast<std::size_t>(Z.size());
        Eigen::MatrixXd omega_m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            omega_m(i, i) = 1.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                double c = (1.0 - prop) * model.corr(dist(i, j), phi);
                omega_m(i, j) = omega_m(j, i) = c;
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt;
        double jitter = 0.0;
        for (int attempt = 0;; ++attempt) {
            Eigen::MatrixXd work = omega_m;
            if (attempt > 0) {
                jitter = std::pow(10.0, static_cast<double>(-13 + attempt));
                work.diagonal().array() += jitter;
            }
            llt.compute(work);
            if (llt.info() == Eigen::Success) break;
            if (attempt >= 7)
                throw FactorizationFailure("mle: correlation factorization failed");
        }
        Eigen::MatrixXd oiW = llt.solve(W);
        Eigen::VectorXd oiZ = llt.solve(Z);
        Eigen::MatrixXd wtow = W.transpose() * oiW;
        Eigen::VectorXd beta = wtow.ldlt().solve(W.transpose() * oiZ);
        Eigen::VectorXd resid = Z - W * beta;
        double quad = resid.dot(llt.solve(resid));
        double omega = quad / static_cast<double>(n);
        double logdet = 0.0;
        for (std::size_t i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        double nll = 0.5 * (static_cast<double>(n) * std::log(omega) + logdet +
                            static_cast<double>(n) * (1.0 + std::log(2.0 * M_PI)));
        if (beta_out) *beta_out = beta;
        if (omega_out) *omega_out = omega;
        if (beta_cov_out) *beta_cov_out = omega * wtow.inverse();
        return nll;
    }
};

}  // namespace detail

// Concentrated negative log-likelihood at (phi, nugget proportion); exposed
// for the optimality checks in tests.
inline double mle_profile_nll(const PointPattern& pat, double phi, double nugget_prop,
                              double nu) {
    detail::MleWork work(pat, nu);
    return work.neg_loglik(phi, nugget_prop);
}

// Generalized least squares at fixed covariance parameters. sigma_y2 = 0 is
// allowed (independent-errors case, reduces to ordinary least squares).
inline std::vector<double> gls_beta(const PointPattern& pat, const SemivariogramParams& theta,
                                    double nu, Eigen::MatrixXd* cov_out = nullptr) {
    double omega = theta.sigma_y2 + theta.sigma_e2;
    if (!(omega > 0.0)) throw DataError("gls_beta: total variance must be positive");
    detail::MleWork work(pat, nu);
    double prop = theta.sigma_e2 / omega;
    Eigen::VectorXd beta;
    Eigen::MatrixXd cov;
    work.neg_loglik(theta.phi_y, prop, &beta, nullptr, cov_out ? &cov : nullptr);
    if (cov_out) *cov_out = cov;
    return {beta.data(), beta.data() + beta.size()};
}

inline MleResult mle_fit(const PointPattern& pat, double nu_fixed,
                         std::optional<SemivariogramParams> init = std::nullopt) {
    auto t0 = std::chrono::steady_clock::now();
    if (pat.size() > 5000) throw DataError("mle_fit: n exceeds the dense factorization budget");
    if (pat.size() <= pat.covariate_dim() + 1) throw DataError("mle_fit: too few points");
    detail::MleWork work(pat, nu_fixed);

    // median pairwise distance anchors the range starts
    double med;
    {
        const std::size_t n = pat.size();
        std::vector<double> ds;
        ds.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) ds.push_back(work.dist(i, j));
        auto mid = ds.begin() + ds.size() / 2;
        std::nth_element(ds.begin(), mid, ds.end());
        med = *mid;
    }

    auto objective = [&](const std::vector<double>& u) {
        double phi = std::exp(u[0]);
        double prop = 1.0 / (1.0 + std::exp(-u[1]));
        prop = std::min(std::max(prop, 1e-8), 1.0 - 1e-8);
        return work.neg_loglik(phi, prop);
    };

    std::vector<std::vector<double>> starts{
        {std::log(0.5 * med), std::log(0.1 / 0.9)},
        {std::log(0.25 * med), std::log(0.5 / 0.5)},
        {std::log(med), std::log(0.1 / 0.9)},
    };
    if (init) {
        double om = init->sigma_y2 + init->sigma_e2;
        double pr = std::min(std::max(init->sigma_e2 / om, 1e-6), 1.0 - 1e-6);
        starts.push_back({std::log(init->phi_y), std::log(pr / (1.0 - pr))});
    }

    NelderMeadResult best;
    best.fx = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        auto run = nelder_mead(objective, s, 0.4, 1e-8, 2000);
        if (run.fx < best.fx) best = run;
    }

    double phi = std::exp(best.x[0]);
    double prop = 1.0 / (1.0 + std::exp(-best.x[1]));
    Eigen::VectorXd beta;
    double omega;
    Eigen::MatrixXd beta_cov;
    double nll = work.neg_loglik(phi, prop, &beta, &omega, &beta_cov);

    MleResult res;
    res.beta.assign(beta.data(), beta.data() + beta.size());
    res.theta = {omega * (1.0 - prop), phi, omega * prop};
    res.loglik = -nll;
    res.converged = best.converged;
    res.iterations = best.iterations;
    res.beta_cov = beta_cov;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace prefgeo
