#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "prefgeo/bessel.hpp"
#include "prefgeo/errors.hpp"

namespace prefgeo {

// ---------------------------------------------------------------------------
// Parameter bundles

struct MaternParams {
    double sigma2 = 1.0;  // marginal variance
    double phi = 0.1;     // range
    double nu = 0.5;      // smoothness

    void validate() const {
        if (!(sigma2 > 0.0)) throw DataError("MaternParams: sigma2 > 0 required");
        if (!(phi > 0.0)) throw DataError("MaternParams: phi > 0 required");
        if (!(nu > 0.0)) throw DataError("MaternParams: nu > 0 required");
    }
};

// Cross-covariance family; the cross-sill may be negative.
struct CrossCovParams {
    double sigma_xy2 = 0.0;
    double phi = 0.1;
    double nu = 0.5;

    void validate() const {
        if (!(phi > 0.0)) throw DataError("CrossCovParams: phi > 0 required");
        if (!(nu > 0.0)) throw DataError("CrossCovParams: nu > 0 required");
    }
};

// Parameters of the parametric semivariogram zeta(r) =
// sigma_e2 + sigma_y2 * [1 - rho_nu(r; phi_y)]; the smoothness is a fixed
// model input carried separately (never estimated).
struct SemivariogramParams {
    double sigma_y2 = 1.0;  // partial sill
    double phi_y = 0.1;     // range
    double sigma_e2 = 0.0;  // nugget

    void validate() const {
        if (!(sigma_y2 > 0.0)) throw DataError("SemivariogramParams: sigma_y2 > 0 required");
        if (!(phi_y > 0.0)) throw DataError("SemivariogramParams: phi_y > 0 required");
        if (sigma_e2 < 0.0) throw DataError("SemivariogramParams: sigma_e2 >= 0 required");
    }

    double sill() const { return sigma_y2 + sigma_e2; }
};

// ---------------------------------------------------------------------------
// Matern correlation, exact path

namespace detail {

// d rho / dx where rho(x) = 2^{1-nu}/Gamma(nu) x^nu K_nu(x):
// rho'(x) = -2^{1-nu}/Gamma(nu) x^nu K_{nu-1}(x).
inline double matern_rho_exact(double x, double nu, double* drho_dx = nullptr) {
    if (x <= 0.0) {
        if (drho_dx) *drho_dx = 0.0;
        return 1.0;
    }
    if (x > 705.0) {  // exp(-x) underflow territory for every order used here
        if (drho_dx) *drho_dx = 0.0;
        return 0.0;
    }
    const double c = std::pow(2.0, 1.0 - nu) / std::tgamma(nu);
    const double xn = std::pow(x, nu);
    double knu = bessel_k(nu, x);
    double rho = c * xn * knu;
    if (drho_dx) {
        double order = std::abs(nu - 1.0);  // K_{-a} = K_a
        double km1 = order == 0.0 ? detail::bessel_k_quadrature(0.0, x) : bessel_k(order, x);
        *drho_dx = -c * xn * km1;
    }
    return rho;
}

}  // namespace detail

// Matern correlation rho_nu(r; phi) with the sqrt(2 nu) r / phi argument.
inline double matern_corr(double r, double phi, double nu) {
    return detail::matern_rho_exact(std::sqrt(2.0 * nu) * r / phi, nu);
}

inline double matern_cov(double r, const MaternParams& p) {
    p.validate();
    if (r < 0.0) throw DataError("matern_cov: r >= 0 required");
    return p.sigma2 * matern_corr(r, p.phi, p.nu);
}

inline double cross_cov(double r, const CrossCovParams& p) {
    p.validate();
    return p.sigma_xy2 * matern_corr(r, p.phi, p.nu);
}

// ---------------------------------------------------------------------------
// Tabulated correlation for hot loops

// Cubic-Hermite table of rho_nu(x) on log-spaced nodes, built from the exact
// quadrature path. Node values and derivatives are exact, so interpolation
// error is O(dx^4) and stays below ~1e-11 over the covered range.
class MaternCorrTable {
  public:
    explicit MaternCorrTable(double nu, int nodes = 4096, double x_lo = 1e-8, double x_hi = 46.0)
        : nu_(nu), x_lo_(x_lo), x_hi_(x_hi) {
        log_lo_ = std::log(x_lo_);
        dlog_ = (std::log(x_hi_) - log_lo_) / (nodes - 1);
        x_.resize(nodes);
        rho_.resize(nodes);
        drho_.resize(nodes);
        for (int i = 0; i < nodes; ++i) {
            double x = std::exp(log_lo_ + i * dlog_);
            x_[i] = x;
            double d;
            rho_[i] = detail::matern_rho_exact(x, nu, &d);
            drho_[i] = d;
        }
    }

    double nu() const { return nu_; }

    double corr_x(double x, double* deriv = nullptr) const {
        if (x <= x_lo_) {
            if (deriv) *deriv = 0.0;
            return 1.0;
        }
        if (x >= x_hi_) {
            if (deriv) *deriv = 0.0;
            return 0.0;
        }
        double pos = (std::log(x) - log_lo_) / dlog_;
        auto k = static_cast<std::size_t>(pos);
        if (k >= x_.size() - 1) k = x_.size() - 2;
        double h = x_[k + 1] - x_[k];
        double t = (x - x_[k]) / h;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        double val = h00 * rho_[k] + h * h10 * drho_[k] + h01 * rho_[k + 1] + h * h11 * drho_[k + 1];
        if (deriv) {
            double g00 = (6 * t2 - 6 * t) / h, g10 = 3 * t2 - 4 * t + 1;
            double g01 = (-6 * t2 + 6 * t) / h, g11 = 3 * t2 - 2 * t;
            *deriv = g00 * rho_[k] + g10 * drho_[k] + g01 * rho_[k + 1] + g11 * drho_[k + 1];
        }
        return val;
    }

    static std::shared_ptr<const MaternCorrTable> shared(double nu) {
        static std::mutex mu;
        static std::map<std::int64_t, std::shared_ptr<const MaternCorrTable>> cache;
        auto key = static_cast<std::int64_t>(std::llround(nu * 1e9));
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto table = std::make_shared<const MaternCorrTable>(nu);
        cache.emplace(key, table);
        return table;
    }

  private:
    double nu_, x_lo_, x_hi_, log_lo_, dlog_;
    std::vector<double> x_, rho_, drho_;
};

// ---------------------------------------------------------------------------
// Semivariogram family with fixed smoothness

// zeta(r; theta) evaluator used throughout fitting, inference and the MLE.
// Half-integer smoothness uses closed forms; other orders share a per-nu
// correlation table. Gradients differentiate the same function object the
// objectives evaluate, so finite-difference checks see one consistent path.
class SemivariogramModel {
  public:
    explicit SemivariogramModel(double nu = 0.5) : nu_(nu) {
        if (!(nu > 0.0)) throw DataError("SemivariogramModel: nu > 0 required");
        if (same(nu, 0.5))
            form_ = Form::Exp;
        else if (same(nu, 1.5))
            form_ = Form::Matern32;
        else if (same(nu, 2.5))
            form_ = Form::Matern52;
        else {
            form_ = Form::Table;
            table_ = MaternCorrTable::shared(nu);
        }
        scale_ = std::sqrt(2.0 * nu);
    }

    double nu() const { return nu_; }

    // rho_nu(r; phi); optionally also d rho / d phi.
    double corr(double r, double phi, double* dphi = nullptr) const {
        double x = scale_ * r / phi;
        double rho, dx;
        switch (form_) {
            case Form::Exp: {
                double e = std::exp(-x);
                rho = e;
                dx = -e;
                break;
            }
            case Form::Matern32: {
                double e = std::exp(-x);
                rho = (1.0 + x) * e;
                dx = -x * e;
                break;
            }
            case Form::Matern52: {
                double e = std::exp(-x);
                rho = (1.0 + x + x * x / 3.0) * e;
                dx = -(x / 3.0) * (1.0 + x) * e;
                break;
            }
            case Form::Table:
            default:
                rho = table_->corr_x(x, dphi ? &dx : nullptr);
                if (!dphi) return rho;
                break;
        }
        if (dphi) *dphi = dx * (-x / phi);
        return rho;
    }

    double operator()(double r, const SemivariogramParams& t) const {
        return t.sigma_e2 + t.sigma_y2 * (1.0 - corr(r, t.phi_y));
    }

    // (d/d sigma_y2, d/d phi_y, d/d sigma_e2)
    std::array<double, 3> grad(double r, const SemivariogramParams& t) const {
        double dphi;
        double rho = corr(r, t.phi_y, &dphi);
        return {1.0 - rho, -t.sigma_y2 * dphi, 1.0};
    }

  private:
    enum class Form { Exp, Matern32, Matern52, Table };
    static bool same(double a, double b) { return std::abs(a - b) < 1e-12; }

    double nu_, scale_;
    Form form_;
    std::shared_ptr<const MaternCorrTable> table_;
};

// Exact-path convenience forms matching the estimator equations. The default
// smoothness is the exponential special case.
inline double semivariogram(double r, const SemivariogramParams& t, double nu = 0.5) {
    if (!(r > 0.0)) throw DataError("semivariogram: r > 0 required");
    double x = std::sqrt(2.0 * nu) * r / t.phi_y;
    return t.sigma_e2 + t.sigma_y2 * (1.0 - detail::matern_rho_exact(x, nu));
}

inline std::array<double, 3> semivariogram_grad(double r, const SemivariogramParams& t,
                                                double nu = 0.5) {
    if (!(r > 0.0)) throw DataError("semivariogram_grad: r > 0 required");
    double x = std::sqrt(2.0 * nu) * r / t.phi_y;
    double dx;
    double rho = detail::matern_rho_exact(x, nu, &dx);
    return {1.0 - rho, -t.sigma_y2 * dx * (-x / t.phi_y), 1.0};
}

}  // namespace prefgeo
