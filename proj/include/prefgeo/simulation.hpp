#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "prefgeo/covariance.hpp"
#include "prefgeo/errors.hpp"
#include "prefgeo/field_grid.hpp"
#include "prefgeo/point_pattern.hpp"
#include "prefgeo/rng.hpp"
#include "prefgeo/window.hpp"

namespace prefgeo {

// How the mark field is evaluated at sampled locations. ExactConditional
// draws Y at the points from its exact Gaussian law given the simulated grid
// layers; Bilinear interpolates the grid (cheap, slightly smooths the field
// at sub-cell scale). Auto picks ExactConditional when the conditioning
// solve is affordable.
enum class MarkMode { Auto, ExactConditional, Bilinear };

struct ScenarioConfig {
    int scenario = 1;
    Window window{0.0, 1.0, 0.0, 1.0};
    std::vector<double> beta{1.0, 1.0};  // intercept first; optional covariate slope
    double sigma_e2 = 0.1;
    MaternParams y_params{1.0, 0.05, 1.0};
    // scenario 1: X = gamma * Y
    double gamma = 1.0;
    // scenario 2: marginal X field and cross-covariance
    MaternParams x_params{1.8, 0.05, 0.5};
    CrossCovParams xy_params{1.0, 0.07, 0.75};
    double target_intensity = 400.0;  // expected points per unit area
    int resolution = 64;
    std::uint64_t seed = 1;
    MarkMode mark_mode = MarkMode::Auto;
    std::size_t max_points = 200000;

    double sigma_x2() const {
        return scenario == 1 ? gamma * gamma * y_params.sigma2 : x_params.sigma2;
    }

    void validate() const {
        window.validate();
        if (scenario != 1 && scenario != 2) throw DataError("ScenarioConfig: scenario must be 1 or 2");
        if (beta.empty() || beta.size() > 2)
            throw DataError("ScenarioConfig: beta must hold the intercept and at most one slope");
        if (sigma_e2 < 0.0) throw DataError("ScenarioConfig: sigma_e2 >= 0 required");
        if (!(target_intensity > 0.0)) throw DataError("ScenarioConfig: target intensity > 0 required");
        y_params.validate();
        if (scenario == 2) {
            x_params.validate();
            xy_params.validate();
        }
        if (resolution < 16) throw DataError("ScenarioConfig: resolution >= 16 required");
    }
};

// gamma0 such that E[exp(gamma0 + X)] matches the target density:
// rho = exp(gamma0 + sigma_X^2 / 2).
inline double calibrate_gamma0(const ScenarioConfig& cfg) {
    return std::log(cfg.target_intensity) - 0.5 * cfg.sigma_x2();
}

namespace detail {

// Correlation evaluator shared by grid builds and conditioning blocks;
// closed forms where available, otherwise the per-nu table.
class CorrFn {
  public:
    explicit CorrFn(double nu) : nu_(nu) {
        if (std::abs(nu - 0.5) < 1e-12)
            form_ = 1;
        else if (std::abs(nu - 1.5) < 1e-12)
            form_ = 2;
        else {
            form_ = 0;
            table_ = MaternCorrTable::shared(nu);
        }
        scale_ = std::sqrt(2.0 * nu);
    }

    double operator()(double r, double phi) const {
        double x = scale_ * r / phi;
        switch (form_) {
            case 1: return std::exp(-x);
            case 2: return (1.0 + x) * std::exp(-x);
            default: return table_->corr_x(x);
        }
    }

  private:
    double nu_, scale_;
    int form_;
    std::shared_ptr<const MaternCorrTable> table_;
};

}  // namespace detail

// Fixed covariate surface: one zero-mean unit-variance realization with
// covariance exp(-10 r), reusable across replicates.
FieldGrid simulate_covariate(const Window& window, int resolution, std::uint64_t seed);

// Locations of an LGCP with intensity exp(gamma0 + X): per-cell Poisson
// counts at the cell-center intensity, uniform placement within the cell.
std::vector<std::pair<double, double>> sample_lgcp(const FieldGrid& fields, double gamma0,
                                                   Rng& rng, std::size_t max_points = 200000);

// Marks by bilinear interpolation of the grid layers:
// Z = beta' w + Y + e with w = (1, covariate).
PointPattern attach_marks(const std::vector<std::pair<double, double>>& locations,
                          const FieldGrid& fields, const std::vector<double>& beta,
                          double sigma_e2, std::uint64_t seed);

// Generates replicates for one scenario configuration, caching the grid
// covariance factor and the fixed covariate across replicates.
class FieldSimulator {
  public:
    explicit FieldSimulator(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        grid_ = FieldGrid::make(cfg_.window, cfg_.resolution);
        gamma0_ = calibrate_gamma0(cfg_);
        const std::size_t m = grid_.cells();
        cx_.resize(m);
        cy_.resize(m);
        for (int j = 0; j < grid_.ny; ++j)
            for (int i = 0; i < grid_.nx; ++i) {
                cx_[static_cast<std::size_t>(j) * grid_.nx + i] = grid_.center_x(i);
                cy_[static_cast<std::size_t>(j) * grid_.nx + i] = grid_.center_y(j);
            }
        build_factor();
        if (cfg_.beta.size() > 1) {
            covariate_ = simulate_covariate(cfg_.window, cfg_.resolution, cfg_.seed);
        }
    }

    const ScenarioConfig& config() const { return cfg_; }
    double gamma0() const { return gamma0_; }
    double jitter_used() const { return jitter_used_; }
    const FieldGrid& covariate_grid() const { return covariate_; }

    MarkMode effective_mark_mode(std::size_t n_points) const {
        if (cfg_.mark_mode != MarkMode::Auto) return cfg_.mark_mode;
        double dim = static_cast<double>(L_.rows());
        double cost = dim * dim * static_cast<double>(n_points);
        return cost <= 5e10 ? MarkMode::ExactConditional : MarkMode::Bilinear;
    }

    // Grid realizations of (X, Y) for one replicate; scenario 1 returns
    // X = gamma * Y exactly.
    FieldGrid simulate_joint_fields(std::uint64_t replicate) const {
        Eigen::VectorXd z;
        return fields_with_z(replicate, z);
    }

    PointPattern generate(std::uint64_t replicate) const {
        Eigen::VectorXd z;
        FieldGrid fields = fields_with_z(replicate, z);

        Rng prng = Rng::stream(cfg_.seed, replicate, Stream::Points);
        auto locations = sample_lgcp(fields, gamma0_, prng, cfg_.max_points);
        const std::size_t n = locations.size();

        std::vector<double> marks_y;
        if (effective_mark_mode(n) == MarkMode::ExactConditional && n > 0)
            marks_y = conditional_marks(fields, locations, z, replicate);
        else {
            marks_y.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                marks_y[i] = fields.bilinear(fields.y_field, locations[i].first,
                                             locations[i].second);
        }

        Rng nrng = Rng::stream(cfg_.seed, replicate, Stream::Nugget);
        double sde = std::sqrt(cfg_.sigma_e2);
        PointPattern pat;
        pat.window = cfg_.window;
        pat.p = cfg_.beta.size();
        for (std::size_t i = 0; i < n; ++i) {
            auto [px, py] = locations[i];
            std::vector<double> wv{1.0};
            double mean = cfg_.beta[0];
            if (cfg_.beta.size() > 1) {
                double wval = covariate_.bilinear(covariate_.covariate, px, py);
                wv.push_back(wval);
                mean += cfg_.beta[1] * wval;
            }
            double zval = mean + marks_y[i] + sde * nrng.normal();
            pat.add_point(px, py, zval, wv);
        }
        return pat;
    }

  private:
    FieldGrid fields_with_z(std::uint64_t replicate, Eigen::VectorXd& z_out) const {
        const std::size_t m = grid_.cells();
        const auto dim = static_cast<std::size_t>(L_.rows());
        Rng rng = Rng::stream(cfg_.seed, replicate, Stream::Fields);
        Eigen::VectorXd z(dim);
        for (std::size_t i = 0; i < dim; ++i) z[i] = rng.normal();
        Eigen::VectorXd v = L_.triangularView<Eigen::Lower>() * z;

        FieldGrid fields = grid_;
        fields.x_field.resize(m);
        fields.y_field.resize(m);
        if (cfg_.scenario == 1) {
            for (std::size_t i = 0; i < m; ++i) {
                fields.y_field[i] = v[i];
                fields.x_field[i] = cfg_.gamma * v[i];
            }
        } else {
            for (std::size_t i = 0; i < m; ++i) {
                fields.x_field[i] = v[i];
                fields.y_field[i] = v[m + i];
            }
        }
        if (!covariate_.covariate.empty()) fields.covariate = covariate_.covariate;
        z_out = std::move(z);
        return fields;
    }

    // Exact conditional draw of Y at the points given the grid layers:
    // mean = U' z with U = L^{-1} C_{grid,pts}, residual covariance
    // C_pp - U'U.
    std::vector<double> conditional_marks(const FieldGrid& fields,
                                          const std::vector<std::pair<double, double>>& locs,
                                          const Eigen::VectorXd& z,
                                          std::uint64_t replicate) const {
        const std::size_t m = grid_.cells();
        const auto dim = static_cast<std::size_t>(L_.rows());
        const std::size_t n = locs.size();
        const double sy2 = cfg_.y_params.sigma2;

        detail::CorrFn corr_y(cfg_.y_params.nu);
        Eigen::MatrixXd cgp(dim, n);
        if (cfg_.scenario == 1) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < m; ++k) {
                    double d = std::hypot(cx_[k] - locs[i].first, cy_[k] - locs[i].second);
                    cgp(k, i) = sy2 * corr_y(d, cfg_.y_params.phi);
                }
        } else {
            detail::CorrFn corr_xy(cfg_.xy_params.nu);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < m; ++k) {
                    double d = std::hypot(cx_[k] - locs[i].first, cy_[k] - locs[i].second);
                    cgp(k, i) = cfg_.xy_params.sigma_xy2 * corr_xy(d, cfg_.xy_params.phi);
                    cgp(m + k, i) = sy2 * corr_y(d, cfg_.y_params.phi);
                }
        }

        L_.triangularView<Eigen::Lower>().solveInPlace(cgp);  // cgp <- U
        Eigen::VectorXd mean = cgp.transpose() * z;

        Eigen::MatrixXd resid_cov(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double d = std::hypot(locs[i].first - locs[j].first,
                                      locs[i].second - locs[j].second);
                resid_cov(i, j) = resid_cov(j, i) = sy2 * corr_y(d, cfg_.y_params.phi);
            }
        resid_cov.noalias() -= cgp.transpose() * cgp;

        double jitter = factor_with_jitter(resid_cov, sy2, "conditional mark covariance");
        (void)jitter;

        Rng rng = Rng::stream(cfg_.seed, replicate, Stream::Residual);
        Eigen::VectorXd eta(n);
        for (std::size_t i = 0; i < n; ++i) eta[i] = rng.normal();
        Eigen::VectorXd y = mean + resid_cov.triangularView<Eigen::Lower>() * eta;
        return {y.data(), y.data() + n};
    }

    // In-place LLT with jitter escalation; m holds L on return.
    static double factor_with_jitter(Eigen::MatrixXd& m, double scale, const char* what) {
        double jitter = 0.0;
        for (int attempt = 0; attempt <= 7; ++attempt) {
            Eigen::MatrixXd work = m;
            if (attempt > 0) {
                jitter = scale * std::pow(10.0, static_cast<double>(-13 + attempt));
                work.diagonal().array() += jitter;
            }
            Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work);
            if (llt.info() == Eigen::Success) {
                m = work;
                return jitter;
            }
        }
        throw NotPositiveDefinite(what, jitter);
    }

    void build_factor() {
        const std::size_t m = grid_.cells();
        detail::CorrFn corr_y(cfg_.y_params.nu);
        const double sy2 = cfg_.y_params.sigma2;
        if (cfg_.scenario == 1) {
            Eigen::MatrixXd cov(m, m);
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = a; b < m; ++b) {
                    double d = std::hypot(cx_[a] - cx_[b], cy_[a] - cy_[b]);
                    cov(a, b) = cov(b, a) = sy2 * corr_y(d, cfg_.y_params.phi);
                }
            jitter_used_ = factor_with_jitter(cov, sy2, "grid covariance");
            L_ = std::move(cov);
        } else {
            detail::CorrFn corr_x(cfg_.x_params.nu);
            detail::CorrFn corr_xy(cfg_.xy_params.nu);
            Eigen::MatrixXd cov(2 * m, 2 * m);
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = a; b < m; ++b) {
                    double d = std::hypot(cx_[a] - cx_[b], cy_[a] - cy_[b]);
                    double cxx = cfg_.x_params.sigma2 * corr_x(d, cfg_.x_params.phi);
                    double cyy = sy2 * corr_y(d, cfg_.y_params.phi);
                    double cxy = cfg_.xy_params.sigma_xy2 * corr_xy(d, cfg_.xy_params.phi);
                    cov(a, b) = cov(b, a) = cxx;
                    cov(m + a, m + b) = cov(m + b, m + a) = cyy;
                    cov(a, m + b) = cov(b, m + a) = cxy;
                    cov(a + m, b) = cov(b + m, a) = cxy;
                }
            jitter_used_ = factor_with_jitter(cov, std::max(cfg_.x_params.sigma2, sy2),
                                              "stacked bivariate grid covariance");
            L_ = std::move(cov);
        }
    }

    ScenarioConfig cfg_;
    FieldGrid grid_;
    FieldGrid covariate_;
    std::vector<double> cx_, cy_;
    Eigen::MatrixXd L_;
    double gamma0_ = 0.0;
    double jitter_used_ = 0.0;
};

inline FieldGrid simulate_covariate(const Window& window, int resolution, std::uint64_t seed) {
    FieldGrid g = FieldGrid::make(window, resolution);
    const std::size_t m = g.cells();
    std::vector<double> cx(m), cy(m);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cx[static_cast<std::size_t>(j) * g.nx + i] = g.center_x(i);
            cy[static_cast<std::size_t>(j) * g.nx + i] = g.center_y(j);
        }
    Eigen::MatrixXd cov(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            double d = std::hypot(cx[a] - cx[b], cy[a] - cy[b]);
            cov(a, b) = cov(b, a) = std::exp(-10.0 * d);
        }
    double jitter = 0.0;
    for (int attempt = 0;; ++attempt) {
        Eigen::MatrixXd work = cov;
        if (attempt > 0) {
            jitter = std::pow(10.0, static_cast<double>(-13 + attempt));
            work.diagonal().array() += jitter;
        }
        Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work);
        if (llt.info() == Eigen::Success) {
            cov = work;
            break;
        }
        if (attempt >= 7) throw NotPositiveDefinite("covariate grid covariance", jitter);
    }
    Rng rng = Rng::stream(seed, 0, Stream::Covariate);
    Eigen::VectorXd z(m);
    for (std::size_t i = 0; i < m; ++i) z[i] = rng.normal();
    Eigen::VectorXd v = cov.triangularView<Eigen::Lower>() * z;
    g.covariate.assign(v.data(), v.data() + m);
    return g;
}

inline std::vector<std::pair<double, double>> sample_lgcp(const FieldGrid& fields, double gamma0,
                                                          Rng& rng, std::size_t max_points) {
    if (fields.x_field.empty()) throw DataError("sample_lgcp: X layer missing");
    std::vector<std::pair<double, double>> pts;
    const double area = fields.cell_area();
    const double h = fields.cell_size();
    for (int j = 0; j < fields.ny; ++j)
        for (int i = 0; i < fields.nx; ++i) {
            double lam = std::exp(gamma0 + fields.x_field[static_cast<std::size_t>(j) * fields.nx + i]) * area;
            long count = rng.poisson(lam);
            if (pts.size() + static_cast<std::size_t>(count) > max_points)
                throw SimulationError("sample_lgcp: point cap exceeded (" +
                                      std::to_string(max_points) + ")");
            double x0 = fields.window.xmin + i * h;
            double y0 = fields.window.ymin + j * h;
            for (long k = 0; k < count; ++k) {
                double px = x0 + h * rng.uniform();
                double py = y0 + h * rng.uniform();
                pts.emplace_back(px, py);
            }
        }
    return pts;
}

inline PointPattern attach_marks(const std::vector<std::pair<double, double>>& locations,
                                 const FieldGrid& fields, const std::vector<double>& beta,
                                 double sigma_e2, std::uint64_t seed) {
    if (beta.empty() || beta.size() > 2)
        throw DataError("attach_marks: beta must hold the intercept and at most one slope");
    if (beta.size() > 1 && fields.covariate.empty())
        throw DataError("attach_marks: covariate layer missing");
    Rng rng = Rng::stream(seed, 0, Stream::Nugget);
    double sde = std::sqrt(sigma_e2);
    PointPattern pat;
    pat.window = fields.window;
    pat.p = beta.size();
    for (auto [px, py] : locations) {
        if (!fields.window.contains(px, py))
            throw DataError("attach_marks: location outside window");
        double yval = fields.y_field.empty() ? 0.0 : fields.bilinear(fields.y_field, px, py);
        std::vector<double> wv{1.0};
        double mean = beta[0];
        if (beta.size() > 1) {
            double wval = fields.bilinear(fields.covariate, px, py);
            wv.push_back(wval);
            mean += beta[1] * wval;
        }
        pat.add_point(px, py, mean + yval + sde * rng.normal(), wv);
    }
    return pat;
}

// One-shot variant of the cached simulator path.
inline FieldGrid simulate_joint_fields(const ScenarioConfig& cfg) {
    return FieldSimulator(cfg).simulate_joint_fields(0);
}

}  // namespace prefgeo
