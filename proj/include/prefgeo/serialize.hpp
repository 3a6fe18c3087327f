#pragma once

#include <json.hpp>
#include <string>

#include "prefgeo/errors.hpp"
#include "prefgeo/fit.hpp"
#include "prefgeo/inference.hpp"
#include "prefgeo/mle.hpp"
#include "prefgeo/simulation.hpp"

namespace prefgeo {

// ---------------------------------------------------------------------------
// ScenarioConfig <-> JSON (the documented config-file schema)

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    try {
        cfg.scenario = j.value("scenario", 1);
        if (j.contains("window")) {
            const auto& w = j.at("window");
            cfg.window = {w.at("xmin").get<double>(), w.at("xmax").get<double>(),
                          w.at("ymin").get<double>(), w.at("ymax").get<double>()};
        }
        if (j.contains("beta")) cfg.beta = j.at("beta").get<std::vector<double>>();
        cfg.sigma_e2 = j.value("sigma_e2", cfg.sigma_e2);
        if (j.contains("y")) {
            const auto& y = j.at("y");
            cfg.y_params = {y.at("sigma2").get<double>(), y.at("phi").get<double>(),
                            y.at("nu").get<double>()};
        }
        cfg.gamma = j.value("gamma", cfg.gamma);
        if (j.contains("x")) {
            const auto& x = j.at("x");
            cfg.x_params = {x.at("sigma2").get<double>(), x.at("phi").get<double>(),
                            x.at("nu").get<double>()};
        }
        if (j.contains("xy")) {
            const auto& xy = j.at("xy");
            cfg.xy_params = {xy.at("sigma_xy2").get<double>(), xy.at("phi").get<double>(),
                             xy.at("nu").get<double>()};
        }
        cfg.target_intensity = j.value("target_intensity", cfg.target_intensity);
        cfg.resolution = j.value("resolution", cfg.resolution);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.max_points = j.value("max_points", cfg.max_points);
        std::string marks = j.value("marks", std::string("auto"));
        if (marks == "auto")
            cfg.mark_mode = MarkMode::Auto;
        else if (marks == "exact")
            cfg.mark_mode = MarkMode::ExactConditional;
        else if (marks == "bilinear")
            cfg.mark_mode = MarkMode::Bilinear;
        else
            throw DataError("config: marks must be auto|exact|bilinear");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["scenario"] = cfg.scenario;
    j["window"] = {{"xmin", cfg.window.xmin},
                   {"xmax", cfg.window.xmax},
                   {"ymin", cfg.window.ymin},
                   {"ymax", cfg.window.ymax}};
    j["beta"] = cfg.beta;
    j["sigma_e2"] = cfg.sigma_e2;
    j["y"] = {{"sigma2", cfg.y_params.sigma2}, {"phi", cfg.y_params.phi}, {"nu", cfg.y_params.nu}};
    j["gamma"] = cfg.gamma;
    if (cfg.scenario == 2) {
        j["x"] = {{"sigma2", cfg.x_params.sigma2},
                  {"phi", cfg.x_params.phi},
                  {"nu", cfg.x_params.nu}};
        j["xy"] = {{"sigma_xy2", cfg.xy_params.sigma_xy2},
                   {"phi", cfg.xy_params.phi},
                   {"nu", cfg.xy_params.nu}};
    }
    j["target_intensity"] = cfg.target_intensity;
    j["resolution"] = cfg.resolution;
    j["seed"] = cfg.seed;
    j["max_points"] = cfg.max_points;
    j["marks"] = cfg.mark_mode == MarkMode::Auto             ? "auto"
                 : cfg.mark_mode == MarkMode::ExactConditional ? "exact"
                                                               : "bilinear";
    return j;
}

// ---------------------------------------------------------------------------
// Fit records (shared schema for the parametric fits and the MLE)

inline nlohmann::json fit_record_json(const FitResult& r) {
    return {{"method", to_string(r.method)},
            {"theta",
             {{"sigma_y2", r.theta.sigma_y2},
              {"phi_y", r.theta.phi_y},
              {"sigma_e2", r.theta.sigma_e2}}},
            {"objective", r.objective},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"n_pairs", r.n_pairs_used},
            {"seconds", r.seconds}};
}

inline nlohmann::json fit_record_json(const MleResult& r) {
    return {{"method", "MLE"},
            {"theta",
             {{"sigma_y2", r.theta.sigma_y2},
              {"phi_y", r.theta.phi_y},
              {"sigma_e2", r.theta.sigma_e2}}},
            {"beta", r.beta},
            {"loglik", r.loglik},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"seconds", r.seconds}};
}

// Per-coefficient inference report.
inline nlohmann::json infer_report_json(const BetaEstimate& beta, const SandwichEstimate& sw,
                                        const std::vector<CoefInterval>& intervals) {
    nlohmann::json coefs = nlohmann::json::array();
    for (std::size_t a = 0; a < beta.beta_raw.size(); ++a) {
        coefs.push_back({{"index", a},
                         {"estimate_raw", beta.beta_raw[a]},
                         {"estimate_corrected", beta.beta_corrected[a]},
                         {"se", intervals[a].se},
                         {"ci_lo", intervals[a].lo},
                         {"ci_hi", intervals[a].hi}});
    }
    return {{"coefficients", coefs},
            {"cxy0_hat", beta.cxy0_hat},
            {"ci_level", sw.ci_level},
            {"psd_clipped", sw.psd_clipped},
            {"pairs_used", sw.pairs_used}};
}

}  // namespace prefgeo
